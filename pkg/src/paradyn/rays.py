"""Dynamic rays of exponential maps and their symbolic dynamics.

Every supported map here has the form f(z) = A e^(mu z) + B, so inverse
branches are (Log((w - B)/A) + 2 pi i n) / mu indexed by an integer n. A ray
is traced by starting deep in the tract at a large potential and pulling
back along the branches an external address prescribes; each located point
is certified by re-deriving the address entries from its forward orbit.

The potential parametrization is pushed forward by F(t) = e^t - 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import gcd

from .errors import (
    DepthInsufficient,
    NonAdmissible,
    OrbitHitsPartitionBoundary,
)
from .maps import (
    FAM_EXP_AFFINE,
    FAM_EXP_KAPPA,
    FAM_EXP_SHIFT,
    EntireMap,
)

ADDRESS_BOUND_DEFAULT = 10
DEPTH_DEFAULT = 50
CERT_DEPTH_DEFAULT = 20
_LOG_CAP = 700.0  # largest potential representable after one more exp


def exp_form(fmap: EntireMap) -> tuple[complex, complex, complex]:
    """(A, mu, B) with f(z) = A e^(mu z) + B; NonAdmissible otherwise."""
    mu = complex(fmap.scale)
    if fmap.fam == FAM_EXP_AFFINE:
        return complex(fmap.param), mu, 0j
    if fmap.fam == FAM_EXP_KAPPA:
        return 1 + 0j, mu, complex(fmap.param)
    if fmap.fam == FAM_EXP_SHIFT:
        return cmath.exp(-1), mu, 0j
    raise NonAdmissible("ray tracing supports only the exponential families")


def potential_forward(t: float) -> float:
    return math.expm1(t)


def _minimal_period(tail: tuple) -> tuple:
    n = len(tail)
    for d in range(1, n + 1):
        if n % d == 0 and tail == tail[:d] * (n // d):
            return tail[:d]
    return tail


@dataclass(frozen=True)
class ExternalAddress:
    """Eventually periodic integer sequence: finite prefix then a repeating
    tail (stored with minimal period)."""

    prefix: tuple
    tail: tuple
    bound: int = ADDRESS_BOUND_DEFAULT

    def __post_init__(self):
        if not self.tail:
            raise NonAdmissible("address needs a nonempty periodic tail")
        if any(abs(e) > self.bound for e in self.prefix + self.tail):
            raise NonAdmissible(f"address entry exceeds the bound {self.bound}")
        object.__setattr__(self, "tail", _minimal_period(tuple(self.tail)))
        object.__setattr__(self, "prefix", tuple(self.prefix))

    @property
    def kind(self) -> str:
        return "periodic" if not self.prefix else "bounded"

    def entry(self, i: int) -> int:
        """i-th entry, 1-based."""
        if i < 1:
            raise IndexError("address entries are 1-based")
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        return self.tail[(i - 1 - len(self.prefix)) % len(self.tail)]

    def shifted(self) -> "ExternalAddress":
        if self.prefix:
            return ExternalAddress(self.prefix[1:], self.tail, self.bound)
        return ExternalAddress((), self.tail[1:] + self.tail[:1], self.bound)

    def _horizon(self, other: "ExternalAddress") -> int:
        pre = max(len(self.prefix), len(other.prefix))
        per = self.tail and other.tail
        lcm = len(self.tail) * len(other.tail) // gcd(len(self.tail), len(other.tail))
        return pre + lcm

    def compare(self, other: "ExternalAddress") -> int:
        for i in range(1, self._horizon(other) + 1):
            a, b = self.entry(i), other.entry(i)
            if a != b:
                return -1 if a < b else 1
        return 0

    def __lt__(self, other):
        return self.compare(other) < 0

    def __str__(self):
        head = " ".join(map(str, self.prefix))
        return f"{head} [{' '.join(map(str, self.tail))}]".strip()


@dataclass(frozen=True)
class RayPoint:
    address: ExternalAddress
    potential: float
    location: complex


def _pull_back(A: complex, mu: complex, B: complex, w: complex, n: int) -> complex:
    return (cmath.log((w - B) / A) + 2j * math.pi * n) / mu


def _branch_index(A: complex, mu: complex, B: complex, z: complex, fz: complex) -> float:
    """Real-valued branch index of z as a preimage of fz; integer up to
    floating-point error."""
    return ((mu * z).imag - cmath.phase((fz - B) / A)) / (2 * math.pi)


def trace_ray(
    fmap: EntireMap,
    address: ExternalAddress,
    potential_grid,
    depth: int = DEPTH_DEFAULT,
    cert_depth: int = CERT_DEPTH_DEFAULT,
) -> list[RayPoint]:
    """Locate the ray of `address` at each potential by backward iteration.

    The start depth is capped where the pushed-forward potential would
    overflow; every located point is certified by re-deriving the first
    cert_depth address entries from its forward orbit (DepthInsufficient on
    mismatch)."""
    A, mu, B = exp_form(fmap)
    out = []
    for t in potential_grid:
        t = float(t)
        if t <= 0:
            raise NonAdmissible("potentials must be positive")
        # forward potentials until the cap; the start index is the depth
        pots = [t]
        while len(pots) <= depth and pots[-1] < _LOG_CAP:
            pots.append(potential_forward(pots[-1]))
        N = len(pots) - 1
        z = (pots[N] + 2j * math.pi * address.entry(N + 1) - cmath.log(A)) / mu
        for j in range(N, 0, -1):
            z = _pull_back(A, mu, B, z, address.entry(j))
        _certify(fmap, A, mu, B, z, address, cert_depth)
        out.append(RayPoint(address, t, z))
    return out


def _certify(fmap, A, mu, B, z, address, cert_depth):
    w = z
    for j in range(1, cert_depth + 1):
        try:
            fw = fmap(w)
        except OverflowError:
            break
        if abs(fw) > 1e100 or abs(fw - B) == 0:
            break
        k = _branch_index(A, mu, B, w, fw)
        if abs(k - round(k)) > 1e-6 or round(k) != address.entry(j):
            raise DepthInsufficient(
                f"forward orbit leaves the strip of entry {address.entry(j)} "
                f"at step {j} (index {k:.6f})"
            )
        w = fw


def itinerary(
    fmap: EntireMap,
    z: complex,
    partition_offset: float,
    depth: int,
    boundary_tol: float = 1e-9,
) -> list[int]:
    """Strip indices of the orbit of z under the horizontal partition
    {offset + (2n-1) pi < Im(mu z) < offset + (2n+1) pi}.

    The offset is supplied explicitly per map (the intermediate-address
    partitions are configured, never inferred)."""
    A, mu, B = exp_form(fmap)
    seq = []
    w = complex(z)
    for i in range(depth):
        y = (mu * w).imag - partition_offset
        if abs(y) > 1e12:
            break  # strip index no longer resolvable in double precision
        frac = (y + math.pi) / (2 * math.pi)
        if abs(frac - round(frac)) * 2 * math.pi < boundary_tol:
            raise OrbitHitsPartitionBoundary(
                f"orbit point {i} lies on a partition line", index=i
            )
        seq.append(math.floor(frac))
        try:
            w = fmap(w)
        except OverflowError:
            break
        if abs(w) > 1e100:
            break
    return seq
