"""Entire-map families: evaluation, derivatives, singular values, orbits,
and inverse-branch continuation along paths.

All supported maps have the form f(z) = base(scale * z), where `base` is one
of a fixed list of elementary families.  Every operation accepts scalars or
numpy arrays of complex.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchLost, SingularValueOnPath

OVERFLOW_MAG = 1e300

# family codes, shared with the render kernels
FAM_EXP_AFFINE = 0   # a * e^z
FAM_EXP_KAPPA = 1    # e^z + kappa
FAM_EXP_SHIFT = 2    # e^(z-1)
FAM_SINE = 3         # sin z
FAM_Z_EXP_Z = 4      # z * e^z
FAM_SINE_AFFINE = 5  # (sin(z+a) - sin a) / cos a

_FAMILY_NAMES = {
    FAM_EXP_AFFINE: "exp_affine",
    FAM_EXP_KAPPA: "exp_kappa",
    FAM_EXP_SHIFT: "exp_shift",
    FAM_SINE: "sine",
    FAM_Z_EXP_Z: "z_exp_z",
    FAM_SINE_AFFINE: "sine_affine",
}


@dataclass(frozen=True)
class OrbitSample:
    start: complex
    points: np.ndarray
    escaped: bool
    escape_index: int | None
    bailout_radius: float


@dataclass(frozen=True)
class BranchContinuation:
    target_path: np.ndarray
    preimage_path: np.ndarray
    max_newton_residual: float


@dataclass(frozen=True)
class EntireMap:
    """A member of one of the supported entire-map families.

    `fam` is the family code; `param` the family parameter (unused for
    exp_shift / sine / z_exp_z); `scale` the pre-composition factor, so
    rescaling by lambda just multiplies `scale`.
    """

    fam: int
    param: complex = 0j
    scale: complex = field(default=1 + 0j)

    # -- constructors -------------------------------------------------

    @classmethod
    def exp_affine(cls, a: complex) -> "EntireMap":
        return cls(FAM_EXP_AFFINE, complex(a))

    @classmethod
    def exp_kappa(cls, kappa: complex) -> "EntireMap":
        return cls(FAM_EXP_KAPPA, complex(kappa))

    @classmethod
    def exp_shift(cls) -> "EntireMap":
        return cls(FAM_EXP_SHIFT)

    @classmethod
    def sine(cls) -> "EntireMap":
        return cls(FAM_SINE)

    @classmethod
    def z_exp_z(cls) -> "EntireMap":
        return cls(FAM_Z_EXP_Z)

    @classmethod
    def sine_affine(cls, a: float) -> "EntireMap":
        return cls(FAM_SINE_AFFINE, complex(a))

    @classmethod
    def rescaled(cls, base: "EntireMap", lam: complex) -> "EntireMap":
        # rescaled(rescaled(f, l1), l2) flattens to scale = l1*l2
        return cls(base.fam, base.param, base.scale * complex(lam))

    @property
    def family(self) -> str:
        return _FAMILY_NAMES[self.fam]

    # -- evaluation ---------------------------------------------------

    def __call__(self, z):
        u = self.scale * np.asarray(z) if isinstance(z, np.ndarray) else self.scale * z
        fam, a = self.fam, self.param
        if fam == FAM_EXP_AFFINE:
            return a * np.exp(u) if isinstance(u, np.ndarray) else a * cmath.exp(u)
        if fam == FAM_EXP_KAPPA:
            return (np.exp(u) if isinstance(u, np.ndarray) else cmath.exp(u)) + a
        if fam == FAM_EXP_SHIFT:
            return np.exp(u - 1) if isinstance(u, np.ndarray) else cmath.exp(u - 1)
        if fam == FAM_SINE:
            return np.sin(u) if isinstance(u, np.ndarray) else cmath.sin(u)
        if fam == FAM_Z_EXP_Z:
            return u * (np.exp(u) if isinstance(u, np.ndarray) else cmath.exp(u))
        if fam == FAM_SINE_AFFINE:
            sa, ca = cmath.sin(a), cmath.cos(a)
            s = np.sin(u + a) if isinstance(u, np.ndarray) else cmath.sin(u + a)
            return (s - sa) / ca
        raise ValueError(f"unknown family code {fam}")

    def derivative(self, z):
        u = self.scale * np.asarray(z) if isinstance(z, np.ndarray) else self.scale * z
        fam, a, s = self.fam, self.param, self.scale
        arr = isinstance(u, np.ndarray)
        if fam == FAM_EXP_AFFINE:
            d = a * (np.exp(u) if arr else cmath.exp(u))
        elif fam == FAM_EXP_KAPPA:
            d = np.exp(u) if arr else cmath.exp(u)
        elif fam == FAM_EXP_SHIFT:
            d = np.exp(u - 1) if arr else cmath.exp(u - 1)
        elif fam == FAM_SINE:
            d = np.cos(u) if arr else cmath.cos(u)
        elif fam == FAM_Z_EXP_Z:
            d = (1 + u) * (np.exp(u) if arr else cmath.exp(u))
        elif fam == FAM_SINE_AFFINE:
            d = (np.cos(u + a) if arr else cmath.cos(u + a)) / cmath.cos(a)
        else:
            raise ValueError(f"unknown family code {fam}")
        return s * d

    def taylor_coefficient(self, zeta: complex, k: int) -> complex:
        """k-th Taylor coefficient of f at zeta (exact per-family series)."""
        u = self.scale * zeta
        fam, a, s = self.fam, self.param, self.scale
        if fam == FAM_EXP_AFFINE:
            dk = a * cmath.exp(u)
        elif fam == FAM_EXP_KAPPA:
            dk = cmath.exp(u) + (a if k == 0 else 0)
        elif fam == FAM_EXP_SHIFT:
            dk = cmath.exp(u - 1)
        elif fam == FAM_SINE:
            dk = [cmath.sin(u), cmath.cos(u), -cmath.sin(u), -cmath.cos(u)][k % 4]
        elif fam == FAM_Z_EXP_Z:
            dk = (u + k) * cmath.exp(u)
        elif fam == FAM_SINE_AFFINE:
            v = u + a
            dk = [cmath.sin(v), cmath.cos(v), -cmath.sin(v), -cmath.cos(v)][k % 4]
            dk /= cmath.cos(a)
        else:
            raise ValueError(f"unknown family code {fam}")
        return dk * s**k / math.factorial(k)

    # -- singular structure -------------------------------------------

    def singular_values(self) -> list[tuple[str, complex]]:
        """Complete finite list of (kind, value); kind in {critical, asymptotic}.

        Rescaling does not change singular values.
        """
        fam, a = self.fam, self.param
        if fam == FAM_EXP_AFFINE:
            return [("asymptotic", 0j)]
        if fam == FAM_EXP_KAPPA:
            return [("asymptotic", a)]
        if fam == FAM_EXP_SHIFT:
            return [("asymptotic", 0j)]
        if fam == FAM_SINE:
            return [("critical", 1 + 0j), ("critical", -1 + 0j)]
        if fam == FAM_Z_EXP_Z:
            return [("asymptotic", 0j), ("critical", complex(-1 / math.e))]
        if fam == FAM_SINE_AFFINE:
            sa, ca = cmath.sin(a), cmath.cos(a)
            return [("critical", (1 - sa) / ca), ("critical", (-1 - sa) / ca)]
        raise ValueError(f"unknown family code {fam}")

    # -- orbits --------------------------------------------------------

    def iterate(self, z: complex, n: int, bailout: float) -> OrbitSample:
        """Orbit z, f(z), ..., truncated at escape or after n steps.

        Magnitudes above OVERFLOW_MAG count as escape at that index, never as
        an arithmetic error.
        """
        if n < 0 or bailout <= 0:
            raise ValueError("need n >= 0 and bailout > 0")
        pts = [complex(z)]
        escaped = abs(z) > bailout
        idx = 0 if escaped else None
        w = complex(z)
        if not escaped:
            for j in range(1, n + 1):
                w = self(w)
                if not (abs(w.real) < OVERFLOW_MAG and abs(w.imag) < OVERFLOW_MAG):
                    w = complex(OVERFLOW_MAG, 0) if w.real > 0 else complex(-OVERFLOW_MAG, 0)
                    pts.append(w)
                    escaped, idx = True, j
                    break
                pts.append(w)
                if abs(w) > bailout:
                    escaped, idx = True, j
                    break
        return OrbitSample(complex(z), np.array(pts, dtype=complex), escaped, idx, bailout)


# ---------------------------------------------------------------------
# inverse-branch continuation


def _winding_number(path: np.ndarray, s: complex) -> float:
    d = np.angle((path[1:] - s) / (path[:-1] - s))
    return float(np.sum(d) / (2 * math.pi))


def continue_branch(
    fmap: EntireMap,
    path,
    z_start: complex,
    clearance: float = 1e-6,
    newton_tol: float = 1e-12,
    max_refine: int = 20,
) -> BranchContinuation:
    """Lift a target path w(t) through f by Newton continuation.

    The preimage path z(t) satisfies f(z(t)) = w(t) with z(0) = z_start.
    Each target step is kept below a quarter of the distance to the nearest
    singular value; on Newton failure the step is bisected, up to
    `max_refine` times, before BranchLost is raised.
    """
    w_path = np.asarray(path, dtype=complex)
    if w_path.ndim != 1 or len(w_path) < 1:
        raise ValueError("path must be a 1-d sequence of complex samples")
    svals = np.array([v for _, v in fmap.singular_values()], dtype=complex)

    if abs(fmap(z_start) - w_path[0]) > 1e-10:
        raise ValueError("f(z_start) does not match the path start")
    sv_dist = np.min(np.abs(w_path[:, None] - svals[None, :]), axis=1)
    if np.any(sv_dist < clearance):
        raise SingularValueOnPath(
            f"path approaches a singular value closer than {clearance}"
        )
    # a closed loop with nonzero winding around a singular value has no
    # well-defined single-branch lift
    if len(w_path) > 2 and abs(w_path[-1] - w_path[0]) < 1e-12:
        for s in svals:
            if abs(_winding_number(w_path, s)) > 0.5:
                raise SingularValueOnPath("closed path winds around a singular value")

    def newton(w: complex, seed: complex) -> complex | None:
        z = seed
        for _ in range(30):
            fz = fmap(z)
            r = fz - w
            if abs(r) < newton_tol * max(1.0, abs(w)):
                return z
            dz = fmap.derivative(z)
            if dz == 0:
                return None
            step = r / dz
            # damp absurd steps (far-from-quadratic regime)
            if abs(step) > 10 * (1 + abs(z)):
                step *= 10 * (1 + abs(z)) / abs(step)
            z = z - step
        fz = fmap(z)
        if abs(fz - w) < newton_tol * max(1.0, abs(w)):
            return z
        return None

    zs = [complex(z_start)]
    ws = [complex(w_path[0])]
    max_res = abs(fmap(z_start) - w_path[0])
    for i in range(1, len(w_path)):
        # work queue of targets from current position to w_path[i]
        pending = [complex(w_path[i])]
        refines = 0
        while pending:
            w_next = pending[-1]
            w_cur = ws[-1]
            d_sv = float(np.min(np.abs(w_cur - svals)))
            if abs(w_next - w_cur) > 0.25 * d_sv:
                pending.append(0.5 * (w_cur + w_next))
                refines += 1
                if refines > 40 * max_refine:
                    raise BranchLost("step bound unattainable near singular value")
                continue
            z_next = newton(w_next, zs[-1])
            if z_next is None:
                refines += 1
                if refines > max_refine:
                    raise BranchLost(
                        f"Newton diverged after {max_refine} refinements at t-index {i}"
                    )
                pending.append(0.5 * (w_cur + w_next))
                continue
            pending.pop()
            zs.append(z_next)
            ws.append(w_next)
            max_res = max(max_res, abs(fmap(z_next) - w_next))
    return BranchContinuation(np.array(ws), np.array(zs), max_res)
