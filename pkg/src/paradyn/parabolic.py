"""Local theory at multiple fixed points: germs, sectors, Fatou coordinates,
and cascade derivative estimates.

A germ records the fixed point zeta, the multiplicity p+1, and the leading
coefficient a of f(zeta + u) - zeta = u + a u^(p+1) + ...  All sector and
cascade computations work in zeta-centered coordinates.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    BoundViolated,
    DegenerateSeries,
    InequalityViolated,
    NoConvergence,
    NotParabolic,
    OrbitLeftSector,
    OutOfChart,
)
from .maps import EntireMap

_PROBE_ORDER = 9
_GOLDEN = 0.6180339887498949


@dataclass(frozen=True)
class ParabolicGerm:
    zeta: complex
    p: int
    a: complex
    attracting_vectors: tuple
    repelling_vectors: tuple

    @property
    def vector_modulus(self) -> float:
        return (self.p * abs(self.a)) ** (-1.0 / self.p)


@dataclass(frozen=True)
class SectorSpec:
    """Angular sector A_v(alpha, r0) anchored at a germ's fixed point."""

    germ: ParabolicGerm
    vector: complex
    alpha: float
    r0: float
    kind: str  # attracting | repelling | thin_repelling

    def __post_init__(self):
        if self.kind == "thin_repelling":
            want = math.pi / (4 * self.germ.p)
            if abs(self.alpha - want) > 1e-12:
                raise ValueError("thin repelling sectors have alpha = pi/(4p)")

    def contains(self, z):
        u = np.asarray(z) - self.germ.zeta
        rel = np.angle(u / self.vector)
        return (np.abs(rel) < self.alpha / 2) & (np.abs(u) < self.r0) & (np.abs(u) > 0)


def thin_repelling_sectors(germ: ParabolicGerm, r0: float) -> list[SectorSpec]:
    alpha = math.pi / (4 * germ.p)
    return [
        SectorSpec(germ, v, alpha, r0, "thin_repelling") for v in germ.repelling_vectors
    ]


# ---------------------------------------------------------------------
# germ fitting


def _roots_of(value: complex, p: int) -> tuple:
    r = abs(value) ** (1.0 / p)
    phi = cmath.phase(value) / p
    return tuple(
        r * cmath.exp(1j * (phi + 2 * math.pi * k / p)) for k in range(p)
    )


def fit_germ(fmap: EntireMap, zeta: complex, tol: float = 1e-10) -> ParabolicGerm:
    """Recover (p, a) and the attracting/repelling vectors at a multiple
    fixed point, from the family's exact Taylor coefficients."""
    zeta = complex(zeta)
    if abs(fmap(zeta) - zeta) > tol:
        raise NotParabolic(f"{zeta} is not fixed (|f(z)-z| = {abs(fmap(zeta)-zeta):.2e})")
    if abs(fmap.derivative(zeta) - 1) > tol:
        raise NotParabolic(
            f"multiplier at {zeta} is {fmap.derivative(zeta)}, not 1"
        )
    for k in range(2, _PROBE_ORDER + 1):
        c = fmap.taylor_coefficient(zeta, k)
        if abs(c) > 1e-12:
            p = k - 1
            a = c
            rep = _roots_of(1.0 / (p * a), p)
            att = _roots_of(-1.0 / (p * a), p)
            return ParabolicGerm(zeta, p, a, att, rep)
    raise DegenerateSeries(
        f"all Taylor coefficients up to order {_PROBE_ORDER} vanish at {zeta}"
    )


def fit_germ_numeric(fmap: EntireMap, zeta: complex, radius: float = 1e-2,
                     n_points: int = 64) -> tuple[int, complex]:
    """Cross-check for fit_germ: Taylor coefficients by Cauchy integrals on a
    small circle (FFT), returning (p, a)."""
    th = 2 * math.pi * np.arange(n_points) / n_points
    circle = zeta + radius * np.exp(1j * th)
    vals = fmap(circle) - zeta
    coeffs = np.fft.fft(vals) / n_points / radius ** np.arange(n_points)
    for k in range(2, _PROBE_ORDER + 1):
        if abs(coeffs[k]) > 1e-8:
            return k - 1, complex(coeffs[k])
    raise DegenerateSeries("no nonzero coefficient found by circle fitting")


# ---------------------------------------------------------------------
# sampling helpers


def sector_samples(sector: SectorSpec, n: int, r_inner_frac: float = 1e-4):
    """Deterministic low-discrepancy samples in a sector, stratified in
    log-radius x angle with golden-ratio offsets to cover the cusp at zeta."""
    n_r = max(2, int(math.sqrt(n)))
    n_t = max(2, (n + n_r - 1) // n_r)
    i = np.arange(n_r)[:, None]
    j = np.arange(n_t)[None, :]
    fr = ((i + 0.5) + _GOLDEN * j) / n_r % 1.0
    ft = (j + 0.5) / n_t
    log_lo = math.log(sector.r0 * r_inner_frac)
    log_hi = math.log(sector.r0 * (1 - 1e-9))
    rho = np.exp(log_lo + (log_hi - log_lo) * fr)
    ang = (ft - 0.5) * sector.alpha * (1 - 1e-9)
    u = rho * np.exp(1j * (ang + np.angle(sector.vector)))
    return (sector.germ.zeta + u).ravel()[:n]


# ---------------------------------------------------------------------
# thin-sector inequalities and the validated radius


def thin_sector_inequalities(
    fmap: EntireMap,
    germ: ParabolicGerm,
    r0: float,
    samples: int = 10_000,
    raise_on_fail: bool = True,
) -> dict:
    """Sampled check of the two repelling-sector inequalities
    |f(z)-zeta| > |z-zeta| and |f'(z)| > |f(z)-zeta|/|z-zeta| > 1,
    plus the sector-trapping claim, on every thin repelling sector."""
    zeta = germ.zeta
    report = {"r0": r0, "samples": samples, "sectors": [], "passed": True}
    sectors = thin_repelling_sectors(germ, r0)
    for sec in sectors:
        z = sector_samples(sec, samples)
        u = z - zeta
        fu = fmap(z) - zeta
        dz = np.abs(fmap.derivative(z))
        q = np.abs(fu) / np.abs(u)
        ok_grow = np.abs(fu) > np.abs(u)
        ok_deriv = (dz > q) & (q > 1)
        ok = ok_grow & ok_deriv
        # trapping: if f(z) lands in some thin sector of radius r0, it is
        # the same sector
        in_any = np.zeros(len(z), dtype=bool)
        in_same = sec.contains(zeta + fu)
        for other in sectors:
            in_any |= other.contains(zeta + fu)
        trap_ok = ~in_any | in_same
        entry = {
            "vector": complex(sec.vector),
            "min_growth_margin": float(np.min(np.abs(fu) - np.abs(u))),
            "min_growth_ratio": float(np.min(q)),
            "min_deriv_margin": float(np.min(dz - q)),
            "violations": int(np.sum(~ok)),
            "trap_violations": int(np.sum(~trap_ok)),
        }
        report["sectors"].append(entry)
        if entry["violations"] or entry["trap_violations"]:
            report["passed"] = False
            if raise_on_fail:
                bad = np.where(~(ok & trap_ok))[0][0]
                raise InequalityViolated(
                    f"sector inequality failed at z = {z[bad]} (r0 = {r0})",
                    witness=complex(z[bad]),
                )
    return report


@lru_cache(maxsize=None)
def _validated_radius_cached(fmap: EntireMap, zeta: complex) -> float:
    germ = fit_germ(fmap, zeta)
    return _validated_radius(fmap, germ)


def _validated_radius(fmap, germ, r_cap: float = 0.2, samples: int = 10_000) -> float:
    def passes(r):
        try:
            rep = thin_sector_inequalities(fmap, germ, r, samples, raise_on_fail=False)
        except (OverflowError, FloatingPointError):
            return False
        return rep["passed"]

    if passes(r_cap):
        return r_cap
    lo, hi = 0.0, r_cap
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if mid == 0.0:
            break
        if passes(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise InequalityViolated("no validated radius found below cap")
    return 0.95 * lo  # safety factor against bisection boundary noise


def validated_radius(fmap: EntireMap, germ: ParabolicGerm) -> float:
    """Largest r <= 0.2 (found by bisection, with a small safety factor) such
    that the thin-sector inequality suite passes at 1e4 samples."""
    return _validated_radius_cached(fmap, germ.zeta)


# ---------------------------------------------------------------------
# Fatou charts


@dataclass(frozen=True)
class FatouChart:
    """Fatou coordinate at infinity for one petal of a germ.

    In the coordinate w = kappa(z) = -1/(p a (z-zeta)^p), the map becomes
    G(w) = w + 1 + beta/w + ...  Repelling charts live in a sector around the
    negative real w-axis and are iterated by the inverse branch of G;
    attracting charts live around the positive axis and iterate G forward.
    Phi is normalised by its asymptotic expansion w - beta*log(|w| branch),
    so Phi(w) ~ w at infinity; convergence is certified only through the
    Abel residual.
    """

    germ: ParabolicGerm
    vector: complex
    kind: str  # "repelling" | "attracting"
    rho: float
    branch_shift: int
    beta: complex
    truncation_N: int = 20_000


def _kappa(germ: ParabolicGerm, z):
    u = np.asarray(z, dtype=complex) - germ.zeta
    return -1.0 / (germ.p * germ.a * u**germ.p)


def _kappa_inv(chart: FatouChart, w):
    germ = chart.germ
    # u^p = -1/(p a w); substitute xi = -/+ w so arg(xi) stays small on the
    # chart axis and the branch cut is kept away from the sector
    w = np.asarray(w, dtype=complex)
    xi = -w if chart.kind == "repelling" else w
    sgn = 1.0 if chart.kind == "repelling" else -1.0
    mag = np.abs(sgn / (germ.p * germ.a)) / np.abs(xi)
    arg = cmath.phase(sgn / (germ.p * germ.a)) - np.angle(xi)
    u = mag ** (1.0 / germ.p) * np.exp(
        1j * (arg + 2 * math.pi * chart.branch_shift) / germ.p
    )
    return germ.zeta + u


def _chart_G(fmap: EntireMap, chart: FatouChart, w):
    z = _kappa_inv(chart, w)
    return _kappa(chart.germ, fmap(z))


def _chart_G_prime(fmap: EntireMap, chart: FatouChart, w):
    germ = chart.germ
    z = _kappa_inv(chart, w)
    u = z - germ.zeta
    g = fmap(z) - germ.zeta
    kp_u = germ.p / (germ.p * germ.a * u ** (germ.p + 1))
    kp_g = germ.p / (germ.p * germ.a * g ** (germ.p + 1))
    return kp_g * fmap.derivative(z) / kp_u


def make_chart(
    fmap: EntireMap,
    germ: ParabolicGerm,
    vector: complex | None = None,
    kind: str = "repelling",
    r_chart: float | None = None,
) -> FatouChart:
    """Build the Fatou chart over the thin sector at `vector`."""
    if vector is None:
        vector = (germ.repelling_vectors if kind == "repelling" else germ.attracting_vectors)[0]
    if r_chart is None:
        r_chart = validated_radius(fmap, germ)
    rho = 1.0 / (germ.p * abs(germ.a) * r_chart**germ.p)
    # pick the p-th root branch that maps the chart axis back to `vector`
    base = FatouChart(germ, vector, kind, rho, 0, 0j)
    w_test = complex(-(rho + 3.0)) if kind == "repelling" else complex(rho + 3.0)
    best, best_err = 0, float("inf")
    for k in range(germ.p):
        cand = FatouChart(germ, vector, kind, rho, k, 0j)
        u = _kappa_inv(cand, w_test) - germ.zeta
        err = abs(np.angle(u / vector))
        if err < best_err:
            best, best_err = k, err
    # estimate beta = 1/w coefficient of G by Richardson on the chart axis
    chart0 = FatouChart(germ, vector, kind, rho, best, 0j)
    sign = -1.0 if kind == "repelling" else 1.0
    R = 1e4
    d1 = _chart_G(fmap, chart0, complex(sign * R)) - sign * R - 1
    d2 = _chart_G(fmap, chart0, complex(sign * 2 * R)) - sign * 2 * R - 1
    b1 = d1 * (sign * R)
    b2 = d2 * (sign * 2 * R)
    beta = 2 * b2 - b1
    # the Abel residual shrinks with truncation depth; 2000 gives ~5e-8 on
    # the example germs, comfortably inside the 1e-6 target
    return FatouChart(germ, vector, kind, rho, best, complex(beta), truncation_N=2000)


def in_chart(chart: FatouChart, w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    xi = -w if chart.kind == "repelling" else w
    # kappa maps the thin sector to |arg(xi)| < p * alpha / 2 = pi/8
    return (xi.real > 0) & (np.abs(np.angle(xi)) < math.pi / 8) & (np.abs(w) > chart.rho)


def _log_branch(chart: FatouChart, w):
    # log along the chart axis, cut on the opposite axis
    xi = -np.asarray(w, dtype=complex) if chart.kind == "repelling" else np.asarray(w, dtype=complex)
    return np.log(xi)


def fatou_coordinate(
    fmap: EntireMap,
    chart: FatouChart,
    w,
) -> np.ndarray | complex:
    """Fatou coordinate Phi on the chart; Phi(G(w)) = Phi(w) + 1.

    Phi is the N-th log-corrected partial sum with N = chart.truncation_N
    held fixed: attracting charts iterate G forward, repelling charts the
    Newton-inverted branch.  With a fixed N the Abel residual collapses to
    the increment between consecutive partial sums, of order N^-(1+1/p),
    so the residual can be driven down by raising truncation_N alone."""
    w_in = np.atleast_1d(np.asarray(w, dtype=complex))
    if not np.all(in_chart(chart, w_in)):
        raise OutOfChart("point outside the validated chart domain")
    beta = chart.beta
    sign = 1.0 if chart.kind == "attracting" else -1.0
    cur = w_in.copy()
    N = chart.truncation_N
    for n in range(1, N + 1):
        if chart.kind == "attracting":
            cur = _chart_G(fmap, chart, cur)
        else:
            # one Newton-inverted step of G, seeded at the asymptotic inverse
            nxt = cur - 1 - beta / cur
            for _ in range(8):
                r = _chart_G(fmap, chart, nxt) - cur
                nxt = nxt - r / _chart_G_prime(fmap, chart, nxt)
            r = np.abs(_chart_G(fmap, chart, nxt) - cur)
            if np.max(r / np.abs(cur)) > 1e-11:
                raise NoConvergence(f"inverse step of G stalled at depth {n}")
            cur = nxt
    phi = cur - sign * N - beta * _log_branch(chart, cur)
    return phi if np.ndim(w) else complex(phi[0])


def abel_residual(fmap: EntireMap, chart: FatouChart, w) -> np.ndarray:
    """|Phi(G(w)) - Phi(w) - 1| at the given chart points."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    gw = _chart_G(fmap, chart, w)
    return np.abs(
        fatou_coordinate(fmap, chart, gw) - fatou_coordinate(fmap, chart, w) - 1.0
    )


def chart_domain_samples(chart: FatouChart, n: int, margin: float = 2.0,
                         span: float = 40.0) -> np.ndarray:
    """Deterministic samples in W' = chart points at distance > margin from
    the chart boundary (used by the Phi and Phi' suites)."""
    ang = math.pi / 8
    sign = -1.0 if chart.kind == "repelling" else 1.0
    n_r = max(2, int(math.sqrt(n)))
    n_t = max(2, (n + n_r - 1) // n_r)
    i = np.arange(n_r)[:, None]
    j = np.arange(n_t)[None, :]
    # need |w| sin(pi/8 - |phi|) > margin and |w| - rho > margin + 1 (so that
    # G(w) also stays inside)
    r_lo = max(chart.rho + margin + 1.5, (margin + 1.5) / math.sin(ang / 2))
    rr = r_lo + span * (((i + 0.5) + _GOLDEN * j) / n_r % 1.0)
    phi_max = ang - np.arcsin(np.minimum(0.999, (margin + 1.0) / rr))
    tt = (2 * (j + 0.5) / n_t - 1) * np.maximum(phi_max, 0.0)
    xi = rr * np.exp(1j * tt)
    return (sign * xi).ravel()[:n]


def phi_derivative_bounds(
    fmap: EntireMap,
    chart: FatouChart,
    samples: int = 1000,
    h: float = 1e-3,
    raise_on_fail: bool = True,
) -> dict:
    """Check 9/80 < |Phi'| < 169/48 on W' samples where |G(w)-w-1| < 1/4."""
    w = chart_domain_samples(chart, samples)
    gb = np.abs(_chart_G(fmap, chart, w) - w - 1)
    w = w[gb < 0.25]
    d = (fatou_coordinate(fmap, chart, w + h) - fatou_coordinate(fmap, chart, w - h)) / (2 * h)
    mags = np.abs(d)
    lo, hi = 9.0 / 80.0, 169.0 / 48.0
    ok = (mags > lo) & (mags < hi)
    report = {
        "samples": int(len(w)),
        "min_abs_phi_prime": float(np.min(mags)),
        "max_abs_phi_prime": float(np.max(mags)),
        "violations": int(np.sum(~ok)),
        "passed": bool(np.all(ok)),
    }
    if not report["passed"] and raise_on_fail:
        bad = np.where(~ok)[0][0]
        raise BoundViolated(
            f"|Phi'(w)| = {mags[bad]} outside (9/80, 169/48) at w = {w[bad]}",
            witness=complex(w[bad]),
        )
    return report


# ---------------------------------------------------------------------
# cascades


def pullback_into_sector(
    fmap: EntireMap,
    germ: ParabolicGerm,
    sector: SectorSpec,
    z_end: complex,
    n: int,
) -> complex:
    """Pull z_end back n times along the inverse branch fixing the sector,
    so the forward orbit of the returned point stays in-sector for n steps.

    Each step inverts f by Newton, seeded with the germ's first-order
    backward step u - a u^(p+1)."""
    if not sector.contains(z_end):
        raise OrbitLeftSector("end point not in the sector", exit_index=n)
    zeta, a, p = germ.zeta, germ.a, germ.p
    z = complex(z_end)
    for k in range(n):
        u = z - zeta
        w = zeta + u - a * u ** (p + 1)
        for _ in range(50):
            r = fmap(w) - z
            if abs(r) < 1e-15 * max(1.0, abs(z - zeta)):
                break
            w = w - r / fmap.derivative(w)
        if abs(fmap(w) - z) > 1e-10:
            raise NoConvergence(f"inverse branch stalled at pullback step {k}")
        if not sector.contains(w):
            raise OrbitLeftSector(f"pullback exited the sector at step {k}", exit_index=k)
        z = w
    return z


def cascade_estimates(
    fmap: EntireMap,
    germ: ParabolicGerm,
    z: complex,
    n: int,
    s: float | None = None,
) -> dict:
    """Derivative growth along an in-sector orbit.

    Checks, for every prefix length 1..n:
      |(f^n)'(z)| > (27/845) |z|^-(1+p) |z_n|^(1+p)      (zeta-centered)
      |z|         < (3/4 p |a|)^(-1/p) n^(-1/p)
    and, when an omega exponent s is supplied, the weighted bound
      omega(z_n)/omega(z) |(f^n)'(z)| > K |z_n|^l n^tau
    with l = p+1-s, tau = 1 + (1-s)/p, K = (27/845) (3/4 p |a|)^(l/p).
    """
    zeta, p, a = germ.zeta, germ.p, germ.a
    sectors = thin_repelling_sectors(germ, validated_radius(fmap, germ))
    sec = next((s_ for s_ in sectors if s_.contains(z)), None)
    if sec is None:
        raise OrbitLeftSector("start point not in a thin repelling sector", exit_index=0)
    pts = [complex(z)]
    w = complex(z)
    for j in range(1, n + 1):
        w = fmap(w)
        if not sec.contains(w):
            raise OrbitLeftSector(f"orbit left the sector at step {j}", exit_index=j)
        pts.append(w)
    pts = np.array(pts)
    u = pts - zeta
    derivs = fmap.derivative(pts[:-1])
    chain = np.cumprod(np.abs(derivs))  # |(f^j)'(z)| for j = 1..n
    js = np.arange(1, n + 1)
    c2 = 27.0 / 845.0
    c1 = (0.75 * p * abs(a)) ** (-1.0 / p)
    bound_deriv = c2 * np.abs(u[0]) ** (-(1 + p)) * np.abs(u[1:]) ** (1 + p)
    bound_start = c1 * js ** (-1.0 / p)
    report = {
        "n": n,
        "chain_derivative": chain,
        "derivative_bound": bound_deriv,
        "start_bound": bound_start,
        "derivative_ok": bool(np.all(chain > bound_deriv)),
        "start_ok": bool(np.all(abs(u[0]) < bound_start)),
    }
    if s is not None:
        ell = p + 1 - s
        tau = 1 + (1 - s) / p
        K = c2 * (0.75 * p * abs(a)) ** (ell / p)
        weighted = (np.abs(u[0]) / np.abs(u[1:])) ** s * chain
        bound_w = K * np.abs(u[1:]) ** ell * js**tau
        report.update(
            ell=ell, tau=tau, K=K,
            weighted=weighted, weighted_bound=bound_w,
            weighted_ok=bool(np.all(weighted > bound_w)),
        )
    return report
