"""The weighted expansion metric.

Near the parabolic points the density is the explicit weight
omega(z) = d_Par(z)^(-s); away from them the (never explicitly computed)
orbifold density is replaced by a two-sided bracket: an explicit
plane-minus-disc hyperbolic density above, and a Beardon-type
c / dist(z, boundary) estimate below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import (
    AtParabolic,
    ConfigError,
    OutsideComparisonRegion,
    UnsupportedMap,
)
from .maps import (
    FAM_EXP_AFFINE,
    FAM_EXP_KAPPA,
    FAM_EXP_SHIFT,
    FAM_SINE,
    FAM_SINE_AFFINE,
    EntireMap,
)

BEARDON_C_DEFAULT = 0.25  # only c > 0 is theory-backed; 1/4 is the classical
# simply-connected value, kept configurable


def _lcm(values):
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out


@dataclass(frozen=True)
class MetricConfig:
    map: EntireMap
    par_points: tuple  # parabolic fixed points (finite)
    n_sigma: int
    eps_sigma: float
    comparison_disc_radius: float
    petal_domains: tuple = ()  # sector-shaped stand-ins for the metric domain
    boundary_points: tuple = ()  # samples of the domain boundary for the
    # Beardon lower bound; defaults to par_points
    beardon_c: float = BEARDON_C_DEFAULT

    def __post_init__(self):
        if self.n_sigma < 1:
            raise ConfigError("n_sigma must be a positive integer")
        if not 0 < self.s < 1:
            raise ConfigError("s must lie in (0, 1)")
        if not self.par_points:
            raise ConfigError("par_points must be nonempty")
        if not self.boundary_points:
            object.__setattr__(self, "boundary_points", tuple(self.par_points))

    @property
    def s(self) -> float:
        return 1.0 - 1.0 / (2 * self.n_sigma)


@dataclass(frozen=True)
class DensityValue:
    at: complex
    omega: float
    sigma: float  # equals omega near the parabolic points, NaN otherwise
    # (the far-regime density is only ever bracketed)
    comparison_upper: float
    comparison_lower: float
    regime: str  # "near_parabolic" | "comparison"


def ramification_data(fmap: EntireMap) -> tuple[dict, int, float]:
    """Ramified points of the postsingular set inside the Julia set, with
    their orbifold weights v, plus the derived n_sigma and s.

    The analysis is per family, from the explicit critical-point lattice:
      - exponential maps have no critical points, so nothing is ramified;
      - sine's postsingular set meets the Julia set only at the parabolic
        point 0, whose preimages k*pi are non-critical;
      - the affine sine family has the critical value -2*pi in the Julia
        set with simple critical preimages, so v(-2*pi) = 2*lcm{2} = 4.
    """
    if fmap.scale != 1:
        raise UnsupportedMap("ramification analysis needs the unrescaled map")
    if fmap.fam in (FAM_EXP_SHIFT, FAM_EXP_AFFINE, FAM_EXP_KAPPA):
        return {}, 1, 0.5
    if fmap.fam == FAM_SINE:
        return {}, 1, 0.5
    if fmap.fam == FAM_SINE_AFFINE:
        table = {complex(-2 * math.pi): 4}
        n_sigma = _lcm(deg * v for (deg, v) in [(1, 4)])
        return table, n_sigma, 1.0 - 1.0 / (2 * n_sigma)
    raise UnsupportedMap(
        "singular orbit structure of this family is not classifiable here"
    )


def d_par(config: MetricConfig, z):
    z = np.asarray(z, dtype=complex)
    return np.min(
        np.abs(z[..., None] - np.asarray(config.par_points)), axis=-1
    )


def omega_density(config: MetricConfig, z):
    d = d_par(config, z)
    if np.any(d == 0):
        raise AtParabolic("omega is infinite at a parabolic point")
    return d ** (-config.s)


def comparison_densities(config: MetricConfig, z) -> tuple:
    """(lower, upper) bracket for the far-regime density at z.

    upper: hyperbolic density of the plane minus the comparison disc,
    1 / (|z| log(2|z|/K)); lower: c / dist(z, sampled domain boundary).
    """
    z = np.asarray(z, dtype=complex)
    K = config.comparison_disc_radius
    r = np.abs(z)
    if np.any(r <= K):
        raise OutsideComparisonRegion(
            "upper comparison bound needs |z| above the disc radius"
        )
    upper = 1.0 / (r * np.log(2.0 * r / K))
    dist = np.min(np.abs(z[..., None] - np.asarray(config.boundary_points)), axis=-1)
    if np.any(dist == 0):
        raise OutsideComparisonRegion("point lies on the sampled boundary")
    lower = config.beardon_c / dist
    return lower, upper


def sigma_density(config: MetricConfig, z: complex) -> DensityValue:
    z = complex(z)
    d = float(d_par(config, z))
    if d == 0:
        raise AtParabolic("sigma is infinite at a parabolic point")
    om = float(omega_density(config, z))
    if d < config.eps_sigma:
        return DensityValue(z, om, om, math.inf, 0.0, "near_parabolic")
    lo, hi = comparison_densities(config, z)
    return DensityValue(z, om, math.nan, float(hi), float(lo), "comparison")


def expansion_factor(config: MetricConfig, z: complex) -> tuple:
    """(conservative, optimistic) bounds on |f'(z)| sigma(f(z)) / sigma(z).

    Near-parabolic endpoints contribute omega exactly; comparison-regime
    endpoints contribute their bracket side (lower on the image, upper on
    the source for the conservative figure, and vice versa). When both
    endpoints are near-parabolic the two figures coincide.
    """
    fmap = config.map
    src = sigma_density(config, z)
    img = sigma_density(config, fmap(z))
    dz = abs(fmap.derivative(z))
    if src.regime == "near_parabolic":
        src_hi = src_lo = src.omega
    else:
        src_lo, src_hi = src.comparison_lower, src.comparison_upper
    if img.regime == "near_parabolic":
        img_hi = img_lo = img.omega
    else:
        img_lo, img_hi = img.comparison_lower, img.comparison_upper
    return dz * img_lo / src_hi, dz * img_hi / src_lo


def near_parabolic_expansion_suite(
    config: MetricConfig,
    samples: int = 10_000,
    raise_on_fail: bool = False,
) -> dict:
    """omega(f(z))/omega(z) * |f'(z)| > 1 on sector samples with
    0 < d_Par(z) < eps_sigma; both endpoints are in the pure-omega regime
    so the factor is exact."""
    from .parabolic import sector_samples

    if not config.petal_domains:
        raise ConfigError("near-parabolic suite needs petal_domains")
    fmap = config.map
    per = max(1, samples // len(config.petal_domains))
    worst, n_viol, total = math.inf, 0, 0
    for sec in config.petal_domains:
        import dataclasses

        cap = dataclasses.replace(sec, r0=min(sec.r0, config.eps_sigma))
        z = sector_samples(cap, per)
        fac = np.abs(fmap.derivative(z)) * omega_density(config, fmap(z)) / omega_density(config, z)
        worst = min(worst, float(np.min(fac)))
        n_viol += int(np.sum(fac <= 1.0))
        total += len(z)
    report = {
        "samples": total,
        "min_factor": worst,
        "violations": n_viol,
        "passed": n_viol == 0,
    }
    if raise_on_fail and not report["passed"]:
        from .errors import InequalityViolated

        raise InequalityViolated(f"expansion factor dipped to {worst}")
    return report


def select_eps_sigma(config: MetricConfig, r_min: float, samples: int = 100_000) -> float:
    """Largest eps_sigma <= r_min / 2 for which the near-parabolic expansion
    suite passes, found by bisection."""
    import dataclasses

    def passes(eps):
        c = dataclasses.replace(config, eps_sigma=eps)
        return near_parabolic_expansion_suite(c, samples)["passed"]

    cap = r_min / 2
    if passes(cap):
        return cap
    lo, hi = 0.0, cap
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise ConfigError("no eps_sigma below r_min/2 passes the suite")
    return 0.95 * lo
