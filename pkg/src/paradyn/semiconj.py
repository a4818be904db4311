"""Rescaling to disjoint type and the pullback approximants.

Given f with bounded singular orbits, pick K < L with the singular orbits in
B(0,K) and f(B(0,K)) inside B(0,L); then g(z) = f(lambda z), lambda = K/L, is
of disjoint type.  The approximants theta^k are built by lifting isotopy
paths through f one level at a time:

    f(theta^k(z)) = theta^(k-1)(g(z)),   theta^0 = id,  theta^1(z) = lambda z.

Each level stores, per sample z and per orbit point g^j(z), the polyline the
isotopy traces from theta^(k-1) to theta^k; the next level is the f-lift of
the previous level's polyline at g(z), seeded at the current endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BranchLost,
    ConfigError,
    MarginTooSmall,
    UnboundedPostsingular,
)
from .maps import OVERFLOW_MAG, EntireMap, continue_branch

DEFAULT_SAFETY = 1.25
_PSB_CHECK_ITERATIONS = 200
_PSB_BOUND = 1e6
_CIRCLE_GRID = 256


def _circle_max(fmap: EntireMap, radius: float) -> tuple[float, int]:
    """max |f| on the circle |z| = radius, grid-sampled with the grid doubled
    until the answer is stable to 0.1%."""
    n = _CIRCLE_GRID
    prev = -1.0
    while n <= 65536:
        th = 2 * math.pi * np.arange(n) / n
        cur = float(np.max(np.abs(fmap(radius * np.exp(1j * th)))))
        if prev > 0 and abs(cur - prev) <= 1e-3 * cur:
            return cur, n
        prev, n = cur, 2 * n
    return prev, n // 2


@dataclass(frozen=True)
class RescalingChoice:
    map: EntireMap
    K: float
    L: float
    lam: float
    psb_radius_check: dict
    absorption_check: dict

    @property
    def rescaled(self) -> EntireMap:
        return EntireMap.rescaled(self.map, self.lam)


def choose_rescaling(
    fmap: EntireMap,
    safety: float = DEFAULT_SAFETY,
    k_floor: float = 0.0,
    n_check: int = _PSB_CHECK_ITERATIONS,
) -> RescalingChoice:
    """Pick K and L by sampling the singular orbits and the circle maximum.

    K is safety times the largest sampled postsingular modulus, floored at
    k_floor (callers pass twice the petal reach so the local charts sit in
    B(0, K/2)); L is safety times max |f| on |z| = K.
    """
    if safety <= 1:
        raise ConfigError("safety factor must exceed 1")
    orbits = {}
    psb_max = 0.0
    for kind, v in fmap.singular_values():
        z, mags = complex(v), []
        for _ in range(n_check):
            mags.append(abs(z))
            if abs(z) > _PSB_BOUND:
                raise UnboundedPostsingular(
                    f"singular orbit of {v} ({kind}) exited |z| = {_PSB_BOUND:g}"
                )
            z = fmap(z)
        orbits[f"{kind}:{v}"] = max(mags)
        psb_max = max(psb_max, max(mags))
    K = safety * max(psb_max, k_floor)
    circ, grid = _circle_max(fmap, K)
    L = safety * circ
    if not L > K:
        raise MarginTooSmall(f"L = {L} does not exceed K = {K}")
    return RescalingChoice(
        fmap,
        K,
        L,
        K / L,
        psb_radius_check={"orbit_maxima": orbits, "iterations": n_check, "psb_max": psb_max},
        absorption_check={"circle_max": circ, "grid": grid, "safety": safety},
    )


def verify_disjoint_type(choice: RescalingChoice, margin: float = 1e-6) -> dict:
    """Check g(B(0,L)) stays inside B(0,L) and that g has an attracting
    fixed point reached by iterating 0."""
    g = choice.rescaled
    gmax, grid = _circle_max(g, choice.L)
    if gmax >= choice.L * (1 - margin):
        raise MarginTooSmall(
            f"max |g| on |z| = L is {gmax}, not inside B(0, L = {choice.L})"
        )
    z = 0j
    for _ in range(10_000):
        nxt = g(z)
        if abs(nxt - z) < 1e-14:
            break
        z = nxt
    mult = abs(g.derivative(z))
    if abs(g(z) - z) > 1e-10 or mult >= 1:
        raise MarginTooSmall(
            f"iteration of 0 under g did not certify an attracting fixed point "
            f"(residual {abs(g(z)-z):.2e}, multiplier {mult:.3f})"
        )
    return {
        "circle_max_g": gmax,
        "grid": grid,
        "attracting_fixed_point": complex(z),
        "multiplier": mult,
    }


@dataclass
class _Sample:
    z: complex
    orbit: list  # g^j(z), j = 0..depth
    polylines: list  # polylines of the current level, one per usable orbit index
    thetas: list  # theta^0(z), theta^1(z), ...
    dropped: bool = False
    drop_reason: str = ""
    drop_level: int = -1
    max_relation_residual: float = 0.0


@dataclass
class PullbackState:
    map: EntireMap
    choice: RescalingChoice
    samples: list = field(default_factory=list)
    level: int = 0
    branch_log: list = field(default_factory=list)

    @property
    def rescaled(self) -> EntireMap:
        return self.choice.rescaled


def init_pullback(
    fmap: EntireMap,
    choice: RescalingChoice,
    sample_points,
    depth: int,
) -> PullbackState:
    """Level-1 state: g-orbits to the requested depth and the straight
    isotopy segments w -> lambda w along each orbit.  Samples whose g-orbit
    overflows before `depth` are dropped up front."""
    g = choice.rescaled
    lam = choice.lam
    state = PullbackState(fmap, choice)
    for z in sample_points:
        z = complex(z)
        orbit, w, ok = [z], z, True
        for _ in range(depth):
            w = g(w)
            if abs(w) > OVERFLOW_MAG / 2:
                ok = False
                break
            orbit.append(w)
        smp = _Sample(z, orbit, [], [z, lam * z])
        if not ok:
            smp.dropped = True
            smp.drop_reason = f"g-orbit overflow at step {len(orbit)}"
            smp.drop_level = 1
            state.branch_log.append((z, 1, smp.drop_reason))
        else:
            # level-1 polylines run from theta^0 = id to theta^1 = lam*id
            smp.polylines = [
                np.array([w_, lam * w_]) for w_ in orbit[: depth]
            ]
        state.samples.append(smp)
    state.level = 1
    return state


def pullback_level(state: PullbackState, k: int | None = None) -> PullbackState:
    """Advance every live sample one level: lift the previous level's
    polyline at g(z) through f, seeded at the current endpoint.  BranchLost
    drops the sample and the run continues."""
    if k is not None and k != state.level + 1:
        raise ConfigError(f"levels must advance one at a time (at {state.level})")
    f = state.map
    for smp in state.samples:
        if smp.dropped:
            continue
        if len(smp.polylines) < 2:
            smp.dropped = True
            smp.drop_reason = "orbit depth exhausted"
            smp.drop_level = state.level + 1
            state.branch_log.append((smp.z, smp.drop_level, smp.drop_reason))
            continue
        new_polys = []
        try:
            for j in range(len(smp.polylines) - 1):
                seed = smp.polylines[j][-1]
                lift = continue_branch(f, smp.polylines[j + 1], seed)
                new_polys.append(lift.preimage_path)
        except BranchLost as exc:
            smp.dropped = True
            smp.drop_reason = f"branch lost: {exc}"
            smp.drop_level = state.level + 1
            state.branch_log.append((smp.z, smp.drop_level, smp.drop_reason))
            continue
        smp.polylines = new_polys
        smp.thetas.append(complex(new_polys[0][-1]))
    state.level += 1
    return state


def _relation_residuals(state: PullbackState) -> dict:
    """Residuals of f(theta^k(z)) = theta^(k-1)(g(z)) at the current level."""
    f = state.map
    out = {}
    for smp in state.samples:
        if smp.dropped or len(smp.polylines) < 2:
            continue
        lhs = f(complex(smp.polylines[0][-1]))
        rhs = complex(smp.polylines[1][0])  # theta^(k-1)(g(z))
        out[smp.z] = abs(lhs - rhs)
        smp.max_relation_residual = max(smp.max_relation_residual, abs(lhs - rhs))
    return out


def run_pullback(
    fmap: EntireMap,
    choice: RescalingChoice,
    sample_points,
    levels: int,
) -> PullbackState:
    """init_pullback plus `levels - 1` lift rounds, with the functional
    relation recorded at every level."""
    state = init_pullback(fmap, choice, sample_points, depth=levels + 1)
    _relation_residuals(state)
    for _ in range(levels - 1):
        pullback_level(state)
        _relation_residuals(state)
    return state


def exponential_ray_samples(
    choice: RescalingChoice,
    n: int,
    depth: int,
    entry_range: int = 2,
):
    """Ray points of the rescaled map usable as pullback samples: small
    potentials so the g-orbit stays finite to `depth`, addresses cycling
    through distinct two-entry prefixes (so vertical-order checks are
    resolvable)."""
    from .rays import ExternalAddress, trace_ray

    g = choice.rescaled
    ks = range(-entry_range, entry_range + 1)
    addresses = [ExternalAddress((k1, k2), (0,)) for k1 in ks for k2 in ks]
    per = max(1, -(-n // len(addresses)))
    t_hi = 1.0 / (0.6 * depth + 5.0)
    pots = np.linspace(t_hi / 4, t_hi, per)
    out = []
    for addr in addresses:
        for p in trace_ray(g, addr, pots):
            w, ok = p.location, True
            for _ in range(depth):
                w = g(w)
                if abs(w) > 1e250:
                    ok = False
                    break
            if ok:
                out.append(p)
            if len(out) >= n:
                return out
    return out


def convergence_report(state: PullbackState, metric_config=None) -> dict:
    """Step-length diagnostics over the computed levels.

    Per live sample: Euclidean steps |theta^(k+1) - theta^k| (and the
    sigma-weighted analogue when a metric config is supplied), a fitted
    decay exponent tau_hat from log-log regression, and the bound A so the
    tail after level k stays under A * k^(1 - tau_hat)."""
    if state.level < 3:
        raise ConfigError("convergence diagnostics need at least 3 levels")
    per_sample = []
    all_tau = []
    for smp in state.samples:
        if smp.dropped:
            continue
        th = np.array(smp.thetas)
        steps = np.abs(np.diff(th))
        entry = {"z": smp.z, "steps": steps}
        if metric_config is not None:
            from .metrics import omega_density

            mids = (th[1:] + th[:-1]) / 2
            entry["weighted_steps"] = steps * omega_density(metric_config, mids)
        pos = steps > 0
        ks = np.arange(1, len(steps) + 1)[pos]
        if pos.sum() >= 3:
            slope, intercept = np.polyfit(np.log(ks), np.log(steps[pos]), 1)
            entry["tau_hat"] = -slope
            all_tau.append(-slope)
            # tail envelope: sum_{m > k} steps is below A k^(1 - tau_hat)
            tails = np.cumsum(steps[::-1])[::-1]
            env = ks ** (1 - entry["tau_hat"])
            entry["tail_constant"] = float(np.max(tails[pos] / env))
        entry["monotone"] = bool(np.all(np.diff(steps[pos]) <= 1e-12 + steps[pos][:-1] * 0.5)) if pos.sum() > 1 else True
        entry["partial_sum"] = float(np.sum(steps))
        per_sample.append(entry)
    n_total = len(state.samples)
    n_drop = sum(s.dropped for s in state.samples)
    return {
        "levels": state.level,
        "samples": n_total,
        "dropped": n_drop,
        "drop_rate": n_drop / n_total if n_total else 0.0,
        "per_sample": per_sample,
        "tau_hat_median": float(np.median(all_tau)) if all_tau else math.nan,
        "max_relation_residual": max(
            (s.max_relation_residual for s in state.samples if not s.dropped),
            default=math.nan,
        ),
    }
