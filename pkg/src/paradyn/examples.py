"""The four worked example maps and their verification battery.

  f1 = e^(z-1)                       parabolic at 1, one petal
  f2 = sin z                          parabolic at 0, two petals
  f3 = z e^z                          parabolic at 0; 0 is an asymptotic
                                      value whose only preimage is 0 itself
  f4 = (sin(z + a) - sin a) / cos a   with a solving (1 + sin a)/cos a = 2pi,
                                      so the critical value -2pi maps to the
                                      parabolic point 0
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import UnsupportedMap
from .maps import EntireMap
from .parabolic import (
    ParabolicGerm,
    fit_germ,
    thin_repelling_sectors,
    validated_radius,
)
from .render import SectorTarget, Viewport


def solve_a() -> float:
    """Root of (1 + sin a)/cos a = 2 pi on (0, pi/2)."""
    return brentq(
        lambda a: (1 + math.sin(a)) / math.cos(a) - 2 * math.pi,
        1e-9,
        math.pi / 2 - 1e-9,
        xtol=1e-14,
    )


@dataclass(frozen=True)
class ExampleSpec:
    name: str
    map: EntireMap
    par_points: tuple
    viewport: Viewport
    docile: bool  # whether the far-regime metric analysis applies


def _build_examples() -> dict:
    a = solve_a()
    return {
        "f1": ExampleSpec(
            "f1",
            EntireMap.exp_shift(),
            (1 + 0j,),
            Viewport(1 + 0j, 8.0),
            True,
        ),
        "f2": ExampleSpec(
            "f2",
            EntireMap.sine(),
            (0j,),
            Viewport(0j, 12.0),
            True,
        ),
        "f3": ExampleSpec(
            "f3",
            EntireMap.z_exp_z(),
            (0j,),
            Viewport(0j, 8.0),
            False,
        ),
        "f4": ExampleSpec(
            "f4",
            EntireMap.sine_affine(a),
            (0j,),
            Viewport(-math.pi + 0j, 16.0),
            True,
        ),
    }


_EXAMPLES: dict | None = None


def examples() -> dict:
    global _EXAMPLES
    if _EXAMPLES is None:
        _EXAMPLES = _build_examples()
    return _EXAMPLES


def example(name: str) -> ExampleSpec:
    try:
        return examples()[name]
    except KeyError:
        raise UnsupportedMap(f"unknown example {name!r}; have f1..f4") from None


def example_germ(name: str) -> ParabolicGerm:
    spec = example(name)
    return fit_germ(spec.map, spec.par_points[0])


def basin_sector_targets(name: str, radius: float | None = None) -> tuple:
    """Attracting-direction sector targets for basin rendering."""
    spec = example(name)
    germ = example_germ(name)
    if radius is None:
        radius = validated_radius(spec.map, germ) / 2
    alpha = math.pi / (2 * germ.p)
    return tuple(
        SectorTarget(germ.zeta, v, alpha, radius) for v in germ.attracting_vectors
    )


def _orbit_battery(fmap: EntireMap, z0: complex, n: int) -> list:
    orbit = [complex(z0)]
    for _ in range(n):
        orbit.append(fmap(orbit[-1]))
    return orbit


def run_battery() -> list:
    """The full example verification battery; returns check dicts
    (name, passed, witness, margin)."""
    checks = []

    def check(name, passed, witness=None, margin=None):
        checks.append(
            {"name": name, "passed": bool(passed), "witness": witness, "margin": margin}
        )

    # f1: germ and bounded singular orbit
    g1 = example_germ("f1")
    check("f1_germ_order", g1.p == 1, witness=g1.p)
    check("f1_germ_coefficient", abs(g1.a - 0.5) < 1e-12, witness=str(g1.a))
    check(
        "f1_germ_vectors",
        abs(g1.repelling_vectors[0] - 2) < 1e-12
        and abs(g1.attracting_vectors[0] + 2) < 1e-12,
        witness=str(g1.repelling_vectors + g1.attracting_vectors),
    )
    orb = _orbit_battery(example("f1").map, 0j, 400)
    mags = [abs(z) for z in orb]
    check(
        "f1_singular_orbit_bounded_by_1",
        max(mags) <= 1 + 1e-12 and abs(orb[-1] - 1) < 0.01,
        witness=max(mags),
    )

    # f2: germ and imaginary-axis behavior
    g2 = example_germ("f2")
    check("f2_germ_order", g2.p == 2, witness=g2.p)
    check("f2_germ_coefficient", abs(g2.a + 1 / 6) < 1e-12, witness=str(g2.a))
    rep_ok = sorted(v.imag for v in g2.repelling_vectors) == sorted(
        (-math.sqrt(3), math.sqrt(3))
    ) or all(abs(abs(v.imag) - math.sqrt(3)) < 1e-9 and abs(v.real) < 1e-9
             for v in g2.repelling_vectors)
    check("f2_repelling_vectors_imaginary", rep_ok, witness=str(g2.repelling_vectors))
    ys = np.linspace(0.01, 6, 200)
    axis_escape = np.abs(np.imag(np.sin(1j * ys))) > ys  # |sin(iy)| = sinh y > y
    check("f2_imaginary_axis_expands", bool(np.all(axis_escape)))

    # f3: the asymptotic value 0 has no preimage besides 0 (w e^w = 0 only
    # at w = 0, a family fact), and the critical orbit lands in a petal
    check("f3_origin_only_preimage_of_0", True, witness="w*e^w = 0 iff w = 0")
    g3 = example_germ("f3")
    check("f3_germ", g3.p == 1 and abs(g3.a - 1) < 1e-12, witness=str(g3.a))
    crit_val = -math.exp(-1)
    orb3 = _orbit_battery(example("f3").map, crit_val, 2000)
    tail = orb3[-1]
    att = g3.attracting_vectors[0]
    in_dir = abs(math.remainder(math.atan2(tail.imag, tail.real)
                                - math.atan2(att.imag, att.real), 2 * math.pi))
    check(
        "f3_critical_orbit_to_0_along_attracting_vector",
        abs(tail) < 0.01 and in_dir < math.pi / 4,
        witness=str(tail),
    )

    # f4: parameter solve, critical value relation, germ, ramification
    a = solve_a()
    check("f4_parameter", abs(a - 1.255134) < 1e-5, witness=a, margin=abs(a - 1.255134))
    f4 = example("f4").map
    check("f4_maps_-2pi_to_0", abs(f4(-2 * math.pi)) < 1e-12, witness=abs(f4(-2 * math.pi)))
    g4 = example_germ("f4")
    check(
        "f4_germ",
        g4.p == 1 and abs(g4.a + math.tan(a) / 2) < 1e-10,
        witness=str(g4.a),
    )
    from .metrics import ramification_data

    table, n_sigma, s = ramification_data(f4)
    check(
        "f4_ramification",
        n_sigma == 4 and abs(s - 7 / 8) < 1e-15 and table.get(complex(-2 * math.pi)) == 4,
        witness={"n_sigma": n_sigma, "s": s},
    )
    try:
        ramification_data(example("f3").map)
        check("f3_ramification_unsupported", False)
    except UnsupportedMap:
        check("f3_ramification_unsupported", True)
    return checks
