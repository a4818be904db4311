"""Command-line orchestration.

Subcommands: examples | petal | metric | semiconj | ray | render.
Each run produces a schema-versioned JSON report (config echo, named checks
with witnesses, fitted constants, provenance) plus a human summary on
stdout.  Exit codes: 0 all checks passed, 1 some check failed, 2 bad
configuration.

All computations are deterministic; the --seed flag is recorded in reports
for provenance but no randomness is consumed.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, ParadynError
from .examples import basin_sector_targets, example, example_germ, run_battery
from .maps import EntireMap

SCHEMA_VERSION = 1

_DEFAULTS = {
    "map": "f1",
    "samples": 10_000,
    "chart_samples": 200,
    "phi_samples": 1000,
    "cascade_depth": 40,
    "comparison_disc_radius": 1.0,
    "beardon_c": 0.25,
    "levels": 12,
    "pullback_samples": 40,
    "addresses": 20,
    "address_bound": 10,
    "potentials": [0.5, 1.0, 2.0],
    "ray_depth": 50,
    "cert_depth": 20,
    "maps": ["f1", "f2", "f3", "f4"],
    "pixels": 1024,
    "max_iter": 2000,
    "bailout": 1e6,
    "tile_size": 64,
}


def _load_config(path: str | None) -> dict:
    cfg = dict(_DEFAULTS)
    if path:
        with open(path) as fh:
            user = json.load(fh)
        unknown = [k for k in user if k not in cfg and not k.startswith("_")]
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg.update({k: v for k, v in user.items() if not k.startswith("_")})
    for key in ("samples", "levels", "pixels", "max_iter"):
        if cfg[key] <= 0:
            raise ConfigError(f"config {key} must be positive")
    return cfg


class Checks:
    def __init__(self):
        self.items = []

    def add(self, name, passed, witness=None, margin=None):
        self.items.append(
            {
                "name": name,
                "passed": bool(passed),
                "witness": _jsonable(witness),
                "margin": _jsonable(margin),
            }
        )

    @property
    def all_passed(self):
        return all(c["passed"] for c in self.items)


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _report(command, cfg, seed, checks: Checks, constants=None, artifacts=None):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": _jsonable(cfg),
        "seed": seed,
        "checks": checks.items,
        "constants": _jsonable(constants or {}),
        "artifacts": artifacts or [],
        "provenance": {
            "tool": "paradyn",
            "version": __version__,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        },
    }


# ---------------------------------------------------------------------
# subcommands


def cmd_examples(cfg, args, out_dir):
    checks = Checks()
    for c in run_battery():
        checks.add(c["name"], c["passed"], c["witness"], c["margin"])
    return _report("examples", cfg, args.seed, checks)


def cmd_petal(cfg, args, out_dir):
    from . import parabolic as P

    spec = example(cfg["map"])
    germ = example_germ(cfg["map"])
    checks = Checks()
    r_min = P.validated_radius(spec.map, germ)
    suite = P.thin_sector_inequalities(
        spec.map, germ, r_min, cfg["samples"], raise_on_fail=False
    )
    checks.add("thin_sector_inequalities", suite["passed"], suite["sectors"])
    chart = P.make_chart(spec.map, germ, kind="repelling")
    w = P.chart_domain_samples(chart, cfg["chart_samples"])
    res = P.abel_residual(spec.map, chart, w)
    checks.add("abel_residual_below_1e-6", float(np.max(res)) < 1e-6, float(np.max(res)))
    phi = P.phi_derivative_bounds(
        spec.map, chart, cfg["phi_samples"], raise_on_fail=False
    )
    checks.add("phi_derivative_bounds", phi["passed"], phi)
    sec = P.thin_repelling_sectors(germ, r_min)[0]
    z_end = germ.zeta + 0.8 * r_min * sec.vector / abs(sec.vector)
    z0 = P.pullback_into_sector(spec.map, germ, sec, z_end, cfg["cascade_depth"])
    casc = P.cascade_estimates(spec.map, germ, z0, cfg["cascade_depth"], s=0.5)
    checks.add(
        "cascade_bounds",
        casc["derivative_ok"] and casc["start_ok"] and casc["weighted_ok"],
        {k: casc[k] for k in ("derivative_ok", "start_ok", "weighted_ok")},
    )
    consts = {"r_min": r_min, "beta": chart.beta, "rho": chart.rho, "p": germ.p,
              "a": germ.a}
    return _report("petal", cfg, args.seed, checks, consts)


def cmd_metric(cfg, args, out_dir):
    from . import metrics as M
    from . import parabolic as P

    spec = example(cfg["map"])
    checks = Checks()
    try:
        table, n_sigma, s = M.ramification_data(spec.map)
    except ParadynError as exc:
        checks.add("ramification_data", False, str(exc))
        return _report("metric", cfg, args.seed, checks)
    germ = example_germ(cfg["map"])
    r_min = P.validated_radius(spec.map, germ)
    sectors = tuple(P.thin_repelling_sectors(germ, r_min))
    base = M.MetricConfig(
        spec.map,
        spec.par_points,
        n_sigma,
        eps_sigma=r_min / 2,
        comparison_disc_radius=cfg["comparison_disc_radius"],
        petal_domains=sectors,
        beardon_c=cfg["beardon_c"],
    )
    eps = M.select_eps_sigma(base, r_min, cfg["samples"])
    mcfg = dataclasses.replace(base, eps_sigma=eps)
    near = M.near_parabolic_expansion_suite(mcfg, cfg["samples"])
    checks.add("near_parabolic_expansion", near["passed"], near)
    consts = {"n_sigma": n_sigma, "s": s, "eps_sigma": eps, "r_min": r_min,
              "ramified": table}
    return _report("metric", cfg, args.seed, checks, consts)


def cmd_semiconj(cfg, args, out_dir):
    from . import parabolic as P
    from . import semiconj as S

    spec = example(cfg["map"])
    germ = example_germ(cfg["map"])
    r_min = P.validated_radius(spec.map, germ)
    k_floor = 2 * (abs(germ.zeta) + r_min)
    checks = Checks()
    choice = S.choose_rescaling(spec.map, k_floor=k_floor)
    checks.add("lambda_below_1", choice.lam < 1, choice.lam)
    dis = S.verify_disjoint_type(choice)
    checks.add("disjoint_type", True, dis)
    samples = S.exponential_ray_samples(
        choice, cfg["pullback_samples"], cfg["levels"] + 1
    )
    state = S.run_pullback(
        spec.map, choice, [p.location for p in samples], cfg["levels"]
    )
    rep = S.convergence_report(state)
    checks.add("drop_rate_below_1pct", rep["drop_rate"] < 0.01, rep["drop_rate"])
    checks.add(
        "functional_relation_below_1e-9",
        rep["max_relation_residual"] < 1e-9,
        rep["max_relation_residual"],
    )
    checks.add("tau_hat_at_least_1.2", rep["tau_hat_median"] >= 1.2, rep["tau_hat_median"])
    csv_path = out_dir / "step_lengths.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_re", "sample_im", "level", "step_length"])
        for entry in rep["per_sample"]:
            for k, st in enumerate(entry["steps"], start=1):
                writer.writerow([entry["z"].real, entry["z"].imag, k, st])
    consts = {"K": choice.K, "L": choice.L, "lambda": choice.lam,
              "tau_hat": rep["tau_hat_median"], "levels": rep["levels"],
              "samples": rep["samples"], "dropped": rep["dropped"]}
    return _report("semiconj", cfg, args.seed, checks, consts, [str(csv_path)])


def cmd_ray(cfg, args, out_dir):
    from . import rays as R
    from . import semiconj as S

    spec = example(cfg["map"])
    germ = example_germ(cfg["map"])
    choice = S.choose_rescaling(spec.map, k_floor=2 * (abs(germ.zeta) + 0.2))
    g = choice.rescaled
    checks = Checks()
    n = cfg["addresses"]
    addrs = []
    k = 0
    while len(addrs) < n:
        k1, k2 = k % 5 - 2, (k // 5) % 5 - 2
        a = R.ExternalAddress((k1, k2), ((k // 25) % 3,), cfg["address_bound"])
        if all(a.compare(b) != 0 for b in addrs):
            addrs.append(a)
        k += 1
    t = max(cfg["potentials"])
    pts = [R.trace_ray(g, a, [t], cfg["ray_depth"], cfg["cert_depth"])[0] for a in addrs]
    order = sorted(range(n), key=lambda i: addrs[i])
    im_sorted = [pts[i].location.imag for i in order]
    checks.add("vertical_order_matches_lexicographic",
               all(x < y for x, y in zip(im_sorted, im_sorted[1:])),
               im_sorted[:10])
    errs = []
    for a, p in zip(addrs[:10], pts[:10]):
        q = R.trace_ray(g, a.shifted(), [R.potential_forward(p.potential)])[0]
        errs.append(abs(g(p.location) - q.location) / max(1.0, abs(q.location)))
    checks.add("shift_equivariance_1e-6", max(errs) < 1e-6, max(errs))
    return _report("ray", cfg, args.seed, checks, {"addresses": [str(a) for a in addrs]})


def cmd_render(cfg, args, out_dir):
    from .render import RenderJob, Viewport, render

    checks = Checks()
    consts = {}
    artifacts = []
    for name in cfg["maps"]:
        spec = example(name)
        vp = Viewport(spec.viewport.center, spec.viewport.width,
                      cfg["pixels"], cfg["pixels"])
        job = RenderJob(
            spec.map,
            vp,
            max_iter=cfg["max_iter"],
            bailout=cfg["bailout"],
            classifier="basin",
            sector_targets=basin_sector_targets(name),
        )
        result = render(job, threads=args.threads, tile_size=cfg["tile_size"])
        png = out_dir / f"{name}_julia.png"
        result.save_png(png)
        artifacts.append(str(png))
        consts[name] = {"hash": result.image_hash(), **result.stats}
        checks.add(f"{name}_render_completed", True, result.stats["class_histogram"])
    return _report("render", cfg, args.seed, checks, consts, artifacts)


_COMMANDS = {
    "examples": cmd_examples,
    "petal": cmd_petal,
    "metric": cmd_metric,
    "semiconj": cmd_semiconj,
    "ray": cmd_ray,
    "render": cmd_render,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="paradyn", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="recorded in reports")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--json", action="store_true", help="print the full JSON report")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        report = _COMMANDS[args.command](cfg, args, out_dir)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    report_path = out_dir / f"{args.command}_report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for c in report["checks"]:
            mark = "PASS" if c["passed"] else "FAIL"
            extra = "" if c["passed"] else f"  witness={c['witness']}"
            print(f"[{mark}] {c['name']}{extra}")
        print(f"report: {report_path}")
    return 0 if all(c["passed"] for c in report["checks"]) else 1


if __name__ == "__main__":
    sys.exit(main())
