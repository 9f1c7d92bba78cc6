"""Operator-facing command line: audit, periodic, sweep, reconstruct, verify.

Exit codes: 0 success, 1 property violation, 2 usage or domain error,
3 numerical non-convergence.  Identical configuration and seed give
byte-identical outputs; numeric text carries 17 significant digits.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .constants import C_MODES, audit_report, derive_constants, equilibrium_amplitude
from .energy import monitor_orbit
from .integrator import IntegrationError, Tolerances
from .profiles import radial_polylaplacian, reconstruct
from .serialize import (
    fmt,
    orbit_to_json,
    write_json,
    write_orbit_csv,
    write_profile_csv,
    write_sweep_csv,
)
from .shooting import NewtonError, SeamSearchError, solve_periodic
from .verify import run_verify

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_NOCONV = 3


@dataclass
class RunConfig:
    n: int = 7
    m: int = 3
    c_mode: str = "audited"
    tol_rel: float = 1e-12
    tol_abs: float = 1e-14
    tol_newton: float = 1e-11
    horizon_mult: float = 1.0
    escape_safety: float = 2.0
    jobs: int = 1
    seed: int = 0
    out: str = ""
    format: str = "csv"
    plot: bool = False

    def validate(self):
        if self.n < 2 * self.m + 1:
            raise ValueError("n must exceed 2m")
        if min(self.tol_rel, self.tol_abs, self.tol_newton) <= 0:
            raise ValueError("all tolerances must be positive")
        if self.c_mode not in C_MODES:
            raise ValueError(f"c-mode must be one of {C_MODES}")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def tolerances(self) -> Tolerances:
        return Tolerances(rel=self.tol_rel, abs=self.tol_abs, newton=self.tol_newton)

    def out_dir(self) -> Path:
        if self.out:
            return Path(self.out)
        env = os.environ.get("FOWLER6_OUT")
        return Path(env) if env else Path("fowler6_out")


_CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_config_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _CONFIG_TYPES:
                raise ValueError(f"{path}:{ln}: unknown key {key!r}")
            caster = {"int": int, "float": float, "str": str, "bool": lambda s: s.lower() in ("1", "true", "yes")}[
                _CONFIG_TYPES[key] if isinstance(_CONFIG_TYPES[key], str) else _CONFIG_TYPES[key].__name__
            ]
            values[key] = caster(val)
    return values


def _build_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        for k, v in _parse_config_file(args.config).items():
            setattr(cfg, k, v)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(cfg, f.name, v)
    cfg.validate()
    return cfg


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value config file; flags override")
    p.add_argument("--n", type=int, help="space dimension (default 7)")
    p.add_argument("--m", type=int, help="operator half-order (default 3)")
    p.add_argument("--c-mode", dest="c_mode", choices=C_MODES,
                   help="coupling normalization (default audited)")
    p.add_argument("--tol-rel", dest="tol_rel", type=float, help="relative tolerance")
    p.add_argument("--tol-abs", dest="tol_abs", type=float, help="absolute tolerance")
    p.add_argument("--tol-newton", dest="tol_newton", type=float, help="Newton tolerance")
    p.add_argument("--horizon-mult", dest="horizon_mult", type=float,
                   help="classification horizon multiplier")
    p.add_argument("--escape-safety", dest="escape_safety", type=float,
                   help="escape radius safety factor")
    p.add_argument("--jobs", type=int, help="parallel workers for sweeps")
    p.add_argument("--seed", type=int, help="seed for all sampling (default 0)")
    p.add_argument("--out", help="output directory (default $FOWLER6_OUT or ./fowler6_out)")
    p.add_argument("--format", choices=("csv", "json"), help="table format (default csv)")
    p.add_argument("--plot", action="store_const", const=True, default=None,
                   help="render figures next to the tables")


def _derive(cfg: RunConfig):
    return derive_constants(cfg.n, cfg.m, cfg.c_mode)


# ---------------------------------------------------------------------------
# commands


def cmd_audit(args) -> int:
    cfg = _build_config(args)
    params, spec = _derive(cfg)
    report = audit_report(params, spec)

    from .constants import reference_coefficients

    agree = (
        report["bubble_oracle"]["relative_spread"] < 1e-8
        and report["bubble_oracle"]["closed_form_matches_oracle"]
    )
    try:
        ref = reference_coefficients(cfg.n, cfg.m)
        for k, key in enumerate(sorted(ref)):
            if spec.K_exact[k] != ref[key]:
                agree = False
    except ValueError:
        pass  # no tabulated closed form at this order
    report["oracles_agree"] = agree

    out = cfg.out_dir() / f"audit_n{cfg.n}_m{cfg.m}.json"
    write_json(out, report)
    print(f"n={cfg.n} m={cfg.m}  K={[fmt(k) for k in spec.K]}")
    print(f"audited c = {fmt(report['audited_c'])}  a* = {fmt(report['a_star'])}")
    for d in report["discrepancies"]:
        print(f"note: {d}")
    print(f"report: {out}")
    return EXIT_OK if agree else EXIT_VIOLATION


def _monitor_summary(cfg, params, spec, sol):
    rep = monitor_orbit(params, spec, sol.orbit)
    return {
        "n": cfg.n,
        "m": cfg.m,
        "c_mode": cfg.c_mode,
        "c": params.c,
        "a0": sol.a0,
        "a2": sol.a2,
        "a4": sol.a4,
        "period": sol.period,
        "max_value": sol.max_value,
        "energy": sol.energy,
        "newton_residual": sol.newton_residual,
        "method": sol.method,
        "monitor": rep.to_dict(),
    }


def cmd_periodic(args) -> int:
    cfg = _build_config(args)
    params, spec = _derive(cfg)
    a_star = equilibrium_amplitude(params, spec)
    if not 0.0 < args.a0 < a_star:
        print(f"error: a0 must lie in (0, a*={fmt(a_star)})", file=sys.stderr)
        return EXIT_USAGE
    try:
        sol = solve_periodic(
            params, spec, args.a0, tol=cfg.tolerances(),
            horizon_mult=cfg.horizon_mult, escape_safety=cfg.escape_safety,
        )
    except (NewtonError, SeamSearchError, IntegrationError) as exc:
        print(f"error: periodic solve did not converge: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    out = cfg.out_dir()
    tag = f"a0_{args.a0:g}".replace(".", "p")
    summary = _monitor_summary(cfg, params, spec, sol)
    write_json(out / f"periodic_{tag}.json", summary)
    if cfg.format == "csv":
        write_orbit_csv(out / f"periodic_{tag}.csv", params, spec, sol.orbit)
    else:
        write_json(out / f"periodic_{tag}_orbit.json", orbit_to_json(params, spec, sol.orbit))
    if cfg.plot:
        from .plots import plot_orbit

        plot_orbit(out / f"periodic_{tag}.png", params, spec, sol.orbit,
                   title=f"a0={args.a0:g}, c-mode={cfg.c_mode}")
    print(
        f"a0={fmt(sol.a0)} a2={fmt(sol.a2)} a4={fmt(sol.a4)} period={fmt(sol.period)} "
        f"H={fmt(sol.energy)} residual={fmt(sol.newton_residual)} c-mode={cfg.c_mode}"
    )
    return EXIT_OK


def _parse_grid(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("grid must be start:stop:step or a comma list")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        vals = []
        x = start
        while x <= stop + 1e-12:
            vals.append(round(x, 12))
            x += step
        return vals
    return [float(p) for p in text.split(",") if p.strip()]


def _sweep_point(task):
    """Independent per-point solve so results never depend on job count."""
    n, m, c_mode, tol_tuple, a0 = task
    params, spec = derive_constants(n, m, c_mode)
    tol = Tolerances(*tol_tuple)
    try:
        sol = solve_periodic(params, spec, a0, method="continuation", tol=tol)
    except (NewtonError, SeamSearchError, IntegrationError, ValueError) as exc:
        return a0, None, str(exc)
    return (
        a0,
        (sol.a0, sol.a2, sol.a4, sol.period, sol.max_value, sol.energy, sol.newton_residual),
        None,
    )


def cmd_sweep(args) -> int:
    cfg = _build_config(args)
    try:
        grid = _parse_grid(args.a0)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not grid:
        print("error: empty sweep grid", file=sys.stderr)
        return EXIT_USAGE
    params, spec = _derive(cfg)
    a_star = equilibrium_amplitude(params, spec)
    if any(not 0.0 < a < a_star for a in grid):
        print(f"error: grid points must lie in (0, a*={fmt(a_star)})", file=sys.stderr)
        return EXIT_USAGE

    out = cfg.out_dir()
    points_dir = out / "sweep_points"
    points_dir.mkdir(parents=True, exist_ok=True)

    def point_path(a0: float) -> Path:
        return points_dir / f"a0_{fmt(a0)}.json"

    todo = [a for a in grid if not point_path(a).exists()]
    tol_tuple = (cfg.tol_rel, cfg.tol_abs, cfg.tol_newton)
    tasks = [(cfg.n, cfg.m, cfg.c_mode, tol_tuple, a) for a in todo]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    for a0, row, err in results:
        write_json(point_path(a0), {"a0": a0, "row": row, "error": err})

    rows, failures = [], []
    for a in grid:
        import json

        payload = json.loads(point_path(a).read_text())
        if payload["row"] is None:
            failures.append((a, payload["error"]))
            rows.append(None)
        else:
            rows.append(payload["row"])
    if cfg.format == "csv":
        write_sweep_csv(out / "sweep.csv", rows)
    else:
        keys = ("a0", "a2", "a4", "period", "max", "H", "newton_residual")
        write_json(out / "sweep.json",
                   {"rows": [dict(zip(keys, r)) for r in rows if r is not None]})
    if cfg.plot:
        from .plots import plot_sweep

        plot_sweep(out / "sweep.png", rows)
    done = sum(1 for r in rows if r is not None)
    print(f"sweep: {done}/{len(grid)} points converged; table in {out}")
    for a, msg in failures:
        print(f"  a0={a:g} failed: {msg}")
    return EXIT_OK if done else EXIT_NOCONV


def cmd_reconstruct(args) -> int:
    cfg = _build_config(args)
    params, spec = _derive(cfg)
    a_star = equilibrium_amplitude(params, spec)
    if not 0.0 < args.a0 < a_star:
        print(f"error: a0 must lie in (0, a*={fmt(a_star)})", file=sys.stderr)
        return EXIT_USAGE
    if args.r_min is not None and args.r_min <= 0:
        print("error: r-min must be positive (the origin is singular)", file=sys.stderr)
        return EXIT_USAGE
    try:
        sol = solve_periodic(params, spec, args.a0, tol=cfg.tolerances())
    except (NewtonError, SeamSearchError, IntegrationError) as exc:
        print(f"error: periodic solve did not converge: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    prof = reconstruct(params, sol, T=args.T)
    if args.r_min is not None and args.r_max is not None:
        radii = np.exp(np.linspace(np.log(args.r_min), np.log(args.r_max), args.n_radii))
    else:
        radii = np.exp(np.linspace(-1.5 * sol.period, 1.5 * sol.period, args.n_radii))
    rows = []
    for r in radii:
        r = float(r)
        u = prof.value(r)
        du = prof.radial_derivative(r)
        neg_lap = radial_polylaplacian(cfg.n, 1, prof, r)
        bilap = radial_polylaplacian(cfg.n, 2, prof, r)
        lhs = radial_polylaplacian(cfg.n, cfg.m, prof, r)
        rhs_val = params.c * u**params.p
        rows.append((r, u, du, neg_lap, bilap, abs(lhs - rhs_val) / abs(rhs_val)))
    out = cfg.out_dir()
    tag = f"a0_{args.a0:g}_T_{args.T:g}".replace(".", "p").replace("-", "m")
    if cfg.format == "csv":
        write_profile_csv(out / f"profile_{tag}.csv", rows)
    else:
        keys = ("r", "u", "du_dr", "neg_lap_u", "bilap_u", "residual")
        write_json(out / f"profile_{tag}.json",
                   {"rows": [dict(zip(keys, r)) for r in rows]})
    if cfg.plot:
        from .plots import plot_profile

        plot_profile(out / f"profile_{tag}.png", rows)
    worst = max(r[5] for r in rows)
    print(f"reconstructed a0={args.a0:g} T={args.T:g}: {len(rows)} radii, "
          f"max residual {fmt(worst)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _build_config(args)
    report = run_verify(
        n=cfg.n,
        m=cfg.m,
        c_mode=cfg.c_mode,
        seed=cfg.seed,
        perturb_k2=args.perturb_k2,
        tol=cfg.tolerances(),
    )
    out = cfg.out_dir() / "verify_report.json"
    write_json(out, report)
    for c in report["checks"]:
        print(f"{'PASS' if c['ok'] else 'FAIL'}  {c['name']}")
    if report["ok"]:
        print(f"verify: all {len(report['checks'])} checks passed; report in {out}")
        return EXIT_OK
    print(f"verify: violated invariants: {', '.join(report['failures'])}", file=sys.stderr)
    return EXIT_VIOLATION


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fowler6",
        description=(
            "Numerical laboratory for radial singular solutions of the "
            "critical sixth-order equation"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_audit = sub.add_parser("audit", help="constants and operator audit")
    _add_common(p_audit)

    p_periodic = sub.add_parser("periodic", help="solve one bounded orbit")
    _add_common(p_periodic)
    p_periodic.add_argument("--a0", type=float, required=True,
                            help="prescribed minimum, in (0, a*)")

    p_sweep = sub.add_parser("sweep", help="solve a family of orbits")
    _add_common(p_sweep)
    p_sweep.add_argument("--a0", required=True,
                         help="grid as start:stop:step or comma list")

    p_rec = sub.add_parser("reconstruct", help="rebuild the singular profile")
    _add_common(p_rec)
    p_rec.add_argument("--a0", type=float, required=True)
    p_rec.add_argument("--T", type=float, default=0.0, help="phase translation")
    p_rec.add_argument("--r-min", dest="r_min", type=float, default=None)
    p_rec.add_argument("--r-max", dest="r_max", type=float, default=None)
    p_rec.add_argument("--n-radii", dest="n_radii", type=int, default=20)

    p_verify = sub.add_parser("verify", help="run the full property suite")
    _add_common(p_verify)
    p_verify.add_argument("--perturb-k2", dest="perturb_k2", type=float,
                          default=0.0, help=argparse.SUPPRESS)

    args = parser.parse_args(argv)
    try:
        handler = {
            "audit": cmd_audit,
            "periodic": cmd_periodic,
            "sweep": cmd_sweep,
            "reconstruct": cmd_reconstruct,
            "verify": cmd_verify,
        }[args.command]
        return handler(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
