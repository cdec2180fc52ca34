"""Command line front end.

Commands: spectrum, eigs, optimize, ratio-table. All physical defaults match
the benchmark configuration, so a bare invocation reproduces the published
numbers. Exit codes: 0 success, 2 configuration error, 3 weight error,
4 non-convergence.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import galerkin, optimize, reference, spectrum, weights
from .config import PlateConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_WEIGHT = 3
EXIT_NO_CONVERGENCE = 4

FLOAT_FMT = "%.6e"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def _grid_csv(field: weights.GridField) -> str:
    lines = ["x,y,value"]
    xs, ys = field.xs, field.ys
    for i in range(field.nx):
        for j in range(field.ny):
            lines.append(f"{_fmt(xs[i])},{_fmt(ys[j])},{_fmt(field.values[i, j])}")
    return "\n".join(lines) + "\n"


def _config_from(args: argparse.Namespace) -> PlateConfig:
    nx, ny = args.grid
    if nx < 4 or ny < 3 or ny % 2 == 0:
        raise CliError(f"grid must be at least 4 x 3 with odd NY, got {nx} {ny}",
                       EXIT_CONFIG)
    try:
        return PlateConfig(ell=args.ell, sigma=args.sigma, alpha=args.alpha,
                           beta=args.beta, n_modes=args.n_modes)
    except ValueError as exc:
        raise CliError(f"invalid configuration: {exc}", EXIT_CONFIG) from exc


def _load_weight(path: str, cfg: PlateConfig) -> weights.Weight:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read weight file {path}: {exc}", EXIT_WEIGHT) from exc
    try:
        w = weights.weight_from_json(text)
    except weights.WeightError as exc:
        raise CliError(f"weight file {path}: {exc}", EXIT_WEIGHT) from exc
    report = weights.validate(w, cfg)
    if not report.passed:
        raise CliError(f"weight file {path} fails admissibility: {report.detail}",
                       EXIT_WEIGHT)
    return w


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_spectrum(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    if cfg.n_modes < 12:
        raise CliError("spectrum table needs n_modes >= 12", EXIT_CONFIG)
    spec = spectrum.build_spectrum(cfg)
    out = Path(args.out)
    lines = ["m,mu_m,nu_m"]
    for i in range(12):
        lines.append(f"{i + 1},{_fmt(spec.mu[i].lam)},{_fmt(spec.nu[i].lam)}")
    _atomic_write(out / "table1.csv", "\n".join(lines) + "\n")

    holds, s_star = spectrum.check_c0(cfg)
    meta = {
        "j0": spec.j0,
        "c0_holds": holds,
        "s_star": s_star,
        "torsional_first_threshold": math.floor(s_star),
        "nu1_mode": {"m": spec.nu[0].mode.m, "k": spec.nu[0].mode.k},
        "config": {"ell": cfg.ell, "sigma": cfg.sigma, "alpha": cfg.alpha,
                   "beta": cfg.beta, "n_modes": cfg.n_modes},
    }
    _atomic_write(out / "spectrum_meta.json", json.dumps(meta, indent=2) + "\n")
    print(f"wrote {out / 'table1.csv'} and spectrum_meta.json (j0={spec.j0})")
    return EXIT_OK


def cmd_eigs(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    w = _load_weight(args.weight, cfg)
    spec = spectrum.build_spectrum(cfg)
    gs = galerkin.solve_weighted(w, spec)
    out = Path(args.out)
    lines = ["index,parity,value"]
    for i, v in enumerate(gs.mu_p, 1):
        lines.append(f"{i},even,{_fmt(v)}")
    for i, v in enumerate(gs.nu_p, 1):
        lines.append(f"{i},odd,{_fmt(v)}")
    _atomic_write(out / "eigenvalues.csv", "\n".join(lines) + "\n")
    written = ["eigenvalues.csv"]
    if args.reconstruct:
        parity, idx = args.reconstruct
        if parity not in ("even", "odd"):
            raise CliError(f"reconstruct parity must be 'even' or 'odd', "
                           f"got {parity!r}", EXIT_CONFIG)
        try:
            idx = int(idx)
        except ValueError as exc:
            raise CliError(f"reconstruct index must be an integer: {idx!r}",
                           EXIT_CONFIG) from exc
        fld = galerkin.reconstruct(gs, spec, (parity, idx), tuple(args.grid))
        name = f"eigenfunction_{parity}_{idx}.csv"
        _atomic_write(out / name, _grid_csv(fld))
        written.append(name)
    print(f"wrote {', '.join(written)} in {out}")
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    spec = spectrum.build_spectrum(cfg)
    grid = tuple(args.grid)
    if args.target == "min-mu":
        trace = optimize.minimize_mu_j(args.j, cfg, epsilon=args.epsilon,
                                       max_iters=args.max_iters,
                                       spectrum=spec, grid=grid)
    else:
        trace = optimize.maximize_nu1_fixed_point(cfg, max_iters=args.max_iters,
                                                  spectrum=spec, grid=grid)
    out = Path(args.out)
    _atomic_write(out / "trace.jsonl", optimize.trace_to_jsonl(trace))
    final = trace.final_weight
    _atomic_write(out / "final_weight.json", weights.weight_to_json(final) + "\n")

    meta = {
        "target": trace.target,
        "stop_reason": trace.stop_reason,
        "iterations": len(trace.iterates),
        "final_eigenvalue": trace.final_value,
        "epsilon": trace.epsilon,
    }
    v = final.variant
    if isinstance(v, weights.Sublevel):
        meta["threshold"] = v.threshold
        meta["tie_fraction"] = v.tie_fraction
        _atomic_write(out / "field.csv", _grid_csv(v.field))
        indicator = weights.GridField(v.inside_mask().astype(float), v.field.ell)
        _atomic_write(out / "sset.csv", _grid_csv(indicator))
    if args.sin4_compare and args.target == "min-mu" and args.j >= 2:
        meta["sin4_threshold"] = weights.pj_sin4_threshold(args.j, cfg)
        meta["sin4_threshold_exact"] = weights.sin4_level_exact(cfg)
    _atomic_write(out / "optimize_meta.json", json.dumps(meta, indent=2) + "\n")
    print(f"{trace.target}: {trace.stop_reason} after {len(trace.iterates)} iterates, "
          f"final value {_fmt(trace.final_value)} (files in {out})")
    return EXIT_OK if trace.stop_reason != optimize.MAX_ITERS else EXIT_NO_CONVERGENCE


def cmd_ratio_table(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    if cfg.n_modes < 12:
        raise CliError("ratio table needs n_modes >= 12", EXIT_CONFIG)
    spec = spectrum.build_spectrum(cfg)
    study = optimize.default_study_weights(cfg, spec, tuple(args.grid))
    report = optimize.ratio_study(study, cfg, spec, n=min(cfg.n_modes, 30))
    out = Path(args.out)
    _atomic_write(out / "ratio_table.csv", optimize.ratio_report_to_csv(report))

    # deviations against the benchmark columns (reference configuration only)
    lines = ["quantity," + ",".join(r.label for r in report.rows)]
    quantities = [f"mu_{i + 1}" for i in range(12)] + ["nu_1", "nu_2", "R"]
    for qi, q in enumerate(quantities):
        cells = []
        for row in report.rows:
            ref = reference.RATIO_TABLE.get(row.label)
            if ref is None:
                cells.append("")
                continue
            ref_mu, ref_nu, ref_r = ref
            if qi < 12:
                val, ref_val = row.mu[qi], ref_mu[qi]
            elif q == "nu_1":
                val, ref_val = row.nu1, ref_nu[0]
            elif q == "nu_2":
                val, ref_val = row.nu2, ref_nu[1]
            else:
                val, ref_val = row.ratio, ref_r
            cells.append(_fmt(abs(val - ref_val) / abs(ref_val)))
        lines.append(f"{q}," + ",".join(cells))
    _atomic_write(out / "ratio_table_deviation.csv", "\n".join(lines) + "\n")
    written = ["ratio_table.csv", "ratio_table_deviation.csv"]

    if args.weyl:
        n_weyl = max(cfg.n_modes, 250)
        spec_w = spectrum.build_spectrum(cfg.with_(n_modes=n_weyl), cap=max(500, n_weyl))
        merged = galerkin.merged_eigenvalues(spec_w)
        hi = min(400, merged.size)
        rep = galerkin.weyl_diagnostic(weights.make_uniform(cfg), merged,
                                       (hi // 2, hi), cfg)
        wl = ["h,lambda_h,ratio"]
        for h, lam, r in zip(rep.h, rep.lam, rep.ratio):
            wl.append(f"{h},{_fmt(lam)},{_fmt(r)}")
        _atomic_write(out / "weyl.csv", "\n".join(wl) + "\n")
        _atomic_write(out / "weyl_meta.json", json.dumps({
            "median_ratio": rep.median_ratio,
            "top_half_spread": rep.top_half_spread,
            "window": [int(rep.h[0]), int(rep.h[-1])],
        }, indent=2) + "\n")
        written += ["weyl.csv", "weyl_meta.json"]
    print(f"wrote {', '.join(written)} in {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ell", type=float, default=math.pi / 150,
                   help="half-width of the plate (default pi/150)")
    p.add_argument("--sigma", type=float, default=0.2, help="Poisson ratio")
    p.add_argument("--alpha", type=float, default=0.5, help="lower density bound")
    p.add_argument("--beta", type=float, default=1.5, help="upper density bound")
    p.add_argument("--n-modes", type=int, default=30, dest="n_modes",
                   help="basis truncation per parity")
    p.add_argument("--grid", type=int, nargs=2, default=(600, 31),
                   metavar=("NX", "NY"), help="cell grid for field output")
    p.add_argument("--out", type=str, default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plate-spectra",
        description="Weighted eigenvalues of a partially hinged plate and "
                    "bang-bang density optimization.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="uniform-plate eigenvalue table")
    _add_common(p)
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("eigs", help="weighted eigenvalues for a weight spec file")
    _add_common(p)
    p.add_argument("--weight", required=True, help="weight spec JSON file")
    p.add_argument("--reconstruct", nargs=2, metavar=("PARITY", "INDEX"),
                   help="also write one reconstructed eigenfunction grid")
    p.set_defaults(fn=cmd_eigs)

    p = sub.add_parser("optimize", help="run a density optimization")
    _add_common(p)
    p.add_argument("--target", choices=["min-mu", "max-nu1"], required=True)
    p.add_argument("--j", type=int, default=1, help="eigenvalue index for min-mu")
    p.add_argument("--epsilon", type=float, default=1e-4,
                   help="relative stop tolerance for min-mu")
    p.add_argument("--max-iters", type=int, default=100, dest="max_iters")
    p.add_argument("--sin4-compare", action="store_true", dest="sin4_compare",
                   help="record the banded sin^4 threshold for comparison")
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("ratio-table", help="benchmark table over the six study weights")
    _add_common(p)
    p.add_argument("--weyl", action="store_true",
                   help="append the asymptotic-growth diagnostic")
    p.set_defaults(fn=cmd_ratio_table)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except weights.WeightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_WEIGHT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
