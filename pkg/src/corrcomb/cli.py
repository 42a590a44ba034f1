"""Combine, correct and evaluate panels of point forecasts.

Exit codes: 0 success, 1 invalid arguments or configuration, 2 data errors
(missing or malformed files, samples too small for the method).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import logging
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, _backend
from .combine import combine, equal_weights
from .config import RunConfig, load_config
from .core import align
from .correct import CorrectionSpec, corrected_stream
from .evaluate import acf, factor_grid_report, method_comparison, msfe
from .exceptions import DataError, ValidationError
from .gls import hildreth_lu, risk_bound_report, two_step_gls
from .ingest import (demo_bg1969, impute_forward, parse_spf, read_actuals, read_panel,
                     select_forecasters, write_panel)

log = logging.getLogger("corrcomb")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out: Path, command: str, cfg: RunConfig | None, inputs: dict, outputs: list,
                   notes: dict | None = None):
    lines = [
        f"command={command}",
        f"corrcomb_version={__version__}",
        f"python={platform.python_version()}",
        f"numpy={np.__version__}",
        f"scipy={scipy.__version__}",
        f"kernel_backend={_backend.BACKEND}",
    ]
    if cfg is not None:
        lines.append(f"config_sha256={cfg.digest()}")
        lines += [f"config.{ln}" for ln in cfg.canonical().splitlines()]
    for name, path in inputs.items():
        lines.append(f"input.{name}={path}")
        lines.append(f"input.{name}.sha256={_sha256(path)}")
    for k, v in (notes or {}).items():
        lines.append(f"note.{k}={v}")
    lines.append("outputs=" + ",".join(outputs))
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


# --- shared loading -------------------------------------------------------

def _cfg_from_args(args) -> RunConfig:
    overrides = {
        "spf_path": getattr(args, "spf", None),
        "panel_path": getattr(args, "panel", None),
        "actuals_path": getattr(args, "actuals", None),
        "indicator": getattr(args, "indicator", None),
        "column": getattr(args, "column", None),
        "h": getattr(args, "h", None),
        "origin_shift": getattr(args, "origin_shift", None),
        "output_dir": getattr(args, "out", None),
        "data_dir": getattr(args, "data_dir", None),
        "min_obs": getattr(args, "min_obs", None),
        "max_lag": getattr(args, "max_lag", None),
    }
    return load_config(getattr(args, "config", None), overrides)


def _existing(cfg: RunConfig, key: str) -> Path:
    raw = getattr(cfg, key)
    if not raw:
        raise ValidationError(f"no {key} given (config key or flag)")
    p = cfg.resolve(raw)
    if not p.is_file():
        raise FileNotFoundError(f"{key}: no such file: {p}")
    return p


def _load_panel(cfg: RunConfig, inputs: dict, balanced: bool):
    if cfg.panel_path:
        p = _existing(cfg, "panel_path")
        panel = read_panel(p)
        inputs["panel"] = p
    else:
        p = _existing(cfg, "spf_path")
        panel = parse_spf(p, cfg.indicator, cfg.spf_column, cfg.h, cfg.origin_shift)
        inputs["spf"] = p
    if cfg.min_obs > 0:
        panel = select_forecasters(panel, cfg.min_obs, cfg.named_mask("selection_mask"))
    if balanced and cfg.impute == "forward":
        panel = impute_forward(panel)
    return panel


def _load_actuals(cfg: RunConfig, inputs: dict):
    p = _existing(cfg, "actuals_path")
    inputs["actuals"] = p
    return read_actuals(p, cfg.actuals_transform)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _mapping_note(cfg: RunConfig) -> dict:
    return {"horizon_mapping": f"{cfg.spf_column} -> h={cfg.h}, origin = survey quarter"
                               f" {cfg.origin_shift:+d}"}


# --- subcommands -----------------------------------------------------------

def cmd_demo(args) -> int:
    panel, actuals, seed = demo_bg1969()
    s = align(panel, actuals)
    E = s.errors
    comb = combine(equal_weights(len(s.ids)), s.F)
    stream = corrected_stream(comb, s.y, CorrectionSpec.fixed(args.gamma), s.targets,
                              seed=None if args.no_seed else seed)
    cols = [E[:, 0], E[:, 1], s.y - comb, stream.errors]
    names = ["ES", "BJ", "combined", "corrected"]
    ms = [msfe(c) for c in cols]
    print(f"combination vs best individual: {100 * (1 - ms[2] / min(ms[:2])):.1f}% lower MSFE; "
          f"correction vs combination: {100 * (1 - ms[3] / ms[2]):.1f}% lower MSFE")
    print(f"{'period':<9}" + "".join(f"{n:>11}" for n in names))
    for i, t in enumerate(s.targets):
        print(f"{str(t):<9}" + "".join(f"{c[i]:>11g}" for c in cols))
    print(f"{'MSFE':<9}" + "".join(f"{m:>11.2f}" for m in ms))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "bg1969.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["period", *names])
            for i, t in enumerate(s.targets):
                w.writerow([t, *(repr(float(c[i])) for c in cols)])
            w.writerow(["MSFE", *(repr(m) for m in ms)])
        write_manifest(out, f"demo {args.dataset}", None, {}, ["bg1969.csv"],
                       {"gamma": args.gamma, "seed_prior": None if args.no_seed else seed})
    return EXIT_OK


def cmd_ingest(args) -> int:
    cfg = _cfg_from_args(args)
    inputs = {}
    panel = _load_panel(cfg, inputs, balanced=True)
    out = _outdir(cfg)
    name = f"panel_{cfg.indicator}.csv"
    write_panel(panel, out / name)
    write_manifest(out, "ingest", cfg, inputs, [name],
                   {**_mapping_note(cfg), "forecasters": len(panel.forecaster_ids),
                    "entries": len(panel), "imputed_share": f"{panel.imputation_share():.6f}"})
    print(f"{len(panel.forecaster_ids)} forecasters, {len(panel)} entries -> {out / name}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _cfg_from_args(args)
    inputs = {}
    panel = _load_panel(cfg, inputs, balanced=False)
    actuals = _load_actuals(cfg, inputs)
    report = factor_grid_report(panel, actuals, cfg.mask_objects(), cfg.factors, cfg.hist,
                                cfg.exclusion_mask(), cfg.period("t0"), indicator=cfg.indicator)
    out = _outdir(cfg)
    name = f"factor_grid_{cfg.indicator}.csv"
    report.to_csv(out / name)
    (out / f"factor_grid_{cfg.indicator}.txt").write_text(report.to_text() + "\n")
    write_manifest(out, "evaluate", cfg, inputs, [name, f"factor_grid_{cfg.indicator}.txt"],
                   _mapping_note(cfg))
    print(report.to_text())
    return EXIT_OK


def _comparison(cfg, inputs):
    panel = _load_panel(cfg, inputs, balanced=True)
    actuals = _load_actuals(cfg, inputs)
    mask = cfg.named_mask("compare_mask")
    return method_comparison(panel, actuals, mask, cfg.period("eval_start"), cfg.period("t0"),
                             cfg.fixed_gamma, exclusion=cfg.exclusion_mask(),
                             min_window=cfg.min_window or None, hl_step=cfg.hl_step)


def cmd_compare(args) -> int:
    cfg = _cfg_from_args(args)
    inputs = {}
    table = _comparison(cfg, inputs)
    out = _outdir(cfg)
    name = f"compare_{cfg.indicator}.csv"
    table.to_csv(out / name)
    write_manifest(out, "compare", cfg, inputs, [name],
                   {**_mapping_note(cfg), "dropped_eval_periods": len(table.dropped),
                    "opt_gamma_mean": table.opt_gamma["mean"],
                    "opt_gamma_ols": table.opt_gamma["ols"]})
    print(table.to_text())
    return EXIT_OK


def cmd_acf(args) -> int:
    cfg = _cfg_from_args(args)
    out = _outdir(cfg)
    inputs, outputs, series = {}, [], {}
    if args.errors:
        p = Path(args.errors)
        if not p.is_file():
            raise FileNotFoundError(f"errors: no such file: {p}")
        inputs["errors"] = p
        with open(p, newline="") as fh:
            vals = []
            for row in csv.reader(fh):
                try:
                    vals.append(float(row[-1]))
                except (ValueError, IndexError):
                    continue
        series["errors"] = np.array(vals)
    else:
        table = _comparison(cfg, inputs)
        roll, ok = table.rolling, table.eval_rows
        y = roll.sample.y[ok]
        for label in ("mean", f"mean+fixed({cfg.fixed_gamma:g})", "mean+hist", "ols",
                      "ols+hist", "gls"):
            series[label] = y - roll.forecasts[label][ok]
    for label, e in series.items():
        res = acf(e, min(cfg.max_lag, e.size - 1))
        name = "acf_" + "".join(c if c.isalnum() else "_" for c in label) + ".csv"
        res.to_csv(out / name)
        outputs.append(name)
        print(f"{label:<20} rho1={res.rho[0]: .3f} band={res.band:.3f} "
              f"lags outside band: {res.outside_band().tolist()}")
    write_manifest(out, "acf", cfg, inputs, outputs)
    return EXIT_OK


def cmd_gls(args) -> int:
    cfg = _cfg_from_args(args)
    inputs = {}
    panel = _load_panel(cfg, inputs, balanced=True)
    actuals = _load_actuals(cfg, inputs)
    mask = cfg.named_mask("compare_mask")
    s = align(panel, actuals)
    s = s.select([mask.contains(t) for t in s.targets])
    fit = hildreth_lu(s.F, s.y, cfg.h, step=cfg.hl_step, ids=s.ids)
    two = two_step_gls(s.F, s.y, cfg.h, ids=s.ids)
    g_true = fit.gamma if args.gamma_true is None else args.gamma_true
    g_hat = two.gamma if args.gamma_hat is None else args.gamma_hat
    rep = risk_bound_report(s.F, s.y, g_true, g_hat, args.c, cfg.h)
    out = _outdir(cfg)
    with open(out / "gls_fit.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "gamma", *[f"w_{i}" for i in s.ids]])
        w.writerow(["hildreth_lu", repr(fit.gamma), *(repr(x) for x in fit.weights.w)])
        w.writerow(["two_step", repr(two.gamma), *(repr(x) for x in two.weights.w)])
        w.writerow(["ols", "", *(repr(x) for x in two.ols_weights.w)])
    with open(out / "risk_bound.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "value"])
        for k in ("a_T", "c", "risk_opt", "emp_risk_hat", "risk_hat"):
            w.writerow([k, repr(getattr(rep, k))])
        for i, (g, b) in enumerate(zip(rep.gaps, rep.bounds), start=1):
            w.writerow([f"gap{i}", repr(g)])
            w.writerow([f"bound{i}", repr(b)])
        w.writerow(["holds", int(rep.holds)])
        w.writerow(["premise_holds", int(rep.premise_holds)])
    write_manifest(out, "gls", cfg, inputs, ["gls_fit.csv", "risk_bound.csv"],
                   {**_mapping_note(cfg), "rows": len(s.targets),
                    "gamma_true": g_true, "gamma_hat": g_hat})
    print(f"Hildreth-Lu: gamma={fit.gamma:.4f} weights={np.round(fit.weights.w, 4).tolist()}")
    print(f"two-step:    gamma={two.gamma:.4f} weights={np.round(two.weights.w, 4).tolist()}")
    print(f"risk bounds: a_T={rep.a_T:.4g} c={rep.c:.4g} gaps={[f'{g:.4g}' for g in rep.gaps]} "
          f"bounds={[f'{b:.4g}' for b in rep.bounds]} holds={rep.holds}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="corrcomb", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("demo", help="replicate the 1953 two-forecaster example")
    d.add_argument("dataset", choices=["bg1969"])
    d.add_argument("--gamma", type=float, default=0.5)
    d.add_argument("--no-seed", action="store_true", help="leave the first month uncorrected")
    d.add_argument("--out", help="directory for CSV output and manifest")
    d.set_defaults(func=cmd_demo)

    def common(sp, actuals=True):
        sp.add_argument("--config")
        sp.add_argument("--spf", help="SPF-style CSV (YEAR,QUARTER,ID,...)")
        sp.add_argument("--panel", help="normalized panel CSV written by 'ingest'")
        if actuals:
            sp.add_argument("--actuals", help="CSV of period,value")
        sp.add_argument("--indicator")
        sp.add_argument("--column")
        sp.add_argument("--h", type=int)
        sp.add_argument("--origin-shift", type=int)
        sp.add_argument("--min-obs", type=int)
        sp.add_argument("--data-dir")
        sp.add_argument("--out")

    sp = sub.add_parser("ingest", help="SPF CSV -> normalized panel file")
    common(sp, actuals=False)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("evaluate", help="relative RMSFE over windows x correction factors")
    common(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("compare", help="rolling comparison of combination methods")
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("acf", help="autocorrelation of forecast errors")
    common(sp)
    sp.add_argument("--errors", help="CSV whose last column holds an error series")
    sp.add_argument("--max-lag", type=int)
    sp.set_defaults(func=cmd_acf)

    sp = sub.add_parser("gls", help="joint weight / AR fit and risk-bound diagnostic")
    common(sp)
    sp.add_argument("--gamma-true", type=float)
    sp.add_argument("--gamma-hat", type=float)
    sp.add_argument("--c", type=float)
    sp.set_defaults(func=cmd_gls)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"corrcomb: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"corrcomb: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
