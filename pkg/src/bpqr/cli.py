"""Batch front-end: simulate, fit, diagnose, and effects subcommands.

Configuration is a flat JSON document with dotted keys; command-line flags
win over the file, which wins over built-in defaults. The environment
variable ``BPQR_SEED`` overrides the default seed when neither the config
nor ``--seed`` supplies one. Exit codes: 0 success, 2 configuration error,
3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import diagnostics, effects, plots
from .distributions import RngStream
from .errors import BpqrError, ConfigError, DataError, NumericError
from .io import (apply_preprocessing, ingest_panel_csv, quantile_tag,
                 read_draws_csv, write_draws_csv, write_json, write_panel_csv)
from .model import ModelSpec, SamplerConfig
from .sampler_blocked import run_chain_blocked
from .sampler_nonblocked import run_chain_nonblocked
from .simgen import SimSpec, generate

DEFAULTS = {
    "data.path": None,
    "output.dir": ".",
    "model.quantiles": [0.5],
    "model.mundlak": None,            # covariate names; None = all covariates
    "prior.beta_mean": 0.0,
    "prior.beta_var": 1000.0,
    "prior.zeta_mean": 0.0,
    "prior.zeta_var": 1000.0,
    "prior.c1": 10.0,
    "prior.d1": 9.0,
    "sampler.iterations": 16000,
    "sampler.burn_in": 1000,
    "sampler.thin": 10,
    "sampler.algorithm": "blocked",
    "sampler.seed": None,
    "sampler.store_alpha": True,
    "sim.n": 1000,
    "sim.t_min": 5,
    "sim.t_max": 15,
    "sim.beta": [0.5, 1.0, 0.6, -0.8],
    "sim.zeta": [-1.0, 1.0],
    "sim.sigma_alpha_sq": 1.0,
    "sim.p": 0.5,
    "sim.x_low": -2.0,
    "sim.x_high": 2.0,
    "sim.mundlak": ["x3", "x4"],
    "preprocess.demean": [],
    "preprocess.scale": {},
    "report.plots": True,
}

DEFAULT_SEED = 20200117


def load_config(path, overrides) -> dict:
    cfg = dict(DEFAULTS)
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file {path} is not valid JSON: {err}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        for key, val in doc.items():
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = val
    for key, raw in overrides or []:
        if key not in cfg:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            cfg[key] = json.loads(raw)
        except json.JSONDecodeError:
            cfg[key] = raw
    return cfg


def resolve_seed(cfg, flag_seed) -> int:
    if flag_seed is not None:
        return int(flag_seed)
    if cfg["sampler.seed"] is not None:
        return int(cfg["sampler.seed"])
    env = os.environ.get("BPQR_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"BPQR_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _check_quantiles(quantiles) -> list:
    if not quantiles:
        raise ConfigError("model.quantiles: at least one quantile required")
    out = []
    for p in quantiles:
        p = float(p)
        if not 0.0 < p < 1.0:
            raise ConfigError(f"model.quantiles: p={p:g} outside (0, 1)")
        out.append(p)
    return out


def cmd_simulate(cfg, out_dir, seed) -> int:
    p = float(cfg["sim.p"])
    if not 0.0 < p < 1.0:
        raise ConfigError(f"sim.p: p={p:g} outside (0, 1)")
    spec = SimSpec(n=int(cfg["sim.n"]), t_min=int(cfg["sim.t_min"]),
                   t_max=int(cfg["sim.t_max"]), beta_true=tuple(cfg["sim.beta"]),
                   zeta_true=tuple(cfg["sim.zeta"]),
                   sigma_alpha_sq_true=float(cfg["sim.sigma_alpha_sq"]), p=p,
                   x_low=float(cfg["sim.x_low"]), x_high=float(cfg["sim.x_high"]),
                   mundlak_cols=_sim_mundlak_indices(cfg), seed=seed)
    sim = generate(spec)
    panel = sim.panel

    out_dir.mkdir(parents=True, exist_ok=True)
    ids_rows = np.repeat(panel.ids, panel.lengths)
    ts = np.concatenate([np.arange(1, t + 1) for t in panel.lengths])
    write_panel_csv(out_dir / "data.csv", ids_rows, ts, panel.y,
                    panel.X[:, 1:], panel.colnames[1:])
    write_json(out_dir / "truth.json", {
        "seed": seed,
        "p": spec.p,
        "n": spec.n,
        "t_min": spec.t_min,
        "t_max": spec.t_max,
        "beta": list(spec.beta_true),
        "zeta": list(spec.zeta_true),
        "sigma_alpha_sq": spec.sigma_alpha_sq_true,
        "mundlak_cols": [panel.colnames[c] for c in panel.mundlak_cols],
        "total_obs": panel.total_obs,
        "count_zeros": sim.count_zeros,
        "count_ones": sim.count_ones,
    })
    print(f"wrote {out_dir / 'data.csv'} ({panel.total_obs} rows) and truth.json")
    return 0


def _sim_mundlak_indices(cfg) -> tuple:
    k = len(cfg["sim.beta"])
    names = [f"x{j + 2}" for j in range(k - 1)]
    cols = []
    for name in cfg["sim.mundlak"]:
        if name not in names:
            raise ConfigError(f"sim.mundlak: unknown covariate {name!r}")
        cols.append(names.index(name) + 1)
    return tuple(cols)


def _load_panel(cfg, data_path):
    path = data_path or cfg["data.path"]
    if path is None:
        raise ConfigError("data.path: no data file given")
    panel = ingest_panel_csv(path, mundlak_cols=cfg["model.mundlak"])
    panel, record = apply_preprocessing(panel, demean=cfg["preprocess.demean"],
                                        scale=cfg["preprocess.scale"])
    return panel, str(path), record


def cmd_fit(cfg, out_dir, seed, quantiles, algorithm, data_path=None) -> int:
    panel, data_path, prep = _load_panel(cfg, data_path)
    quantiles = _check_quantiles(quantiles or cfg["model.quantiles"])
    algorithm = algorithm or cfg["sampler.algorithm"]
    runner = {"nonblocked": run_chain_nonblocked,
              "blocked": run_chain_blocked}.get(algorithm)
    if runner is None:
        raise ConfigError(f"sampler.algorithm: unknown algorithm {algorithm!r}")

    out_dir.mkdir(parents=True, exist_ok=True)
    root = RngStream(seed)
    for idx, p in enumerate(quantiles):
        spec = ModelSpec.with_default_priors(
            p, panel.k, panel.q,
            beta_mean=cfg["prior.beta_mean"], beta_var=cfg["prior.beta_var"],
            zeta_mean=cfg["prior.zeta_mean"], zeta_var=cfg["prior.zeta_var"],
            c1=cfg["prior.c1"], d1=cfg["prior.d1"])
        config = SamplerConfig(iterations=int(cfg["sampler.iterations"]),
                               burn_in=int(cfg["sampler.burn_in"]),
                               thin=int(cfg["sampler.thin"]), seed=seed,
                               algorithm=algorithm,
                               store_alpha=bool(cfg["sampler.store_alpha"]))
        config.validate()
        draws = runner(panel, spec, config, root.substream("chain", idx))
        tag = quantile_tag(p)
        write_draws_csv(out_dir / f"draws_{tag}.csv", draws)
        meta = dict(draws.meta)
        meta.update({
            "chain_index": idx,
            "data_path": data_path,
            "preprocess": prep,
            "columns": panel.colnames,
            "mundlak_cols": [panel.colnames[c] for c in panel.mundlak_cols],
            "priors": {
                "beta_mean": cfg["prior.beta_mean"], "beta_var": cfg["prior.beta_var"],
                "zeta_mean": cfg["prior.zeta_mean"], "zeta_var": cfg["prior.zeta_var"],
                # inverse-gamma on sigma_alpha^2 has shape c1/2 and scale d1/2,
                # density proportional to x^-(c1/2+1) exp(-d1/(2x))
                "c1": cfg["prior.c1"], "d1": cfg["prior.d1"],
            },
        })
        write_json(out_dir / f"meta_{tag}.json", meta)
        print(f"p={p:g}: {draws.kept} kept draws -> draws_{tag}.csv "
              f"({meta['wall_time_s']:.1f}s)")
    return 0


def cmd_diagnose(cfg, draws_path, out_dir) -> int:
    draws = read_draws_csv(draws_path)
    summaries = diagnostics.summarize(draws)
    out_dir.mkdir(parents=True, exist_ok=True)

    header = ["parameter", "mean", "std", "hpdi_lo", "hpdi_hi", "if",
              "geweke_z", "acf1", "acf5", "acf10"]
    lines = [",".join(header)]
    for s in summaries:
        lines.append(",".join([s.name] + [repr(v) for v in
                                          (s.mean, s.std, s.hpdi_lo, s.hpdi_hi,
                                           s.ineff, s.geweke, s.acf1, s.acf5,
                                           s.acf10)]))
    (out_dir / "summary.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_json(out_dir / "summary.json",
               {s.name: {"mean": s.mean, "std": s.std, "median": s.median,
                         "hpdi": [s.hpdi_lo, s.hpdi_hi], "if": s.ineff,
                         "geweke_z": s.geweke,
                         "acf": {"1": s.acf1, "5": s.acf5, "10": s.acf10}}
                for s in summaries})
    if cfg["report.plots"]:
        plots.trace_and_acf_figure(draws.param_names(), draws.param_matrix(),
                                   out_dir / "trace_acf.png")
        plots.diagnostics_figure(summaries, out_dir / "diagnostics.png")
    print(f"wrote summary for {len(summaries)} parameters to {out_dir / 'summary.csv'}")
    return 0


def cmd_effects(cfg, draws_paths, data_path, covariate, value_a, value_b,
                out_dir, quantile=None) -> int:
    panel, _, _ = _load_panel(cfg, data_path)
    if covariate not in panel.colnames[1:]:
        raise ConfigError(f"contrast covariate {covariate!r} not in the data")
    contrast = effects.Contrast(col=panel.colnames.index(covariate),
                                a=float(value_a), b=float(value_b))

    blocks = []
    for path in draws_paths:
        draws = read_draws_csv(path)
        p = quantile if quantile is not None else draws.meta.get("p")
        if p is None:
            raise ConfigError(f"{path}: quantile unknown; pass --quantile or "
                              "keep the meta json next to the draws file")
        ame = effects.average_marginal_effect(draws, panel, contrast, float(p))
        rr = effects.relative_risk(draws, panel, contrast, float(p))
        orr = effects.odds_ratio(draws, panel, contrast, float(p))
        blocks.append({
            "p": float(p),
            "draws_file": str(path),
            "covariate": covariate,
            "from": contrast.a,
            "to": contrast.b,
            "ame": {"mean": ame.mean, "std": ame.std, "hpdi": [ame.hpdi_lo, ame.hpdi_hi]},
            "rr": {"mean": rr.mean, "std": rr.std, "hpdi": [rr.hpdi_lo, rr.hpdi_hi]},
            "or": {"mean": orr.mean, "std": orr.std, "hpdi": [orr.hpdi_lo, orr.hpdi_hi]},
        })
    blocks.sort(key=lambda b: b["p"])

    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "effects.json", {"quantiles": blocks})
    if cfg["report.plots"]:
        plots.effects_figure(blocks, out_dir / "effects.png")
    print(f"wrote effects for {len(blocks)} quantile(s) to {out_dir / 'effects.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bpqr",
        description="Bayesian quantile regression for binary panel outcomes "
                    "with correlated random effects")
    parser.add_argument("--config", help="JSON config with flat dotted keys")
    parser.add_argument("--set", dest="overrides", nargs=2, action="append",
                        metavar=("KEY", "VALUE"), help="override a config key")
    parser.add_argument("--seed", type=int, help="random seed (beats config and env)")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--no-plots", dest="plots", action="store_false",
                        default=None, help="skip figure rendering")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", help="generate a synthetic panel and its truth")

    fit = sub.add_parser("fit", help="estimate the model on a panel CSV")
    fit.add_argument("--data", help="panel CSV path")
    fit.add_argument("--quantile", type=float, action="append",
                     help="quantile to fit; repeatable")
    fit.add_argument("--algorithm", choices=["nonblocked", "blocked"])
    fit.add_argument("--iterations", type=int)
    fit.add_argument("--burn-in", type=int, dest="burn_in")
    fit.add_argument("--thin", type=int)
    fit.add_argument("--store-alpha", dest="store_alpha", action="store_true",
                     default=None)
    fit.add_argument("--no-store-alpha", dest="store_alpha", action="store_false")
    fit.add_argument("--demean", action="append", default=None, metavar="COL")
    fit.add_argument("--scale", nargs=2, action="append", default=None,
                     metavar=("COL", "FACTOR"))

    diag = sub.add_parser("diagnose", help="summarize a draws file")
    diag.add_argument("draws", help="draws CSV path")

    eff = sub.add_parser("effects", help="marginal effect, relative risk, odds ratio")
    eff.add_argument("--draws", action="append", required=True,
                     help="draws CSV path; repeatable for multiple quantiles")
    eff.add_argument("--data", help="panel CSV path")
    eff.add_argument("--covariate", required=True)
    eff.add_argument("--from", dest="value_a", required=True, type=float)
    eff.add_argument("--to", dest="value_b", required=True, type=float)
    eff.add_argument("--quantile", type=float, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        if args.plots is not None:
            cfg["report.plots"] = args.plots
        if getattr(args, "iterations", None) is not None:
            cfg["sampler.iterations"] = args.iterations
        if getattr(args, "burn_in", None) is not None:
            cfg["sampler.burn_in"] = args.burn_in
        if getattr(args, "thin", None) is not None:
            cfg["sampler.thin"] = args.thin
        if getattr(args, "store_alpha", None) is not None:
            cfg["sampler.store_alpha"] = args.store_alpha
        if getattr(args, "demean", None) is not None:
            cfg["preprocess.demean"] = args.demean
        if getattr(args, "scale", None) is not None:
            cfg["preprocess.scale"] = {col: float(fac) for col, fac in args.scale}
        seed = resolve_seed(cfg, args.seed)
        out_dir = Path(args.out) if args.out is not None else Path(cfg["output.dir"])

        if args.command == "simulate":
            return cmd_simulate(cfg, out_dir, seed)
        if args.command == "fit":
            return cmd_fit(cfg, out_dir, seed, args.quantile, args.algorithm,
                           args.data)
        if args.command == "diagnose":
            return cmd_diagnose(cfg, Path(args.draws), out_dir)
        if args.command == "effects":
            return cmd_effects(cfg, [Path(p) for p in args.draws], args.data,
                               args.covariate, args.value_a, args.value_b,
                               out_dir, args.quantile)
        raise ConfigError(f"unknown command {args.command!r}")
    except BpqrError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code
    except (ValueError, TypeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3 if isinstance(err, FileNotFoundError) else 1


if __name__ == "__main__":
    sys.exit(main())
