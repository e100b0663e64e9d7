"""Command-line front end.

Experiments are described by plain ``key = value`` config files and run via
subcommands::

    stablewalk simulate  cfg/sim.cfg      # hitting-time batch -> samples CSV
    stablewalk analyze   cfg/analyze.cfg  # samples CSV vs limit law -> KS JSON
    stablewalk rate      cfg/rate.cfg     # epsilon ladder -> slope JSON
    stablewalk limit-law cfg/law.cfg      # limit CDF via all routes -> CSV
    stablewalk local-limit cfg/probe.cfg  # window probability probe -> JSON
    stablewalk report    cfg/report.cfg   # samples CSV summary -> JSON

Every command prints a one-object JSON summary on stdout and writes its file
artifacts to the config's ``out`` path (``analyze`` and ``rate`` also write a
``<out>.plot.csv`` companion).  Exit codes: 0 success, 2 validation failure,
3 I/O failure, 4 statistical refusal (for example a truncation point inside
the censored region).  The worker count for simulation honors the
STABLEWALK_WORKERS environment variable and never changes results.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import limit_laws as ll
from . import stats
from . import walk_engine as we
from .errors import RefinementError, StatisticalRefusal, ValidationError
from .jump_models import (limit_density_at_zero, parse_model,
                          recurrence_constant)
from .normalization import NormalizerG

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_REFUSAL = 4

SCALE_G = "g"
SCALE_RAW = "raw"
SCALE_COROLLARY = "corollary"

_KEYS = {
    "simulate": {"required": {"model", "x", "epsilon", "initial", "cap",
                              "trials", "seed", "out"},
                 "optional": set()},
    "analyze": {"required": {"samples", "scale", "t_max", "out"},
                "optional": {"model"}},
    "rate": {"required": {"model", "x", "epsilon_ladder", "cap", "trials",
                          "seed", "out"},
             "optional": set()},
    "limit-law": {"required": {"t_max", "out"},
                  "optional": {"alpha", "beta", "grid", "nodes"}},
    "local-limit": {"required": {"model", "steps", "half_width", "trials",
                                 "seed", "out"},
                    "optional": set()},
    "report": {"required": {"samples", "out"}, "optional": set()},
}


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """A parsed, validated experiment description."""

    experiment: str
    fields: Tuple[Tuple[str, str], ...]  # canonical (key, value) pairs, sorted

    def get(self, key: str) -> Optional[str]:
        for k, v in self.fields:
            if k == key:
                return v
        return None

    def canonical_text(self) -> str:
        lines = [f"experiment = {self.experiment}"]
        lines += [f"{k} = {v}" for k, v in self.fields]
        return "\n".join(lines) + "\n"


def _canonicalize(experiment: str, key: str, raw: str) -> str:
    """Normalize a raw config value; raises ValidationError on bad values."""
    try:
        if key in ("model",):
            return parse_model(raw).descriptor()
        if key in ("initial",):
            return we.parse_initial(raw).descriptor()
        if key in ("x", "epsilon", "t_max", "half_width", "alpha", "beta"):
            return repr(float(raw))
        if key in ("cap", "trials", "seed", "grid", "nodes", "steps"):
            return str(int(raw))
        if key == "epsilon_ladder":
            vals = [float(v) for v in raw.split(",") if v.strip()]
            return ",".join(repr(v) for v in vals)
        if key == "scale":
            if raw not in (SCALE_G, SCALE_RAW, SCALE_COROLLARY):
                raise ValidationError(f"unknown scale {raw!r}")
            return raw
        return raw  # paths: samples, out
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError(f"bad value for key '{key}': {exc}") from None


def parse_config(text: str, experiment: str) -> ExperimentConfig:
    """Parse and validate ``key = value`` lines for the given experiment."""
    spec = _KEYS.get(experiment)
    if spec is None:
        raise ValidationError(f"unknown experiment {experiment!r}")
    raw: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in raw:
            raise ValidationError(f"duplicate key '{key}'")
        raw[key] = value
    declared = raw.pop("experiment", None)
    if declared is not None and declared != experiment:
        raise ValidationError(
            f"config declares experiment '{declared}' but command is '{experiment}'")
    allowed = spec["required"] | spec["optional"]
    unknown = set(raw) - allowed
    if unknown:
        raise ValidationError(
            f"unknown keys for experiment '{experiment}': {sorted(unknown)}")
    missing = spec["required"] - set(raw)
    if missing:
        raise ValidationError(
            f"missing required keys for experiment '{experiment}': {sorted(missing)}")
    if experiment == "limit-law" and (("alpha" in raw) == ("beta" in raw)):
        raise ValidationError("limit-law needs exactly one of 'alpha' or 'beta'")
    fields = tuple(sorted((k, _canonicalize(experiment, k, v))
                          for k, v in raw.items()))
    return ExperimentConfig(experiment=experiment, fields=fields)


def load_config(path: str, experiment: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), experiment)


# ---------------------------------------------------------------------------
# Analysis plumbing shared by analyze/acceptance
# ---------------------------------------------------------------------------

def transform_and_theory(samples: we.SampleSet, scale: str):
    """The (transform, theory CDF, law spec) triple for a sample batch.

    g-scale: the scaled eps*G(tau) display; raw: the tau/G^{-1}(1/eps)
    display (needs alpha > 1); corollary: 2 P eps sqrt(tau) for unit-variance
    jumps (alpha = 2 only).
    """
    cfg = samples.config
    model = cfg.model
    eps = cfg.epsilon
    escape = we.escape_probability_for(cfg)
    if scale == SCALE_COROLLARY:
        if model.alpha != 2.0:
            raise ValidationError("the corollary scale needs a variance-1 "
                                  "jump law with alpha = 2")
        spec = ll.LimitLawSpec(alpha=model.alpha, beta=model.beta,
                               scale_variant=ll.G_SCALE,
                               gamma=recurrence_constant(model),
                               escape_prob_x=escape)

        def transform(s):
            return 2.0 * escape * eps * np.sqrt(np.asarray(s, dtype=float))

        return transform, ll.cdf_E_over_absN, spec
    variant = ll.G_SCALE if scale == SCALE_G else ll.RAW_TAU
    spec = ll.LimitLawSpec(alpha=model.alpha, beta=model.beta,
                           scale_variant=variant,
                           gamma=recurrence_constant(model),
                           escape_prob_x=escape)
    norm = NormalizerG(model.alpha)
    factor = spec.scale_factor()
    if variant == ll.G_SCALE:
        def transform(s):
            return factor * eps * norm.g_values(np.asarray(s, dtype=float))
    else:
        g_inv = norm.g_inverse(1.0 / eps)

        def transform(s):
            return factor * np.asarray(s, dtype=float) / g_inv

    def theory(t):
        return ll.limit_cdf(spec, t)

    return transform, theory, spec


def analyze_samples(samples: we.SampleSet, scale: str, t_max: float,
                    delta: float = 1e-3):
    """KS comparison of a sample batch against its limit law."""
    if len(samples) == 0:
        raise StatisticalRefusal("no samples to analyze")
    transform, theory, spec = transform_and_theory(samples, scale)
    ecdf = stats.build_ecdf(samples, transform)
    report = stats.ks_truncated(ecdf, theory, t_max, delta=delta)
    return report, ecdf, theory


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_simulate(cfg: ExperimentConfig) -> dict:
    walk_cfg = we.WalkConfig(model=parse_model(cfg.get("model")),
                             x=float(cfg.get("x")),
                             epsilon=float(cfg.get("epsilon")),
                             initial=we.parse_initial(cfg.get("initial")),
                             cap=int(cfg.get("cap")),
                             trials=int(cfg.get("trials")),
                             master_seed=int(cfg.get("seed")))
    batch = we.run_batch(walk_cfg)
    out = cfg.get("out")
    batch.to_csv(out)
    return {"out": out, "trials": len(batch),
            "censored": batch.censored_count, "excluded": batch.excluded_count}


def _cmd_analyze(cfg: ExperimentConfig) -> dict:
    samples = we.SampleSet.from_csv(cfg.get("samples"))
    declared = cfg.get("model")
    if declared is not None and parse_model(declared) != samples.config.model:
        raise ValidationError(
            f"config model '{declared}' does not match samples file model "
            f"'{samples.config.model.descriptor()}'")
    t_max = float(cfg.get("t_max"))
    report, ecdf, theory = analyze_samples(samples, cfg.get("scale"), t_max)
    out = cfg.get("out")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    grid = np.linspace(t_max / 512.0, t_max, 512)
    with open(out + ".plot.csv", "w", encoding="utf-8") as fh:
        fh.write("t,ecdf,theory\n")
        emp = ecdf.evaluate(grid)
        th = np.asarray(theory(grid), dtype=float)
        for t, e, f in zip(grid, emp, th):
            fh.write(f"{t!r},{e!r},{f!r}\n")
    return json.loads(report.to_json()) | {"out": out}


def _cmd_rate(cfg: ExperimentConfig) -> dict:
    ladder = [float(v) for v in cfg.get("epsilon_ladder").split(",")]
    slope_input = we.rate_experiment(model=parse_model(cfg.get("model")),
                                     x=float(cfg.get("x")),
                                     eps_ladder=ladder,
                                     cap=int(cfg.get("cap")),
                                     trials_per_eps=int(cfg.get("trials")),
                                     master_seed=int(cfg.get("seed")))
    report = stats.loglog_slope(slope_input.log_eps, slope_input.log_tau,
                                slope_input.censored)
    out = cfg.get("out")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    with open(out + ".plot.csv", "w", encoding="utf-8") as fh:
        fh.write("log_eps,median_log_tau,n,n_censored\n")
        for x in np.unique(slope_input.log_eps):
            sel = slope_input.log_eps == x
            good = sel & ~slope_input.censored
            med = float(np.median(slope_input.log_tau[good])) if good.any() else math.nan
            fh.write(f"{x!r},{med!r},{int(sel.sum())},{int((sel & slope_input.censored).sum())}\n")
    return json.loads(report.to_json()) | {"out": out}


def _cmd_limit_law(cfg: ExperimentConfig) -> dict:
    if cfg.get("alpha") is not None:
        alpha = float(cfg.get("alpha"))
        if not 1.0 <= alpha <= 2.0:
            raise ValidationError(f"alpha must lie in [1, 2], got {alpha}")
        beta = math.inf if alpha == 1.0 else alpha / (alpha - 1.0)
    else:
        beta = float(cfg.get("beta"))
        if not beta >= 2.0:
            raise ValidationError(f"beta must be >= 2, got {beta}")
        alpha = beta / (beta - 1.0)
    t_max = float(cfg.get("t_max"))
    n_grid = int(cfg.get("grid") or 256)
    nodes = int(cfg.get("nodes") or 2000)
    grid = np.linspace(0.0, t_max, n_grid)
    out = cfg.get("out")
    summary = {"alpha": alpha, "beta": None if math.isinf(beta) else beta,
               "t_max": t_max, "out": out}
    if alpha == 1.0:
        columns = {"t": grid, "exact": ll.cdf_alpha1(grid)}
    else:
        # routes share the scale of the integral-equation variable W
        sol = ll.solve_volterra(alpha, t_max, nodes)
        c = ll.transform_constant(beta)
        y_samples = ll.cached_limit_samples(beta)
        w_args = grid ** (1.0 / beta) / c
        mc = np.searchsorted(y_samples, w_args, side="right") / y_samples.size
        columns = {"t": grid, "mc": mc, "volterra": sol.cdf(grid)}
        summary["max_gap_mc_volterra"] = float(np.max(np.abs(mc - columns["volterra"])))
        summary["mc_dkw"] = stats.dkw_halfwidth(y_samples.size, ll.MC_DELTA)
        if alpha == 2.0:
            columns["closed_form"] = ll.cdf_E_over_absN(
                np.sqrt(2.0 * math.pi * grid))
    with open(out, "w", encoding="utf-8") as fh:
        names = list(columns)
        fh.write(",".join(names) + "\n")
        for i in range(n_grid):
            fh.write(",".join(repr(float(columns[k][i])) for k in names) + "\n")
    return summary


def _cmd_local_limit(cfg: ExperimentConfig) -> dict:
    model = parse_model(cfg.get("model"))
    half_width = float(cfg.get("half_width"))
    probe = we.local_limit_probe(model, n=int(cfg.get("steps")),
                                 half_width=half_width,
                                 trials=int(cfg.get("trials")),
                                 master_seed=int(cfg.get("seed")))
    theory = 2.0 * half_width * limit_density_at_zero(model)
    result = {"estimate": probe.estimate, "stderr": probe.stderr,
              "theory": theory}
    with open(cfg.get("out"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(result) + "\n")
    return result | {"out": cfg.get("out")}


def _cmd_report(cfg: ExperimentConfig) -> dict:
    samples = we.SampleSet.from_csv(cfg.get("samples"))
    hits = samples.steps[~samples.censored & ~samples.excluded]
    result = {
        "trials": len(samples),
        "hits": int(hits.size),
        "censored": samples.censored_count,
        "excluded": samples.excluded_count,
        "censored_fraction": samples.censored_count / max(len(samples), 1),
        "excluded_fraction": samples.excluded_count / max(len(samples), 1),
        "hit_steps_median": float(np.median(hits)) if hits.size else None,
        "hit_steps_max": int(hits.max()) if hits.size else None,
    }
    with open(cfg.get("out"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(result) + "\n")
    return result | {"out": cfg.get("out")}


_COMMANDS = {
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "rate": _cmd_rate,
    "limit-law": _cmd_limit_law,
    "local-limit": _cmd_local_limit,
    "report": _cmd_report,
}


def _cmd_g_table(args) -> dict:
    """Debug dump of the normalizer checkpoints as ``n,G(n)`` rows."""
    alpha = float(args.alpha)
    norm = NormalizerG(alpha)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("n,G(n)\n")
        for n, g in norm.checkpoints():
            fh.write(f"{n},{g!r}\n")
    return {"alpha": alpha, "rows": len(norm.checkpoints()), "out": args.out}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="stablewalk",
        description="Hitting-time simulation and limit-law verification for "
                    "random walks attracted to stable laws.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run a '{name}' experiment config")
        p.add_argument("config", help="path to a 'key = value' config file")
    p = sub.add_parser("g-table", help="dump normalizer checkpoints to CSV")
    p.add_argument("alpha", help="stability index in [1, 2]")
    p.add_argument("out", help="output CSV path")
    args = parser.parse_args(argv)
    try:
        if args.command == "g-table":
            summary = _cmd_g_table(args)
        else:
            cfg = load_config(args.config, args.command)
            summary = _COMMANDS[args.command](cfg)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (StatisticalRefusal, RefinementError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSAL
    except (ValueError, OSError) as exc:
        code = EXIT_IO if isinstance(exc, OSError) else EXIT_VALIDATION
        kind = "i/o error" if isinstance(exc, OSError) else "validation error"
        print(f"{kind}: {exc}", file=sys.stderr)
        return code
    print(json.dumps(summary))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
