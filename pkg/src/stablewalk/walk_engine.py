"""Walk simulation: capped hitting times with censoring and exact-hit accounting.

The walk starts at a random initial position, adds i.i.d. jumps, and stops at
the first step n >= 1 with |position - x| < epsilon, or is censored at the
cap.  Trials are reproducible: trial i of a batch uses a random stream that
is a pure function of (master_seed, i), so batch output is bitwise identical
for any worker count.

Hitting times of the shipped regimes are heavy-tailed with infinite mean, so
capping with explicit censoring is the only way to finite runtime; the stats
layer consumes the censoring honestly via truncated comparison.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import IO, Iterator, List, Optional, Sequence

import numpy as np

from . import _kernels as K
from .errors import ValidationError
from .jump_models import (GAUSSIAN, MIXTURE, STABLE, UNIFORM, CAUCHY,
                          JumpModel, escape_probability, parse_model)

SEED_DERIVATION = K.SEED_DERIVATION

_MODEL_CODES = {GAUSSIAN: K.GAUSSIAN, UNIFORM: K.UNIFORM, STABLE: K.STABLE,
                CAUCHY: K.CAUCHY, MIXTURE: K.MIXTURE}
_INIT_CODES = {"point": K.INIT_POINT, "uniform": K.INIT_UNIFORM, "gauss": K.INIT_GAUSS}


# ---------------------------------------------------------------------------
# Configuration types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialDistribution:
    """Law of the walk's starting point S'_0."""

    kind: str   # "point" | "uniform" | "gauss"
    a: float
    b: float = 0.0

    def descriptor(self) -> str:
        if self.kind == "point":
            return f"point:{self.a!r}"
        if self.kind == "uniform":
            return f"uniform:{self.a!r}:{self.b!r}"
        return f"gauss:{self.a!r}:{self.b!r}"


def point_mass(value: float) -> InitialDistribution:
    return InitialDistribution("point", float(value))


def uniform_interval(a: float, b: float) -> InitialDistribution:
    if not a < b:
        raise ValidationError(f"need a < b for a uniform start, got [{a}, {b}]")
    return InitialDistribution("uniform", float(a), float(b))


def gaussian_shift(mean: float, sd: float) -> InitialDistribution:
    if not sd > 0.0:
        raise ValidationError(f"gaussian start needs sd > 0, got {sd}")
    return InitialDistribution("gauss", float(mean), float(sd))


def parse_initial(descriptor: str) -> InitialDistribution:
    parts = descriptor.strip().split(":")
    try:
        if parts[0] == "point" and len(parts) == 2:
            return point_mass(float(parts[1]))
        if parts[0] == "uniform" and len(parts) == 3:
            return uniform_interval(float(parts[1]), float(parts[2]))
        if parts[0] == "gauss" and len(parts) == 3:
            return gaussian_shift(float(parts[1]), float(parts[2]))
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError(f"bad initial descriptor {descriptor!r}: {exc}") from None
    raise ValidationError(f"unknown initial descriptor {descriptor!r}")


@dataclass(frozen=True)
class WalkConfig:
    """Full description of one hitting-time experiment."""

    model: JumpModel
    x: float
    epsilon: float
    initial: InitialDistribution
    cap: int
    trials: int
    master_seed: int

    def __post_init__(self):
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if self.cap < 1:
            raise ValidationError(f"cap must be >= 1, got {self.cap}")
        if self.trials < 0:
            raise ValidationError(f"trials must be >= 0, got {self.trials}")
        if not (0 <= self.master_seed < 2**64):
            raise ValidationError("master_seed must fit in 64 bits")

    @property
    def tracks_exact_hits(self) -> bool:
        # bit-exact hit detection is meaningful only when zero jumps are the
        # sole way to sit still: atom at zero, point start equal to the target
        return (self.model.has_atom and self.initial.kind == "point"
                and self.initial.a == self.x)


def escape_probability_for(config: WalkConfig) -> float:
    """Probability that the configured walk never lands exactly on its target.

    A point start shifts the target seen by the jump sums; any continuous
    start makes exact hits null events.
    """
    if config.initial.kind == "point":
        return escape_probability(config.model, config.x - config.initial.a)
    return 1.0


# ---------------------------------------------------------------------------
# Sample containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HittingSample:
    """One observation: either Hit(steps) or Censored(cap), plus the exact-hit flag."""

    steps: int
    censored: bool
    excluded: bool

    @property
    def is_hit(self) -> bool:
        return not self.censored


@dataclass
class SampleSet:
    """A batch of hitting-time observations in trial order."""

    config: WalkConfig
    steps: np.ndarray        # int64, == cap where censored
    censored: np.ndarray     # bool
    excluded: np.ndarray     # bool
    seed_derivation: str = SEED_DERIVATION

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, i: int) -> HittingSample:
        return HittingSample(int(self.steps[i]), bool(self.censored[i]),
                             bool(self.excluded[i]))

    def __iter__(self) -> Iterator[HittingSample]:
        return (self[i] for i in range(len(self)))

    @property
    def censored_count(self) -> int:
        return int(np.sum(self.censored))

    @property
    def excluded_count(self) -> int:
        return int(np.sum(self.excluded))

    @classmethod
    def concat(cls, first: "SampleSet", second: "SampleSet") -> "SampleSet":
        """Merge two batches (counting is associative; configs must agree
        apart from trial counts)."""
        if replace(first.config, trials=0) != replace(second.config, trials=0):
            raise ValidationError("cannot merge sample sets with different configs")
        cfg = replace(first.config, trials=len(first) + len(second))
        return cls(cfg,
                   np.concatenate([first.steps, second.steps]),
                   np.concatenate([first.censored, second.censored]),
                   np.concatenate([first.excluded, second.excluded]),
                   first.seed_derivation)

    # -- CSV round trip ----------------------------------------------------

    def write_csv(self, fh: IO[str]) -> None:
        cfg = self.config
        fh.write("# stablewalk-samples v1\n")
        fh.write(f"# model = {cfg.model.descriptor()}\n")
        fh.write(f"# x = {cfg.x!r}\n")
        fh.write(f"# epsilon = {cfg.epsilon!r}\n")
        fh.write(f"# initial = {cfg.initial.descriptor()}\n")
        fh.write(f"# cap = {cfg.cap}\n")
        fh.write(f"# trials = {cfg.trials}\n")
        fh.write(f"# seed = {cfg.master_seed}\n")
        fh.write(f"# seed_derivation = {self.seed_derivation}\n")
        fh.write("trial,outcome,steps,excluded\n")
        for i in range(len(self)):
            outcome = "censored" if self.censored[i] else "hit"
            fh.write(f"{i},{outcome},{int(self.steps[i])},{int(self.excluded[i])}\n")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            self.write_csv(fh)

    @classmethod
    def from_csv(cls, path) -> "SampleSet":
        meta = {}
        rows: List[tuple] = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line.startswith("#"):
                    body = line[1:].strip()
                    if "=" in body:
                        key, _, value = body.partition("=")
                        meta[key.strip()] = value.strip()
                    continue
                if not line or line.startswith("trial,"):
                    continue
                trial, outcome, steps, excluded = line.split(",")
                rows.append((int(trial), outcome == "censored", int(steps),
                             excluded == "1"))
        required = {"model", "x", "epsilon", "initial", "cap", "trials", "seed"}
        missing = required - meta.keys()
        if missing:
            raise ValidationError(f"samples file is missing header keys: {sorted(missing)}")
        cfg = WalkConfig(model=parse_model(meta["model"]),
                         x=float(meta["x"]),
                         epsilon=float(meta["epsilon"]),
                         initial=parse_initial(meta["initial"]),
                         cap=int(meta["cap"]),
                         trials=int(meta["trials"]),
                         master_seed=int(meta["seed"]))
        if len(rows) != cfg.trials:
            raise ValidationError(
                f"samples file row count {len(rows)} != declared trials {cfg.trials}")
        steps = np.array([r[2] for r in rows], dtype=np.int64)
        censored = np.array([r[1] for r in rows], dtype=bool)
        excluded = np.array([r[3] for r in rows], dtype=bool)
        return cls(cfg, steps, censored, excluded,
                   meta.get("seed_derivation", SEED_DERIVATION))


# ---------------------------------------------------------------------------
# Simulation entry points
# ---------------------------------------------------------------------------

def _model_kernel_args(model: JumpModel):
    """(model_code, base_code, p_atom, par, par2, par3) for the generic kernels."""
    def atomless_args(m: JumpModel):
        if m.kind == UNIFORM:
            return K.UNIFORM, m.halfwidth, 0.0, 0.0
        if m.kind == STABLE:
            a = m.alpha
            return K.STABLE, a, 1.0 / a, (1.0 - a) / a
        if m.kind == CAUCHY:
            return K.CAUCHY, 0.0, 0.0, 0.0
        return K.GAUSSIAN, 0.0, 0.0, 0.0

    if model.kind == MIXTURE:
        base_code, par, par2, par3 = atomless_args(model.base)
        return K.MIXTURE, base_code, model.atom_weight, par, par2, par3
    code, par, par2, par3 = atomless_args(model)
    return code, K.GAUSSIAN, 0.0, par, par2, par3


def _walk_slice_fn(config: WalkConfig, steps, censored, excluded):
    """Closure running the family-specific walk kernel on a trial range."""
    model = config.model
    init = config.initial
    ic, ia, ib = _INIT_CODES[init.kind], init.a, init.b
    x, eps, cap = config.x, config.epsilon, np.int64(config.cap)
    master = np.uint64(config.master_seed)
    tail = lambda lo, hi: (master, lo, hi, steps, censored, excluded)
    if model.kind == GAUSSIAN:
        return lambda lo, hi: K.walk_gaussian(ic, ia, ib, x, eps, cap,
                                              *tail(lo, hi))
    if model.kind == UNIFORM:
        return lambda lo, hi: K.walk_uniform(model.halfwidth, ic, ia, ib, x,
                                             eps, cap, *tail(lo, hi))
    if model.kind == STABLE:
        a = model.alpha
        return lambda lo, hi: K.walk_stable(a, 1.0 / a, (1.0 - a) / a, ic, ia,
                                            ib, x, eps, cap, *tail(lo, hi))
    if model.kind == CAUCHY:
        return lambda lo, hi: K.walk_cauchy(ic, ia, ib, x, eps, cap,
                                            *tail(lo, hi))
    _, bcode, p_atom, par, par2, par3 = _model_kernel_args(model)
    track = 1 if config.tracks_exact_hits else 0
    return lambda lo, hi: K.walk_mixture(bcode, p_atom, par, par2, par3, track,
                                         ic, ia, ib, x, eps, cap, *tail(lo, hi))


def resolve_workers(workers: Optional[int] = None) -> int:
    """Worker count: explicit argument, else STABLEWALK_WORKERS, else cpu count."""
    if workers is None:
        env = os.environ.get("STABLEWALK_WORKERS", "")
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    return workers


def _run_kernel_ranges(slice_fn, trials, workers):
    """Fan [0, trials) across a thread pool in disjoint slices (kernels release
    the GIL); slicing never affects results because streams are per-trial."""
    if trials == 0:
        return
    workers = min(workers, trials)
    slice_fn(0, 0)  # warm the jit specialization before threads fan out
    if workers == 1:
        slice_fn(0, trials)
        return
    chunks = min(trials, workers * 4)
    bounds = np.linspace(0, trials, chunks + 1).astype(np.int64)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(slice_fn, int(lo), int(hi))
                   for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        for fut in futures:
            fut.result()


def run_batch(config: WalkConfig, workers: Optional[int] = None) -> SampleSet:
    """Simulate config.trials independent capped hitting times."""
    workers = resolve_workers(workers)
    trials = config.trials
    steps = np.empty(trials, dtype=np.int64)
    censored = np.empty(trials, dtype=np.uint8)
    excluded = np.empty(trials, dtype=np.uint8)
    slice_fn = _walk_slice_fn(config, steps, censored, excluded)
    _run_kernel_ranges(slice_fn, trials, workers)
    return SampleSet(config, steps, censored.astype(bool), excluded.astype(bool))


def hitting_time(config: WalkConfig, trial_index: int) -> HittingSample:
    """The capped hitting time of a single trial of the batch."""
    if trial_index < 0:
        raise ValidationError("trial_index must be >= 0")
    steps = np.zeros(trial_index + 1, dtype=np.int64)
    censored = np.zeros(trial_index + 1, dtype=np.uint8)
    excluded = np.zeros(trial_index + 1, dtype=np.uint8)
    slice_fn = _walk_slice_fn(config, steps, censored, excluded)
    slice_fn(trial_index, trial_index + 1)
    return HittingSample(int(steps[trial_index]), bool(censored[trial_index]),
                         bool(excluded[trial_index]))


# ---------------------------------------------------------------------------
# Rate experiment and local-limit probe
# ---------------------------------------------------------------------------

@dataclass
class SlopeInput:
    """Per-trial (log eps, log tau) pairs; censored pairs carry log(cap) as a
    lower bound and are flagged."""

    log_eps: np.ndarray
    log_tau: np.ndarray
    censored: np.ndarray
    eps_ladder: Sequence[float]
    trials_per_eps: int
    cap: int


def rate_experiment(model: JumpModel, x: float, eps_ladder: Sequence[float],
                    cap: int, trials_per_eps: int, master_seed: int,
                    workers: Optional[int] = None) -> SlopeInput:
    """Hitting times down an epsilon ladder, as log-log pairs for slope fitting."""
    ladder = [float(e) for e in eps_ladder]
    if len(ladder) < 2:
        raise ValidationError("need at least 2 ladder entries for a slope")
    if any(e <= 0.0 for e in ladder):
        raise ValidationError("ladder entries must be positive")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValidationError("ladder must be strictly decreasing")
    log_eps = []
    log_tau = []
    censored = []
    for k, eps in enumerate(ladder):
        seed_k = int(K.mix64(np.uint64(master_seed) ^ K.mix64(np.uint64(k + 1))))
        cfg = WalkConfig(model=model, x=x, epsilon=eps, initial=point_mass(x),
                         cap=cap, trials=trials_per_eps, master_seed=seed_k)
        batch = run_batch(cfg, workers=workers)
        log_eps.append(np.full(trials_per_eps, math.log(eps)))
        log_tau.append(np.log(batch.steps.astype(float)))
        censored.append(batch.censored)
    return SlopeInput(np.concatenate(log_eps), np.concatenate(log_tau),
                      np.concatenate(censored), ladder, trials_per_eps, cap)


@dataclass(frozen=True)
class ProbeReport:
    """Monte Carlo estimate of P(|S_n / A_n| < half_width) with binomial error."""

    estimate: float
    stderr: float
    trials: int
    n_steps: int
    half_width: float


def local_limit_probe(model: JumpModel, n: int, half_width: float, trials: int,
                      master_seed: int, workers: Optional[int] = None) -> ProbeReport:
    """Estimate the probability that the normed walk endpoint lies within
    (-half_width, half_width)."""
    from .jump_models import limit_density_at_zero

    if half_width < 0.0:
        raise ValidationError("half_width must be >= 0")
    if 2.0 * half_width * limit_density_at_zero(model) >= 1.0:
        raise ValidationError("half_width too large for a density-level probe")
    if trials < 10_000:
        raise ValidationError("need at least 1e4 trials for a stable estimate")
    if n < 1:
        raise ValidationError("need n >= 1 steps")
    workers = resolve_workers(workers)
    sums = np.empty(trials, dtype=np.float64)
    master = np.uint64(master_seed)
    if model.kind == GAUSSIAN:
        def slice_fn(lo, hi):
            K.endpoint_gaussian(np.int64(n), master, lo, hi, sums)
    else:
        mcode, bcode, p_atom, par, par2, par3 = _model_kernel_args(model)

        def slice_fn(lo, hi):
            K.endpoint_generic(mcode, bcode, p_atom, par, par2, par3,
                               np.int64(n), master, lo, hi, sums)

    _run_kernel_ranges(slice_fn, trials, workers)
    a_n = model.norming().value(n)
    p_hat = float(np.mean(np.abs(sums / a_n) < half_width))
    stderr = math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / trials)
    return ProbeReport(p_hat, stderr, trials, int(n), float(half_width))


def draw_kernel_jumps(model: JumpModel, n: int, master_seed: int,
                      trial: int = 0) -> np.ndarray:
    """Jumps as the walk kernels would draw them (for distribution tests)."""
    out = np.empty(n, dtype=np.float64)
    mcode, bcode, p_atom, par, par2, par3 = _model_kernel_args(model)
    K.draw_jumps(mcode, bcode, p_atom, par, par2, par3,
                 np.uint64(master_seed), np.uint64(trial), out)
    return out
