import io
import math

import numpy as np
import pytest

from stablewalk import jump_models as jm
from stablewalk import walk_engine as we
from stablewalk.errors import ValidationError


def make_config(**kw):
    base = dict(model=jm.gaussian_unit(), x=0.0, epsilon=0.05,
                initial=we.point_mass(0.0), cap=10_000, trials=100,
                master_seed=424242)
    base.update(kw)
    return we.WalkConfig(**base)


# -- config validation --------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValidationError):
        make_config(epsilon=0.0)
    with pytest.raises(ValidationError):
        make_config(epsilon=-1.0)
    with pytest.raises(ValidationError):
        make_config(cap=0)
    with pytest.raises(ValidationError):
        make_config(trials=-1)
    with pytest.raises(ValidationError):
        we.uniform_interval(1.0, 1.0)
    with pytest.raises(ValidationError):
        we.gaussian_shift(0.0, 0.0)
    with pytest.raises(ValidationError):
        we.parse_initial("delta:0")


def test_initial_descriptor_round_trip():
    for init in (we.point_mass(0.5), we.uniform_interval(-0.1, 0.1),
                 we.gaussian_shift(0.0, 1.0)):
        assert we.parse_initial(init.descriptor()) == init


# -- single-trial behaviour ---------------------------------------------------

def test_first_step_always_hits_when_eps_dominates():
    # uniform jumps of halfwidth 1 with eps = 2: |S_1| <= 1 < 2 always
    cfg = make_config(model=jm.uniform_sym(1.0), epsilon=2.0, trials=50)
    for i in range(50):
        s = we.hitting_time(cfg, i)
        assert s.is_hit and s.steps == 1 and not s.excluded


def test_cap_binds_at_step_one():
    cfg = make_config(epsilon=1e-12, cap=1)
    s = we.hitting_time(cfg, 0)
    assert s.censored and s.steps == 1


def test_hitting_time_is_deterministic():
    cfg = make_config()
    assert we.hitting_time(cfg, 3) == we.hitting_time(cfg, 3)
    batch = we.run_batch(cfg)
    assert batch[3] == we.hitting_time(cfg, 3)


def test_monotone_in_epsilon_for_fixed_stream():
    # same per-trial stream, point start: larger eps can only hit sooner
    for i in range(100):
        small = we.hitting_time(make_config(epsilon=0.02, master_seed=77), i)
        large = we.hitting_time(make_config(epsilon=0.08, master_seed=77), i)
        if small.is_hit:
            assert large.is_hit and large.steps <= small.steps
        # censored small-eps trials say nothing about the larger one


def test_censoring_consistency_on_replay():
    # censored at cap c iff no hit within c; replay with a larger cap agrees
    small = make_config(epsilon=0.01, cap=100, master_seed=31337)
    large = make_config(epsilon=0.01, cap=50_000, master_seed=31337)
    for i in range(100):
        s, l = we.hitting_time(small, i), we.hitting_time(large, i)
        if s.is_hit:
            assert l.is_hit and l.steps == s.steps
        else:
            assert l.censored or l.steps > 100


# -- batches -------------------------------------------------------------------

def test_empty_batch():
    batch = we.run_batch(make_config(trials=0))
    assert len(batch) == 0
    assert batch.censored_count == 0 and batch.excluded_count == 0


def test_batch_reproducible_across_worker_counts():
    cfg = make_config(trials=500, epsilon=0.02)
    runs = [we.run_batch(cfg, workers=w) for w in (1, 2, 8)]
    for other in runs[1:]:
        assert np.array_equal(runs[0].steps, other.steps)
        assert np.array_equal(runs[0].censored, other.censored)
        assert np.array_equal(runs[0].excluded, other.excluded)


def test_workers_env_override(monkeypatch):
    monkeypatch.setenv("STABLEWALK_WORKERS", "3")
    assert we.resolve_workers() == 3
    monkeypatch.delenv("STABLEWALK_WORKERS")
    assert we.resolve_workers(5) == 5
    with pytest.raises(ValidationError):
        we.resolve_workers(0)


def test_atomless_walks_never_flag_exclusion():
    cfg = make_config(trials=2000, epsilon=0.02)
    assert we.run_batch(cfg).excluded_count == 0


def test_mixture_excluded_fraction_matches_first_jump_atom():
    # exact self-hit <=> the very first jump is the zero atom
    model = jm.zero_atom_mixture(0.25, jm.cauchy_standard())
    cfg = make_config(model=model, epsilon=0.1, cap=1000, trials=100_000,
                      master_seed=2718)
    batch = we.run_batch(cfg)
    frac = batch.excluded_count / len(batch)
    band = 3.0 * math.sqrt(0.25 * 0.75 / len(batch))
    assert abs(frac - 0.25) < band + 1e-9
    # excluded trials are exact hits at step 1
    assert np.all(batch.steps[batch.excluded] == 1)
    assert not np.any(batch.censored[batch.excluded])


def test_mixture_with_offset_target_never_excludes():
    model = jm.zero_atom_mixture(0.25, jm.cauchy_standard())
    cfg = make_config(model=model, x=1.0, epsilon=0.2, cap=1000, trials=5000)
    assert we.run_batch(cfg).excluded_count == 0
    assert not cfg.tracks_exact_hits


def test_gaussian_censored_fraction_against_limit_law():
    # tail of 2 eps sqrt(tau) at the cap: 2 exp(t^2/2)(1 - Phi(t)) at t = 20,
    # evaluated stably as erfcx(t / sqrt 2) ~ 0.0399
    from scipy.special import erfcx
    cfg = make_config(epsilon=1e-2, cap=10**6, trials=10_000, master_seed=99)
    batch = we.run_batch(cfg)
    frac = batch.censored_count / len(batch)
    theory = float(erfcx(20.0 / math.sqrt(2.0)))
    assert abs(frac - 0.05) < 0.02
    assert abs(frac - theory) < 3.0 * math.sqrt(theory * (1 - theory) / len(batch))


# -- serialization ---------------------------------------------------------------

def test_csv_round_trip(tmp_path):
    model = jm.zero_atom_mixture(0.5, jm.cauchy_standard())
    cfg = make_config(model=model, epsilon=0.1, cap=500, trials=200)
    batch = we.run_batch(cfg)
    path = tmp_path / "samples.csv"
    batch.to_csv(path)
    again = we.SampleSet.from_csv(path)
    assert again.config == cfg
    assert np.array_equal(again.steps, batch.steps)
    assert np.array_equal(again.censored, batch.censored)
    assert np.array_equal(again.excluded, batch.excluded)
    # a rewrite is byte-identical
    buf = io.StringIO()
    again.write_csv(buf)
    assert buf.getvalue() == path.read_text()


def test_concat_checks_configs():
    a = we.run_batch(make_config(trials=50))
    b = we.run_batch(make_config(trials=30))
    merged = we.SampleSet.concat(a, b)
    assert len(merged) == 80
    with pytest.raises(ValidationError):
        we.SampleSet.concat(a, we.run_batch(make_config(trials=30, epsilon=0.01)))


# -- rate experiment and local limit probe ----------------------------------------

def test_rate_experiment_validation():
    with pytest.raises(ValidationError):
        we.rate_experiment(jm.gaussian_unit(), 0.0, [0.1], 1000, 10, 1)
    with pytest.raises(ValidationError):
        we.rate_experiment(jm.gaussian_unit(), 0.0, [0.1, 0.2], 1000, 10, 1)
    with pytest.raises(ValidationError):
        we.rate_experiment(jm.gaussian_unit(), 0.0, [0.1, -0.05], 1000, 10, 1)


def test_rate_experiment_shapes_and_flags():
    si = we.rate_experiment(jm.gaussian_unit(), 0.0, [0.25, 0.125], cap=2000,
                            trials_per_eps=50, master_seed=5)
    assert len(si.log_eps) == 100
    assert si.log_tau[si.censored].size == 0 or np.all(
        si.log_tau[si.censored] == math.log(2000))
    assert set(np.round(np.exp(si.log_eps), 6)) == {0.25, 0.125}


def test_local_limit_probe_validation_and_trivial():
    with pytest.raises(ValidationError):
        we.local_limit_probe(jm.gaussian_unit(), 100, 0.05, 100, 1)
    with pytest.raises(ValidationError):
        we.local_limit_probe(jm.gaussian_unit(), 100, 5.0, 10**4, 1)
    report = we.local_limit_probe(jm.gaussian_unit(), 10, 0.0, 10**4, 1)
    assert report.estimate == 0.0


def test_local_limit_probe_gaussian_small():
    # S_50 / sqrt(50) is exactly N(0,1); window probability 2 Phi(h) - 1
    from scipy.stats import norm
    h = 0.2
    report = we.local_limit_probe(jm.gaussian_unit(), 50, h, 200_000, 12345)
    theory = 2.0 * norm.cdf(h) - 1.0
    assert abs(report.estimate - theory) < 4.0 * report.stderr + 1e-4
