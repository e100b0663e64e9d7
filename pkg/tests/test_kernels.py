"""Bit-level and distributional checks of the jitted random kernels."""

import math

import numpy as np
import pytest

from stablewalk import _kernels as K
from stablewalk import jump_models as jm
from stablewalk.walk_engine import draw_kernel_jumps

MASK = (1 << 64) - 1


def _ref_mix64(z):
    z = (z + 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def _ref_stream(master, trial, k):
    """Pure-python xoshiro256++ with splitmix64 seeding, as the kernels do it."""
    z = _ref_mix64(master ^ _ref_mix64((trial + 1) & MASK))
    s = []
    for _ in range(4):
        z = _ref_mix64(z)
        s.append(z)
    out = []
    for _ in range(k):
        res = (s[0] + s[3]) & MASK
        res = (((res << 23) & MASK) | (res >> 41)) & MASK
        res = (res + s[0]) & MASK
        t = (s[1] << 17) & MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = (((s[3] << 45) & MASK) | (s[3] >> 19)) & MASK
        out.append(res)
    return out


@pytest.mark.parametrize("master,trial", [(0, 0), (123456789, 7), (2**64 - 1, 999)])
def test_stream_matches_python_reference(master, trial):
    jit = [int(v) for v in K.rng_stream(np.uint64(master), np.uint64(trial), 32)]
    assert jit == _ref_stream(master, trial, 32)


def test_streams_differ_across_trials_and_masters():
    a = K.rng_stream(42, 0, 8)
    b = K.rng_stream(42, 1, 8)
    c = K.rng_stream(43, 0, 8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_kernel_uniform_conversion_bounds():
    model = jm.uniform_sym(1.0)
    draws = draw_kernel_jumps(model, 100_000, master_seed=5, trial=3)
    assert np.all(draws >= -1.0) and np.all(draws < 1.0)
    assert abs(np.mean(draws)) < 0.02
    assert abs(np.var(draws) - 1.0 / 3.0) < 0.01


def test_kernel_gaussian_moments():
    draws = draw_kernel_jumps(jm.gaussian_unit(), 1_000_000, master_seed=11)
    assert abs(np.mean(draws)) < 0.005
    assert abs(np.var(draws) - 1.0) < 0.01
    assert abs(np.mean(draws**3)) < 0.02  # symmetry


def test_kernel_cauchy_quartiles():
    # F(1) - F(-1) = 1/2 and symmetry of the median for tan(uniform angle)
    draws = draw_kernel_jumps(jm.cauchy_standard(), 1_000_000, master_seed=17)
    assert abs(np.mean(np.abs(draws) < 1.0) - 0.5) < 0.003
    assert abs(np.median(draws)) < 0.01


def test_kernel_mixture_atom_mass():
    model = jm.zero_atom_mixture(0.5, jm.cauchy_standard())
    draws = draw_kernel_jumps(model, 1_000_000, master_seed=23)
    assert abs(np.mean(draws == 0.0) - 0.5) < 0.002


@pytest.mark.parametrize("descriptor", [
    "gaussian", "uniform:1.0", "stable:1.5", "stable:2.0", "cauchy",
    "mix:0.5:cauchy", "mix:0.3:gaussian",
])
def test_kernel_samplers_match_characteristic_function(descriptor):
    # same closed-form certification as the numpy samplers: the jitted draws
    # must reproduce E[exp(itX)] within 4/sqrt(n)
    model = jm.parse_model(descriptor)
    n = 1_000_000
    draws = draw_kernel_jumps(model, n, master_seed=31)
    band = 4.0 / math.sqrt(n)
    for t in (0.5, 1.0, 2.0):
        emp = abs(np.mean(np.exp(1j * t * draws)))
        assert abs(emp - jm.char_fn_modulus(model, t)) < band, t


def test_stable_alpha2_is_gaussian_variance_two():
    draws = draw_kernel_jumps(jm.symmetric_stable(2.0), 1_000_000, master_seed=37)
    assert abs(np.var(draws) - 2.0) < 0.02
