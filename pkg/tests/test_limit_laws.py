import math

import numpy as np
import pytest
from scipy.stats import ks_2samp, norm

from stablewalk import jump_models as jm
from stablewalk import limit_laws as ll
from stablewalk.errors import RefinementError, ValidationError


# -- closed forms -------------------------------------------------------------

def test_cdf_alpha1_values():
    assert ll.cdf_alpha1(0.0) == 0.0
    assert ll.cdf_alpha1(1.0) == 0.5
    assert ll.cdf_alpha1(3.0) == 0.75
    with pytest.raises(ValidationError):
        ll.cdf_alpha1(-0.1)


def test_cdf_E_over_absN_closed_form():
    assert ll.cdf_E_over_absN(0.0) == 0.0
    phi1 = norm.cdf(1.0)
    expected = 1.0 - 2.0 * math.exp(0.5) * (1.0 - phi1)
    assert ll.cdf_E_over_absN(1.0) == pytest.approx(expected, abs=1e-12)
    assert ll.cdf_E_over_absN(1.0) == pytest.approx(0.4768, abs=1e-4)
    assert ll.cdf_E_over_absN(1.0e4) > 0.9999
    ts = np.linspace(0.0, 5.0, 200)
    assert np.all(np.diff(ll.cdf_E_over_absN(ts)) > 0.0)
    with pytest.raises(ValidationError):
        ll.cdf_E_over_absN(-1.0)


def test_cdf_E_over_absN_monte_carlo_oracle():
    rng = np.random.default_rng(404)
    n = 1_000_000
    draws = rng.standard_exponential(n) / np.abs(rng.standard_normal(n))
    for t in (0.5, 1.0, 2.0):
        f = ll.cdf_E_over_absN(t)
        emp = np.mean(draws <= t)
        assert abs(emp - f) < 4.0 * math.sqrt(f * (1.0 - f) / n)


# -- samplers -----------------------------------------------------------------

def test_one_sided_stable_laplace_transform():
    rng = np.random.default_rng(101)
    g = ll.sample_one_sided_stable(0.5, 10**6, rng)
    assert abs(np.mean(np.exp(-g)) - math.exp(-1.0)) < 0.002
    g3 = ll.sample_one_sided_stable(1.0 / 3.0, 10**6, rng)
    assert abs(np.mean(np.exp(-8.0 * g3)) - math.exp(-2.0)) < 0.002
    assert np.all(g > 0.0)
    with pytest.raises(ValidationError):
        ll.sample_one_sided_stable(0.0, 10, rng)
    with pytest.raises(ValidationError):
        ll.sample_one_sided_stable(1.0, 10, rng)


def test_subordinator_identity_beta2():
    # one-sided stable of index 1/2 coincides with 1/(2 N^2); samplers seeded
    # independently, two-sample KS below 0.005
    g = ll.sample_one_sided_stable(0.5, 10**6, np.random.default_rng(21))
    n = np.random.default_rng(22).standard_normal(10**6)
    d = ks_2samp(g, 1.0 / (2.0 * n * n)).statistic
    assert d < 0.005


def test_limit_Y_positive_and_beta2_identity():
    y = ll.sample_limit_Y(2.0, 10**6, np.random.default_rng(31))
    assert np.all(y > 0.0)
    rng = np.random.default_rng(32)
    ref = rng.standard_exponential(10**6) / (math.sqrt(2.0) * np.abs(rng.standard_normal(10**6)))
    assert ks_2samp(y, ref).statistic < 0.004
    with pytest.raises(ValidationError):
        ll.sample_limit_Y(math.inf, 10, rng)
    with pytest.raises(ValidationError):
        ll.sample_limit_Y(1.5, 10, rng)


def test_laplace_check_values_and_bands():
    assert ll.laplace_check(np.ones(3), 2.0, 0.0) == (1.0, 1.0)
    _, th = ll.laplace_check(np.ones(3), 2.0, 1.0)
    assert th == pytest.approx(1.0 / (1.0 + 1.0 / math.sqrt(math.pi)), abs=1e-12)
    _, th3 = ll.laplace_check(np.ones(3), 3.0, 8.0)
    assert th3 == pytest.approx(1.0 / (1.0 + 2.0 / math.gamma(1.0 / 3.0)), abs=1e-12)
    assert th3 == pytest.approx(0.5726, abs=1e-4)
    with pytest.raises(ValidationError):
        ll.laplace_check(np.empty(0), 2.0, 1.0)
    # empirical transform matches within 4 sd/sqrt(N) at the probe points
    for beta, seed in ((2.0, 51), (3.0, 52)):
        w = ll.sample_limit_W(beta, 10**6, np.random.default_rng(seed))
        for s in (0.25, 1.0, 4.0):
            emp, th = ll.laplace_check(w, beta, s)
            band = 4.0 * float(np.std(np.exp(-s * w))) / math.sqrt(w.size)
            assert abs(emp - th) < band, (beta, s)


def test_corollary_constant_algebra_and_shared_sample_identity():
    # the G-scale constant for unit-variance jumps reduces exactly to
    # sqrt(2) * P, and the two limit-law routes coincide on shared samples
    p_escape = 1.0
    gamma = 2.0 / math.sqrt(2.0 * math.pi) * p_escape
    lhs = math.gamma(0.5) * (gamma / 2.0) * 2.0
    assert abs(lhs - math.sqrt(2.0) * p_escape) < 1e-12
    n = 4_000_000
    e = np.random.default_rng(61).standard_exponential(n)
    g = ll.sample_one_sided_stable(0.5, n, np.random.default_rng(62))
    normals = np.random.default_rng(63).standard_normal(n)
    route_subordinator = e * np.sqrt(g)
    route_corollary = e / (math.sqrt(2.0) * np.abs(normals))
    assert ks_2samp(route_subordinator, route_corollary).statistic < 0.002


# -- Volterra route -------------------------------------------------------------

@pytest.fixture(scope="module")
def vol2():
    return ll.solve_volterra(2.0, 2.0, 2000)


def test_volterra_alpha2_against_closed_form(vol2):
    # W = (E/(sqrt(2 pi)|N|))**2, so F_W(t) is the E/|N| CDF at sqrt(2 pi t)
    ts = np.linspace(0.0, 2.0, 500)
    closed = ll.cdf_E_over_absN(np.sqrt(2.0 * math.pi * ts))
    assert float(np.max(np.abs(vol2.cdf(ts) - closed))) < 0.01


def test_volterra_small_t_and_quantile(vol2):
    assert vol2.F[0] == 0.0
    assert vol2.cdf(0.0025) == pytest.approx(0.1, abs=0.01)
    assert vol2.cdf(1.0 / (2.0 * math.pi)) == pytest.approx(0.4768, abs=0.005)


def test_volterra_shape_invariants(vol2):
    assert np.all(np.diff(vol2.F) >= -1e-12)
    assert vol2.F.max() <= 1.0
    assert vol2.grid[0] == 0.0


def test_volterra_refinement_stability():
    # halving the node count moves the solution by well under 1e-3 sup-norm
    for alpha in (1.5, 2.0):
        fine = ll.solve_volterra(alpha, 2.0, 2000, check=False)
        half = ll.solve_volterra(alpha, 2.0, 1000, check=False)
        diff = np.max(np.abs(half.cdf(fine.grid) - fine.F))
        assert diff < 1e-3, alpha


def test_volterra_validation_and_refinement_error():
    with pytest.raises(ValidationError):
        ll.solve_volterra(1.0, 2.0, 500)
    with pytest.raises(ValidationError):
        ll.solve_volterra(1.5, 2.0, 50)
    with pytest.raises(ValidationError):
        ll.solve_volterra(1.5, -1.0, 500)
    with pytest.raises(RefinementError):
        ll.solve_volterra(1.5, 2.0, 100, refine_tol=1e-12)


def test_volterra_matches_sampled_W():
    sol = ll.solve_volterra(1.5, 2.0, 2000)
    w = np.sort(ll.sample_limit_W(3.0, 10**6, np.random.default_rng(71)))
    ts = np.linspace(0.0, 2.0, 400)
    mc = np.searchsorted(w, ts, side="right") / w.size
    assert float(np.max(np.abs(sol.cdf(ts) - mc))) < 0.01


# -- dispatching limit law -------------------------------------------------------

def test_limit_law_spec_construction_and_gamma():
    spec = ll.LimitLawSpec.for_model(jm.cauchy_standard())
    assert spec.gamma == pytest.approx(2.0 / math.pi, abs=1e-12)
    assert spec.alpha == 1.0 and spec.beta == math.inf
    mix = ll.LimitLawSpec.for_model(jm.zero_atom_mixture(0.5, jm.cauchy_standard()))
    assert mix.gamma == pytest.approx(2.0 / math.pi, abs=1e-12)
    assert mix.escape_prob_x == 0.5
    with pytest.raises(ValidationError):
        ll.LimitLawSpec(alpha=1.0, beta=math.inf, scale_variant=ll.RAW_TAU,
                        gamma=1.0)
    with pytest.raises(ValidationError):
        ll.LimitLawSpec(alpha=1.5, beta=2.5, scale_variant=ll.G_SCALE, gamma=1.0)
    with pytest.raises(ValidationError):
        ll.LimitLawSpec(alpha=1.5, beta=3.0, scale_variant="weird", gamma=1.0)


def test_scale_factor():
    c = ll.LimitLawSpec.for_model(jm.cauchy_standard())
    assert c.scale_factor() == pytest.approx(2.0 / math.pi, abs=1e-12)
    g = ll.LimitLawSpec.for_model(jm.gaussian_unit())
    gamma = 2.0 / math.sqrt(2.0 * math.pi)
    assert g.scale_factor() == pytest.approx(math.gamma(0.5) * gamma / 2.0, abs=1e-12)
    graw = ll.LimitLawSpec.for_model(jm.gaussian_unit(), scale_variant=ll.RAW_TAU)
    assert graw.scale_factor() == pytest.approx(g.scale_factor() ** 2, abs=1e-12)


def test_limit_cdf_dispatch():
    c = ll.LimitLawSpec.for_model(jm.cauchy_standard())
    assert ll.limit_cdf(c, 1.0) == 0.5
    g = ll.LimitLawSpec.for_model(jm.gaussian_unit())
    assert ll.limit_cdf(g, 1.0) == pytest.approx(
        float(ll.cdf_E_over_absN(math.sqrt(2.0))), abs=1e-12)
    graw = ll.LimitLawSpec.for_model(jm.gaussian_unit(), scale_variant=ll.RAW_TAU)
    for t in (0.25, 1.0, 4.0):
        assert ll.limit_cdf(graw, t) == pytest.approx(
            float(ll.limit_cdf(g, math.sqrt(t))), abs=1e-12)
    s = ll.LimitLawSpec.for_model(jm.symmetric_stable(1.5))
    assert ll.limit_cdf(s, 0.0, mc_size=10**5, mc_seed=9) == 0.0
    with pytest.raises(ValidationError):
        ll.limit_cdf(s, -1.0)


def test_limit_cdf_mc_route_consistent_with_volterra():
    # F_Y(t) = F_W((c_beta t)**beta) links the sampled G-scale law to the
    # integral-equation solution
    spec = ll.LimitLawSpec.for_model(jm.symmetric_stable(1.5))
    sol = ll.solve_volterra(1.5, 2.0, 2000)
    c = ll.transform_constant(3.0)
    for t in (0.5, 1.0, 1.5, 2.0):
        w_arg = (c * t) ** 3.0
        if w_arg <= 2.0:
            mc = ll.limit_cdf(spec, t, mc_size=10**6, mc_seed=77)
            assert abs(mc - float(sol.cdf(w_arg))) < 0.01, t
