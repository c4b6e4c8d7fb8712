"""Invariant sampling, EPE solutions, and the limit matrices vs oracles."""

import math

import numpy as np
import pytest
from scipy.signal import lfilter

from levy_gqmle.asymptotics import (
    AsymptoticsResult,
    CovarianceError,
    EPEApprox,
    InvariantSample,
    MixingError,
    NotCenteredError,
    SingularGammaError,
    avar,
    epe_rhs_drift,
    epe_rhs_scale,
    epe_solve,
    gamma_matrix,
    invariant_char,
    martingale_check,
    run_asymptotics,
    sample_invariant,
    sigma_matrix,
)
from levy_gqmle.coefficients import (
    ConstantDrift,
    ConstantScale,
    LinearDecay,
    MeanRevertLinear,
    RationalSqrt,
)
from levy_gqmle.gqmle import ModelSpec
from levy_gqmle.levy import Brownian, sample_increments
from levy_gqmle.sde import SamplePath, TrueModel
from levy_gqmle.gqmle import g1_eval, g2_eval
from _oracles import benchmark_oracle
from test_levy import CASE_I, CASE_III, DIFFUSION

OU = TrueModel(LinearDecay(), 0.5, ConstantScale(), 1.0)
BENCH = ModelSpec(drift=MeanRevertLinear(m=1.0), scale=RationalSqrt())


@pytest.fixture(scope="module")
def oracle_i():
    return benchmark_oracle(CASE_I)


@pytest.fixture(scope="module")
def inv_i():
    return sample_invariant(OU, CASE_I, budget=60000, seed=11)


@pytest.fixture(scope="module")
def res_i(oracle_i):
    theta = (oracle_i.alpha_star, oracle_i.gamma_star)
    return run_asymptotics(BENCH, OU, CASE_I, theta, seed=5, budget=40000, m=1500)


def _batched(states, stat, n_batches=30):
    vals = np.array([stat(b) for b in np.array_split(states, n_batches)])
    return stat(states), float(np.std(vals, ddof=1)) / math.sqrt(n_batches)


class TestSampleInvariant:
    def test_case_i_moments(self, inv_i):
        x = inv_i.states
        mean, se = _batched(x, np.mean)
        assert abs(mean) <= 5 * se
        var, se = _batched(x, np.var)
        assert abs(var - 1.0) <= 5 * se + 0.01
        xc = x - x.mean()
        k3, se = _batched(xc, lambda b: np.mean(b**3))
        assert abs(k3) <= 5 * se + 0.01
        k4, se = _batched(xc, lambda b: np.mean(b**4) - 3 * np.mean(b**2) ** 2)
        assert abs(k4 - 0.015) <= 5 * se + 0.01

    def test_case_iii_skew(self):
        x = sample_invariant(OU, CASE_III, budget=40000, seed=12).states
        k3, se = _batched(x - x.mean(), lambda b: np.mean(b**3))
        assert abs(k3 - 8.0 / 15.0) <= 5 * se + 0.02

    def test_brownian_matches_gaussian(self):
        x = sample_invariant(OU, DIFFUSION, budget=20000, seed=13).states
        for order, target in ((1, 0.0), (2, 1.0), (3, 0.0), (4, 3.0)):
            m, se = _batched(x, lambda b, k=order: np.mean(b**k))
            assert abs(m - target) <= 5 * se + 0.02

    def test_deterministic(self):
        a = sample_invariant(OU, CASE_I, budget=1000, seed=3, burn_in=5.0)
        b = sample_invariant(OU, CASE_I, budget=1000, seed=3, burn_in=5.0)
        assert np.array_equal(a.states, b.states)

    def test_parameter_validation(self):
        with pytest.raises(ValueError, match="spacing"):
            sample_invariant(OU, CASE_I, spacing=0.5)
        with pytest.raises(ValueError, match="budget"):
            sample_invariant(OU, CASE_I, budget=500)

    def test_catalog_restriction(self):
        bad_scale = TrueModel(LinearDecay(), 0.5, RationalSqrt(), 1.0)
        with pytest.raises(ValueError, match="constant true scale"):
            sample_invariant(bad_scale, CASE_I)
        not_reverting = TrueModel(ConstantDrift(), 0.5, ConstantScale(), 1.0)
        with pytest.raises(ValueError, match="mean-reverting"):
            sample_invariant(not_reverting, CASE_I)

    def test_mixing_gate_on_coarse_step(self):
        # Euler variance inflation 1/(1 - rate*step/2) = 25% at step 0.8
        with pytest.raises(MixingError):
            sample_invariant(OU, CASE_I, budget=5000, seed=4, step=0.8)

    def test_sample_size_gate(self):
        with pytest.raises(ValueError, match="1000"):
            InvariantSample(np.zeros(100), 50.0, 1.0, 0, 0.01)

    def test_characteristic_function(self, inv_i):
        # time-integral representation of the invariant CF
        x = inv_i.states
        for u in (0.5, 1.0, 2.0):
            phat = invariant_char(CASE_I, u)
            emp_re, se_re = _batched(x, lambda b, u=u: np.mean(np.cos(u * b)))
            emp_im, se_im = _batched(x, lambda b, u=u: np.mean(np.sin(u * b)))
            err = abs(phat - (emp_re + 1j * emp_im))
            assert err <= 5 * math.hypot(se_re, se_im) + 0.01


class TestEPERhs:
    def test_scale_rhs_reduces_to_quadratic(self, oracle_i):
        g1 = epe_rhs_scale(BENCH, OU, (oracle_i.alpha_star, oracle_i.gamma_star))
        x = np.linspace(-3, 3, 13)
        want = (1.0 - x**2) / (2.0 * math.sqrt(2.0))
        np.testing.assert_allclose(g1(x), want, atol=1e-14)

    def test_drift_rhs_explicit_form(self, oracle_i):
        a_s, g_s = oracle_i.alpha_star, oracle_i.gamma_star
        g2 = epe_rhs_drift(BENCH, OU, (a_s, g_s))
        x = np.linspace(-3, 3, 13)
        want = (1.0 - x) * (-x / 2.0 - a_s * (1.0 - x)) * (1.0 + x**2) / g_s**2
        np.testing.assert_allclose(g2(x), want, atol=1e-14)

    def test_both_centered_under_invariant_law(self, inv_i, oracle_i):
        theta = (oracle_i.alpha_star, oracle_i.gamma_star)
        for rhs in (epe_rhs_scale(BENCH, OU, theta), epe_rhs_drift(BENCH, OU, theta)):
            vals = rhs(inv_i.states)
            mean, se = _batched(vals, np.mean)
            assert abs(mean) <= 3 * se


class TestEPESolve:
    def test_pure_ou_analytic(self, inv_i):
        # E^x[X_t] = x e^{-t/2}, so f(x) = 2x
        f = epe_solve(lambda x: np.asarray(x, float), OU, CASE_I, m=1000, seed=7, inv=inv_i)
        assert f.x.size == 25
        assert np.all(np.abs(f.f - 2.0 * f.x) <= 3.0 * f.se)
        assert np.all(f.se > 0) and np.all(f.tail_bound > 0)

    def test_zero_rhs(self, inv_i):
        f = epe_solve(lambda x: np.zeros_like(np.asarray(x, float)), OU, CASE_I, m=60, seed=1, inv=inv_i)
        assert np.all(f.f == 0.0) and np.all(f.se == 0.0)

    def test_deterministic(self, inv_i):
        g = lambda x: np.asarray(x, float)
        a = epe_solve(g, OU, CASE_I, grid=np.linspace(-1, 1, 5), m=200, seed=2, inv=inv_i)
        b = epe_solve(g, OU, CASE_I, grid=np.linspace(-1, 1, 5), m=200, seed=2, inv=inv_i)
        assert np.array_equal(a.f, b.f) and np.array_equal(a.se, b.se)

    def test_not_centered_rejected(self, inv_i):
        with pytest.raises(NotCenteredError):
            epe_solve(lambda x: np.asarray(x, float) + 1.0, OU, CASE_I, m=60, seed=2, inv=inv_i)

    def test_doubling_horizon_within_tail_bound(self, inv_i):
        g = lambda x: np.asarray(x, float)
        grid = np.linspace(-2, 2, 9)
        f20 = epe_solve(g, OU, CASE_I, grid=grid, t_max=20.0, m=500, seed=9, inv=inv_i)
        f40 = epe_solve(g, OU, CASE_I, grid=grid, t_max=40.0, m=500, seed=9, inv=inv_i)
        assert np.all(np.abs(f40.f - f20.f) <= f20.tail_bound)

    def test_linear_tail_extrapolation(self):
        grid = np.linspace(-2.0, 2.0, 5)
        f = EPEApprox(grid, grid**2, np.ones(5), 40.0, 100, np.ones(5))
        assert f(1.5) == pytest.approx(np.interp(1.5, grid, grid**2))
        hi_slope = (4.0 - 1.0) / 1.0
        assert f(4.0) == pytest.approx(4.0 + hi_slope * 2.0)
        lo_slope = (1.0 - 4.0) / 1.0
        assert f(-5.0) == pytest.approx(4.0 + lo_slope * -3.0)

    def test_approx_validation(self):
        with pytest.raises(ValueError, match="increasing"):
            EPEApprox(np.array([0.0, 0.0]), np.zeros(2), np.zeros(2), 1.0, 30, np.zeros(2))
        with pytest.raises(ValueError, match="shapes"):
            EPEApprox(np.array([0.0, 1.0]), np.zeros(3), np.zeros(2), 1.0, 30, np.zeros(2))
        with pytest.raises(ValueError, match="two points"):
            epe_solve(lambda x: np.asarray(x, float) * 0, OU, CASE_I, grid=np.array([1.0]), m=60)


class TestMartingaleCheck:
    def test_pure_ou_analytic_martingale(self):
        grid = np.linspace(-4, 4, 41)
        f = EPEApprox(grid, 2 * grid, np.zeros(41), 40.0, 100, np.zeros(41))
        rep = martingale_check(f, lambda x: np.asarray(x, float), OU, CASE_I, reps=4000, seed=3)
        assert rep.means.shape == (3, 3)
        assert rep.max_abs_z <= 3.0

    def test_zero_case_identically_zero(self):
        grid = np.linspace(-4, 4, 9)
        f = EPEApprox(grid, np.zeros(9), np.zeros(9), 40.0, 100, np.zeros(9))
        rep = martingale_check(f, lambda x: np.zeros_like(np.asarray(x, float)), OU, CASE_I, reps=100, seed=1)
        assert np.all(rep.means == 0.0)
        assert rep.max_abs_z == 0.0

    def test_benchmark_f1_panel(self, res_i, oracle_i):
        g1 = epe_rhs_scale(BENCH, OU, (oracle_i.alpha_star, oracle_i.gamma_star))
        rep = martingale_check(res_i.f1, g1, OU, CASE_I, reps=4000, seed=13)
        assert rep.max_abs_z <= 4.0

    def test_report_serialization(self):
        grid = np.linspace(-1, 1, 3)
        f = EPEApprox(grid, np.zeros(3), np.zeros(3), 1.0, 30, np.zeros(3))
        rep = martingale_check(f, lambda x: np.zeros_like(np.asarray(x, float)), OU, CASE_I, reps=50, seed=1)
        obj = rep.to_obj()
        assert set(obj) == {"starts", "lags", "means", "ses", "max_abs_z"}


class TestGammaMatrix:
    def test_case_i_values(self, inv_i, oracle_i):
        g = gamma_matrix(BENCH, OU, (oracle_i.alpha_star, oracle_i.gamma_star), inv_i)
        assert g[0, 1] == 0.0
        assert g[0, 0] == pytest.approx(oracle_i.gamma_gamma, abs=0.06)
        assert g[1, 1] == pytest.approx(oracle_i.gamma_alpha, abs=0.45)
        assert abs(g[1, 0]) <= 0.08

    def test_diffusion_values(self):
        orc = benchmark_oracle(DIFFUSION)
        inv = sample_invariant(OU, DIFFUSION, budget=20000, seed=14)
        g = gamma_matrix(BENCH, OU, (orc.alpha_star, orc.gamma_star), inv)
        assert g[0, 0] == pytest.approx(-2.0, abs=0.1)
        assert g[1, 1] == pytest.approx(6.0, abs=0.5)

    def test_correct_specification_exact_zeros(self, inv_i):
        model = ModelSpec(drift=LinearDecay(), scale=ConstantScale())
        g = gamma_matrix(model, OU, (0.5, 1.0), inv_i)
        # A - a vanishes identically, so the cross entry is exactly zero
        assert g[1, 0] == 0.0
        assert g[0, 0] == pytest.approx(-4.0, abs=1e-12)
        assert g[1, 1] == pytest.approx(2.0 * np.mean(inv_i.states**2), abs=1e-12)

    def test_matches_path_hessians(self, inv_i, oracle_i):
        # independent construction of the same limit: criterion hessians on a
        # long observed path vs the pi_0-averaged displays
        h, n = 0.01, 1_000_000
        rng = np.random.default_rng(17)
        dz = sample_increments(CASE_I, h, n, rng)
        rho = 1.0 - 0.5 * h
        y, _ = lfilter([1.0], [1.0, -rho], dz, zi=np.array([0.0]))
        path = SamplePath(h=h, values=np.concatenate([[0.0], y]))
        gmat = gamma_matrix(BENCH, OU, (oracle_i.alpha_star, oracle_i.gamma_star), inv_i)

        gs = oracle_i.gamma_star
        hess = g1_eval(path, BENCH, gs)[2]
        eps = 1e-4
        fd = (
            g1_eval(path, BENCH, gs + eps)[0]
            - 2.0 * g1_eval(path, BENCH, gs)[0]
            + g1_eval(path, BENCH, gs - eps)[0]
        ) / eps**2
        assert fd == pytest.approx(hess, rel=1e-5)
        assert hess == pytest.approx(gmat[0, 0], abs=0.12)

        a_s = oracle_i.alpha_star
        hess2 = g2_eval(path, BENCH, gs, a_s)[2]
        fd2 = (
            g2_eval(path, BENCH, gs, a_s + eps)[0]
            - 2.0 * g2_eval(path, BENCH, gs, a_s)[0]
            + g2_eval(path, BENCH, gs, a_s - eps)[0]
        ) / eps**2
        assert fd2 == pytest.approx(hess2, rel=1e-5)
        assert -hess2 == pytest.approx(gmat[1, 1], abs=1.5)


class TestSigmaMatrix:
    def test_case_i_matches_oracle(self, res_i, oracle_i):
        err = np.abs(res_i.sigma - oracle_i.sigma)
        gate = 4.0 * res_i.sigma_se + 0.03 * np.abs(oracle_i.sigma)
        assert np.all(err <= gate), f"{res_i.sigma} vs {oracle_i.sigma}"

    def test_symmetric_psd(self, res_i):
        assert res_i.sigma[0, 1] == res_i.sigma[1, 0]
        assert np.linalg.eigvalsh(res_i.sigma).min() >= -1e-6

    def test_correct_scale_reduces_to_fourth_cumulant(self, inv_i, oracle_i):
        # c constant and correct: f1 = 0 and Sigma_gamma = 4 kappa_4 exactly
        model = ModelSpec(drift=MeanRevertLinear(m=1.0), scale=ConstantScale())
        theta = (0.25, 1.0)
        f1 = epe_solve(epe_rhs_scale(model, OU, theta), OU, CASE_I, m=60, seed=15, inv=inv_i)
        assert np.all(f1.f == 0.0)
        f2 = epe_solve(epe_rhs_drift(model, OU, theta), OU, CASE_I, m=800, seed=15, inv=inv_i)
        sig = sigma_matrix(model, OU, theta, inv_i, f1, f2, CASE_I)
        assert sig[0, 0] == pytest.approx(4.0 * oracle_i.kappas[4], rel=1e-6)

    def test_seed_exchangeable(self, oracle_i):
        theta = (oracle_i.alpha_star, oracle_i.gamma_star)
        a = run_asymptotics(BENCH, OU, CASE_I, theta, seed=21, budget=15000, m=600, t_max=30.0)
        b = run_asymptotics(BENCH, OU, CASE_I, theta, seed=22, budget=15000, m=600, t_max=30.0)
        gate = 3.0 * np.sqrt(a.sigma_se**2 + b.sigma_se**2) + 0.02 * np.abs(a.sigma)
        assert np.all(np.abs(a.sigma - b.sigma) <= gate)


class TestAvar:
    def test_identity_gamma(self, oracle_i):
        np.testing.assert_array_equal(avar(np.eye(2), oracle_i.sigma), oracle_i.sigma)

    def test_diagonal_gamma(self, oracle_i):
        s = oracle_i.sigma
        v = avar(np.diag([2.0, 4.0]), s)
        assert v[0, 0] == pytest.approx(s[0, 0] / 4.0, rel=1e-14)
        assert v[1, 1] == pytest.approx(s[1, 1] / 16.0, rel=1e-14)
        assert v[0, 1] == pytest.approx(s[0, 1] / 8.0, rel=1e-14)

    def test_singular_gamma_rejected(self):
        with pytest.raises(SingularGammaError):
            avar(np.array([[1.0, 0.0], [0.0, 1e-13]]), np.eye(2))

    def test_indefinite_sigma_rejected(self):
        with pytest.raises(CovarianceError):
            avar(np.eye(2), np.array([[1.0, 0.0], [0.0, -1.0]]))

    def test_case_i_diagonal_near_oracle(self, res_i, oracle_i):
        rel = np.abs(np.diag(res_i.v) - np.diag(oracle_i.avar)) / np.diag(oracle_i.avar)
        assert np.all(rel <= 0.12)


class TestRunAsymptotics:
    def test_report_shape(self, res_i):
        assert isinstance(res_i, AsymptoticsResult)
        obj = res_i.to_obj()
        assert set(obj) == {"Gamma", "Sigma", "V", "diagnostics"}
        assert set(obj["diagnostics"]) >= {"invariant", "centering", "epe", "gamma_condition"}

    def test_v_consistent_with_parts(self, res_i):
        np.testing.assert_allclose(res_i.v, avar(res_i.gamma, res_i.sigma), atol=1e-14)

    def test_brownian_rejected(self, oracle_i):
        with pytest.raises(ValueError, match="pure-jump"):
            run_asymptotics(BENCH, OU, Brownian(1.0), (1.0 / 3.0, math.sqrt(2.0)))

    def test_deterministic(self, oracle_i):
        theta = (oracle_i.alpha_star, oracle_i.gamma_star)
        kw = dict(seed=8, budget=2000, m=60, t_max=10.0, grid_points=5)
        a = run_asymptotics(BENCH, OU, CASE_I, theta, **kw)
        b = run_asymptotics(BENCH, OU, CASE_I, theta, **kw)
        assert np.array_equal(a.sigma, b.sigma) and np.array_equal(a.gamma, b.gamma)
