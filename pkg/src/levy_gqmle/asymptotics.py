"""Invariant sampling, Poisson-equation solutions, and the limit matrices.

The staged estimator is asymptotically normal with covariance
V = Gamma^{-1} Sigma Gamma^{-T}.  Gamma collects curvature of the limiting
criteria at the optimal parameter; Sigma is the jump-driven variance of the
scores and involves the solutions f_1, f_2 of extended Poisson equations.
None of this is closed-form for a general model, so each piece is realized
numerically: the invariant law pi_0 by one long thinned path, f_1/f_2 by
Monte Carlo time integrals of the conditional expectation, the jump measure
nu_0 by deterministic quadrature.

Everything here assumes the ergodic catalog: linear mean-reverting true
drift with constant true scale.  That keeps the mixing rate explicit, which
the tail bounds and the thinning defaults rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.signal import lfilter

from ._util import NumericalError, batch_means_se, substream
from .coefficients import ConstantScale, LinearDecay, MeanRevertLinear
from .gqmle import ModelSpec
from .levy import (
    Brownian,
    LevyLaw,
    QuadratureError,
    _converged_nodes,
    _nodes_at,
    _tail_rates,
    char_exponent,
    cumulants,
    sample_increments,
)
from .sde import DivergenceError, TrueModel, _euler_columns

__all__ = [
    "AsymptoticsResult",
    "CovarianceError",
    "EPEApprox",
    "InvariantSample",
    "MartingaleReport",
    "MixingError",
    "NotCenteredError",
    "SingularGammaError",
    "avar",
    "epe_rhs_drift",
    "epe_rhs_scale",
    "epe_solve",
    "gamma_matrix",
    "invariant_char",
    "martingale_check",
    "run_asymptotics",
    "sample_invariant",
    "sigma_matrix",
]

_COND_LIMIT = 1e12
# substream tags so the invariant path, the EPE paths, and the martingale
# paths never share draws even under one seed
_TAG_INVARIANT = 3101
_TAG_EPE = 7001
_TAG_MARTINGALE = 7301
_CHUNK_STEPS = 500


class MixingError(NumericalError):
    """Invariant sample failed the variance sanity gate."""


class NotCenteredError(NumericalError):
    """EPE right-hand side is not centered under pi_0."""


class SingularGammaError(NumericalError):
    """Gamma is numerically singular."""


class CovarianceError(NumericalError):
    """Sigma or V fails the positive-semidefiniteness tolerance."""


def _linear_ou_form(model: TrueModel) -> tuple[float, float, float]:
    """(rate, stationary mean, scale) of a linear-drift constant-scale model."""
    if not isinstance(model.scale_family, ConstantScale):
        raise ValueError("need a constant true scale for invariant sampling")
    if isinstance(model.drift_family, LinearDecay):
        rate, mean = model.drift_param, 0.0
    elif isinstance(model.drift_family, MeanRevertLinear):
        rate, mean = model.drift_param, model.drift_family.m
    else:
        raise ValueError("need a linear mean-reverting true drift")
    if rate <= 0.0:
        raise ValueError(f"drift rate must be positive, got {rate}")
    return rate, mean, model.scale_param


@dataclass(frozen=True)
class InvariantSample:
    """States approximately distributed as pi_0, with sampling provenance."""

    states: np.ndarray
    burn_in: float
    spacing: float
    seed: int
    step: float

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 1 or states.size < 1000:
            raise ValueError("invariant sample needs at least 1000 states")
        if not np.isfinite(states).all():
            raise ValueError("invariant sample contains non-finite states")
        object.__setattr__(self, "states", states)


def sample_invariant(
    model: TrueModel,
    noise: LevyLaw,
    budget: int = 20000,
    seed: int = 0,
    spacing: float = 1.0,
    burn_in: float = 50.0,
    step: float = 0.01,
) -> InvariantSample:
    """Draw ``budget`` states from one long thinned Euler path.

    The path starts at the stationary mean, discards ``burn_in`` time units,
    then keeps one state every ``spacing`` time units.  A linear drift makes
    the recursion a scalar AR(1), so the whole path runs through a single
    ``lfilter`` pass per chunk.

    The sample variance must land within 10% of kappa_2 scale^2 / (2 rate);
    a larger mismatch means the chain did not mix at this step size and
    raises :class:`MixingError`.
    """
    if budget < 1000:
        raise ValueError(f"budget must be at least 1000, got {budget}")
    if spacing < 1.0:
        raise ValueError(f"thinning spacing must be >= 1 time unit, got {spacing}")
    if burn_in < 0.0 or step <= 0.0:
        raise ValueError("burn_in must be >= 0 and step > 0")
    rate, mean, sigma = _linear_ou_form(model)
    if rate * step >= 1.0:
        raise ValueError("step too coarse: rate*step must be < 1")

    keep = max(1, int(round(spacing / step)))
    burn_steps = int(round(burn_in / step))
    total = burn_steps + budget * keep
    rho = 1.0 - rate * step

    states = np.empty(budget)
    got = 0
    done = 0
    next_keep = burn_steps + keep
    zi = np.array([rho * mean])
    chunk = 2_000_000
    while done < total:
        m_steps = min(chunk, total - done)
        rng = substream(seed, _TAG_INVARIANT, done // chunk)
        dz = sample_increments(noise, step, m_steps, rng)
        u = rate * mean * step + sigma * dz
        y, zi = lfilter([1.0], [1.0, -rho], u, zi=zi)
        k0 = next_keep - done - 1
        if k0 < m_steps:
            picked = y[k0:m_steps:keep]
            states[got : got + picked.size] = picked
            got += picked.size
            next_keep += keep * picked.size
        done += m_steps

    var = float(np.var(states))
    theory = sigma**2 * cumulants(noise, 2)[1] / (2.0 * rate)
    if abs(var / theory - 1.0) > 0.10:
        raise MixingError(
            f"invariant sample variance {var:.4g} vs theory {theory:.4g}: mixing suspect"
        )
    return InvariantSample(states, burn_in, spacing, seed, step)


def invariant_char(
    noise: LevyLaw,
    u: float | np.ndarray,
    rate: float = 0.5,
    sigma: float = 1.0,
    mean: float = 0.0,
    t_max: float = 80.0,
    step: float = 0.01,
) -> np.ndarray:
    """Characteristic function of pi_0 for the linear catalog model.

    p_hat(u) = exp(i u mean) * exp( int_0^inf psi(sigma e^{-rate s} u) ds ),
    truncated at ``t_max`` where the damped argument is negligible.
    """
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    s = np.arange(0.0, t_max + step, step)
    damp = sigma * np.exp(-rate * s)
    vals = char_exponent(noise, np.outer(damp, u_arr))
    integral = np.trapezoid(vals, dx=step, axis=0)
    out = np.exp(1j * u_arr * mean + integral)
    return out if np.ndim(u) else complex(out[0])


def epe_rhs_scale(
    model: ModelSpec, true_model: TrueModel, theta_star: tuple[float, float]
) -> Callable[[np.ndarray], np.ndarray]:
    """Scale-score integrand g_1 at the optimal parameter (centered under pi_0)."""
    _, gamma_s = theta_star
    scale = model.scale

    def g1(x):
        x = np.asarray(x, dtype=float)
        c = scale.value(x, gamma_s)
        return scale.d_theta(x, gamma_s) * (c * c - true_model.C(x) ** 2) / c**3

    return g1


def epe_rhs_drift(
    model: ModelSpec, true_model: TrueModel, theta_star: tuple[float, float]
) -> Callable[[np.ndarray], np.ndarray]:
    """Drift-score integrand g_2 at the optimal parameter (centered under pi_0)."""
    alpha_s, gamma_s = theta_star
    drift, scale = model.drift, model.scale

    def g2(x):
        x = np.asarray(x, dtype=float)
        c2 = scale.value(x, gamma_s) ** 2
        return drift.d_theta(x, alpha_s) * (true_model.A(x) - drift.value(x, alpha_s)) / c2

    return g2


@dataclass(frozen=True)
class EPEApprox:
    """Grid approximation of a Poisson-equation solution.

    Calling the object interpolates linearly on the grid and extrapolates
    linearly beyond it using the outermost grid slopes.
    """

    x: np.ndarray
    f: np.ndarray
    se: np.ndarray
    t_max: float
    m: int
    tail_bound: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        f = np.asarray(self.f, dtype=float)
        se = np.asarray(self.se, dtype=float)
        tb = np.asarray(self.tail_bound, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ValueError("grid needs at least two points")
        if not (np.diff(x) > 0).all():
            raise ValueError("grid must be strictly increasing")
        if x.shape != f.shape or x.shape != se.shape or x.shape != tb.shape:
            raise ValueError("grid, values, and errors must have equal shapes")
        if not (np.isfinite(f).all() and np.isfinite(se).all()):
            raise ValueError("f and se must be finite")
        for name, arr in (("x", x), ("f", f), ("se", se), ("tail_bound", tb)):
            object.__setattr__(self, name, arr)

    def __call__(self, xq) -> np.ndarray | float:
        q = np.asarray(xq, dtype=float)
        out = np.interp(q, self.x, self.f)
        lo = q < self.x[0]
        hi = q > self.x[-1]
        if lo.any():
            slope = (self.f[1] - self.f[0]) / (self.x[1] - self.x[0])
            out = np.where(lo, self.f[0] + slope * (q - self.x[0]), out)
        if hi.any():
            slope = (self.f[-1] - self.f[-2]) / (self.x[-1] - self.x[-2])
            out = np.where(hi, self.f[-1] + slope * (q - self.x[-1]), out)
        return float(out) if q.ndim == 0 else out


def _chunked_increments(
    noise: LevyLaw, step: float, steps: int, cols: int, seed: int, tag: int
) -> np.ndarray:
    """(steps, cols) increments generated in fixed 500-step substream chunks.

    Chunking makes the first ``k`` chunks identical whenever the horizon is
    extended, so runs at T and 2T share their common time range draw for
    draw and tail-bound comparisons see only the added stretch.
    """
    blocks = []
    for ci in range(0, steps, _CHUNK_STEPS):
        k = min(_CHUNK_STEPS, steps - ci)
        rng = substream(seed, tag, ci // _CHUNK_STEPS)
        blocks.append(sample_increments(noise, step, (k, cols), rng))
    return np.concatenate(blocks, axis=0)


def _run_columns(model: TrueModel, step: float, x0: float, z: np.ndarray) -> np.ndarray:
    values, first_bad = _euler_columns(model, step, np.full(z.shape[1], x0), z)
    if (first_bad >= 0).any():
        raise DivergenceError(int(first_bad[first_bad >= 0][0]))
    return values


def epe_solve(
    g: Callable[[np.ndarray], np.ndarray],
    model: TrueModel,
    noise: LevyLaw,
    grid: np.ndarray | None = None,
    t_max: float = 40.0,
    m: int = 2000,
    seed: int = 0,
    inv: InvariantSample | None = None,
    step: float = 0.01,
    threads: int | None = None,
) -> EPEApprox:
    """Monte Carlo solution f(x) = int_0^t_max E^x[g(X_t)] dt on a grid.

    From each grid point, ``m`` Euler paths share one increment panel
    (common random numbers), and the time integral uses the trapezoid rule
    on the simulation grid.  ``g`` must average to zero under pi_0; the
    centering is gated at three batch-means standard errors against ``inv``
    (sampled internally when not supplied) because a non-centered g makes
    the time integral diverge linearly.

    The reported tail bound combines the conditional-mean remainder at
    ``t_max``, discounted at the known mixing rate, with a 3-sigma allowance
    for the Monte Carlo fluctuation of everything beyond the horizon.
    """
    if t_max <= 0 or m < 30 or step <= 0:
        raise ValueError("need t_max > 0, m >= 30, step > 0")
    rate, _, _ = _linear_ou_form(model)
    if inv is None:
        inv = sample_invariant(model, noise, seed=seed)
    gvals = np.asarray(g(inv.states), dtype=float)
    gbar = float(np.mean(gvals))
    gse = batch_means_se(gvals)
    if abs(gbar) > 3.0 * gse:
        raise NotCenteredError(
            f"mean of g under pi_0 is {gbar:.4g} ({gse:.4g} se): not centered"
        )
    if grid is None:
        grid = np.quantile(inv.states, np.linspace(0.01, 0.99, 25))
    grid = np.unique(np.asarray(grid, dtype=float))
    if grid.size < 2:
        raise ValueError("grid collapsed to fewer than two points")

    steps = int(round(t_max / step))
    z = _chunked_increments(noise, step, steps, m, seed, _TAG_EPE)

    def one(x0: float) -> tuple[float, float, float]:
        values = _run_columns(model, step, x0, z)
        gx = np.asarray(g(values), dtype=float)
        total = step * (gx.sum(axis=0) - 0.5 * (gx[0] + gx[-1]))
        g_end = gx[-1]
        m_end = float(np.mean(g_end))
        se_end = batch_means_se(g_end)
        fluct = 3.0 * math.sqrt(2.0 * t_max * float(np.var(g_end)) / (rate * m))
        bound = (abs(m_end) + 3.0 * se_end) / rate + fluct
        return float(np.mean(total)), batch_means_se(total), bound

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=min(threads, grid.size)) as pool:
            rows = list(pool.map(one, grid))
    else:
        rows = [one(x0) for x0 in grid]
    f, se, tail = (np.array(col) for col in zip(*rows))
    return EPEApprox(grid, f, se, t_max, m, tail)


@dataclass(frozen=True)
class MartingaleReport:
    """E[M_{s} - M_0] panel for M_t = f(X_t) + int_0^t g(X_u) du."""

    starts: np.ndarray
    lags: np.ndarray
    means: np.ndarray
    ses: np.ndarray

    @property
    def zscores(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.abs(self.means) / self.ses
        return np.where(self.ses > 0, z, np.where(self.means == 0.0, 0.0, np.inf))

    @property
    def max_abs_z(self) -> float:
        return float(np.max(self.zscores))

    def to_obj(self) -> dict:
        return {
            "starts": self.starts.tolist(),
            "lags": self.lags.tolist(),
            "means": self.means.tolist(),
            "ses": self.ses.tolist(),
            "max_abs_z": self.max_abs_z,
        }


def martingale_check(
    f: EPEApprox | Callable[[np.ndarray], np.ndarray],
    g: Callable[[np.ndarray], np.ndarray],
    model: TrueModel,
    noise: LevyLaw,
    horizon: float = 2.0,
    reps: int = 4000,
    seed: int = 0,
    starts: tuple[float, ...] = (-1.5, 0.0, 1.5),
    step: float = 0.01,
) -> MartingaleReport:
    """Estimate the martingale-increment means over a (start, lag) panel."""
    if horizon <= 0 or reps < 30:
        raise ValueError("need horizon > 0 and reps >= 30")
    steps = int(round(horizon / step))
    lag_idx = sorted({max(1, steps // 4), max(1, steps // 2), steps})
    z = _chunked_increments(noise, step, steps, reps, seed, _TAG_MARTINGALE)
    means = np.empty((len(starts), len(lag_idx)))
    ses = np.empty_like(means)
    for i, x0 in enumerate(starts):
        values = _run_columns(model, step, x0, z)
        gx = np.asarray(g(values), dtype=float)
        cum = cumulative_trapezoid(gx, dx=step, axis=0, initial=0.0)
        f0 = float(np.asarray(f(np.float64(x0))))
        for j, k in enumerate(lag_idx):
            d = np.asarray(f(values[k]), dtype=float) + cum[k] - f0
            means[i, j] = float(np.mean(d))
            ses[i, j] = batch_means_se(d)
    return MartingaleReport(
        np.asarray(starts, dtype=float),
        step * np.asarray(lag_idx, dtype=float),
        means,
        ses,
    )


def _gamma_terms(
    model: ModelSpec,
    true_model: TrueModel,
    theta_star: tuple[float, float],
    states: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-state integrands of (Gamma_gamma, Gamma_alpha, Gamma_alphagamma)."""
    alpha_s, gamma_s = theta_star
    x = states
    c = model.scale.value(x, gamma_s)
    c1 = model.scale.d_theta(x, gamma_s)
    c2 = model.scale.d2_theta(x, gamma_s)
    big_c2 = true_model.C(x) ** 2
    gg = -2.0 * ((c2 * c - c1**2) / c**2 - (c2 * c - 3.0 * c1**2) / c**4 * big_c2)
    a = model.drift.value(x, alpha_s)
    a1 = model.drift.d_theta(x, alpha_s)
    a2 = model.drift.d2_theta(x, alpha_s)
    gap = true_model.A(x) - a
    ga = 2.0 * (a1**2 - gap * a2) / c**2
    gag = 4.0 * gap * a1 * c1 / c**3
    return gg, ga, gag


def _check_invertible(g: np.ndarray) -> None:
    if not np.isfinite(g).all() or np.linalg.cond(g) > _COND_LIMIT:
        raise SingularGammaError(f"Gamma is numerically singular: {g.tolist()}")


def gamma_matrix(
    model: ModelSpec,
    true_model: TrueModel,
    theta_star: tuple[float, float],
    inv: InvariantSample,
) -> np.ndarray:
    """Empirical pi_0-average of the curvature integrands, (gamma, alpha) order.

    ``theta_star`` is (alpha, gamma).  The matrix is lower triangular: the
    scale stage does not involve alpha, so the upper-right entry is zero.
    """
    gg, ga, gag = _gamma_terms(model, true_model, theta_star, inv.states)
    g = np.array([[float(np.mean(gg)), 0.0], [float(np.mean(gag)), float(np.mean(ga))]])
    _check_invertible(g)
    return g


def _sigma_terms(
    model: ModelSpec,
    true_model: TrueModel,
    theta_star: tuple[float, float],
    states: np.ndarray,
    f1: Callable,
    f2: Callable,
    nodes: np.ndarray,
    weights: np.ndarray,
    chunk: int = 500,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-state inner jump integrals (S_gamma, S_alpha, S_cross)."""
    alpha_s, gamma_s = theta_star
    n = states.size
    s_g = np.empty(n)
    s_a = np.empty(n)
    s_x = np.empty(n)
    z = nodes[None, :]
    for i in range(0, n, chunk):
        x = states[i : i + chunk, None]
        c = model.scale.value(x, gamma_s)
        big_c = true_model.C(x)
        w_g = model.scale.d_theta(x, gamma_s) * big_c**2 / c**3
        w_a = model.drift.d_theta(x, alpha_s) * big_c / c**2
        xz = x + big_c * z
        v1 = w_g * z**2 + f1(xz) - f1(x)
        v2 = w_a * z + f2(xz) - f2(x)
        s_g[i : i + chunk] = (v1 * v1) @ weights
        s_a[i : i + chunk] = (v2 * v2) @ weights
        s_x[i : i + chunk] = (v1 * v2) @ weights
    return s_g, s_a, s_x


def _assemble_sigma(terms: tuple[np.ndarray, np.ndarray, np.ndarray]) -> np.ndarray:
    s_g, s_a, s_x = terms
    off = -4.0 * float(np.mean(s_x))
    return np.array([[4.0 * float(np.mean(s_g)), off], [off, 4.0 * float(np.mean(s_a))]])


def _sigma_full(
    model: ModelSpec,
    true_model: TrueModel,
    theta_star: tuple[float, float],
    inv: InvariantSample,
    f1: Callable,
    f2: Callable,
    noise: LevyLaw,
    rel_tol: float = 1e-9,
    n_states: int = 4000,
    chunk: int = 500,
) -> tuple[np.ndarray, np.ndarray]:
    """(Sigma, entrywise standard errors) with a half-step quadrature gate."""
    states = inv.states
    if states.size > n_states:
        stride = states.size // n_states
        states = states[::stride][:n_states]
    z, w, qstep = _converged_nodes(noise, rel_tol)
    coarse = _assemble_sigma(
        _sigma_terms(model, true_model, theta_star, states, f1, f2, z, w, chunk)
    )
    z2, w2 = _nodes_at(noise, qstep / 2.0)
    fine_terms = _sigma_terms(model, true_model, theta_star, states, f1, f2, z2, w2, chunk)
    sigma = _assemble_sigma(fine_terms)
    drift_err = float(np.max(np.abs(sigma - coarse)))
    if drift_err > 1e-3 * max(1.0, float(np.max(np.abs(sigma)))):
        raise QuadratureError(f"jump quadrature unstable for Sigma: delta {drift_err:.3g}")
    eig = np.linalg.eigvalsh(sigma)
    if eig.min() < -1e-6:
        raise CovarianceError(f"Sigma has negative eigenvalue {eig.min():.3g}")
    se_g, se_a, se_x = (4.0 * batch_means_se(t) for t in fine_terms)
    ses = np.array([[se_g, se_x], [se_x, se_a]])
    return sigma, ses


def sigma_matrix(
    model: ModelSpec,
    true_model: TrueModel,
    theta_star: tuple[float, float],
    inv: InvariantSample,
    f1: Callable,
    f2: Callable,
    noise: LevyLaw,
    rel_tol: float = 1e-9,
    n_states: int = 4000,
) -> np.ndarray:
    """Sigma in (gamma, alpha) order: outer pi_0 average, inner nu_0 quadrature.

    ``theta_star`` is (alpha, gamma); ``f1``/``f2`` are the EPE solutions
    (any callables accepting arrays, e.g. :class:`EPEApprox`).
    """
    return _sigma_full(
        model, true_model, theta_star, inv, f1, f2, noise, rel_tol, n_states
    )[0]


def avar(gamma: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """V = Gamma^{-1} Sigma Gamma^{-T}, symmetrized and PSD-gated."""
    g = np.asarray(gamma, dtype=float)
    s = np.asarray(sigma, dtype=float)
    _check_invertible(g)
    gi = np.linalg.inv(g)
    v = gi @ s @ gi.T
    v = 0.5 * (v + v.T)
    eig = np.linalg.eigvalsh(v)
    if eig.min() < -1e-10:
        raise CovarianceError(f"V has negative eigenvalue {eig.min():.3g}")
    return v


@dataclass(frozen=True)
class AsymptoticsResult:
    """Gamma, Sigma, V with diagnostics and the EPE solutions used."""

    gamma: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    gamma_se: np.ndarray
    sigma_se: np.ndarray
    f1: EPEApprox
    f2: EPEApprox
    diagnostics: dict

    def to_obj(self) -> dict:
        return {
            "Gamma": self.gamma.tolist(),
            "Sigma": self.sigma.tolist(),
            "V": self.v.tolist(),
            "diagnostics": self.diagnostics,
        }


def run_asymptotics(
    model: ModelSpec,
    true_model: TrueModel,
    noise: LevyLaw,
    theta_star: tuple[float, float],
    seed: int = 0,
    budget: int = 20000,
    t_max: float = 40.0,
    m: int = 2000,
    grid_points: int = 25,
    n_states: int = 4000,
    step: float = 0.01,
    threads: int | None = None,
) -> AsymptoticsResult:
    """Full pipeline: pi_0 sample, EPE solves, Gamma, Sigma, V.

    The EPE grid is the pi_0 quantile grid extended sideways by the jump
    reach 8 / (slowest nu_0 tail rate), so that x + C(x) z stays on the grid
    for all jumps the quadrature weights non-negligibly.
    """
    if isinstance(noise, Brownian):
        raise ValueError("asymptotics pipeline needs a pure-jump noise")
    inv = sample_invariant(true_model, noise, budget=budget, seed=seed, step=step)
    base = np.quantile(inv.states, np.linspace(0.01, 0.99, grid_points))
    reach = 8.0 / min(_tail_rates(noise))
    left = np.linspace(base[0] - reach, base[0], 5)[:-1]
    right = np.linspace(base[-1], base[-1] + reach, 5)[1:]
    grid = np.concatenate([left, base, right])

    g1 = epe_rhs_scale(model, true_model, theta_star)
    g2 = epe_rhs_drift(model, true_model, theta_star)
    f1 = epe_solve(g1, true_model, noise, grid, t_max, m, seed, inv, step, threads)
    f2 = epe_solve(g2, true_model, noise, grid, t_max, m, seed, inv, step, threads)

    gg, ga, gag = _gamma_terms(model, true_model, theta_star, inv.states)
    gamma = np.array([[float(np.mean(gg)), 0.0], [float(np.mean(gag)), float(np.mean(ga))]])
    _check_invertible(gamma)
    gamma_se = np.array(
        [[batch_means_se(gg), 0.0], [batch_means_se(gag), batch_means_se(ga)]]
    )
    sigma, sigma_se = _sigma_full(
        model, true_model, theta_star, inv, f1, f2, noise, n_states=n_states
    )
    v = avar(gamma, sigma)

    g1v = np.asarray(g1(inv.states), dtype=float)
    g2v = np.asarray(g2(inv.states), dtype=float)
    diagnostics = {
        "seed": seed,
        "invariant": {
            "size": int(inv.states.size),
            "mean": float(np.mean(inv.states)),
            "var": float(np.var(inv.states)),
            "burn_in": inv.burn_in,
            "spacing": inv.spacing,
            "step": inv.step,
        },
        "centering": {
            "g1_mean": float(np.mean(g1v)),
            "g1_se": batch_means_se(g1v),
            "g2_mean": float(np.mean(g2v)),
            "g2_se": batch_means_se(g2v),
        },
        "epe": {
            "t_max": t_max,
            "m": m,
            "grid_points": int(grid.size),
            "max_tail_bound_f1": float(np.max(f1.tail_bound)),
            "max_tail_bound_f2": float(np.max(f2.tail_bound)),
            "max_se_f1": float(np.max(f1.se)),
            "max_se_f2": float(np.max(f2.se)),
        },
        "gamma_condition": float(np.linalg.cond(gamma)),
        "gamma_se": gamma_se.tolist(),
        "sigma_se": sigma_se.tolist(),
    }
    return AsymptoticsResult(gamma, sigma, v, gamma_se, sigma_se, f1, f2, diagnostics)
