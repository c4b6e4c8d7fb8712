"""Independent oracles for expected values asserted in the test suite.

Everything here reaches its numbers by a different route than the library:
cumulants via high-precision Taylor expansion of closed-form cumulant
generating functions, stationary-law moments via the cumulant scaling of the
linear-drift invariant law, Poisson-equation solutions via a triangular
polynomial solve against the generator, and score covariances via exact
polynomial algebra in (x, z).  Only the benchmark model (drift -x/2, unit
scale, fitted drift alpha(1-x), fitted scale gamma/sqrt(1+x^2)) is covered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from numpy.polynomial import polynomial as npp
from scipy.signal import convolve2d

from levy_gqmle.levy import BilateralGamma, Brownian, LevyLaw, NormalInverseGaussian

DRIFT_RATE = 0.5  # benchmark true drift is -x/2


def cgf_cumulants(law: LevyLaw, order: int = 8) -> list[float]:
    """kappa_0..kappa_order of Z_1, from mpmath Taylor coefficients of the CGF."""
    with mp.workdps(60):
        if isinstance(law, NormalInverseGaussian):
            a, b, d, u0 = map(mp.mpf, (law.alpha, law.beta, law.delta, law.mu))
            gbar = mp.sqrt(a**2 - b**2)

            def K(u):
                return u0 * u + d * (gbar - mp.sqrt(a**2 - (b + u) ** 2))

        elif isinstance(law, BilateralGamma):
            sp_, rp, sm, rm = map(mp.mpf, (law.shape_pos, law.rate_pos, law.shape_neg, law.rate_neg))

            def K(u):
                return sp_ * mp.log(rp / (rp - u)) + sm * mp.log(rm / (rm + u))

        elif isinstance(law, Brownian):
            s = mp.mpf(law.sigma)

            def K(u):
                return s**2 * u**2 / 2

        else:
            raise TypeError(law)
        coef = mp.taylor(K, 0, order)
        return [float(mp.factorial(j) * coef[j]) for j in range(order + 1)]


def invariant_cumulants(kappas: list[float], drift_rate: float = DRIFT_RATE) -> list[float]:
    """Cumulants of the stationary law of dX = -drift_rate*X dt + dZ."""
    return [0.0] + [kappas[j] / (j * drift_rate) for j in range(1, len(kappas))]


def cumulants_to_moments(cums: list[float]) -> list[float]:
    """Raw moments m_0..m_K from cumulants via the standard recursion."""
    K = len(cums) - 1
    m = [1.0] + [0.0] * K
    for k in range(1, K + 1):
        m[k] = sum(math.comb(k - 1, j - 1) * cums[j] * m[k - j] for j in range(1, k + 1))
    return m


def ou_poly_epe(
    g_coeffs, kappas: list[float], moments: list[float], drift_rate: float = DRIFT_RATE
) -> np.ndarray:
    """Polynomial solution of the extended-generator equation A f = -g.

    The generator of dX = -drift_rate*X dt + dZ maps x^k to
    -drift_rate*k*x^k + sum_{j=2..k} C(k,j) kappa_j x^{k-j}, so the
    coefficients solve triangularly from the top degree down.  The constant
    term is fixed to the pi0-centered choice, which matches the
    time-integral representation f(x) = int_0^inf E^x[g(X_t)] dt.
    """
    g = list(g_coeffs)
    K = len(g) - 1
    b = [0.0] * (K + 1)
    for k in range(K, 0, -1):
        s = g[k] + sum(math.comb(k + j, j) * kappas[j] * b[k + j] for j in range(2, K - k + 1))
        b[k] = s / (drift_rate * k)
    resid = g[0] + sum(kappas[j] * b[j] for j in range(2, K + 1))
    if abs(resid) > 1e-10 * max(1.0, abs(g[0])):
        raise ValueError(f"g is not centered under pi0 (degree-0 residual {resid})")
    b[0] = -sum(b[k] * moments[k] for k in range(1, K + 1))
    return np.array(b)


def shift_poly(b) -> np.ndarray:
    """2-D coefficient array of f(x+z) for 1-D coefficients f = sum b_k x^k."""
    K = len(b) - 1
    P = np.zeros((K + 1, K + 1))
    for k in range(K + 1):
        for l in range(k + 1):
            P[k - l, l] += b[k] * math.comb(k, l)
    return P


def poly_xz_expectation(R: np.ndarray, moments: list[float], kappas: list[float]) -> float:
    """E[sum R[a,b] x^a z^b] under pi0(dx) nu0(dz); requires no z^0/z^1 mass."""
    if not np.allclose(R[:, :2], 0.0, atol=1e-12):
        raise ValueError("integrand has z^0 or z^1 terms; nu0-integral undefined")
    total = 0.0
    for a in range(R.shape[0]):
        for bb in range(2, R.shape[1]):
            if R[a, bb] != 0.0:
                total += R[a, bb] * moments[a] * kappas[bb]
    return total


@dataclass
class BenchmarkOracle:
    """Exact limit quantities for one noise law driving the benchmark model."""

    law: LevyLaw
    kappas: list[float]
    inv_moments: list[float]
    alpha_star: float
    gamma_star: float
    gamma_gamma: float
    gamma_alpha: float
    g1_coeffs: np.ndarray = field(repr=False)
    g2_coeffs: np.ndarray = field(repr=False)
    f1_coeffs: np.ndarray = field(repr=False)
    f2_coeffs: np.ndarray = field(repr=False)
    sigma: np.ndarray | None = field(default=None, repr=False)
    avar: np.ndarray | None = field(default=None, repr=False)


def benchmark_oracle(law: LevyLaw) -> BenchmarkOracle:
    """Build all exact limits for the benchmark model driven by ``law``."""
    kap = cgf_cumulants(law, order=8)
    m = cumulants_to_moments(invariant_cumulants(kap))
    m2, m3, m4 = m[2], m[3], m[4]
    gamma_star = math.sqrt(1.0 + m2)
    # Gamma_alpha = 2 E[(1-x)^2 (1+x^2)] / gamma*^2; equals 3 - 2 m3 + m4 when m2 = 1
    gamma_alpha = 2.0 * (1.0 + 2.0 * m2 - 2.0 * m3 + m4) / gamma_star**2
    # first-order condition of the drift limit criterion; reduces to the
    # familiar (1 - m3 + m4) / (2 (3 - 2 m3 + m4)) when m2 = 1
    alpha_star = (m2 + m4 - m3) / (2.0 * (1.0 + 2.0 * m2 - 2.0 * m3 + m4))
    gamma_gamma = -4.0 / gamma_star**2

    g3 = gamma_star**3
    g1 = np.array([(gamma_star**2 - 1.0) / g3, 0.0, -1.0 / g3])
    # (1-x) * (-x/2 - alpha*(1-x)) * (1+x^2) / gamma^2
    g2 = npp.polymul(
        npp.polymul([1.0, -1.0], [-alpha_star, alpha_star - 0.5]), [1.0, 0.0, 1.0]
    ) / gamma_star**2

    f1 = ou_poly_epe(g1, kap, m)
    f2 = ou_poly_epe(g2, kap, m)

    sigma = avar = None
    if not isinstance(law, Brownian):
        # v_gamma = (dc/c^3) z^2 + f1(x+z) - f1(x); v_alpha = (da/c^2) z + f2(x+z) - f2(x)
        w = np.array([1.0, 0.0, 1.0]) / g3
        vg = shift_poly(f1)
        vg[:, 0] -= f1
        vg[: len(w), 2] += w
        u = npp.polymul([1.0, -1.0], [1.0, 0.0, 1.0]) / gamma_star**2
        va = shift_poly(f2)
        if va.shape[0] < len(u):
            pad = np.zeros((len(u), len(u)))
            pad[: va.shape[0], : va.shape[1]] = va
            va = pad
        va[:, 0] -= np.pad(f2, (0, va.shape[0] - len(f2)))
        va[: len(u), 1] += u
        s_g = 4.0 * poly_xz_expectation(convolve2d(vg, vg), m, kap)
        s_a = 4.0 * poly_xz_expectation(convolve2d(va, va), m, kap)
        s_ag = -4.0 * poly_xz_expectation(convolve2d(vg, va), m, kap)
        sigma = np.array([[s_g, s_ag], [s_ag, s_a]])
        gam = np.array([[gamma_gamma, 0.0], [0.0, gamma_alpha]])
        gi = np.linalg.inv(gam)
        avar = gi @ sigma @ gi.T

    return BenchmarkOracle(
        law=law,
        kappas=kap,
        inv_moments=m,
        alpha_star=alpha_star,
        gamma_star=gamma_star,
        gamma_gamma=gamma_gamma,
        gamma_alpha=gamma_alpha,
        g1_coeffs=g1,
        g2_coeffs=np.asarray(g2),
        f1_coeffs=f1,
        f2_coeffs=f2,
        sigma=sigma,
        avar=avar,
    )
