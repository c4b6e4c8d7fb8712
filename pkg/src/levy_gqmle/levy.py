"""Driving-noise laws: parameters, exact increment samplers, cumulants,
jump densities and jump-measure integrals.

Three families are supported.  ``NormalInverseGaussian`` and
``BilateralGamma`` are pure-jump laws; ``Brownian`` is the continuous
reference case used to benchmark the estimators when the noise model is
Gaussian.  All laws used to drive the ergodic models are expected to be
standardized, ``E[Z_1] = 0`` and ``Var[Z_1] = 1``; ``standardization_check``
enforces this.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy.special import k1e

from ._util import NumericalError

__all__ = [
    "NormalInverseGaussian",
    "BilateralGamma",
    "Brownian",
    "LevyLaw",
    "cumulants",
    "standardization_check",
    "sample_increment",
    "sample_increments",
    "levy_density",
    "char_exponent",
    "integrate_levy",
    "to_json",
    "from_json",
    "QuadratureError",
]


class QuadratureError(NumericalError):
    """Jump-measure quadrature failed to converge."""


@dataclass(frozen=True)
class NormalInverseGaussian:
    """NIG law with shape ``alpha``, asymmetry ``beta``, scale ``delta``, location ``mu``.

    Requires ``0 <= |beta| < alpha`` and ``delta > 0``.  Blumenthal-Getoor
    index 1.
    """

    alpha: float
    beta: float
    delta: float
    mu: float

    def __post_init__(self):
        if not (self.delta > 0):
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not (abs(self.beta) < self.alpha):
            raise ValueError(f"need |beta| < alpha, got beta={self.beta}, alpha={self.alpha}")

    @property
    def bg_index(self) -> float:
        return 1.0

    @property
    def _gbar(self) -> float:
        return math.sqrt(self.alpha**2 - self.beta**2)


@dataclass(frozen=True)
class BilateralGamma:
    """Difference of two independent gamma subordinators.

    ``shape_pos, rate_pos`` control positive jumps, ``shape_neg, rate_neg``
    negative ones.  Blumenthal-Getoor index 0.
    """

    shape_pos: float
    rate_pos: float
    shape_neg: float
    rate_neg: float

    def __post_init__(self):
        for name in ("shape_pos", "rate_pos", "shape_neg", "rate_neg"):
            v = getattr(self, name)
            if not (v > 0):
                raise ValueError(f"{name} must be positive, got {v}")

    @property
    def bg_index(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Brownian:
    """Centered Brownian motion with standard deviation ``sigma`` per unit time.

    No jump part: jump-measure operations on this law raise ``ValueError``.
    """

    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def bg_index(self) -> float:
        return 0.0


LevyLaw = NormalInverseGaussian | BilateralGamma | Brownian


def cumulants(law: LevyLaw, order: int = 4) -> tuple[float, ...]:
    """First ``order`` cumulants of ``Z_1`` (``order <= 4``)."""
    if not 1 <= order <= 4:
        raise ValueError(f"order must be in 1..4, got {order}")
    if isinstance(law, NormalInverseGaussian):
        a, b, d = law.alpha, law.beta, law.delta
        g = law._gbar
        full = (
            law.mu + d * b / g,
            d * a**2 / g**3,
            3 * d * b * a**2 / g**5,
            3 * d * a**2 * (a**2 + 4 * b**2) / g**7,
        )
    elif isinstance(law, BilateralGamma):
        full = tuple(
            math.factorial(j - 1)
            * (law.shape_pos / law.rate_pos**j + (-1) ** j * law.shape_neg / law.rate_neg**j)
            for j in range(1, 5)
        )
    elif isinstance(law, Brownian):
        full = (0.0, law.sigma**2, 0.0, 0.0)
    else:
        raise TypeError(f"unknown law {law!r}")
    return full[:order]


def standardization_check(law: LevyLaw, tol: float = 1e-12) -> None:
    """Raise ``ValueError`` unless ``E[Z_1] = 0`` and ``Var[Z_1] = 1`` within ``tol``."""
    k1, k2 = cumulants(law, 2)
    if abs(k1) > tol or abs(k2 - 1.0) > tol:
        raise ValueError(f"law is not standardized: mean={k1!r}, variance={k2!r}")


def sample_increments(
    law: LevyLaw, h: float, size: int | tuple[int, ...], rng: np.random.Generator
) -> np.ndarray:
    """Exact draws of ``Z_{t+h} - Z_t``, shape ``size``.

    Reproducible given the generator state; ``h = 0`` yields exact zeros.
    """
    if h < 0:
        raise ValueError(f"h must be nonnegative, got {h}")
    if h == 0:
        return np.zeros(size)
    if isinstance(law, NormalInverseGaussian):
        # subordination: IG mixing variance, then conditional Gaussian
        dh = law.delta * h
        y = rng.wald(dh / law._gbar, dh**2, size)
        z = rng.standard_normal(size)
        return law.mu * h + law.beta * y + np.sqrt(y) * z
    if isinstance(law, BilateralGamma):
        gp = rng.gamma(law.shape_pos * h, 1.0 / law.rate_pos, size)
        gm = rng.gamma(law.shape_neg * h, 1.0 / law.rate_neg, size)
        return gp - gm
    if isinstance(law, Brownian):
        return law.sigma * math.sqrt(h) * rng.standard_normal(size)
    raise TypeError(f"unknown law {law!r}")


def sample_increment(law: LevyLaw, h: float, rng: np.random.Generator) -> float:
    """One draw of ``Z_{t+h} - Z_t``."""
    return float(sample_increments(law, h, 1, rng)[0])


def levy_density(law: LevyLaw, z: float | np.ndarray) -> float | np.ndarray:
    """Jump-measure density ``nu(z)`` at nonzero ``z``.

    Vectorized; rejects ``z = 0`` (the measure has a nonintegrable
    singularity there) and laws without a jump part.
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr == 0.0):
        raise ValueError("levy_density is undefined at z = 0")
    if isinstance(law, NormalInverseGaussian):
        az = law.alpha * np.abs(z_arr)
        # k1e = e^x K_1(x) keeps the product finite for large |z| and beta != 0
        out = (law.delta * law.alpha / math.pi) * np.exp(law.beta * z_arr - az) * k1e(az) / np.abs(z_arr)
    elif isinstance(law, BilateralGamma):
        out = np.where(
            z_arr > 0,
            law.shape_pos * np.exp(-law.rate_pos * z_arr),
            law.shape_neg * np.exp(law.rate_neg * z_arr),
        ) / np.abs(z_arr)
    elif isinstance(law, Brownian):
        raise ValueError("Brownian law has no jump part")
    else:
        raise TypeError(f"unknown law {law!r}")
    return out if out.ndim else float(out)


def char_exponent(law: LevyLaw, u: float | np.ndarray) -> complex | np.ndarray:
    """Characteristic exponent ``psi(u) = log E[exp(i u Z_1)]``."""
    u_arr = np.asarray(u, dtype=float)
    if isinstance(law, NormalInverseGaussian):
        g = law._gbar
        # principal sqrt is safe: Re(alpha^2 - (beta + iu)^2) = gbar^2 + u^2 > 0
        out = 1j * law.mu * u_arr + law.delta * (g - np.sqrt(law.alpha**2 - (law.beta + 1j * u_arr) ** 2))
    elif isinstance(law, BilateralGamma):
        out = law.shape_pos * np.log(law.rate_pos / (law.rate_pos - 1j * u_arr)) + law.shape_neg * np.log(
            law.rate_neg / (law.rate_neg + 1j * u_arr)
        )
    elif isinstance(law, Brownian):
        out = -0.5 * law.sigma**2 * u_arr**2 + 0j
    else:
        raise TypeError(f"unknown law {law!r}")
    return out if out.ndim else complex(out)


def _tail_rates(law: LevyLaw) -> tuple[float, float]:
    """Exponential decay rates of ``nu`` on the negative / positive side."""
    if isinstance(law, NormalInverseGaussian):
        return law.alpha + law.beta, law.alpha - law.beta
    if isinstance(law, BilateralGamma):
        return law.rate_neg, law.rate_pos
    raise ValueError("law has no jump part")


_U_LO = -30.0  # log |z| cutoff near the origin; controlled by the BG index < 2


def _nodes_at(law: LevyLaw, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid nodes/weights in u = log|z| for both half-lines.

    Integrates ``F`` against ``nu`` as ``sum(F(z) * w)``; tail cutoffs come
    from the exponential decay rate of the jump density on each side.
    """
    rate_neg, rate_pos = _tail_rates(law)
    zs, ws = [], []
    for sign, rate in ((-1.0, rate_neg), (1.0, rate_pos)):
        # z^4 e^{-rate z} is below 1e-18 of its peak for z >= 60/rate + 40
        u_hi = math.log(60.0 / rate + 40.0)
        n = int(math.ceil((u_hi - _U_LO) / step)) + 1
        u = _U_LO + step * np.arange(n)
        z = sign * np.exp(u)
        w = np.full(n, step)
        w[0] = w[-1] = step / 2
        # du-measure: nu(z) |dz/du| = nu(z) |z|
        zs.append(z)
        ws.append(w * levy_density(law, z) * np.abs(z))
    return np.concatenate(zs), np.concatenate(ws)


def integrate_levy(
    law: LevyLaw,
    integrand: Callable[[np.ndarray], np.ndarray],
    rel_tol: float = 1e-9,
    max_halvings: int = 12,
) -> float:
    """Integral of ``integrand`` against the jump measure of ``law``.

    ``integrand`` must be vectorized and ``O(z^2)`` near zero so the
    integral converges at the origin.  The log-spaced trapezoid rule is
    refined by step halving until successive values agree to ``rel_tol``
    relative to ``max(|I|, 1)``.
    """
    step = 0.5
    prev = None
    for _ in range(max_halvings):
        z, w = _nodes_at(law, step)
        val = float(np.dot(np.asarray(integrand(z), dtype=float), w))
        if prev is not None and abs(val - prev) <= rel_tol * max(abs(val), 1.0):
            return val
        prev = val
        step /= 2
    raise QuadratureError(f"jump integral did not converge below rel_tol={rel_tol}")


def _converged_nodes(law: LevyLaw, rel_tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray, float]:
    """Node/weight grid at a step validated on polynomial probes up to z^4.

    Returns ``(z, w, step)``; callers doing many integrals against the same
    law reuse the grid and confirm convergence with one half-step check on
    their own integrand.
    """
    step = 0.5
    probes = [lambda z: z**2, lambda z: z**4]
    prev = None
    for _ in range(12):
        z, w = _nodes_at(law, step)
        vals = np.array([np.dot(p(z), w) for p in probes])
        if prev is not None and np.all(np.abs(vals - prev) <= rel_tol * np.maximum(np.abs(vals), 1.0)):
            return z, w, step
        prev = vals
        step /= 2
    raise QuadratureError("probe moments did not converge on the jump grid")


def to_json(law: LevyLaw) -> str:
    """Serialize a law to a JSON string round-trippable by ``from_json``."""
    family = {NormalInverseGaussian: "nig", BilateralGamma: "bgamma", Brownian: "brownian"}[type(law)]
    return json.dumps({"family": family, "params": asdict(law)})


def from_json(text: str) -> LevyLaw:
    """Inverse of ``to_json``."""
    obj = json.loads(text)
    cls = {"nig": NormalInverseGaussian, "bgamma": BilateralGamma, "brownian": Brownian}[obj["family"]]
    return cls(**obj["params"])
