"""Parametric drift and scale families with analytic derivatives.

Every family is scalar-parametric and exposes ``value``, ``d_theta``,
``d2_theta`` and ``d_x``, vectorized over the state.  Drift families are
linear in their parameter and expose the factorization
``a(x, theta) = theta * basis(x)``; scale families are multiplicative,
``c(x, theta) = theta * profile(x)``.  The estimation stages exploit both
structures for closed forms.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "MeanRevertLinear",
    "ConstantDrift",
    "LinearDecay",
    "RationalSqrt",
    "ConstantScale",
    "DriftFamily",
    "ScaleFamily",
    "family_to_obj",
    "family_from_obj",
]


@dataclass(frozen=True)
class MeanRevertLinear:
    """a(x, alpha) = alpha (m - x)."""

    m: float = 1.0
    name = "mean_revert_linear"

    def basis(self, x):
        return self.m - np.asarray(x, dtype=float)

    def value(self, x, alpha):
        return alpha * self.basis(x)

    def d_theta(self, x, alpha):
        return self.basis(x)

    def d2_theta(self, x, alpha):
        return np.zeros_like(np.asarray(x, dtype=float))

    def d_x(self, x, alpha):
        return np.full_like(np.asarray(x, dtype=float), -alpha)


@dataclass(frozen=True)
class ConstantDrift:
    """a(x, alpha) = alpha."""

    name = "constant_drift"

    def basis(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def value(self, x, alpha):
        return alpha * self.basis(x)

    def d_theta(self, x, alpha):
        return self.basis(x)

    def d2_theta(self, x, alpha):
        return np.zeros_like(np.asarray(x, dtype=float))

    def d_x(self, x, alpha):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class LinearDecay:
    """a(x, alpha) = -alpha x."""

    name = "linear_decay"

    def basis(self, x):
        return -np.asarray(x, dtype=float)

    def value(self, x, alpha):
        return alpha * self.basis(x)

    def d_theta(self, x, alpha):
        return self.basis(x)

    def d2_theta(self, x, alpha):
        return np.zeros_like(np.asarray(x, dtype=float))

    def d_x(self, x, alpha):
        return np.full_like(np.asarray(x, dtype=float), -alpha)


@dataclass(frozen=True)
class RationalSqrt:
    """c(x, gamma) = gamma (1 + x^2)^{-1/2}."""

    name = "rational_sqrt"

    def profile(self, x):
        return 1.0 / np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)

    def value(self, x, gamma):
        return gamma * self.profile(x)

    def d_theta(self, x, gamma):
        return self.profile(x)

    def d2_theta(self, x, gamma):
        return np.zeros_like(np.asarray(x, dtype=float))

    def d_x(self, x, gamma):
        x = np.asarray(x, dtype=float)
        return -gamma * x * (1.0 + x**2) ** -1.5


@dataclass(frozen=True)
class ConstantScale:
    """c(x, gamma) = gamma."""

    name = "constant_scale"

    def profile(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def value(self, x, gamma):
        return gamma * self.profile(x)

    def d_theta(self, x, gamma):
        return self.profile(x)

    def d2_theta(self, x, gamma):
        return np.zeros_like(np.asarray(x, dtype=float))

    def d_x(self, x, gamma):
        return np.zeros_like(np.asarray(x, dtype=float))


DriftFamily = MeanRevertLinear | ConstantDrift | LinearDecay
ScaleFamily = RationalSqrt | ConstantScale

_BY_NAME = {
    cls.name: cls for cls in (MeanRevertLinear, ConstantDrift, LinearDecay, RationalSqrt, ConstantScale)
}


def family_to_obj(fam: DriftFamily | ScaleFamily) -> dict:
    return {"family": fam.name, "params": asdict(fam)}


def family_from_obj(obj: dict) -> DriftFamily | ScaleFamily:
    return _BY_NAME[obj["family"]](**obj.get("params", {}))
