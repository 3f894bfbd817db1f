"""Mixed Steklov problems on the Euclidean annulus A_R = {1 < |x| < R}.

Steklov condition on the inner sphere, Dirichlet or Neumann on the outer one.
Both problems separate into spherical-harmonic modes; each mode contributes a
single eigenvalue with the multiplicity of the harmonic degree.

All closed forms are written in terms of ``t = R**-(2k+n-2)`` so that large
degrees and large radii cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, IllConditionedError
from .modes import check_dim, laplace_eigenvalue, multiplicity
from .spectrum import Spectrum, sweep_modes

R_MIN_GAP = 1e-12


class Condition(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @classmethod
    def parse(cls, value) -> "Condition":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"condition must be 'dirichlet' or 'neumann', got {value!r}") from None


def _check_radius(R) -> float:
    R = float(R)
    if not math.isfinite(R) or R <= 1.0:
        raise DomainError(f"outer radius must be a finite number > 1, got {R!r}")
    if R - 1.0 < R_MIN_GAP:
        raise IllConditionedError(f"outer radius R={R!r} is within {R_MIN_GAP} of the inner radius")
    return R


def _check_k(k) -> int:
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise DomainError(f"mode index k must be a non-negative integer, got {k!r}")
    return int(k)


def _decay(n: int, R: float, k: int) -> tuple[float, float]:
    """Return ``(t, 1 - t)`` with ``t = R**-(2k+n-2)``, both computed without cancellation."""
    x = (2 * k + n - 2) * math.log(R)
    return math.exp(-x), -math.expm1(-x)


def sd_eigenvalue(n: int, R: float, k: int) -> float:
    """Mode-k Steklov-Dirichlet eigenvalue ``((k+n-2) R^p + k) / (R^p - 1)``, ``p = 2k+n-2``."""
    n, R, k = check_dim(n), _check_radius(R), _check_k(k)
    t, one_minus_t = _decay(n, R, k)
    if one_minus_t == 0.0:
        raise IllConditionedError(f"denominator underflow at R={R!r}")
    return ((k + n - 2) + k * t) / one_minus_t


def sn_eigenvalue(n: int, R: float, k: int) -> float:
    """Mode-k Steklov-Neumann eigenvalue ``k(k+n-2)(R^p - 1) / (k R^p + k+n-2)``."""
    n, R, k = check_dim(n), _check_radius(R), _check_k(k)
    if k == 0:
        return 0.0
    q = k + n - 2
    t, one_minus_t = _decay(n, R, k)
    return k * q * one_minus_t / (k + q * t)


def mixed_eigenvalue(n: int, R: float, k: int, condition) -> float:
    if Condition.parse(condition) is Condition.DIRICHLET:
        return sd_eigenvalue(n, R, k)
    return sn_eigenvalue(n, R, k)


@dataclass(frozen=True)
class RadialFunction:
    """``s -> a s^p_plus + b s^p_minus`` on ``1 <= s <= R``.

    Both powers solve the mode-k radial equation
    ``u'' + (n-1)/s u' - k(n+k-2)/s^2 u = 0``.
    """

    a: float
    b: float
    p_plus: float
    p_minus: float
    n: int
    k: int

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return self.a * s**self.p_plus + self.b * s**self.p_minus

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        return (self.a * self.p_plus * s ** (self.p_plus - 1)
                + self.b * self.p_minus * s ** (self.p_minus - 1))

    def second_derivative(self, s):
        s = np.asarray(s, dtype=float)
        pp, pm = self.p_plus, self.p_minus
        return self.a * pp * (pp - 1) * s ** (pp - 2) + self.b * pm * (pm - 1) * s ** (pm - 2)

    def steklov_ratio(self) -> float:
        """``-u'(1) / u(1)``: outward normal derivative over value on the inner sphere."""
        return float(-self.derivative(1.0) / self(1.0))

    def ode_residual(self, s):
        s = np.asarray(s, dtype=float)
        lam = self.k * (self.n + self.k - 2)
        return self.second_derivative(s) + (self.n - 1) / s * self.derivative(s) - lam / s**2 * self(s)


def sd_radial_profile(n: int, R: float, k: int) -> RadialFunction:
    """Radial factor of the mode-k Steklov-Dirichlet eigenfunction, normalized to 1 at s = 1."""
    n, R, k = check_dim(n), _check_radius(R), _check_k(k)
    t, one_minus_t = _decay(n, R, k)
    return RadialFunction(a=-t / one_minus_t, b=1.0 / one_minus_t,
                          p_plus=float(k), p_minus=-float(k + n - 2), n=n, k=k)


def sn_radial_profile(n: int, R: float, k: int) -> RadialFunction:
    """Radial factor of the mode-k Steklov-Neumann eigenfunction, normalized to 1 at s = 1."""
    n, R, k = check_dim(n), _check_radius(R), _check_k(k)
    if k == 0:
        return RadialFunction(a=1.0, b=0.0, p_plus=0.0, p_minus=-float(n - 2), n=n, k=0)
    q = k + n - 2
    t, _ = _decay(n, R, k)
    return RadialFunction(a=q * t / (q * t + k), b=k / (q * t + k),
                          p_plus=float(k), p_minus=-float(q), n=n, k=k)


def mixed_spectrum(n: int, R: float, kind, count: int, *, extra_modes: int = 2) -> Spectrum:
    """First ``count`` mixed eigenvalues with multiplicity, each tagged with its mode."""
    n, R = check_dim(n), _check_radius(R)
    cond = Condition.parse(kind)
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise DomainError(f"count must be a positive integer, got {count!r}")
    entries, _ = sweep_modes(
        lambda k: [(mixed_eigenvalue(n, R, k, cond), "none")],
        int(count), extra_modes=extra_modes, mult=lambda k: multiplicity(n, k))
    return Spectrum.from_entries(entries, count, n=n, R=R, kind=cond.value)


def mode_eigenvalue_table(n: int, R: float, k_max: int) -> list[dict]:
    """Per-mode SD/SN eigenvalues and multiplicities, for reports."""
    return [
        {"k": k, "lambda": laplace_eigenvalue(n, k), "mult": multiplicity(n, k),
         "sd": sd_eigenvalue(n, R, k), "sn": sn_eigenvalue(n, R, k)}
        for k in range(k_max + 1)
    ]
