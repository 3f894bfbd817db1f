"""Spherical-harmonic data on the unit (n-1)-sphere.

Every per-mode computation in the package is indexed by a degree ``k`` and
consumes only the Laplace eigenvalue ``k(n+k-2)`` and its multiplicity; the
harmonics themselves are never evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

from .errors import DomainError, ResourceError

DEFAULT_K_MAX = 128


@dataclass(frozen=True)
class Mode:
    """One spherical-harmonic channel of S^{n-1}."""

    k: int
    lam: float
    mult: int
    n: int


def check_dim(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 3:
        raise DomainError(f"dimension n must be an integer >= 3, got {n!r}")
    return int(n)


def _check_k(k) -> int:
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise DomainError(f"mode index k must be a non-negative integer, got {k!r}")
    return int(k)


def laplace_eigenvalue(n: int, k: int) -> float:
    """Eigenvalue ``k(n+k-2)`` of the Laplacian on the unit (n-1)-sphere."""
    n = check_dim(n)
    k = _check_k(k)
    return float(k * (n + k - 2))


def multiplicity(n: int, k: int) -> int:
    """Multiplicity of the degree-``k`` Laplace eigenvalue on S^{n-1}.

    Uses the falling product ``(n+k-3)(n+k-4)...(n-1) / k! * (n+2k-2)`` in
    exact integer arithmetic; the product has ``k-1`` factors and is empty
    for ``k = 1``.
    """
    n = check_dim(n)
    k = _check_k(k)
    if k == 0:
        return 1
    num = 1
    for j in range(n - 1, n + k - 2):
        num *= j
    num *= n + 2 * k - 2
    q, rem = divmod(num, factorial(k))
    if rem:
        raise ArithmeticError(f"non-integral multiplicity for n={n}, k={k}")
    return q


def mode(n: int, k: int) -> Mode:
    return Mode(k=_check_k(k), lam=laplace_eigenvalue(n, k), mult=multiplicity(n, k), n=check_dim(n))


def mode_table(n: int, k_max: int, *, limit: int = DEFAULT_K_MAX) -> list[Mode]:
    """Modes ``0..k_max`` inclusive.

    Raises:
        ResourceError: if ``k_max`` exceeds ``limit``.
    """
    k_max = _check_k(k_max)
    if k_max > limit:
        raise ResourceError(f"k_max={k_max} exceeds the configured mode limit {limit}")
    return [mode(n, k) for k in range(k_max + 1)]
