"""Closed-form eigenvalue bounds, critical lengths and stability constants.

Every quantity is evaluated in the outer-radius variable ``R = 1 + L/2`` of
the annulus that models half of the degenerate maximizing metric.  Critical
lengths are found with a bracketed Brent solver on ``R``; each polynomial
equation is cross-checked against the direct intersection of the annulus
eigenvalue curves it was obtained from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from scipy.optimize import brentq, minimize_scalar

from .annulus import sd_eigenvalue, sn_eigenvalue
from .errors import BracketError, DomainError, NumericalError, ResolutionError
from .modes import check_dim, multiplicity

RTOL = 1e-14
RESIDUAL_TOL = 1e-12
ROUTE_TOL = 1e-10
L1_EXCLUSION = 1e-12

DIRICHLET, NEUMANN, CONSTANT = "dirichlet", "neumann", "constant"


@dataclass(frozen=True)
class BoundValue:
    """A bound together with the formula branch that produced it.

    ``mode`` is the spherical-harmonic degree of the active annulus eigenvalue
    (``None`` for the constant branch); ``R`` the annulus radius ``1 + L/2``
    where one applies.
    """

    value: float
    branch: str
    mode: int | None = None
    R: float | None = None

    def __post_init__(self):
        if not self.value > 0:
            raise NumericalError(f"bound must be positive, got {self.value!r}")
        if self.branch not in (DIRICHLET, NEUMANN, CONSTANT):
            raise ValueError(f"unknown branch {self.branch!r}")

    @property
    def label(self) -> str:
        return "constant(n-1)" if self.branch == CONSTANT else f"{self.branch}({self.mode})"

    def to_dict(self) -> dict:
        return {"value": self.value, "branch": self.label, "R": self.R}


@dataclass(frozen=True)
class CriticalLength:
    """A root ``L`` of a defining equation, with its residual and bracket (both in ``L``).

    ``upper_bound_only`` marks lengths known only to bound the true critical
    length from above.
    """

    L: float
    equation: str
    residual: float
    bracket: tuple[float, float]
    upper_bound_only: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def R(self) -> float:
        return 1.0 + self.L / 2.0

    def to_dict(self) -> dict:
        out = {"L": self.L, "R": self.R, "equation": self.equation, "residual": self.residual,
               "bracket": list(self.bracket), "upper_bound_only": self.upper_bound_only}
        out.update(self.meta)
        return out


@dataclass(frozen=True)
class StabilityConstants:
    C1: float
    C2: float
    C: float
    n: int
    Bn: float

    def to_dict(self) -> dict:
        return {"n": self.n, "B_n": self.Bn, "C1": self.C1, "C2": self.C2, "C": self.C}


# --------------------------------------------------------------------------
# helpers


def _check_L(L, *, allow_inf: bool = True) -> float:
    L = float(L)
    if math.isnan(L) or L <= 0 or (math.isinf(L) and not allow_inf):
        raise DomainError(f"meridian length L must be positive, got {L!r}")
    return L


def _check_i(i) -> int:
    if isinstance(i, bool) or int(i) != i or i < 1:
        raise DomainError(f"index i must be an integer >= 1, got {i!r}")
    return int(i)


def sd_at_length(n: int, L: float, k: int) -> float:
    """``sigma_k^D(A_{1+L/2})``, with its ``L -> infinity`` limit ``k + n - 2``."""
    if math.isinf(L):
        return float(k + n - 2)
    return sd_eigenvalue(n, 1.0 + L / 2.0, k)


def sn_at_length(n: int, L: float, k: int) -> float:
    """``sigma_k^N(A_{1+L/2})``, with its ``L -> infinity`` limit ``k + n - 2`` (0 for k = 0)."""
    if math.isinf(L):
        return float(k + n - 2) if k else 0.0
    return sn_eigenvalue(n, 1.0 + L / 2.0, k)


def _radius(L: float) -> float | None:
    return None if math.isinf(L) else 1.0 + L / 2.0


def _scaled_poly(terms):
    """Polynomial ``sum c R^e`` divided by ``R^max(e)``, evaluated in log space.

    Returns ``f(R) -> (value, sum of |terms|)`` so callers can form a relative
    residual.
    """
    top = max(e for _, e in terms)

    def f(R):
        lr = math.log(R)
        parts = [c * math.exp((e - top) * lr) for c, e in terms]
        return math.fsum(parts), math.fsum(abs(p) for p in parts)

    return f


def _root(f, lo: float, hi: float, what: str) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"{what}: no sign change on R in [{lo!r}, {hi!r}] (f = {flo!r}, {fhi!r})")
    return brentq(f, lo, hi, xtol=1e-300, rtol=RTOL, maxiter=500)


def _crossing(g, lo: float, hi: float, what: str) -> float:
    """Root of the direct difference ``g(R)`` of two eigenvalue curves."""
    return _root(g, lo, hi, what)


def _relative_residual(poly, R: float) -> float:
    val, scale = poly(R)
    return abs(val) / scale if scale else abs(val)


def _solve_poly(poly, lo: float, hi: float, what: str) -> float:
    R = _root(lambda x: poly(x)[0], lo, hi, what)
    # brentq stops on the bracket width; one more look around the last float
    # neighbours picks the representable R with the smallest residual.
    best = min((R, math.nextafter(R, hi), math.nextafter(R, lo)), key=lambda x: _relative_residual(poly, x))
    return best


def _lo(R_hi: float) -> float:
    # the annulus formulas refuse radii within 1e-12 of the inner sphere
    return 1.0 + max(1e-9 * (R_hi - 1.0), 1e-11)


# --------------------------------------------------------------------------
# first nonzero eigenvalue


def bound_sigma1(n: int, L: float) -> BoundValue:
    """``B_n(L) = min(sigma_0^D, sigma_1^N)`` on the annulus ``A_{1+L/2}``.

    ``L = inf`` gives the limit ``n - 2`` on the Dirichlet branch.
    """
    n, L = check_dim(n), _check_L(L)
    d, nm = sd_at_length(n, L, 0), sn_at_length(n, L, 1)
    R = _radius(L)
    if nm <= d:
        return BoundValue(nm, NEUMANN, 1, R)
    return BoundValue(d, DIRICHLET, 0, R)


def l1_upper_bound(n: int) -> float:
    """``2 (exp(3 ln(n-1) / (n-2)) - 1)``, an upper bracket end for ``L_1``."""
    n = check_dim(n)
    return 2.0 * math.expm1(3.0 * math.log(n - 1) / (n - 2))


def l1_polynomial(n: int):
    """``R^{2n-2} - (n-1) R^n - (n-1)^2 R^{n-2} + n - 1``, scaled (see :func:`_scaled_poly`)."""
    return _scaled_poly([(1, 2 * n - 2), (-(n - 1), n), (-(n - 1) ** 2, n - 2), (n - 1, 0)])


@lru_cache(maxsize=None)
def _l1(n: int) -> tuple[CriticalLength, BoundValue]:
    hi = 1.0 + l1_upper_bound(n) / 2.0
    lo = _lo(hi)
    poly = l1_polynomial(n)
    R = _solve_poly(poly, lo, hi, f"L_1(n={n})")
    R_direct = _crossing(lambda x: sd_eigenvalue(n, x, 0) - sn_eigenvalue(n, x, 1), lo, hi,
                         f"L_1 direct (n={n})")
    if abs(R_direct - R) > ROUTE_TOL * R:
        raise NumericalError(f"L_1(n={n}): polynomial root {R!r} and curve crossing {R_direct!r} disagree")
    L = 2.0 * (R - 1.0)
    cl = CriticalLength(L, "sigma1 crossing polynomial", _relative_residual(poly, R),
                        (2.0 * (lo - 1.0), 2.0 * (hi - 1.0)),
                        meta={"L_direct": 2.0 * (R_direct - 1.0)})
    bn = BoundValue(sd_eigenvalue(n, R, 0), DIRICHLET, 0, R)
    return cl, bn


def critical_length_L1(n: int) -> tuple[CriticalLength, BoundValue]:
    """``L_1`` where ``sigma_0^D = sigma_1^N``, and ``B_n = B_n(L_1)``.

    Raises:
        NumericalError: the polynomial root and the direct curve crossing
            disagree beyond ``1e-10`` relative.
    """
    return _l1(check_dim(n))


def sup_bound_sigma1(n: int) -> float:
    """``B_n``, the supremum of ``B_n(L)`` over all lengths."""
    return critical_length_L1(n)[1].value


# --------------------------------------------------------------------------
# higher eigenvalues


def bound_sigma2_to_m1(n: int, L: float) -> BoundValue:
    """Common bound ``sigma_(1)^N(A_{1+L/2})`` for ``sigma_2 .. sigma_{m_1}``.

    ``L = inf`` gives the limit ``n - 1``.
    """
    n, L = check_dim(n), _check_L(L)
    return BoundValue(sn_at_length(n, L, 1), NEUMANN, 1, _radius(L))


def l2_polynomial(n: int):
    """``4 R^{2n} - 2n R^{n+2} - n^2 R^{n-2} + 2n``: ``sigma_0^D = sigma_(2)^N`` with denominators cleared."""
    return _scaled_poly([(4, 2 * n), (-2 * n, n + 2), (-(n**2), n - 2), (2 * n, 0)])


@lru_cache(maxsize=None)
def _l2(n: int) -> CriticalLength:
    hi = 1.0 + l1_upper_bound(n) / 2.0
    lo = _lo(hi)
    poly = l2_polynomial(n)
    R = _solve_poly(poly, lo, hi, f"L_2(n={n})")
    R_direct = _crossing(lambda x: sd_eigenvalue(n, x, 0) - sn_eigenvalue(n, x, 2), lo, hi,
                         f"L_2 direct (n={n})")
    if abs(R_direct - R) > ROUTE_TOL * R:
        raise NumericalError(f"L_2(n={n}): polynomial root {R!r} and curve crossing {R_direct!r} disagree")
    return CriticalLength(2.0 * (R - 1.0), "sigma0D = sigma(2)N polynomial", _relative_residual(poly, R),
                          (2.0 * (lo - 1.0), 2.0 * (hi - 1.0)),
                          meta={"L_direct": 2.0 * (R_direct - 1.0)})


def critical_length_L2(n: int) -> CriticalLength:
    """``L_2`` where ``sigma_0^D = sigma_(2)^N``; always below ``L_1``."""
    cl = _l2(check_dim(n))
    if not cl.L < critical_length_L1(n)[0].L:
        raise NumericalError(f"L_2(n={n}) = {cl.L!r} is not below L_1")
    return cl


def bound_m1_plus_1(n: int, L: float) -> BoundValue:
    """Three-branch bound for ``sigma_{m_1 + 1}``.

    ``sigma_(2)^N`` for ``L <= L_2``, ``sigma_0^D`` for ``L_2 < L <= L_1`` and
    ``sigma_(1)^N`` beyond ``L_1``.
    """
    n, L = check_dim(n), _check_L(L)
    L1, L2 = critical_length_L1(n)[0].L, critical_length_L2(n).L
    R = _radius(L)
    if L <= L2:
        return BoundValue(sn_at_length(n, L, 2), NEUMANN, 2, R)
    if L <= L1:
        return BoundValue(sd_at_length(n, L, 0), DIRICHLET, 0, R)
    return BoundValue(sn_at_length(n, L, 1), NEUMANN, 1, R)


def appendix_lengths(n: int) -> tuple[float, float]:
    """``(L_D, L_N)``: where ``sigma_0^D`` and ``sigma_(2)^N`` reach ``n - 1``."""
    n = check_dim(n)
    L_D = 2.0 * math.expm1(math.log(n - 1) / (n - 2))
    L_N = 2.0 * math.expm1(math.log(n * (n + 1) / 2) / (n + 2))
    return L_D, L_N


def _closed_form_length(L: float, g, name: str) -> CriticalLength:
    R = 1.0 + L / 2.0
    lo, hi = 1.0 + (R - 1.0) / 2.0, 1.0 + 2.0 * (R - 1.0)
    R_direct = _crossing(g, lo, hi, name)
    if abs(R_direct - R) > ROUTE_TOL * R:
        raise NumericalError(f"{name}: closed form {R!r} and curve crossing {R_direct!r} disagree")
    # g is already normalized by the target value n - 1
    return CriticalLength(L, name, abs(g(R)), (2.0 * (lo - 1.0), 2.0 * (hi - 1.0)),
                          meta={"L_direct": 2.0 * (R_direct - 1.0)})


def appendix_comparator(n: int) -> tuple[CriticalLength, CriticalLength, str]:
    """Closed-form ``L_D`` and ``L_N`` and the branch of the global bound they select.

    The branch is ``"dirichlet"`` when ``L_N < L_D`` and ``"constant"`` otherwise.
    """
    n = check_dim(n)
    L_D, L_N = appendix_lengths(n)
    cd = _closed_form_length(L_D, lambda R: (sd_eigenvalue(n, R, 0) - (n - 1)) / (n - 1),
                             "sigma0D = n-1")
    cn = _closed_form_length(L_N, lambda R: (sn_eigenvalue(n, R, 2) - (n - 1)) / (n - 1),
                             "sigma(2)N = n-1")
    return cd, cn, DIRICHLET if L_N < L_D else CONSTANT


def bound_m1_plus_1_global(n: int) -> BoundValue:
    """``max(sigma_0^D(A_{1+L_2/2}), n - 1)``, the supremum over L of :func:`bound_m1_plus_1`.

    The active branch is read off :func:`appendix_comparator` and checked
    against the direct comparison of the two candidate values.
    """
    n = check_dim(n)
    cl2 = critical_length_L2(n)
    at_l2 = sd_eigenvalue(n, cl2.R, 0)
    _, _, branch = appendix_comparator(n)
    if (branch == DIRICHLET) != (at_l2 > n - 1):
        raise NumericalError(f"n={n}: comparator branch {branch!r} disagrees with sigma_0^D(L_2)={at_l2!r}")
    if branch == DIRICHLET:
        return BoundValue(at_l2, DIRICHLET, 0, cl2.R)
    return BoundValue(float(n - 1), CONSTANT, None, None)


def numerical_sup(f, L_grid) -> tuple[float, float]:
    """Supremum of ``f`` over a length grid, refined between the neighbours of the best point.

    Returns ``(L, f(L))``.  The refinement is a bounded scalar search, which
    also converges at kinks such as the branch points of the piecewise bound.
    """
    Ls = sorted(float(x) for x in L_grid)
    vals = [f(L) for L in Ls]
    j = max(range(len(Ls)), key=vals.__getitem__)
    lo, hi = Ls[max(j - 1, 0)], Ls[min(j + 1, len(Ls) - 1)]
    best_L, best = Ls[j], vals[j]
    if hi > lo:
        res = minimize_scalar(lambda L: -f(L), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13 * hi, "maxiter": 500})
        if -res.fun > best:
            best_L, best = float(res.x), float(-res.fun)
    return best_L, best


# --------------------------------------------------------------------------
# critical-length sequence for higher clusters


def li_star_upper_bound(n: int, i: int) -> float:
    """``2 (exp(2 ln(2i+n) / (2i+n-2)) - 1)``."""
    n, i = check_dim(n), _check_i(i)
    return 2.0 * math.expm1(2.0 * math.log(2 * i + n) / (2 * i + n - 2))


def psi_polynomial(n: int, i: int):
    """``Psi_i(R)``, scaled.

    ``(i+1) R^{2p+2} - (i+1)(2i+n-1) R^{p+2} - (i+n-1)(2i+n-1) R^p + (i+n-1)``
    with ``p = 2i + n - 2``; this is ``sigma_i^D = sigma_(i+1)^N`` with
    denominators cleared (``i = 0`` gives the ``L_1`` polynomial).
    """
    p = 2 * i + n - 2
    return _scaled_poly([(i + 1, 2 * p + 2), (-(i + 1) * (2 * i + n - 1), p + 2),
                         (-(i + n - 1) * (2 * i + n - 1), p), (i + n - 1, 0)])


@lru_cache(maxsize=None)
def _li_star(n: int, i: int) -> CriticalLength:
    hi = 1.0 + li_star_upper_bound(n, i) / 2.0
    lo = _lo(hi)
    poly = psi_polynomial(n, i)
    R = _solve_poly(poly, lo, hi, f"L_{i}*(n={n})")
    R_direct = _crossing(lambda x: sd_eigenvalue(n, x, i) - sn_eigenvalue(n, x, i + 1), lo, hi,
                         f"L_{i}* direct (n={n})")
    if abs(R_direct - R) > ROUTE_TOL * R:
        raise NumericalError(f"L_{i}*(n={n}): polynomial root {R!r} and curve crossing {R_direct!r} disagree")
    return CriticalLength(2.0 * (R - 1.0), f"Psi_{i}", _relative_residual(poly, R),
                          (2.0 * (lo - 1.0), 2.0 * (hi - 1.0)), upper_bound_only=True,
                          meta={"i": i, "L_direct": 2.0 * (R_direct - 1.0)})


def critical_length_Li_star(n: int, i: int) -> CriticalLength:
    """``L_i^*``, the root of ``Psi_i`` in ``(0, li_star_upper_bound(n, i))``.

    This is an upper bound for the critical length of the cluster it is
    associated with, not that critical length itself; the result is flagged
    ``upper_bound_only``.
    """
    return _li_star(check_dim(n), _check_i(i))


def k_sequence(n: int, i_max: int) -> list[int]:
    """``[k_1, ..., k_{i_max}]`` with ``k_1 = 1`` and ``k_i = 1 + sum_{j<=i} 2 m_j``."""
    n, i_max = check_dim(n), _check_i(i_max)
    out = [1]
    acc = 1 + 2 * multiplicity(n, 1)
    for i in range(2, i_max + 1):
        acc += 2 * multiplicity(n, i)
        out.append(acc)
    return out


def critical_length_classes(n: int, k_max: int) -> list[dict]:
    """Which clusters ``i <= k_max`` have a finite critical length candidate.

    Tabulation only: for each ``i`` the crossing ``sigma_i^D = sigma_(i+1)^N``
    is reported when it exists.  Whether finitely or infinitely many indices
    have their critical length at infinity is not decided here.
    """
    n = check_dim(n)
    rows = []
    for i in range(1, k_max + 1):
        cl = critical_length_Li_star(n, i)
        rows.append({"i": i, "k_i": k_sequence(n, i)[-1], "L_i_star": cl.L,
                     "bound": li_star_upper_bound(n, i)})
    return rows


# --------------------------------------------------------------------------
# stability


def stability_constants(n: int) -> StabilityConstants:
    """``C_1(n)``, ``C_2(n)`` and ``C(n) = 2 max(C_1, C_2)`` evaluated at ``B_n``."""
    n = check_dim(n)
    B = sup_bound_sigma1(n)
    lo_gap, hi_gap = B - (n - 2), (n - 1) - B
    if not (lo_gap > 0 and hi_gap > 0):
        raise NumericalError(f"B_n={B!r} is not strictly between n-2 and n-1")
    C1 = (2.0 / lo_gap**2) / (B / lo_gap) ** ((n - 3) / (n - 2))
    C2 = ((n - 2) ** 2 / hi_gap**2) / (n * (((n - 1) * B + 1) / hi_gap) ** (1.0 / n))
    return StabilityConstants(C1, C2, 2.0 * max(C1, C2), n, B)


def stability_gap_CnL(n: int, L: float) -> float:
    """``B_n - B_n(L)``; undefined at ``L = L_1``.

    Raises:
        DomainError: ``L`` is within ``1e-12`` relative of ``L_1``.
    """
    n, L = check_dim(n), _check_L(L)
    L1 = critical_length_L1(n)[0].L
    if abs(L - L1) <= L1_EXCLUSION * L1:
        raise DomainError(f"L={L!r} coincides with the critical length L_1={L1!r}")
    gap = sup_bound_sigma1(n) - bound_sigma1(n, L).value
    if not gap > 0:
        raise NumericalError(f"B_n - B_n(L) = {gap!r} is not positive at L={L!r}")
    return gap


def stability_gap_CnLm(n: int, L: float, m: float, delta: float, N: int = 4096) -> float:
    """``B_n(L) - sigma_1`` of the smoothed plateau profile at height ``m``.

    Raises:
        DomainError: ``m`` outside ``[1, 1 + L/2)``.
        ResolutionError: the computed gap is not positive at this grid size.
    """
    from .profiles import plateau_profile
    from .solver import steklov_spectrum

    n, L = check_dim(n), _check_L(L, allow_inf=False)
    m = float(m)
    if not 1.0 <= m < 1.0 + L / 2.0:
        raise DomainError(f"plateau height m must lie in [1, 1+L/2) = [1, {1 + L / 2!r}), got {m!r}")
    sigma1 = steklov_spectrum(plateau_profile(L, m, delta), n, 2, N).sigma(1)
    gap = bound_sigma1(n, L).value - sigma1
    if not gap > 0:
        raise ResolutionError(f"B_n(L) - sigma_1 = {gap!r} <= 0 for m={m!r}, delta={delta!r}, N={N}")
    return gap
