"""Per-mode finite-element Steklov solver for warped products [0, L] x S^{n-1}.

Separation of variables reduces the Steklov problem to one 1-D problem per
spherical-harmonic degree k with energy

    a_k(u, v) = int h^{n-1} u' v' dr + lambda_k int h^{n-3} u v dr

and boundary form u(0) v(0) + u(L) v(L); the factor Vol(S^{n-1}) cancels in
every quotient and is never formed.  Each mode is discretized with P1
elements and 2-point Gauss quadrature; eliminating the interior nodes gives
a 2x2 Dirichlet-to-Neumann matrix whose eigenvalues are the two Steklov
eigenvalues of that mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solveh_banded
from scipy.optimize import brentq

from .annulus import Condition
from .errors import DomainError, NumericalError, ResolutionError, ZeroTraceError
from .modes import DEFAULT_K_MAX, check_dim, laplace_eigenvalue, multiplicity
from .profiles import HalfProfile, Profile, require_valid
from .spectrum import Spectrum, sweep_modes

DEFAULT_N = 4096
MIN_N = 16

_G = 0.5 / math.sqrt(3.0)
_X1, _X2 = 0.5 - _G, 0.5 + _G


# --------------------------------------------------------------------------
# grids and assembly


def _distribute(breaks: np.ndarray, N: int) -> np.ndarray:
    length = breaks[-1] - breaks[0]
    pieces = [breaks[:1]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        m = max(1, int(round(N * (b - a) / length)))
        pieces.append(np.linspace(a, b, m + 1)[1:])
    return np.concatenate(pieces)


def _clean_breaks(bp, end: float) -> np.ndarray:
    bp = np.asarray(bp, dtype=float)
    bp = bp[(bp > 0) & (bp < end)]
    bp = np.unique(np.concatenate([[0.0], bp, [end]]))
    keep = np.concatenate([[True], np.diff(bp) > 1e-12 * end])
    bp = bp[keep]
    bp[-1] = end
    return bp


def build_grid(domain: Profile | HalfProfile, N: int) -> np.ndarray:
    """Nodes for ``N`` elements (approximately, when breakpoints force extra ones).

    Every breakpoint of the profile is a node and elements are uniform between
    breakpoints.  Symmetric profiles get a mirror-symmetric grid built from the
    half grid with ``N // 2`` elements, so that the midpoint is always a node.
    """
    if isinstance(domain, HalfProfile):
        return _distribute(_clean_breaks(domain.breakpoints(), domain.length), N)
    if domain.symmetric:
        half = _distribute(_clean_breaks(domain.breakpoints(), domain.L / 2), max(1, (N + 1) // 2))
        return np.concatenate([half, domain.L - half[-2::-1]])
    return _distribute(_clean_breaks(domain.breakpoints(), domain.L), N)


@dataclass(frozen=True, eq=False)
class Discretization:
    """Element data on a grid, independent of the mode.

    ``stiff[e]`` is ``int_e h^{n-1} dr / d_e^2``; ``m_ll``, ``m_lr``, ``m_rr`` are
    the element mass entries for the weight ``h^{n-3}``.
    """

    r: np.ndarray
    n: int
    stiff: np.ndarray
    m_ll: np.ndarray
    m_lr: np.ndarray
    m_rr: np.ndarray

    @classmethod
    def assemble(cls, domain, n: int, r: np.ndarray) -> "Discretization":
        r = np.asarray(r, dtype=float)
        d = np.diff(r)
        if np.any(d <= 0):
            raise DomainError("grid nodes must be strictly increasing")
        h1 = np.asarray(domain(r[:-1] + _X1 * d), dtype=float)
        h2 = np.asarray(domain(r[:-1] + _X2 * d), dtype=float)
        if np.any(h1 <= 0) or np.any(h2 <= 0):
            raise DomainError("profile must be positive")
        stiff = 0.5 * (h1 ** (n - 1) + h2 ** (n - 1)) / d
        w1, w2 = 0.5 * d * h1 ** (n - 3), 0.5 * d * h2 ** (n - 3)
        return cls(r=r, n=n, stiff=stiff,
                   m_ll=w1 * _X2**2 + w2 * _X1**2,
                   m_lr=(w1 + w2) * _X1 * _X2,
                   m_rr=w1 * _X1**2 + w2 * _X2**2)

    @property
    def N(self) -> int:
        return len(self.r) - 1

    def bands(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of the full stiffness matrix."""
        diag = np.zeros(len(self.r))
        diag[:-1] += self.stiff + lam * self.m_ll
        diag[1:] += self.stiff + lam * self.m_rr
        off = -self.stiff + lam * self.m_lr
        return diag, off

    def energy(self, lam: float, u, v=None) -> float:
        u = np.asarray(u, dtype=float)
        v = u if v is None else np.asarray(v, dtype=float)
        du, dv = np.diff(u), np.diff(v)
        ul, ur, vl, vr = u[:-1], u[1:], v[:-1], v[1:]
        val = np.sum(self.stiff * du * dv)
        if lam:
            val += lam * np.sum(self.m_ll * ul * vl + self.m_lr * (ul * vr + ur * vl) + self.m_rr * ur * vr)
        return float(val)


def _solve_interior(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    ab = np.vstack([np.concatenate([[0.0], off]), diag])
    try:
        return solveh_banded(ab, rhs, check_finite=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - SPD by construction
        raise NumericalError(f"interior stiffness block is not positive definite: {exc}") from None


# --------------------------------------------------------------------------
# mode functions and DtN matrices


@dataclass(frozen=True, eq=False)
class ModeFunction:
    """Radial factor ``u`` sampled on a grid of ``domain``."""

    r: np.ndarray
    u: np.ndarray
    k: int
    domain: object = None

    def __post_init__(self):
        if self.r.shape != self.u.shape:
            raise DomainError("grid and values differ in length")
        if not np.all(np.isfinite(self.u)):
            raise DomainError("mode function has non-finite values")


@dataclass(frozen=True, eq=False)
class DtnMatrix:
    """2x2 Dirichlet-to-Neumann matrix of one mode, boundary order (r=0, r=L)."""

    matrix: np.ndarray
    k: int
    n: int
    lam: float
    N: int
    symmetric_profile: bool
    extensions: tuple[np.ndarray, np.ndarray] = field(repr=False)
    r: np.ndarray = field(repr=False)

    def eigenpairs(self) -> list[tuple[float, np.ndarray, str]]:
        """``(sigma, boundary vector, parity)`` sorted by sigma.

        Closed-form 2x2 symmetric eigen-decomposition; the smaller value is
        taken as ``det / larger`` to avoid cancellation.
        """
        (a, b), (_, d) = self.matrix
        if self.lam == 0.0:
            # constants are harmonic: D (1, 1) = 0 and the other eigenvalue is the trace
            pairs = [(0.0, np.array([1.0, 1.0]) / math.sqrt(2), "even"),
                     (a + d, np.array([1.0, -1.0]) / math.sqrt(2), "odd" if self.symmetric_profile else "none")]
            return pairs
        if self.symmetric_profile:
            diag = 0.5 * (a + d)
            pairs = [(diag + b, np.array([1.0, 1.0]) / math.sqrt(2), "even"),
                     (diag - b, np.array([1.0, -1.0]) / math.sqrt(2), "odd")]
            return sorted(pairs, key=lambda t: t[0])
        mean, half_gap = 0.5 * (a + d), 0.5 * (a - d)
        rad = math.hypot(half_gap, b)
        big = mean + rad
        small = (a * d - b * b) / big if big > 0 else mean - rad
        out = []
        for mu in (small, big):
            v = np.array([b, mu - a]) if abs(mu - a) >= abs(mu - d) else np.array([mu - d, b])
            nv = np.linalg.norm(v)
            v = np.array([1.0, 0.0]) if nv == 0 else v / nv
            out.append((mu, v, "none"))
        return out

    def eigenvalues(self) -> tuple[float, float]:
        pairs = self.eigenpairs()
        return pairs[0][0], pairs[1][0]

    def mode_function(self, which: int = 0) -> ModeFunction:
        """Discrete harmonic extension of the ``which``-th boundary eigenvector."""
        v = self.eigenpairs()[which][1]
        u = v[0] * self.extensions[0] + v[1] * self.extensions[1]
        return ModeFunction(self.r, u, self.k)


def _profile_dtn(disc: Discretization, k: int, lam: float, symmetric: bool) -> DtnMatrix:
    diag, off = disc.bands(lam)
    N = disc.N
    rhs = np.zeros((N - 1, 2))
    rhs[0, 0] = -off[0]
    rhs[-1, 1] += -off[-1]
    x = _solve_interior(diag[1:-1], off[1:-1], rhs)
    u0 = np.concatenate([[1.0], x[:, 0], [0.0]])
    uL = np.concatenate([[0.0], x[:, 1], [1.0]])
    d00 = disc.energy(lam, u0)
    d11 = disc.energy(lam, uL)
    d01 = disc.energy(lam, u0, uL)
    mat = np.array([[d00, d01], [d01, d11]])
    return DtnMatrix(mat, k, disc.n, lam, N, symmetric, (u0, uL), disc.r)


def _grid_size(N) -> int:
    if isinstance(N, bool) or int(N) != N or N < MIN_N:
        raise DomainError(f"grid size N must be an integer >= {MIN_N}, got {N!r}")
    return int(N)


def mode_dtn(p: Profile, n: int, k: int, N: int = DEFAULT_N) -> DtnMatrix:
    """DtN matrix of mode ``k`` for profile ``p`` on an ``N``-element grid."""
    n = check_dim(n)
    lam = laplace_eigenvalue(n, k)
    require_valid(p)
    disc = Discretization.assemble(p, n, build_grid(p, _grid_size(N)))
    return _profile_dtn(disc, k, lam, p.symmetric)


def steklov_spectrum(p: Profile, n: int, K: int, N: int = DEFAULT_N, *,
                     k_max: int = DEFAULT_K_MAX, extra_modes: int = 2) -> Spectrum:
    """First ``K`` Steklov eigenvalues (with multiplicity, ``sigma_0 = 0`` included).

    Each mode contributes its two DtN eigenvalues with multiplicity ``m_k``.
    The mode sweep stops once a mode's smaller eigenvalue exceeds the current
    K-th value, then checks ``extra_modes`` further modes.
    """
    n = check_dim(n)
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    require_valid(p)
    disc = Discretization.assemble(p, n, build_grid(p, _grid_size(N)))

    def values(k):
        dtn = _profile_dtn(disc, k, laplace_eigenvalue(n, k), p.symmetric)
        return [(s, parity) for s, _, parity in dtn.eigenpairs()]

    entries, k_last = sweep_modes(values, int(K), extra_modes=extra_modes, k_limit=k_max,
                                  mult=lambda k: multiplicity(n, k))
    return Spectrum.from_entries(entries, K, n=n, N=disc.N, k_last=k_last, family=p.family)


# --------------------------------------------------------------------------
# mixed problems on half profiles


def _half_solution(disc: Discretization, lam: float, cond: Condition, k: int) -> tuple[float, np.ndarray]:
    diag, off = disc.bands(lam)
    N = disc.N
    if cond is Condition.DIRICHLET:
        rhs = np.zeros(N - 1)
        rhs[0] = -off[0]
        x = _solve_interior(diag[1:-1], off[1:-1], rhs)
        u = np.concatenate([[1.0], x, [0.0]])
    else:
        if lam == 0.0:
            return 0.0, np.ones(N + 1)
        rhs = np.zeros(N)
        rhs[0] = -off[0]
        x = _solve_interior(diag[1:], off[1:], rhs)
        u = np.concatenate([[1.0], x])
    return disc.energy(lam, u), u


def mixed_solution(hp: HalfProfile, n: int, k: int, N: int = DEFAULT_N) -> tuple[float, ModeFunction]:
    """Mode-k mixed eigenvalue on the half profile and its eigenfunction (``u(0) = 1``).

    Steklov condition at ``r = 0``; Dirichlet or Neumann at ``r = L/2``.  For
    Neumann and ``k = 0`` the eigenvalue is 0 with constant eigenfunction.
    """
    n = check_dim(n)
    lam = laplace_eigenvalue(n, k)
    require_valid(hp.profile)
    disc = Discretization.assemble(hp, n, build_grid(hp, _grid_size(N)))
    sigma, u = _half_solution(disc, lam, hp.condition, k)
    return sigma, ModeFunction(disc.r, u, k, hp)


def mixed_eigenvalue(hp: HalfProfile, n: int, k: int, N: int = DEFAULT_N) -> float:
    return mixed_solution(hp, n, k, N)[0]


# --------------------------------------------------------------------------
# Rayleigh quotients and reflected test functions


def rayleigh_quotient(domain: Profile | HalfProfile, n: int, k: int, u: ModeFunction,
                      *, allow_infinite: bool = False) -> float:
    """Energy of ``u`` over its squared boundary trace.

    On a full profile the trace is ``u(0)^2 + u(L)^2``; on a half profile
    only ``u(0)^2`` (the inner end carries no Steklov condition).

    Raises:
        ZeroTraceError: the trace vanishes and ``allow_infinite`` is false.
    """
    n = check_dim(n)
    lam = laplace_eigenvalue(n, k)
    end = domain.length if isinstance(domain, HalfProfile) else domain.L
    if abs(u.r[0]) > 1e-12 or abs(u.r[-1] - end) > 1e-12 * max(1.0, end):
        raise DomainError("mode function grid does not span the profile")
    disc = Discretization.assemble(domain, n, u.r)
    num = disc.energy(lam, u.u)
    den = u.u[0] ** 2 + (0.0 if isinstance(domain, HalfProfile) else u.u[-1] ** 2)
    if den == 0.0:
        if allow_infinite:
            return math.inf
        raise ZeroTraceError("boundary trace of the test function vanishes")
    return num / den


def reflect_test_function(hp_solution: ModeFunction, parity: str, *, slope_tol: float = 1e-2) -> ModeFunction:
    """Extend a half-profile function to the full profile by ``f(L - r) = +-f(r)``.

    Odd reflection needs ``u(L/2) = 0``; even reflection needs a flat end,
    checked as ``|u'(L/2)| <= slope_tol * max|u'|``.
    """
    hp = hp_solution.domain
    if not isinstance(hp, HalfProfile):
        raise DomainError("reflection needs a function defined on a half profile")
    r, u = hp_solution.r, hp_solution.u
    scale = float(np.max(np.abs(u))) or 1.0
    if parity == "odd":
        if abs(u[-1]) > 1e-12 * scale:
            raise DomainError("odd reflection needs u(L/2) = 0")
        tail = -u[-2::-1]
    elif parity == "even":
        du = np.diff(u) / np.diff(r)
        top = float(np.max(np.abs(du)))
        if top > 0 and abs(du[-1]) > slope_tol * top:
            raise DomainError("even reflection needs u'(L/2) = 0")
        tail = u[-2::-1]
    else:
        raise DomainError(f"parity must be 'odd' or 'even', got {parity!r}")
    L = hp.profile.L
    return ModeFunction(np.concatenate([r, L - r[-2::-1]]), np.concatenate([u, tail]),
                        hp_solution.k, hp.profile)


# --------------------------------------------------------------------------
# convergence studies


def observed_order(v1: float, v2: float, v3: float, ratio: float = 2.0) -> float:
    """Convergence order from three values on grids refined by ``ratio``."""
    d1, d2 = v2 - v1, v3 - v2
    if d1 == 0 or d2 == 0 or d1 * d2 < 0:
        return math.nan
    return math.log(abs(d1 / d2)) / math.log(ratio)


def fit_order(h: tuple[float, float, float], v: tuple[float, float, float]) -> float:
    d1, d2 = v[1] - v[0], v[2] - v[1]
    if d1 == 0 or d2 == 0 or d1 * d2 < 0:
        return math.nan
    target = d1 / d2

    def f(p):
        return (h[0] ** p - h[1] ** p) / (h[1] ** p - h[2] ** p) - target

    try:
        return brentq(f, 0.05, 12.0)
    except ValueError:
        return math.nan


def richardson(coarse: float, fine: float, ratio: float, order: float) -> float:
    """Extrapolate ``fine + (fine - coarse) / (ratio^order - 1)``."""
    return fine + (fine - coarse) / (ratio**order - 1.0)


@dataclass(frozen=True)
class ConvergenceTable:
    Ns: tuple[int, ...]
    values: tuple[tuple[float, ...], ...]
    orders: tuple[float, ...]
    extrapolated: tuple[float, ...]
    nominal_order: float = 2.0

    def rows(self) -> list[dict]:
        out = []
        for N, vals in zip(self.Ns, self.values):
            row = {"N": N}
            row.update({f"sigma{j}": v for j, v in enumerate(vals)})
            out.append(row)
        return out


def convergence_study(domain: Profile | HalfProfile, n: int, k: int, N_list, *,
                      nominal_order: float = 2.0) -> ConvergenceTable:
    """Eigenvalues of mode ``k`` on a sequence of grids, with Richardson extrapolation.

    For a full profile both DtN eigenvalues are tracked; for a half profile the
    mixed eigenvalue.  The order is observed from the last three grids and used
    for the extrapolation when it is finite and within ``[0.5, 8]``; otherwise
    ``nominal_order`` is used.
    """
    Ns = tuple(int(N) for N in N_list)
    if len(Ns) < 3 or any(b <= a for a, b in zip(Ns[:-1], Ns[1:])):
        raise DomainError("N_list needs at least three strictly increasing grid sizes")
    vals = []
    for N in Ns:
        if isinstance(domain, HalfProfile):
            vals.append((mixed_eigenvalue(domain, n, k, N),))
        else:
            vals.append(mode_dtn(domain, n, k, N).eigenvalues())
    orders, extrap = [], []
    h = tuple(1.0 / N for N in Ns[-3:])
    for j in range(len(vals[0])):
        series = [v[j] for v in vals]
        p = fit_order(h, tuple(series[-3:]))
        orders.append(p)
        use = p if math.isfinite(p) and 0.5 <= p <= 8 else nominal_order
        extrap.append(richardson(series[-2], series[-1], Ns[-1] / Ns[-2], use))
    return ConvergenceTable(Ns, tuple(tuple(v) for v in vals), tuple(orders), tuple(extrap), nominal_order)


def discretization_error(p: Profile, n: int, K: int, N: int = DEFAULT_N) -> tuple[np.ndarray, np.ndarray]:
    """Spectrum at ``N`` and the Richardson error estimate ``|s_N - s_{N/2}| / 3``."""
    fine = steklov_spectrum(p, n, K, N).values()
    coarse = steklov_spectrum(p, n, K, N // 2).values()
    if len(fine) != len(coarse):
        raise ResolutionError("spectra at N and N/2 differ in length")
    return fine, np.abs(fine - coarse) / 3.0
