"""Scripted numerical checks of the eigenvalue bounds, plus figure data.

Each experiment returns an :class:`ExperimentReport` holding a parameter
table, one row per computed configuration and a list of named checks.  The
reports are deterministic for a fixed configuration; wall-clock runtime is
kept on the object but left out of every emitted file so that outputs are
byte-reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds
from .emit import to_csv, to_json, write_text
from .errors import DomainError
from .modes import check_dim
from .profiles import (
    Profile,
    cylinder,
    plateau_exact_profile,
    plateau_profile,
    sampled_profile,
    smoothed_max_profile,
    successor_profile,
)
from .solver import (
    DEFAULT_N,
    ModeFunction,
    build_grid,
    fit_order,
    rayleigh_quotient,
    richardson,
    steklov_spectrum,
)

DEFAULT_SEED = 20240101


@dataclass(frozen=True)
class Check:
    """Outcome of one asserted property; ``values`` carries the numbers compared."""

    name: str
    invariant: str
    passed: bool
    values: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "invariant": self.invariant, "passed": bool(self.passed),
                "values": self.values}


@dataclass
class ExperimentReport:
    id: str
    params: dict
    rows: list[dict] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    annotations: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str, invariant: str, passed: bool, **values) -> Check:
        c = Check(name, invariant, bool(passed), values)
        self.checks.append(c)
        return c

    def to_dict(self) -> dict:
        return {"id": self.id, "params": self.params, "tolerances": self.tolerances,
                "annotations": self.annotations, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks], "rows": self.rows}

    def file_stem(self) -> str:
        n = self.params.get("n", "na")
        N = self.params.get("N", "closed")
        return f"{self.id}_n{n}_N{N}"

    def write(self, outdir) -> tuple[Path, Path]:
        """Write ``<id>_n<n>_N<N>.csv`` (rows) and ``.json`` (full report)."""
        outdir = Path(outdir)
        stem = self.file_stem()
        return (write_text(outdir / f"{stem}.csv", to_csv(self.rows)),
                write_text(outdir / f"{stem}.json", to_json(self.to_dict())))


class _Timer:
    def __init__(self, report: ExperimentReport):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.runtime = time.perf_counter() - self.t0
        return False


# --------------------------------------------------------------------------
# sharpness of the first-eigenvalue bound


def epsilon_star(p: Profile, n: int) -> float:
    """``max over [0, L/2] of max{(1+r)^{n-3} - h^{n-3}, (1+r)^{n-1} - h^{n-1}}``.

    For a profile that agrees with ``1 + r`` away from the middle, the first
    eigenvalue is at least ``B_n(L) (1 - epsilon_star)``.
    """
    r = p.dense_grid(256)
    r = r[r <= p.L / 2]
    r = np.union1d(r, [p.L / 2])
    h = p(r)
    a = (1.0 + r) ** (n - 3) - h ** (n - 3)
    b = (1.0 + r) ** (n - 1) - h ** (n - 1)
    return float(max(np.max(a), np.max(b), 0.0))


def delta_for_epsilon(n: int, L: float, eps: float, shape: str = "quadratic", *, iters: int = 80) -> float:
    """Largest smoothing width (to bisection accuracy) with ``B_n(L) * epsilon_star < eps``."""
    n = check_dim(n)
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    target = eps / bounds.bound_sigma1(n, L).value
    lo, hi = 0.0, L / 2

    def ok(d):
        return epsilon_star(smoothed_max_profile(L, d, shape), n) < target

    if ok(hi * (1 - 1e-12)):
        return hi * (1 - 1e-12)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid > 0 and ok(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise DomainError(f"no smoothing width reaches eps={eps!r}")
    return lo


def extrapolated_sigma1(p: Profile, n: int, N: int) -> tuple[float, float, float]:
    """``sigma_1`` Richardson-extrapolated in the grid size, with an error estimate.

    Conforming elements approach eigenvalues from above, so near a bound the
    raw value at ``N`` can sit on the wrong side of it; the extrapolate from
    ``(N/2, N)`` removes the leading ``N^-2`` term.  The error estimate is the
    difference to the extrapolate from ``(N/4, N/2)``.

    Returns:
        (extrapolated, raw value at N, error estimate)
    """
    s = [steklov_spectrum(p, n, 2, M).sigma(1) for M in (N // 4, N // 2, N)]
    coarse_ext = richardson(s[0], s[1], 2.0, 2.0)
    ext = richardson(s[1], s[2], 2.0, 2.0)
    return ext, s[2], abs(ext - coarse_ext)


def sharpness_experiment(n: int, L: float, deltas, N: int = DEFAULT_N, *,
                         shape: str = "quadratic", limit_tol: float = 1e-2) -> ExperimentReport:
    """``sigma_1`` of smoothed maximal profiles approaches ``B_n(L)`` from below.

    ``sigma_1`` is extrapolated in the grid size (:func:`extrapolated_sigma1`).
    Checks, for each smoothing width ``delta``: ``sigma_1 < B_n(L)`` and the
    guaranteed lower bound ``sigma_1 > B_n(L)(1 - epsilon_star)``; across
    widths: ``sigma_1`` increases as ``delta`` decreases, and the Richardson
    extrapolate in ``delta`` lies within ``limit_tol`` of ``B_n(L)``.
    """
    n = check_dim(n)
    deltas = [float(d) for d in deltas]
    if len(deltas) < 1 or any(b >= a for a, b in zip(deltas[:-1], deltas[1:])):
        raise DomainError("deltas must be strictly decreasing")
    bound = bounds.bound_sigma1(n, L)
    rep = ExperimentReport("sharpness", {"n": n, "L": L, "N": N, "deltas": deltas, "shape": shape},
                           tolerances={"limit_tol": limit_tol})
    rep.annotations["bound"] = bound.to_dict()
    with _Timer(rep):
        sig = []
        for d in deltas:
            p = smoothed_max_profile(L, d, shape)
            s, raw, err = extrapolated_sigma1(p, n, N)
            eps = epsilon_star(p, n)
            sig.append(s)
            rep.rows.append({"delta": d, "sigma1": s, "sigma1_raw": raw, "disc_error": err, "bound": bound.value,
                             "gap": bound.value - s, "epsilon_star": eps,
                             "guaranteed_lower": bound.value * (1 - eps)})
            rep.check(f"gap positive at delta={d!r}", "sharpness gap B_n(L) - sigma_1 > 0",
                      bound.value - s > 0, sigma1=s, bound=bound.value)
            rep.check(f"gap resolved at delta={d!r}", "sharpness gap exceeds its discretization error estimate",
                      bound.value - s > err, gap=bound.value - s, disc_error=err)
            rep.check(f"lower guarantee at delta={d!r}", "sigma_1 > B_n(L) - B_n(L) epsilon_star",
                      s > bound.value * (1 - eps), sigma1=s, lower=bound.value * (1 - eps))
        if len(sig) > 1:
            inc = [b - a for a, b in zip(sig[:-1], sig[1:])]
            rep.check("increasing as delta decreases", "sigma_1(g_delta) increasing as delta decreases",
                      all(x > 0 for x in inc), increments=inc)
        if len(sig) >= 3:
            order = fit_order(tuple(deltas[-3:]), tuple(sig[-3:]))
            use = order if math.isfinite(order) and 0.5 <= order <= 8 else 2.0
            limit = richardson(sig[-2], sig[-1], deltas[-2] / deltas[-1], use)
        else:
            order, limit = math.nan, sig[-1]
        rep.annotations.update({"delta_order": order, "extrapolated_limit": limit})
        rep.check("extrapolated limit", "Richardson-in-delta limit within limit_tol of B_n(L)",
                  abs(limit - bound.value) <= limit_tol, limit=limit, bound=bound.value, order=order)
    return rep


# --------------------------------------------------------------------------
# monotonicity along a successor chain


def successor_chain(L: float, steps: int) -> list[Profile]:
    chain = [cylinder(L)]
    for _ in range(steps):
        chain.append(successor_profile(chain[-1]))
    return chain


def monotonicity_experiment(n: int, L: float, K: int, *, steps: int = 3, N: int = DEFAULT_N,
                            noise_factor: float = 10.0) -> ExperimentReport:
    """``sigma_k`` strictly increases along a chain of profiles that grow pointwise.

    The chain starts at the cylinder and applies :func:`successor_profile`
    ``steps`` times.  Each increment must exceed ``noise_factor`` times the
    summed discretization error estimates ``|s_N - s_{N/2}| / 3`` of its ends.
    """
    n = check_dim(n)
    if int(K) != K or K < 1:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    K = int(K)
    rep = ExperimentReport("monotonicity", {"n": n, "L": L, "K": K, "steps": steps, "N": N},
                           tolerances={"noise_factor": noise_factor})
    with _Timer(rep):
        chain = successor_chain(L, steps)
        vals, errs = [], []
        for j, p in enumerate(chain):
            fine = steklov_spectrum(p, n, K + 1, N).values()
            coarse = steklov_spectrum(p, n, K + 1, N // 2).values()
            err = np.abs(fine - coarse) / 3.0
            vals.append(fine)
            errs.append(err)
            row = {"step": j, "max_h": p.max_value()}
            row.update({f"sigma{k}": float(fine[k]) for k in range(K + 1)})
            row.update({f"err{k}": float(err[k]) for k in range(1, K + 1)})
            rep.rows.append(row)
        rep.check("sigma_0 vanishes", "sigma_0 = 0 along the chain",
                  all(v[0] == 0.0 for v in vals), sigma0=[float(v[0]) for v in vals])
        for j in range(steps):
            for k in range(1, K + 1):
                gap = float(vals[j + 1][k] - vals[j][k])
                noise = float(errs[j + 1][k] + errs[j][k])
                rep.check(f"step {j}->{j + 1}, k={k}", "sigma_k strictly increasing beyond discretization noise",
                          gap > noise_factor * noise, gap=gap, noise=noise)
        B = bounds.bound_sigma1(n, L).value
        rep.check("last profile below the bound", "sigma_1 < B_n(L)", vals[-1][1] < B,
                  sigma1=float(vals[-1][1]), bound=B)
    return rep


# --------------------------------------------------------------------------
# stability near the critical length and away from the degenerate metric


def dipped_profile(p: Profile, depth: float = 0.2, samples: int = 2049) -> Profile:
    """Sampled ``p(r) - depth sin^2(pi r / L)``; lies strictly below ``p`` inside."""
    r = np.linspace(0.0, p.L, samples)
    h = p(r) - depth * np.sin(np.pi * r / p.L) ** 2
    h[0] = h[-1] = 1.0
    return sampled_profile(p.L, h, family="dipped")


def stability_experiment(n: int, *, offsets=(-1.0, -0.3, 0.3, 1.0), n_deltas: int = 25,
                         widths=(0.4, 0.2, 0.1, 0.05), plateau_L: float = 2.0,
                         plateau_heights=(1.0, 1.3, 1.6), plateau_delta: float = 0.1,
                         N: int = DEFAULT_N) -> ExperimentReport:
    """Quantitative stability of ``sigma_1`` near the maximizing configuration.

    Near-critical part: for each ``L = L_1 + offset`` and each near-maximizing
    smoothed profile (``sigma_1`` extrapolated in the grid size), every sampled ``delta`` in ``(0, (B_n - (n-2))/2)`` with
    ``|B_n - sigma_1| < delta`` must give ``|L_1 - L| < C(n) delta``; also
    ``B_n - sigma_1 >= C(n, L)``.  Plateau part: members of the class of
    profiles bounded by ``m`` satisfy ``B_n(L) - sigma_1 >= C(n, L, m)``.
    """
    n = check_dim(n)
    cl1, Bn = bounds.critical_length_L1(n)
    B, L1 = Bn.value, cl1.L
    consts = bounds.stability_constants(n)
    dmax = (B - (n - 2)) / 2
    dgrid = [dmax * (j + 1) / (n_deltas + 1) for j in range(n_deltas)]
    rep = ExperimentReport("stability", {"n": n, "offsets": list(offsets), "widths": list(widths),
                                         "plateau_L": plateau_L, "plateau_heights": list(plateau_heights),
                                         "plateau_delta": plateau_delta, "N": N},
                           tolerances={"delta_grid": dgrid})
    rep.annotations.update({"L1": L1, "B_n": B, "constants": consts.to_dict()})
    with _Timer(rep):
        for off in offsets:
            L = L1 + off
            if L <= 0:
                raise DomainError(f"offset {off!r} gives a non-positive length")
            cnl = bounds.stability_gap_CnL(n, L)
            for w in widths:
                if not w < L / 2:
                    continue
                s, _, err = extrapolated_sigma1(smoothed_max_profile(L, w), n, N)
                dev = abs(B - s)
                triggered = [d for d in dgrid if dev < d]
                held = [d for d in triggered if abs(L1 - L) < consts.C * d]
                rep.rows.append({"part": "near_critical", "L": L, "width": w, "sigma1": s, "disc_error": err,
                                 "B_n_minus_sigma1": B - s, "C_n_L": cnl,
                                 "deltas_triggered": len(triggered), "implications_held": len(held)})
                rep.check(f"implication L={L!r}, width={w!r}",
                          "|B_n - sigma_1| < delta implies |L_1 - L| < C(n) delta",
                          len(held) == len(triggered), triggered=len(triggered), held=len(held),
                          deviation=dev)
                rep.check(f"gap floor L={L!r}, width={w!r}", "B_n - sigma_1 >= C(n, L)",
                          B - s >= cnl, gap=B - s, floor=cnl)
        bL = bounds.bound_sigma1(n, plateau_L).value
        for m in plateau_heights:
            floor = bounds.stability_gap_CnLm(n, plateau_L, m, plateau_delta, N)
            members = []
            if m > 1:
                members.append(plateau_exact_profile(plateau_L, m))
            members.append(dipped_profile(plateau_exact_profile(plateau_L, m) if m > 1 else cylinder(plateau_L)))
            for g in members:
                s = steklov_spectrum(g, n, 2, N).sigma(1)
                rep.rows.append({"part": "plateau", "L": plateau_L, "m": m, "member": g.family,
                                 "sigma1": s, "B_n_L_minus_sigma1": bL - s, "C_n_L_m": floor})
                rep.check(f"plateau m={m!r}, {g.family}", "B_n(L) - sigma_1 > C(n, L, m)",
                          bL - s > floor, gap=bL - s, floor=floor)
    return rep


# --------------------------------------------------------------------------
# min-max sanity with random test functions


def random_mode_function(p: Profile, k: int, N: int, rng: np.random.Generator) -> ModeFunction:
    """Node-wise uniform values on ``[-1, 1]``; for ``k = 0`` shifted so the boundary trace sums to 0."""
    r = build_grid(p, N)
    u = rng.uniform(-1.0, 1.0, size=r.shape)
    if k == 0:
        u = u - 0.5 * (u[0] + u[-1])
    return ModeFunction(r, u, k, p)


def minmax_experiment(p: Profile, n: int, *, trials: int = 50, k_values=(0, 1, 2), N: int = 1024,
                      seed: int = DEFAULT_SEED, tol: float = 1e-8) -> ExperimentReport:
    """Rayleigh quotients of random admissible test functions are at least ``sigma_1``."""
    n = check_dim(n)
    rng = np.random.default_rng(seed)
    s1 = steklov_spectrum(p, n, 2, N).sigma(1)
    rep = ExperimentReport("minmax", {"n": n, "L": p.L, "family": p.family, "trials": trials,
                                      "k_values": list(k_values), "N": N, "seed": seed},
                           tolerances={"tol": tol})
    rep.annotations["sigma1"] = s1
    with _Timer(rep):
        for t in range(trials):
            k = k_values[t % len(k_values)]
            u = random_mode_function(p, k, N, rng)
            q = rayleigh_quotient(p, n, k, u)
            rep.rows.append({"trial": t, "k": k, "rayleigh": q})
            rep.check(f"trial {t}", "Rayleigh quotient >= sigma_1 - tol", q >= s1 - tol, rayleigh=q, sigma1=s1)
    return rep


# --------------------------------------------------------------------------
# figure data


FIGURES = ("Bn_of_L", "Bn_m1plus1_of_L", "appendix_curves")


def _crossings(L, a, b) -> list[tuple[float, float]]:
    d = np.asarray(a) - np.asarray(b)
    out = []
    for j in range(len(d) - 1):
        if d[j] == 0 or d[j] * d[j + 1] < 0:
            out.append((float(L[j]), float(L[j + 1])))
    return out


def figure_data(figure: str, n: int, L_grid) -> ExperimentReport:
    """Tabulated annulus curves and active bounds over ``L_grid``.

    ``Bn_of_L``: ``sigma_0^D``, ``sigma_(1)^N`` and ``B_n(L)``, crossing at ``L_1``.
    ``Bn_m1plus1_of_L``: adds ``sigma_(2)^N`` and the three-branch bound with
    breakpoints ``L_2`` and ``L_1``.  ``appendix_curves``: ``sigma_0^D``,
    ``sigma_(2)^N`` and the level ``n - 1``, with ``L_D`` and ``L_N``.
    """
    n = check_dim(n)
    if figure not in FIGURES:
        raise DomainError(f"unknown figure {figure!r}; choose from {FIGURES}")
    L = np.asarray([float(x) for x in L_grid])
    if L.size == 0 or np.any(L <= 0) or np.any(np.diff(L) <= 0):
        raise DomainError("L_grid must be nonempty, positive and strictly increasing")
    rep = ExperimentReport(f"figure_{figure}", {"n": n, "points": int(L.size),
                                                "L_min": float(L[0]), "L_max": float(L[-1])})
    with _Timer(rep):
        sd0 = [bounds.sd_at_length(n, x, 0) for x in L]
        sn1 = [bounds.sn_at_length(n, x, 1) for x in L]
        sn2 = [bounds.sn_at_length(n, x, 2) for x in L]
        L1 = bounds.critical_length_L1(n)[0].L
        if figure == "Bn_of_L":
            for x, a, b in zip(L, sd0, sn1):
                bv = bounds.bound_sigma1(n, x)
                rep.rows.append({"L": float(x), "sigma0_D": a, "sigma1_N": b, "bound": bv.value,
                                 "branch": bv.label})
            cr = _crossings(L, sd0, sn1)
            rep.annotations.update({"L1": L1, "crossings": cr})
            rep.check("single crossing at L_1", "sigma_0^D and sigma_(1)^N cross once, at L_1",
                      len(cr) == 1 and cr[0][0] <= L1 <= cr[0][1], crossings=cr, L1=L1)
        elif figure == "Bn_m1plus1_of_L":
            L2 = bounds.critical_length_L2(n).L
            for x, a, b, c in zip(L, sd0, sn1, sn2):
                bv = bounds.bound_m1_plus_1(n, x)
                rep.rows.append({"L": float(x), "sigma0_D": a, "sigma1_N": b, "sigma2_N": c,
                                 "bound": bv.value, "branch": bv.label})
            labels = [row["branch"] for row in rep.rows]
            changes = [float(L[j + 1]) for j in range(len(labels) - 1) if labels[j] != labels[j + 1]]
            rep.annotations.update({"L1": L1, "L2": L2, "branch_changes": changes})
            expected = [x for x in (L2, L1) if L[0] < x < L[-1]]
            ok = len(changes) == len(expected) and all(
                L[np.searchsorted(L, e) - 1] <= e <= c for e, c in zip(expected, changes))
            rep.check("branch breakpoints", "piecewise bound switches branch at L_2 and L_1",
                      ok, changes=changes, expected=expected)
        else:
            cd, cn, branch = bounds.appendix_comparator(n)
            for x, a, c in zip(L, sd0, sn2):
                rep.rows.append({"L": float(x), "sigma0_D": a, "sigma2_N": c, "n_minus_1": float(n - 1)})
            rep.annotations.update({"L_D": cd.L, "L_N": cn.L, "branch": branch})
            rep.check("comparator branch", "Dirichlet branch iff L_N < L_D",
                      (branch == bounds.DIRICHLET) == (cn.L < cd.L), L_D=cd.L, L_N=cn.L)
    return rep


# --------------------------------------------------------------------------
# registry used by the command line


def run_experiment(exp_id: str, n: int, *, L: float = 2.0, N: int = DEFAULT_N, K: int = 5) -> ExperimentReport:
    """Run an experiment by id with its standard parameters."""
    if exp_id == "sharpness":
        return sharpness_experiment(n, L, [0.4, 0.2, 0.1, 0.05], N)
    if exp_id == "monotonicity":
        return monotonicity_experiment(n, L, K, N=N)
    if exp_id == "stability":
        return stability_experiment(n, N=N)
    if exp_id == "minmax":
        return minmax_experiment(smoothed_max_profile(L, 0.2), n, N=min(N, 1024))
    raise DomainError(f"unknown experiment id {exp_id!r}; choose from {EXPERIMENTS}")


EXPERIMENTS = ("sharpness", "monotonicity", "stability", "minmax")

__all__ = [
    "Check",
    "EXPERIMENTS",
    "ExperimentReport",
    "FIGURES",
    "delta_for_epsilon",
    "dipped_profile",
    "epsilon_star",
    "figure_data",
    "minmax_experiment",
    "monotonicity_experiment",
    "run_experiment",
    "sharpness_experiment",
    "stability_experiment",
    "successor_chain",
]
