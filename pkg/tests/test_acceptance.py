"""Acceptance criteria, one test each; run with ``pytest -m acceptance -s``."""

import math

import numpy as np
import pytest

from steklov_revolution import bounds as B
from steklov_revolution import experiments as E
from steklov_revolution.annulus import Condition
from steklov_revolution.annulus import mixed_eigenvalue as annulus_eigenvalue
from steklov_revolution.modes import laplace_eigenvalue, multiplicity
from steklov_revolution.profiles import HalfProfile, cylinder, degenerate_profile, smoothed_max_profile
from steklov_revolution.solver import mixed_eigenvalue, richardson, steklov_spectrum

pytestmark = pytest.mark.acceptance


def test_closed_form_oracle_equivalence(criterion):
    Ns = (512, 1024, 2048, 4096)
    worst_err, worst_dev = 0.0, 0.0
    for n in (3, 4, 5):
        for R in (1.5, 2.0, 3.0):
            for cond in Condition:
                hp = HalfProfile(degenerate_profile(2 * (R - 1)), cond)
                for k in range(9):
                    exact = annulus_eigenvalue(n, R, k, cond)
                    vals = [mixed_eigenvalue(hp, n, k, N) for N in Ns]
                    if exact == 0.0:
                        worst_err = max(worst_err, max(abs(v) for v in vals))
                        continue
                    errs = np.array([abs(v - exact) / exact for v in vals])
                    orders = np.log2(errs[:-1] / errs[1:])
                    worst_err = max(worst_err, errs[-1])
                    worst_dev = max(worst_dev, float(np.max(np.abs(orders - 2.0))))
    criterion("1 closed-form oracle equivalence", worst_err <= 1e-4 and worst_dev <= 0.2,
              f"max rel err {worst_err:.2e}, max |order-2| {worst_dev:.2e}")


def _cylinder_values(n, L, count):
    vals = [0.0, 2.0 / L]
    for k in range(1, 40):
        s = math.sqrt(laplace_eigenvalue(n, k))
        t = math.tanh(s * L / 2)
        vals += [s * t] * multiplicity(n, k) + [s / t] * multiplicity(n, k)
    return np.sort(vals)[:count]


def test_cylinder_analytic_oracle(criterion):
    n, L, K = 3, 2.0, 40
    coarse = steklov_spectrum(cylinder(L), n, K, 1024).values()
    fine = steklov_spectrum(cylinder(L), n, K, 2048).values()
    ext = np.array([richardson(c, f, 2.0, 2.0) for c, f in zip(coarse, fine)])
    exact = _cylinder_values(n, L, K)
    err = float(np.max(np.abs(ext[1:] - exact[1:]) / exact[1:]))
    ok = ext[0] == 0.0 and err <= 1e-5
    criterion("2 cylinder analytic oracle", ok, f"K={K}, max rel err after Richardson {err:.2e}")


def test_degenerate_metric_gluing(criterion):
    n, L, K = 3, 2.0, 12
    R = 1 + L / 2
    merged = []
    for k in range(12):
        m = multiplicity(n, k)
        merged += [annulus_eigenvalue(n, R, k, Condition.DIRICHLET)] * m
        merged += [annulus_eigenvalue(n, R, k, Condition.NEUMANN)] * m
    merged = np.sort(merged)[:K]
    got = steklov_spectrum(degenerate_profile(L), n, K, 4096).values()
    err = float(np.max(np.abs(got[1:] - merged[1:]) / merged[1:]))
    ok = got[0] == 0.0 and merged[0] == 0.0 and err <= 1e-4 and abs(got[1] - 1.4) / 1.4 <= 1e-4
    ok = ok and B.bound_sigma1(n, L).value == pytest.approx(1.4, rel=1e-15)
    criterion("3 degenerate-metric gluing", ok, f"max rel err {err:.2e}, sigma_1 = {got[1]:.10f}")


def test_sharpness(criterion):
    deltas = [0.4, 0.2, 0.1, 0.05]
    details, ok = [], True
    for n in (3, 4):
        rep = E.sharpness_experiment(n, 2.0, deltas)
        bound = B.bound_sigma1(n, 2.0).value
        sig = [row["sigma1"] for row in rep.rows]
        ok &= rep.passed and all(s < bound for s in sig) and all(np.diff(sig) > 0)
        ok &= abs(rep.annotations["extrapolated_limit"] - bound) <= 1e-2
        details.append(f"n={n}: min gap {bound - sig[-1]:.2e}, limit err "
                       f"{abs(rep.annotations['extrapolated_limit'] - bound):.1e}")
    criterion("4 sharpness of the first-eigenvalue bound", ok, "; ".join(details))


def test_critical_length_l1(criterion):
    ok = True
    route_dev = 0.0
    for n in range(3, 13):
        cl, _ = B.critical_length_L1(n)
        route_dev = max(route_dev, abs(cl.L - cl.meta["L_direct"]) / cl.L)
    ok &= route_dev <= 1e-10
    L1s, gaps = [], []
    for n in range(3, 51):
        cl, bn = B.critical_length_L1(n)
        ok &= n - 2 < bn.value < n - 1
        ok &= cl.L < 2 * (math.exp(3 * math.log(n - 1) / (n - 2)) - 1)
        L1s.append(cl.L)
        gaps.append(bn.value - (n - 2))
    ok &= bool(np.all(np.diff(L1s) < 0) and np.all(np.diff(gaps) < 0))
    ok &= L1s[-1] < 0.12 * L1s[0] and gaps[-1] < 0.06 * gaps[0]
    criterion("5 critical length L_1 and B_n", ok,
              f"route dev {route_dev:.1e}, L_1: {L1s[0]:.4f} -> {L1s[-1]:.4f}, "
              f"B_n-(n-2): {gaps[0]:.4f} -> {gaps[-1]:.4f}")


def test_monotonicity(criterion):
    rep = E.monotonicity_experiment(3, 2.0, 5, steps=3)
    steps = [c for c in rep.checks if c.name.startswith("step")]
    ratio = min(c.values["gap"] / max(c.values["noise"], 1e-300) for c in steps)
    ok = rep.passed and len(steps) == 15
    criterion("6 monotonicity along successor chain", ok, f"{len(steps)} steps, min gap/noise {ratio:.1e}")


def test_multiplicity_cluster(criterion):
    s = steklov_spectrum(smoothed_max_profile(2.0, 0.1), 3, 5, 4096)
    # zero-based indices 1..3 are the second through fourth eigenvalues
    cluster = s.values()[1:4]
    labels = s.labels()[1:4]
    spread = float((cluster.max() - cluster.min()) / cluster.max())
    sn1 = annulus_eigenvalue(3, 2.0, 1, Condition.NEUMANN)
    ok = spread <= 1e-8 and all(c < sn1 for c in cluster) and {k for k, _ in labels} == {1}
    ok = ok and sn1 == pytest.approx(1.4, rel=1e-15)
    criterion("7 multiplicity cluster of mode 1", ok, f"spread {spread:.1e}, max {cluster.max():.10f} < {sn1}")


def test_piecewise_bound_and_global_switch(criterion):
    jump = 0.0
    for n in range(3, 13):
        for Lc in (B.critical_length_L2(n).L, B.critical_length_L1(n)[0].L):
            jump = max(jump, abs(B.bound_m1_plus_1(n, Lc - 1e-9).value - B.bound_m1_plus_1(n, Lc + 1e-9).value))
    branches = {n: B.bound_m1_plus_1_global(n).branch for n in range(3, 21)}
    order_ok = all((B.appendix_lengths(n)[1] < B.appendix_lengths(n)[0]) == (n <= 6) for n in range(3, 21))
    ok = jump <= 1e-6 and order_ok and all(
        branches[n] == ("dirichlet" if n <= 6 else "constant") for n in branches)
    criterion("8 piecewise bound continuity and global branch switch", ok,
              f"max jump {jump:.1e}, switch between n=6 and n=7")


def test_critical_length_sequence(criterion):
    ok, worst = True, 0.0
    for n in (3, 4, 5):
        Ls = []
        for i in range(1, 21):
            cl = B.critical_length_Li_star(n, i)
            bound = 2 * (math.exp(2 * math.log(2 * i + n) / (2 * i + n - 2)) - 1)
            ok &= 0 < cl.L < bound and cl.R > 1
            worst = max(worst, cl.residual)
            Ls.append(cl.L)
        ok &= bool(np.all(np.diff(Ls) < 0))
        ks = B.k_sequence(n, 20)
        ok &= ks[0] == 1 and bool(np.all(np.diff(ks) > 0))
    criterion("9 critical-length sequence", ok, f"max residual {worst:.1e}")


def test_stability(criterion):
    rep = E.stability_experiment(3, offsets=(-1.0, -0.3, 0.3, 1.0), plateau_heights=(1.0, 1.3, 1.6))
    near = [r for r in rep.rows if r["part"] == "near_critical"]
    plateau = [r for r in rep.rows if r["part"] == "plateau"]
    triggered = sum(r["deltas_triggered"] for r in near)
    held = sum(r["implications_held"] for r in near)
    strict = all(r["B_n_L_minus_sigma1"] > r["C_n_L_m"] for r in plateau)
    ok = rep.passed and held == triggered and strict and len(plateau) == 5
    margin = min(r["B_n_L_minus_sigma1"] - r["C_n_L_m"] for r in plateau)
    criterion("10 stability near the maximizer", ok,
              f"{held}/{triggered} implications, {len(plateau)} plateau members, min margin {margin:.2e}")
