import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from steklov_revolution import DomainError
from steklov_revolution.annulus import Condition
from steklov_revolution.profiles import (
    HalfProfile,
    Profile,
    Segment,
    cylinder,
    degenerate_profile,
    halves,
    load_profile,
    plateau_exact_profile,
    plateau_profile,
    profile_from_spec,
    require_valid,
    sample,
    sampled_profile,
    smoothed_max_profile,
    successor_profile,
    sup_distance,
    validate,
)


def h_star(L, r):
    return np.minimum(1 + r, 1 + L - r)


def fine(p, num=4001):
    return np.linspace(0, p.L, num)


def test_cylinder_and_degenerate_values():
    assert np.all(cylinder(3.0)(fine(cylinder(3.0))) == 1.0)
    p = degenerate_profile(2.0)
    r = fine(p)
    np.testing.assert_allclose(p(r), h_star(2.0, r), atol=1e-15)
    assert p.max_value() == pytest.approx(2.0)
    assert validate(p).ok


@pytest.mark.parametrize("shape", ["quadratic", "cosine", "polynomial"])
@pytest.mark.parametrize("L,delta", [(2.0, 0.4), (2.0, 0.05), (5.0, 1.0), (1.0, 0.49)])
def test_smoothed_max_is_admissible_and_below_h_star(shape, L, delta):
    p = smoothed_max_profile(L, delta, shape)
    assert validate(p).ok, str(validate(p))
    r = fine(p)
    h = p(r)
    assert np.all(h <= h_star(L, r) + 1e-14)
    np.testing.assert_allclose(h, h[::-1], atol=1e-12)
    away = np.abs(r - L / 2) >= delta
    np.testing.assert_allclose(h[away], h_star(L, r[away]), atol=1e-14)
    assert np.max(np.abs(p.slope(r))) <= 1 + 1e-12


@pytest.mark.parametrize("shape", ["quadratic", "cosine", "polynomial"])
def test_smoothing_distance_shrinks_with_delta(shape):
    L = 2.0
    d = [sup_distance(smoothed_max_profile(L, x, shape), degenerate_profile(L)) for x in (0.4, 0.2, 0.1)]
    assert d[0] > d[1] > d[2] > 0
    assert d[2] <= 0.1


def test_quadratic_cap_peak_height():
    L, w = 2.0, 0.4
    p = smoothed_max_profile(L, w)
    assert p.max_value() == pytest.approx(1 + L / 2 - w / 2, rel=1e-14)


@pytest.mark.parametrize("shape", ["cosine", "polynomial"])
def test_second_order_caps_join_smoothly(shape):
    p = smoothed_max_profile(2.0, 0.3, shape)
    a = 1.0 - 0.3
    eps = 1e-6
    curvature = (p(a + eps) - 2 * p(a) + p(a - eps)) / eps**2
    assert abs(curvature) < 1e-2 * (1 / 0.3)


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.0, 1.5])
def test_smoothed_max_rejects_bad_delta(bad):
    with pytest.raises(DomainError):
        smoothed_max_profile(2.0, bad)


def test_successor_chain_converges_to_h_star():
    L = 2.0
    p = cylinder(L)
    dists = []
    for _ in range(12):
        q = successor_profile(p)
        r = fine(q)
        assert validate(q).ok
        assert np.all(q(r) >= p(r) - 1e-14)
        assert q(L / 2) > p(L / 2)
        assert np.all(q(r) <= h_star(L, r) + 1e-14)
        dists.append(sup_distance(q, degenerate_profile(L)))
        p = q
    assert [round(successor_profile(cylinder(L)).max_value(), 12)] == [1.5]
    ratios = np.array(dists[1:]) / np.array(dists[:-1])
    np.testing.assert_allclose(ratios, 0.5, rtol=1e-9)
    assert dists[-1] < 1e-3


def test_successor_of_h_star_rejected():
    with pytest.raises(DomainError):
        successor_profile(degenerate_profile(2.0))


@pytest.mark.parametrize("m", [1.0, 1.3, 1.6, 1.95])
def test_plateau_profiles(m):
    L = 2.0
    exact = plateau_exact_profile(L, m)
    r = fine(exact)
    np.testing.assert_allclose(exact(r), np.minimum(h_star(L, r), m), atol=1e-14)
    delta = min(0.1, 1 + L / 2 - m)
    smooth = plateau_profile(L, m, delta)
    assert validate(smooth).ok
    assert np.all(smooth(r) >= exact(r) - 1e-14)
    assert np.all(smooth(r) <= h_star(L, r) + 1e-14)
    if m > 1:
        assert smooth.max_value() == pytest.approx(m + delta / 2)


def test_plateau_at_one_is_the_cylinder():
    p = plateau_profile(2.0, 1.0, 0.1)
    assert np.all(p(fine(p)) == 1.0)


@pytest.mark.parametrize("m", [0.9, 2.0, 2.5])
def test_plateau_rejects_bad_height(m):
    with pytest.raises(DomainError):
        plateau_profile(2.0, m, 0.1)
    with pytest.raises(DomainError):
        plateau_exact_profile(2.0, m)


def test_validator_reports_endpoint_with_location():
    h = np.ones(33)
    h[-1] = 1.01
    rep = validate(sampled_profile(2.0, h))
    assert not rep.ok
    v = [x for x in rep.violations if x.invariant == "endpoint"]
    assert v and v[0].r == 2.0
    with pytest.raises(DomainError, match="endpoint"):
        require_valid(sampled_profile(2.0, h))


def test_validator_reports_slope_location():
    L, N = 2.0, 32
    r = np.linspace(0, L, N + 1)
    h = np.ones(N + 1)
    h[10] = 1.0 + 1.6 * (L / N)
    rep = validate(sampled_profile(L, h))
    slope = [v for v in rep.violations if v.invariant == "slope"]
    assert {round(v.r, 12) for v in slope} == {round(r[9], 12), round(r[10], 12)}


def test_validator_flags_too_few_samples_and_positivity():
    rep = validate(sampled_profile(2.0, [1.0, 1.0, 1.0]))
    assert "samples" in {v.invariant for v in rep.violations}
    segs = (Segment("up", 0.0, 1.0, (1.0,)), Segment("down", 1.0, 4.0, (2.0,)), Segment("up", 4.0, 5.0, (-1.0,)))
    rep = validate(Profile(5.0, segments=segs))
    assert "positivity" in {v.invariant for v in rep.violations}


def test_validator_flags_discontinuity_and_steep_segment():
    segs = (Segment("constant", 0.0, 1.0, (1.0,)), Segment("constant", 1.0, 2.0, (1.2,)))
    assert "continuity" in {v.invariant for v in validate(Profile(2.0, segments=segs)).violations}
    segs = (Segment("poly", 0.0, 2.0, (1.0, 2.0, -1.0)),)
    assert "slope" in {v.invariant for v in validate(Profile(2.0, segments=segs)).violations}


def test_sampled_profile_symmetry_detection():
    p = sample(degenerate_profile(2.0), 64)
    assert p.symmetric and validate(p).ok
    q = sampled_profile(2.0, np.concatenate([np.linspace(1.0, 1.25, 17), np.linspace(1.25, 1.0, 17)[1:]]))
    assert q.symmetric and validate(q).ok
    skew = sampled_profile(2.0, np.concatenate([np.linspace(1.0, 1.25, 21), np.linspace(1.25, 1.0, 13)[1:]]))
    assert not skew.symmetric


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 8.0), st.floats(0.01, 0.99))
def test_smoothed_profiles_always_validate(L, frac):
    assert validate(smoothed_max_profile(L, frac * L / 2)).ok


def test_halves_and_half_profile_breakpoints():
    hd, hn = halves(smoothed_max_profile(2.0, 0.3))
    assert hd.condition is Condition.DIRICHLET and hn.condition is Condition.NEUMANN
    bp = hd.breakpoints()
    assert bp[0] == 0.0 and bp[-1] == 1.0 and hd.length == 1.0
    assert 0.7 in np.round(bp, 12)
    with pytest.raises(DomainError):
        halves(sampled_profile(2.0, np.r_[np.ones(16), 1.01, 1.0]))


@pytest.mark.parametrize("p", [cylinder(2.0), degenerate_profile(3.0), smoothed_max_profile(2.0, 0.2, "cosine"),
                               plateau_profile(2.0, 1.4, 0.1), plateau_exact_profile(2.0, 1.5),
                               sample(degenerate_profile(2.0), 32)])
def test_spec_round_trip(p, tmp_path):
    spec = p.to_spec()
    path = tmp_path / "p.json"
    path.write_text(json.dumps(spec))
    q, raw = load_profile(path)
    assert raw == spec
    assert sup_distance(p, q) < 1e-14


def test_custom_segments_spec():
    p = successor_profile(cylinder(2.0))
    q = profile_from_spec(json.loads(json.dumps(p.to_spec())))
    assert sup_distance(p, q) < 1e-14 and q.symmetric


@pytest.mark.parametrize("spec", [{"kind": "nope", "L": 1}, {"kind": "cylinder"}, {"kind": "smoothed_max", "L": 2},
                                  [1, 2]])
def test_bad_specs(spec):
    with pytest.raises(DomainError):
        profile_from_spec(spec)


def test_unreadable_spec_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(DomainError):
        load_profile(bad)
    with pytest.raises(DomainError):
        load_profile(tmp_path / "missing.json")


def test_half_profile_evaluates_parent():
    p = degenerate_profile(2.0)
    hp = HalfProfile(p, Condition.NEUMANN)
    assert hp(0.5) == pytest.approx(1.5)
