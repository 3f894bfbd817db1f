"""Warping profiles h on [0, L] for metrics dr^2 + h(r)^2 g_0.

A profile is admissible when h(0) = h(L) = 1, h > 0 and |h'| <= 1.  Two
representations are supported: a list of analytic segments (unit-slope
ramps, constants, polynomial and cosine caps) or uniform samples
interpreted as piecewise linear.  Profiles are immutable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import Polynomial

from .annulus import Condition
from .errors import DomainError

ENDPOINT_TOL = 1e-12
SLOPE_TOL = 1e-9
SYMMETRY_TOL = 1e-12
MIN_SAMPLES = 16
SHAPES = ("quadratic", "cosine", "polynomial")
SEGMENT_KINDS = ("up", "down", "constant", "poly", "cosine")


@dataclass(frozen=True)
class Segment:
    """Analytic piece of a profile on ``[r0, r1]``.

    ``coeffs`` depend on ``kind`` (``t = r - r0``):

    * ``up``: ``(c,)`` with ``h = c + t``
    * ``down``: ``(c,)`` with ``h = c - t``
    * ``constant``: ``(c,)``
    * ``poly``: ``(c0, c1, ...)`` with ``h = sum c_j t^j``
    * ``cosine``: ``(c0, A, w)`` with ``h = c0 + A sin(w t)``
    """

    kind: str
    r0: float
    r1: float
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise DomainError(f"unknown segment kind {self.kind!r}")
        if not self.r1 > self.r0:
            raise DomainError(f"empty segment [{self.r0}, {self.r1}]")

    def value(self, r):
        t = np.asarray(r, dtype=float) - self.r0
        c = self.coeffs
        if self.kind == "up":
            return c[0] + t
        if self.kind == "down":
            return c[0] - t
        if self.kind == "constant":
            return c[0] + 0.0 * t
        if self.kind == "poly":
            return Polynomial(c)(t)
        return c[0] + c[1] * np.sin(c[2] * t)

    def slope(self, r):
        t = np.asarray(r, dtype=float) - self.r0
        c = self.coeffs
        if self.kind == "up":
            return 1.0 + 0.0 * t
        if self.kind == "down":
            return -1.0 + 0.0 * t
        if self.kind == "constant":
            return 0.0 * t
        if self.kind == "poly":
            return Polynomial(c).deriv()(t)
        return c[1] * c[2] * np.cos(c[2] * t)

    def critical_points(self) -> list[float]:
        """Interior points where the slope vanishes (for exact maxima)."""
        if self.kind == "poly" and len(self.coeffs) > 2:
            roots = Polynomial(self.coeffs).deriv().roots()
            ts = [float(z.real) for z in roots if abs(z.imag) < 1e-12]
        elif self.kind == "cosine":
            w = self.coeffs[2]
            ts = [(math.pi / 2 + j * math.pi) / w for j in range(-1, 64)]
        else:
            ts = []
        return [self.r0 + t for t in ts if 0.0 < t < self.r1 - self.r0]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "r0": self.r0, "r1": self.r1, "coeffs": list(self.coeffs)}


@dataclass(frozen=True, eq=False)
class Profile:
    """Warping function on ``[0, L]``; exactly one of ``segments``/``samples`` is set."""

    L: float
    segments: tuple[Segment, ...] = ()
    samples: tuple[float, ...] | None = None
    symmetric: bool = False
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0):
            raise DomainError(f"meridian length must be positive, got {self.L!r}")
        if bool(self.segments) == (self.samples is not None):
            raise DomainError("a profile needs either segments or samples, not both")

    @property
    def is_sampled(self) -> bool:
        return self.samples is not None

    def _edges(self) -> np.ndarray:
        return np.array([s.r0 for s in self.segments] + [self.segments[-1].r1])

    def _sample_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.L, len(self.samples))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.is_sampled:
            return np.interp(r, self._sample_grid(), np.asarray(self.samples))
        return self._piecewise(r, "value")

    def slope(self, r):
        """h'(r); at a breakpoint the right-hand piece is used."""
        r = np.asarray(r, dtype=float)
        if self.is_sampled:
            x = self._sample_grid()
            d = np.diff(np.asarray(self.samples)) / np.diff(x)
            idx = np.clip(np.searchsorted(x, r, side="right") - 1, 0, len(d) - 1)
            return d[idx]
        return self._piecewise(r, "slope")

    def _piecewise(self, r, method):
        edges = self._edges()
        idx = np.clip(np.searchsorted(edges, r, side="right") - 1, 0, len(self.segments) - 1)
        out = np.empty_like(r, dtype=float)
        for j, seg in enumerate(self.segments):
            mask = idx == j
            if np.any(mask):
                out[mask] = getattr(seg, method)(r[mask])
        return out if out.ndim else float(out)

    def breakpoints(self) -> np.ndarray:
        """Points where h may fail to be smooth, including both ends."""
        if self.is_sampled:
            return self._sample_grid()
        return self._edges()

    def max_value(self) -> float:
        if self.is_sampled:
            return float(max(self.samples))
        pts = list(self._edges())
        for seg in self.segments:
            pts.extend(seg.critical_points())
        return float(np.max(self(np.asarray(pts))))

    def dense_grid(self, per_piece: int = 64) -> np.ndarray:
        bp = self.breakpoints()
        if self.is_sampled:
            return bp
        pieces = [np.linspace(a, b, per_piece + 1) for a, b in zip(bp[:-1], bp[1:])]
        return np.unique(np.concatenate(pieces))

    def to_spec(self) -> dict:
        if self.family in _SPEC_BUILDERS and self.family != "samples":
            return {"kind": self.family, "L": self.L, **self.params}
        if self.is_sampled:
            return {"kind": "samples", "L": self.L, "samples": list(self.samples)}
        return {"kind": "segments", "L": self.L, "symmetric": self.symmetric,
                "segments": [s.to_dict() for s in self.segments]}


@dataclass(frozen=True, eq=False)
class HalfProfile:
    """Restriction of a symmetric profile to ``[0, L/2]`` with a condition at ``r = L/2``."""

    profile: Profile
    condition: Condition

    @property
    def length(self) -> float:
        return self.profile.L / 2

    def __call__(self, r):
        return self.profile(r)

    def breakpoints(self) -> np.ndarray:
        bp = self.profile.breakpoints()
        bp = bp[bp < self.length - 1e-14 * self.length]
        return np.append(bp, self.length)


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    invariant: str
    r: float
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(f"{v.invariant} at r={v.r:.6g}: {v.detail}" for v in self.violations)


def validate(p: Profile) -> ValidationReport:
    """Check the admissibility conditions; returns every violation with its location."""
    out: list[Violation] = []
    L = p.L
    for r, label in ((0.0, "h(0)"), (L, "h(L)")):
        val = float(p(r))
        if abs(val - 1.0) > ENDPOINT_TOL:
            out.append(Violation("endpoint", r, f"{label} = {val!r}, expected 1"))

    if p.is_sampled:
        h = np.asarray(p.samples, dtype=float)
        if len(h) - 1 < MIN_SAMPLES:
            out.append(Violation("samples", 0.0, f"{len(h) - 1} intervals, need >= {MIN_SAMPLES}"))
        dr = L / (len(h) - 1)
        slopes = np.abs(np.diff(h)) / dr
        for i in np.flatnonzero(slopes > 1.0 + SLOPE_TOL):
            out.append(Violation("slope", i * dr, f"|h'| = {slopes[i]:.6g} on [{i * dr:.6g}, {(i + 1) * dr:.6g}]"))
        for i in np.flatnonzero(h <= 0):
            out.append(Violation("positivity", i * dr, f"h = {h[i]!r}"))
        if p.symmetric:
            gap = np.abs(h - h[::-1])
            i = int(np.argmax(gap))
            if gap[i] > SYMMETRY_TOL:
                out.append(Violation("symmetry", i * dr, f"|h(r) - h(L-r)| = {gap[i]:.3g}"))
        return ValidationReport(tuple(out))

    edges = p._edges()
    if abs(edges[0]) > ENDPOINT_TOL or abs(edges[-1] - L) > ENDPOINT_TOL * max(1.0, L):
        out.append(Violation("domain", float(edges[0]), "segments do not cover [0, L]"))
    for a, b in zip(p.segments[:-1], p.segments[1:]):
        if abs(a.r1 - b.r0) > ENDPOINT_TOL * max(1.0, L):
            out.append(Violation("domain", a.r1, f"gap between segments at {a.r1} and {b.r0}"))
        jump = abs(float(a.value(a.r1)) - float(b.value(b.r0)))
        if jump > ENDPOINT_TOL * 10:
            out.append(Violation("continuity", a.r1, f"jump of {jump:.3g}"))
    for seg in p.segments:
        r = np.linspace(seg.r0, seg.r1, 257)
        h = seg.value(r)
        s = np.abs(seg.slope(r))
        if np.any(h <= 0):
            i = int(np.argmin(h))
            out.append(Violation("positivity", float(r[i]), f"h = {h[i]!r}"))
        if np.any(s > 1.0 + SLOPE_TOL):
            i = int(np.argmax(s))
            out.append(Violation("slope", float(r[i]), f"|h'| = {s[i]:.6g}"))
    if p.symmetric:
        r = p.dense_grid()
        gap = np.abs(p(r) - p(L - r))
        i = int(np.argmax(gap))
        if gap[i] > SYMMETRY_TOL * max(1.0, L):
            out.append(Violation("symmetry", float(r[i]), f"|h(r) - h(L-r)| = {gap[i]:.3g}"))
    return ValidationReport(tuple(out))


def require_valid(p: Profile) -> Profile:
    report = validate(p)
    if not report.ok:
        raise DomainError(f"inadmissible profile: {report}")
    return p


# --------------------------------------------------------------------------
# constructors


def _check_length(L) -> float:
    L = float(L)
    if not (math.isfinite(L) and L > 0):
        raise DomainError(f"meridian length L must be positive, got {L!r}")
    return L


def _up(r0, r1, c):
    return Segment("up", float(r0), float(r1), (float(c),))


def _down(r0, r1, c):
    return Segment("down", float(r0), float(r1), (float(c),))


def cylinder(L: float) -> Profile:
    L = _check_length(L)
    return Profile(L, segments=(Segment("constant", 0.0, L, (1.0,)),), symmetric=True,
                   family="cylinder", params={})


def degenerate_profile(L: float) -> Profile:
    """The non-smooth maximizer ``h*(r) = min(1 + r, 1 + L - r)``."""
    L = _check_length(L)
    half = L / 2
    return Profile(L, segments=(_up(0.0, half, 1.0), _down(half, L, 1.0 + half)),
                   symmetric=True, family="degenerate", params={})


def _cap(a: float, width: float, shape: str) -> Segment:
    """Symmetric cap on ``[a, a + 2 width]`` starting at height ``1 + a`` with slope 1."""
    h0 = 1.0 + a
    if shape == "quadratic":
        # slope falls linearly from 1 to -1
        return Segment("poly", a, a + 2 * width, (h0, 1.0, -1.0 / (2 * width)))
    if shape == "cosine":
        return Segment("cosine", a, a + 2 * width, (h0, 2 * width / math.pi, math.pi / (2 * width)))
    if shape == "polynomial":
        # slope -(3s - s^3)/2 in s = (r - mid)/width; h'' vanishes at both joins
        s_of_t = Polynomial([-1.0, 1.0 / width])
        h_mid = h0 + width - 3 * width / 8
        cap = Polynomial([h_mid, 0.0, -0.75 * width, 0.0, 0.125 * width])(s_of_t)
        return Segment("poly", a, a + 2 * width, tuple(float(c) for c in cap.coef))
    raise DomainError(f"unknown smoothing shape {shape!r}; choose from {SHAPES}")


def _capped(L: float, width: float, shape: str, family: str, params: dict) -> Profile:
    a = L / 2 - width
    segs = []
    if a > 0:
        segs.append(_up(0.0, a, 1.0))
    segs.append(_cap(a, width, shape))
    if a > 0:
        segs.append(_down(L - a, L, 1.0 + a))
    return Profile(L, segments=tuple(segs), symmetric=True, family=family, params=params)


def smoothed_max_profile(L: float, delta: float, shape: str = "quadratic") -> Profile:
    """``1 + r`` on ``[0, L/2 - delta]``, a smooth cap of half-width ``delta``, mirrored.

    The cap keeps ``|h'| <= 1`` and stays below ``h*``; it is C1 at the joins
    for ``shape="quadratic"`` and C2 for ``"cosine"`` and ``"polynomial"``.
    """
    L = _check_length(L)
    delta = float(delta)
    if not 0 < delta < L / 2:
        raise DomainError(f"delta must satisfy 0 < delta < L/2 = {L / 2}, got {delta!r}")
    if shape not in SHAPES:
        raise DomainError(f"unknown smoothing shape {shape!r}; choose from {SHAPES}")
    return _capped(L, delta, shape, "smoothed_max", {"delta": delta, "shape": shape})


def successor_profile(p: Profile) -> Profile:
    """A symmetric profile lying above ``p`` and strictly above it in the middle.

    With ``m = max p``: ``1 + r`` on ``[0, m - 1]``, mirrored on the right, and
    a quadratic cap in between whose midpoint value is ``(1 + L/2 + m) / 2``.
    Iterating drives the profile uniformly to :func:`degenerate_profile`.
    """
    require_valid(p)
    L = p.L
    m = p.max_value()
    width = 1.0 + L / 2 - m
    if width <= 1e-12 * max(1.0, L):
        raise DomainError("profile already attains the maximal height 1 + L/2")
    return _capped(L, width, "quadratic", "successor", {"parent_max": m})


def plateau_exact_profile(L: float, m: float) -> Profile:
    """Kinked profile ``min(1 + r, m, 1 + L - r)``; the largest member of its class."""
    L = _check_length(L)
    m = _check_plateau_height(L, m)
    if m == 1.0:
        return cylinder(L)
    segs = [_up(0.0, m - 1, 1.0)]
    if L - 2 * (m - 1) > 0:
        segs.append(Segment("constant", m - 1, L - m + 1, (m,)))
    segs.append(_down(L - m + 1, L, m))
    return Profile(L, segments=tuple(segs), symmetric=True, family="plateau_exact", params={"m": m})


def _check_plateau_height(L: float, m) -> float:
    m = float(m)
    if not 1.0 <= m < 1.0 + L / 2:
        raise DomainError(f"plateau height m must satisfy 1 <= m < 1 + L/2 = {1 + L / 2}, got {m!r}")
    return m


def plateau_profile(L: float, m: float, delta: float) -> Profile:
    """Smoothed plateau profile lying above ``min(1 + r, m, 1 + L - r)``.

    Equal to ``1 + r`` on ``[0, m - 1]``, then a quadratic shoulder of width
    ``delta`` rising to ``m + delta/2``, a flat plateau, and the mirror image.
    ``m = 1`` gives the cylinder, which needs no smoothing.
    """
    L = _check_length(L)
    m = _check_plateau_height(L, m)
    if m == 1.0:
        p = cylinder(L)
        return Profile(L, segments=p.segments, symmetric=True, family="plateau",
                       params={"m": m, "delta": float(delta)})
    delta = float(delta)
    room = 1.0 + L / 2 - m
    if not 0 < delta <= room:
        raise DomainError(f"delta must satisfy 0 < delta <= 1 + L/2 - m = {room}, got {delta!r}")
    top = m + delta / 2
    left = m - 1 + delta
    right = L - m + 1 - delta
    segs = []
    if m > 1:
        segs.append(_up(0.0, m - 1, 1.0))
    segs.append(Segment("poly", m - 1, left, (m, 1.0, -1.0 / (2 * delta))))
    if right - left > 1e-14 * L:
        segs.append(Segment("constant", left, right, (top,)))
    else:
        right = left
    segs.append(Segment("poly", right, right + delta, (top, 0.0, -1.0 / (2 * delta))))
    segs.append(_down(L - m + 1, L, m))
    return Profile(L, segments=tuple(segs), symmetric=True, family="plateau",
                   params={"m": m, "delta": delta})


def sampled_profile(L: float, samples, *, symmetric: bool | None = None, family: str = "samples") -> Profile:
    """Uniform samples ``h_0..h_N`` on ``[0, L]``, linear in between."""
    L = _check_length(L)
    h = tuple(float(x) for x in samples)
    if len(h) < 2:
        raise DomainError("need at least two samples")
    if symmetric is None:
        arr = np.asarray(h)
        symmetric = bool(np.max(np.abs(arr - arr[::-1])) <= SYMMETRY_TOL)
    return Profile(L, samples=h, symmetric=symmetric, family=family, params={})


def sample(p: Profile, N: int) -> Profile:
    """Sample ``p`` at ``N + 1`` uniform points."""
    r = np.linspace(0.0, p.L, int(N) + 1)
    h = p(r)
    if p.symmetric:
        h = 0.5 * (h + h[::-1])
    return sampled_profile(p.L, h, symmetric=p.symmetric)


def halves(p: Profile) -> tuple[HalfProfile, HalfProfile]:
    """The half profile on ``[0, L/2]`` with Dirichlet and with Neumann inner condition."""
    if not p.symmetric:
        raise DomainError("halves() needs a symmetric profile")
    return HalfProfile(p, Condition.DIRICHLET), HalfProfile(p, Condition.NEUMANN)


def sup_distance(p: Profile, q: Profile) -> float:
    """Sup-norm distance on the union of both dense grids."""
    if abs(p.L - q.L) > 1e-12:
        raise DomainError("profiles have different meridian lengths")
    r = np.union1d(p.dense_grid(), q.dense_grid())
    return float(np.max(np.abs(p(r) - q(r))))


# --------------------------------------------------------------------------
# JSON profile specs


def _spec_segments(spec):
    segs = tuple(Segment(s["kind"], float(s["r0"]), float(s["r1"]), tuple(map(float, s["coeffs"])))
                 for s in spec["segments"])
    return Profile(float(spec["L"]), segments=segs, symmetric=bool(spec.get("symmetric", False)))


_SPEC_BUILDERS = {
    "cylinder": lambda s: cylinder(s["L"]),
    "degenerate": lambda s: degenerate_profile(s["L"]),
    "smoothed_max": lambda s: smoothed_max_profile(s["L"], s["delta"], s.get("shape", "quadratic")),
    "plateau": lambda s: plateau_profile(s["L"], s["m"], s.get("delta", 0.0)),
    "plateau_exact": lambda s: plateau_exact_profile(s["L"], s["m"]),
    "samples": lambda s: sampled_profile(s["L"], s["samples"]),
    "segments": _spec_segments,
}


def profile_from_spec(spec: dict) -> Profile:
    """Build a profile from a JSON-compatible dict (see README for the schema)."""
    if not isinstance(spec, dict):
        raise DomainError("profile spec must be a JSON object")
    kind = spec.get("kind")
    if kind not in _SPEC_BUILDERS:
        raise DomainError(f"unknown profile kind {kind!r}; expected one of {sorted(_SPEC_BUILDERS)}")
    if "L" not in spec:
        raise DomainError("profile spec is missing 'L'")
    try:
        return _SPEC_BUILDERS[kind](spec)
    except KeyError as exc:
        raise DomainError(f"profile spec of kind {kind!r} is missing {exc.args[0]!r}") from None


def load_profile(path) -> tuple[Profile, dict]:
    """Read a profile spec file; returns the profile and the raw spec."""
    try:
        spec = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read profile spec {path}: {exc}") from None
    return profile_from_spec(spec), spec
