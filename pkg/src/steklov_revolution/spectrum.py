"""Sorted multisets of eigenvalues with per-mode provenance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PARITIES = ("even", "odd", "none")


@dataclass(frozen=True)
class SpectrumEntry:
    """One eigenvalue of one mode, repeated ``mult`` times in the spectrum."""

    sigma: float
    k: int
    parity: str
    mult: int

    def __post_init__(self):
        if self.parity not in PARITIES:
            raise ValueError(f"unknown parity {self.parity!r}")


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues counted with multiplicity, truncated to the first ``count``.

    ``entries`` is sorted ascending and may reach beyond ``count`` values; the
    tail is kept so that ties at the truncation point stay visible.
    """

    entries: tuple[SpectrumEntry, ...]
    count: int
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_entries(cls, entries, count: int, **meta) -> "Spectrum":
        ordered = sorted(entries, key=lambda e: (e.sigma, e.k, e.parity))
        return cls(tuple(ordered), int(count), dict(meta))

    def values(self) -> np.ndarray:
        """The first ``count`` eigenvalues, each repeated by multiplicity."""
        out = []
        for e in self.entries:
            out.extend([e.sigma] * e.mult)
            if len(out) >= self.count:
                break
        return np.asarray(out[: self.count], dtype=float)

    def labels(self) -> list[tuple[int, str]]:
        """``(mode, parity)`` for each value returned by :meth:`values`."""
        out = []
        for e in self.entries:
            out.extend([(e.k, e.parity)] * e.mult)
            if len(out) >= self.count:
                break
        return out[: self.count]

    def sigma(self, j: int) -> float:
        """``sigma_j`` counted with multiplicity, ``j = 0`` being the first value."""
        vals = self.values()
        if not 0 <= j < len(vals):
            raise IndexError(f"sigma_{j} not available; spectrum holds {len(vals)} values")
        return float(vals[j])

    def distinct(self, rtol: float = 1e-9) -> list[float]:
        """Distinct values among :meth:`values`; values within ``rtol`` are merged."""
        out: list[float] = []
        for v in self.values():
            if out and abs(v - out[-1]) <= rtol * max(abs(v), abs(out[-1]), 1e-300):
                continue
            out.append(float(v))
        return out

    def sigma_distinct(self, j: int, rtol: float = 1e-9) -> float:
        """``sigma_(j)``, the j-th eigenvalue counted without multiplicity."""
        d = self.distinct(rtol)
        if not 0 <= j < len(d):
            raise IndexError(f"sigma_({j}) not available; {len(d)} distinct values")
        return d[j]

    def __len__(self) -> int:
        return len(self.values())


def sweep_modes(mode_values, count: int, *, extra_modes: int = 2, k_limit: int = 128, mult=None):
    """Collect per-mode eigenvalues until the first ``count`` values are settled.

    ``mode_values(k)`` returns a list of ``(sigma, parity)`` pairs for mode k
    and ``mult(k)`` its multiplicity.  The sweep stops at the first mode whose
    smallest value exceeds the current ``count``-th candidate, then visits
    ``extra_modes`` more modes and checks that none of them changes the first
    ``count`` values.  Whether the smallest per-mode value is nondecreasing in
    k is not known in general, hence the check.

    Returns:
        (entries, k_last) with ``k_last`` the highest mode visited.

    Raises:
        ResourceError: the sweep needs modes beyond ``k_limit``.
        NumericalError: a safety-margin mode altered the leading values.
    """
    from .errors import NumericalError, ResourceError

    entries: list[SpectrumEntry] = []
    total = 0
    k = 0
    settled = None
    margin_left = None
    while True:
        if k > k_limit:
            raise ResourceError(
                f"mode sweep for {count} eigenvalues needs modes beyond k_max={k_limit}")
        vals = mode_values(k)
        m = mult(k)
        if margin_left is None and total >= count:
            cutoff = Spectrum.from_entries(entries, count).values()[-1]
            if min(s for s, _ in vals) > cutoff:
                settled = Spectrum.from_entries(entries, count).values()
                margin_left = extra_modes
        for s, parity in vals:
            entries.append(SpectrumEntry(sigma=float(s), k=k, parity=parity, mult=m))
            total += m
        if margin_left is not None:
            if margin_left == 0:
                break
            margin_left -= 1
        k += 1
    after = Spectrum.from_entries(entries, count).values()
    if not np.array_equal(after, settled):
        raise NumericalError(
            f"mode cutoff assumption violated: a mode above the cutoff entered the first {count} values")
    return entries, k
