"""Histograms on shared bin edges and the divergences used to compare them."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

EDGE_PAD = 1e-3
DEFAULT_EPSILON = 1e-9


class DegenerateRangeError(ValueError):
    """Pooled sample has zero spread, so no bins can be built."""


class OutOfRangeError(ValueError):
    """Sample value lies outside the histogram edges."""


class Variant(str, Enum):
    PAPER_SYMMETRIC_KL = "paper_symmetric_kl"
    MIXTURE_JSD = "mixture_jsd"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        aliases = {"paper": cls.PAPER_SYMMETRIC_KL, "mixture": cls.MIXTURE_JSD}
        if value in aliases:
            return aliases[value]
        return cls(value)


@dataclass(frozen=True)
class BinningSpec:
    """Either a fixed number of bins or a fixed bin width over the pooled range."""

    strategy: str = "fixed_count"
    n: int = 30
    width: float | None = None

    def __post_init__(self):
        if self.strategy == "fixed_count":
            if self.n < 2:
                raise ValueError(f"fixed_count needs n >= 2, got {self.n}")
        elif self.strategy == "fixed_width":
            if self.width is None or not self.width > 0:
                raise ValueError(f"fixed_width needs width > 0, got {self.width}")
        else:
            raise ValueError(f"unknown binning strategy {self.strategy!r}")

    @classmethod
    def count(cls, n: int) -> "BinningSpec":
        return cls("fixed_count", n=n)

    @classmethod
    def fixed_width(cls, width: float) -> "BinningSpec":
        return cls("fixed_width", width=width)


@dataclass(frozen=True, eq=False)
class Distribution:
    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        edges = np.array(self.edges, dtype=float)
        masses = np.array(self.masses, dtype=float)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be a strictly increasing 1-d sequence")
        if len(masses) != len(edges) - 1:
            raise ValueError(f"{len(masses)} masses for {len(edges) - 1} bins")
        if np.any(masses < 0):
            raise ValueError("masses must be non-negative")
        if abs(masses.sum() - 1.0) > 1e-9:
            raise ValueError(f"masses sum to {masses.sum()!r}, expected 1")
        edges.flags.writeable = False
        masses.flags.writeable = False
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses)

    @property
    def bins(self) -> int:
        return len(self.masses)

    def smoothed(self, epsilon: float) -> np.ndarray:
        """Masses after additive smoothing; still sum to one."""
        if epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if epsilon == 0:
            return self.masses
        return (self.masses + epsilon) / (1.0 + epsilon * self.bins)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_left", "bin_right", "mass"])
            for left, right, mass in zip(self.edges[:-1], self.edges[1:], self.masses):
                writer.writerow([repr(float(left)), repr(float(right)), repr(float(mass))])

    @classmethod
    def from_csv(cls, path) -> "Distribution":
        lefts, rights, masses = [], [], []
        with open(Path(path), newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                lefts.append(float(row["bin_left"]))
                rights.append(float(row["bin_right"]))
                masses.append(float(row["mass"]))
        return cls(np.array(lefts + rights[-1:]), np.array(masses))


def make_common_edges(sample_a, sample_b, spec: BinningSpec = BinningSpec()) -> np.ndarray:
    """Bin edges spanning both samples, padded by 0.1% of the range on each side."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    if np.any(pooled < 0) or not np.all(np.isfinite(pooled)):
        raise ValueError("samples must be finite and non-negative")
    lo, hi = pooled.min(), pooled.max()
    if hi == lo:
        raise DegenerateRangeError(f"all pooled values equal {lo!r}")
    pad = EDGE_PAD * (hi - lo)
    lo, hi = lo - pad, hi + pad
    if spec.strategy == "fixed_count":
        return np.linspace(lo, hi, spec.n + 1)
    n = max(int(np.ceil((hi - lo) / spec.width)), 1)
    if lo + n * spec.width < hi:
        n += 1
    return lo + spec.width * np.arange(n + 1)


def histogram(sample, edges) -> Distribution:
    """Normalised bin counts. Bins are half-open except the last, which is closed."""
    x = np.asarray(sample, dtype=float)
    edges = np.asarray(edges, dtype=float)
    if x.size == 0:
        raise ValueError("cannot histogram an empty sample")
    if x.min() < edges[0] or x.max() > edges[-1]:
        raise OutOfRangeError(
            f"sample range [{x.min()!r}, {x.max()!r}] exceeds edges "
            f"[{edges[0]!r}, {edges[-1]!r}]; rebuild the edges"
        )
    idx = np.searchsorted(edges, x, side="right") - 1
    idx[idx == len(edges) - 1] = len(edges) - 2
    counts = np.bincount(idx, minlength=len(edges) - 1)
    return Distribution(edges, counts / x.size)


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    support = p > 0
    if np.any(q[support] == 0):
        return float("inf")
    return float(np.sum(p[support] * np.log(p[support] / q[support])))


def _check_shared(P: Distribution, Q: Distribution) -> None:
    if P.edges.shape != Q.edges.shape or not np.array_equal(P.edges, Q.edges):
        raise ValueError("distributions must share bin edges")


def kl_divergence(P: Distribution, Q: Distribution, epsilon: float = 0.0) -> float:
    """Kullback-Leibler divergence D(P || Q) in nats.

    Returns ``inf`` when ``epsilon`` is zero and Q has an empty bin where P
    has mass.
    """
    _check_shared(P, Q)
    return _kl(P.smoothed(epsilon), Q.smoothed(epsilon))


def jsd(P: Distribution, Q: Distribution, epsilon: float | None = None,
        variant: Variant | str = Variant.PAPER_SYMMETRIC_KL) -> float:
    """Symmetric divergence between two histograms on the same edges.

    ``paper_symmetric_kl`` averages the two directed KL divergences;
    ``mixture_jsd`` is the Jensen-Shannon divergence against M = (P + Q) / 2
    and is always finite. ``epsilon=None`` picks 1e-9 smoothing for the
    former and none for the latter.
    """
    variant = Variant.parse(variant)
    _check_shared(P, Q)
    if epsilon is None:
        epsilon = DEFAULT_EPSILON if variant is Variant.PAPER_SYMMETRIC_KL else 0.0
    p, q = P.smoothed(epsilon), Q.smoothed(epsilon)
    if variant is Variant.PAPER_SYMMETRIC_KL:
        return 0.5 * _kl(p, q) + 0.5 * _kl(q, p)
    m = 0.5 * (p + q)
    return 0.5 * _kl(p, m) + 0.5 * _kl(q, m)
