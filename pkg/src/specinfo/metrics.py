"""Transformation-quality metrics: correlation-matrix distances and a
two-hypothesis histogram Bayes error.

A good transform drives correlations between spectra of the same compound
toward 1 and between different compounds toward 0. The measured correlation
matrix is therefore compared against the ideal block-diagonal 0/1 matrix:
squared deviations are summed separately over the intra-class and
inter-class index sets, and combined into a size-weighted average distance.
The same intra/inter split feeds a histogram Bayes classifier whose
misclassification probability gives a second, threshold-based view of class
separability.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateRangeError,
    DimensionMismatchError,
    EmptySamplesError,
    LengthMismatchError,
    ZeroVarianceError,
)
from .spectra import SpectrumLibrary
from .transform import ChannelHistogram

__all__ = [
    "DEFAULT_BAYES_BINS",
    "ClassMultiplicities",
    "CorrelationMatrix",
    "IndexPartition",
    "DistanceReport",
    "BayesReport",
    "pearson",
    "correlation_matrix",
    "ideal_matrix",
    "partition_indices",
    "distances",
    "bayes_error",
    "evaluate_transform",
    "multiplicities_from_library",
]

DEFAULT_BAYES_BINS = 25


@dataclass(frozen=True)
class ClassMultiplicities:
    """How many spectra each class contributes, in library order."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if not counts or any(c < 1 for c in counts):
            raise ValueError("multiplicities must be a non-empty list of positives")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def n_classes(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class CorrelationMatrix:
    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.n, self.n):
            raise DimensionMismatchError(
                f"values shape {values.shape} != ({self.n}, {self.n})"
            )
        if not np.allclose(values, values.T, rtol=0, atol=1e-12):
            raise ValueError("correlation matrix must be symmetric")
        if np.any(np.abs(values) > 1.0 + 1e-9):
            raise ValueError("correlation values must lie in [-1, 1]")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class IndexPartition:
    """Disjoint intra/inter index-pair sets covering all n*n matrix cells."""

    intra: frozenset[tuple[int, int]]
    inter: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        intra = frozenset(self.intra)
        inter = frozenset(self.inter)
        if intra & inter:
            raise ValueError("intra and inter sets must be disjoint")
        total = len(intra) + len(inter)
        n = int(round(total**0.5))
        if n * n != total:
            raise ValueError(f"partition covers {total} pairs, not a square count")
        if (intra | inter) != {(i, j) for i in range(n) for j in range(n)}:
            raise ValueError("partition must cover every (i, j) pair exactly once")
        object.__setattr__(self, "intra", intra)
        object.__setattr__(self, "inter", inter)

    @property
    def n(self) -> int:
        return int(round((len(self.intra) + len(self.inter)) ** 0.5))


@dataclass(frozen=True)
class DistanceReport:
    """Squared deviations from the ideal correlation matrix, split by
    partition, plus their size-weighted average."""

    d_intra: float
    d_inter: float
    d_total: float
    d_avg: float
    intra_size: int
    inter_size: int

    def to_dict(self) -> dict:
        return {
            "d_intra": self.d_intra,
            "d_inter": self.d_inter,
            "d_total": self.d_total,
            "d_avg": self.d_avg,
            "intra_size": self.intra_size,
            "inter_size": self.inter_size,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DistanceReport":
        return cls(
            float(d["d_intra"]),
            float(d["d_inter"]),
            float(d["d_total"]),
            float(d["d_avg"]),
            int(d["intra_size"]),
            int(d["inter_size"]),
        )


@dataclass(frozen=True)
class BayesReport:
    """Histogram Bayes classification of intra vs inter correlation values."""

    threshold: float
    error_probability: float
    intra_histogram: ChannelHistogram
    inter_histogram: ChannelHistogram
    bin_edges: np.ndarray

    def __post_init__(self) -> None:
        if not 0.0 <= self.error_probability <= 1.0:
            raise ValueError("error_probability must lie in [0, 1]")
        object.__setattr__(
            self, "bin_edges", np.asarray(self.bin_edges, dtype=float)
        )

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "error_probability": self.error_probability,
            "intra_histogram": {
                "counts": self.intra_histogram.counts.tolist(),
                "total": self.intra_histogram.total,
            },
            "inter_histogram": {
                "counts": self.inter_histogram.counts.tolist(),
                "total": self.inter_histogram.total,
            },
            "bin_edges": self.bin_edges.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BayesReport":
        return cls(
            float(d["threshold"]),
            float(d["error_probability"]),
            ChannelHistogram(
                np.asarray(d["intra_histogram"]["counts"], dtype=np.int64),
                int(d["intra_histogram"]["total"]),
            ),
            ChannelHistogram(
                np.asarray(d["inter_histogram"]["counts"], dtype=np.int64),
                int(d["inter_histogram"]["total"]),
            ),
            np.asarray(d["bin_edges"], dtype=float),
        )


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson product-moment correlation with population (1/n)
    normalization on both the covariance and the standard deviations, so the
    normalization constants cancel and the result lies in [-1, 1]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatchError(f"shapes {x.shape} and {y.shape} differ")
    if x.shape[0] < 2:
        raise LengthMismatchError("need at least 2 points")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt(np.mean(xc * xc)))
    sy = float(np.sqrt(np.mean(yc * yc)))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVarianceError("correlation undefined for a constant vector")
    return float(np.mean(xc * yc) / (sx * sy))


def correlation_matrix(spectra: list[np.ndarray] | np.ndarray) -> CorrelationMatrix:
    """All pairwise Pearson coefficients of a set of equal-length vectors."""
    matrix = np.asarray(spectra, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise DimensionMismatchError("need at least 2 equal-length vectors")
    n, length = matrix.shape
    if length < 2:
        raise LengthMismatchError("vectors need at least 2 points")
    centered = matrix - matrix.mean(axis=1, keepdims=True)
    std = np.sqrt(np.mean(centered * centered, axis=1))
    for i, s in enumerate(std):
        if s == 0.0:
            raise ZeroVarianceError(f"vector {i} has zero variance")
    values = (centered @ centered.T) / length / np.outer(std, std)
    values = (values + values.T) / 2.0
    return CorrelationMatrix(n, np.clip(values, -1.0, 1.0))


def ideal_matrix(mult: ClassMultiplicities) -> CorrelationMatrix:
    """Block-diagonal 0/1 target: 1 where two spectra share a class."""
    n = mult.n
    values = np.zeros((n, n))
    start = 0
    for count in mult.counts:
        values[start : start + count, start : start + count] = 1.0
        start += count
    return CorrelationMatrix(n, values)


def partition_indices(mult: ClassMultiplicities) -> IndexPartition:
    """Intra = all (i, j) pairs inside one class block (diagonal included);
    inter = everything else. 0-based indices."""
    n = mult.n
    intra: set[tuple[int, int]] = set()
    start = 0
    for count in mult.counts:
        block = range(start, start + count)
        intra.update((i, j) for i in block for j in block)
        start += count
    inter = {(i, j) for i in range(n) for j in range(n)} - intra
    return IndexPartition(frozenset(intra), frozenset(inter))


def distances(
    measured: CorrelationMatrix,
    ideal: CorrelationMatrix,
    part: IndexPartition,
) -> DistanceReport:
    """Squared element-wise deviation between measured and ideal matrices,
    totalled over all cells and split over the intra/inter partition."""
    if measured.n != ideal.n or part.n != measured.n:
        raise DimensionMismatchError(
            f"matrix sizes {measured.n}, {ideal.n} and partition size "
            f"{part.n} must agree"
        )
    sq = (ideal.values - measured.values) ** 2
    intra_idx = np.array(sorted(part.intra))
    inter_idx = np.array(sorted(part.inter)) if part.inter else np.empty((0, 2), int)
    d_intra = float(sq[intra_idx[:, 0], intra_idx[:, 1]].sum())
    d_inter = (
        float(sq[inter_idx[:, 0], inter_idx[:, 1]].sum()) if len(inter_idx) else 0.0
    )
    d_total = float(sq.sum())
    d_avg = d_intra / len(part.intra)
    if part.inter:
        d_avg += d_inter / len(part.inter)
    return DistanceReport(
        d_intra=d_intra,
        d_inter=d_inter,
        d_total=d_total,
        d_avg=d_avg,
        intra_size=len(part.intra),
        inter_size=len(part.inter),
    )


def bayes_error(
    intra_samples: np.ndarray,
    inter_samples: np.ndarray,
    n_bins: int = DEFAULT_BAYES_BINS,
) -> BayesReport:
    """Two-hypothesis histogram classifier on a scalar feature.

    Both sample sets are histogrammed over their common range; the decision
    threshold is placed at a bin boundary where the two estimated
    class-conditional densities cross, choosing the crossing (and side
    assignment) that minimizes the balanced empirical error
    ``(miss rate + false-alarm rate) / 2``. The two hypotheses are weighted
    equally: the intra set is a fixed small fraction of all pairs, so
    empirical priors would reduce every comparison to "always predict
    inter", hiding any separability a transform achieves.
    """
    intra = np.asarray(intra_samples, dtype=float).ravel()
    inter = np.asarray(inter_samples, dtype=float).ravel()
    if intra.size == 0 or inter.size == 0:
        raise EmptySamplesError("both sample sets must be non-empty")
    if n_bins < 2:
        raise ValueError(f"n_bins must be at least 2, got {n_bins}")
    lo = float(min(intra.min(), inter.min()))
    hi = float(max(intra.max(), inter.max()))
    if lo == hi:
        raise DegenerateRangeError("all samples identical; no histogram range")

    edges = np.linspace(lo, hi, n_bins + 1)
    intra_counts, _ = np.histogram(intra, bins=edges)
    inter_counts, _ = np.histogram(inter, bins=edges)
    f_intra = intra_counts / intra.size
    f_inter = inter_counts / inter.size

    sign = np.sign(f_intra - f_inter)
    candidates = [j for j in range(1, n_bins) if sign[j - 1] != sign[j]]

    best_error = 0.5
    best_threshold = float(edges[0])
    cum_intra = np.concatenate(([0.0], np.cumsum(f_intra)))
    cum_inter = np.concatenate(([0.0], np.cumsum(f_inter)))
    for j in candidates:
        # classify >= edges[j] as intra (intra_high) or as inter; keep the
        # orientation with the lower balanced error
        err_intra_high = 0.5 * cum_intra[j] + 0.5 * (1.0 - cum_inter[j])
        err = min(err_intra_high, 1.0 - err_intra_high)
        if err < best_error:
            best_error = err
            best_threshold = float(edges[j])

    return BayesReport(
        threshold=best_threshold,
        error_probability=float(best_error),
        intra_histogram=ChannelHistogram(intra_counts, int(intra.size)),
        inter_histogram=ChannelHistogram(inter_counts, int(inter.size)),
        bin_edges=edges,
    )


def multiplicities_from_library(lib: SpectrumLibrary) -> ClassMultiplicities:
    """Per-class entry counts from a contiguously grouped library."""
    blocks = lib.class_blocks()
    labels = [b[0] for b in blocks]
    if len(set(labels)) != len(labels):
        raise ValueError("library classes are not contiguous")
    return ClassMultiplicities(tuple(stop - start for _, start, stop in blocks))


def evaluate_transform(
    raw_lib: SpectrumLibrary,
    transformed: list[np.ndarray],
    mult: ClassMultiplicities,
    bayes_bins: int = DEFAULT_BAYES_BINS,
) -> tuple[DistanceReport, BayesReport]:
    """Full evaluation of a set of transformed vectors against the class
    structure of the library they came from: correlation-matrix distances
    plus the Bayes error of the intra/inter correlation values."""
    if len(transformed) != len(raw_lib):
        raise DimensionMismatchError(
            f"{len(transformed)} transformed vectors for {len(raw_lib)} spectra"
        )
    if mult.n != len(raw_lib):
        raise DimensionMismatchError(
            f"multiplicities total {mult.n} != library size {len(raw_lib)}"
        )
    lib_counts = tuple(
        stop - start for _, start, stop in raw_lib.class_blocks()
    )
    if lib_counts != mult.counts:
        raise DimensionMismatchError(
            f"library class blocks {lib_counts} != multiplicities {mult.counts}"
        )

    measured = correlation_matrix(transformed)
    ideal = ideal_matrix(mult)
    part = partition_indices(mult)
    report = distances(measured, ideal, part)

    intra_idx = np.array(sorted(part.intra))
    inter_idx = np.array(sorted(part.inter))
    intra_vals = measured.values[intra_idx[:, 0], intra_idx[:, 1]]
    inter_vals = measured.values[inter_idx[:, 0], inter_idx[:, 1]]
    bayes = bayes_error(intra_vals, inter_vals, n_bins=bayes_bins)
    return report, bayes


def save_reports(
    path: str | Path, reports: dict[str, tuple[DistanceReport, BayesReport]]
) -> None:
    """Write named (distance, bayes) report pairs as one JSON document."""
    payload = {
        name: {"distance": d.to_dict(), "bayes": b.to_dict()}
        for name, (d, b) in reports.items()
    }
    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True, indent=1)
        f.write("\n")
