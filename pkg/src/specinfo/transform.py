"""Channel-wise information-content transform for 1D spectra.

Training scans a labeled spectrum library channel by channel: it removes
dominant solvent/reference peaks with a clip threshold, re-normalizes, and
then builds one intensity histogram per channel. Applying the trained model
maps a spectrum into an information spectrum: each channel becomes one minus
the empirical frequency of the intensity bin the query value falls into, so
ubiquitous intensity levels score near 0 and rare ones near 1.

Training pipeline (order matters):

1. unit-normalize every spectrum (only when solvent suppression is on);
2. record the per-channel min/max envelope (used for threshold selection);
3. zero every point above the clip threshold (peak tails below it survive);
4. unit-normalize again, now compensating for sample concentration;
5. record the post-clip envelope and fill the per-channel histograms.

Step 4's rationale: before clipping, the norm is dominated by solvent peaks
(orders of magnitude above the signal), so step 1 equalizes solvent rather
than signal intensities; only after clipping does normalization equalize
the signal itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BinOutOfRangeError,
    EmptyLibraryError,
    FileFormatError,
    GridMismatchError,
    NonPositiveThresholdError,
    WindowOutOfRangeError,
)
from .spectra import PpmGrid, Spectrum, SpectrumLibrary, vector_normalize

__all__ = [
    "DEFAULT_N_BINS",
    "DEFAULT_SOLVENT_WINDOWS",
    "ChannelEnvelope",
    "ChannelHistogram",
    "InformationModel",
    "InformationSpectrum",
    "HotRegion",
    "compute_envelope",
    "clip_threshold",
    "suggest_threshold",
    "bin_index",
    "information_content",
    "train_model",
    "to_information",
    "hot_regions",
    "save_model",
    "load_model",
    "save_information_csv",
    "load_information_csv",
]

DEFAULT_N_BINS = 11
#: ppm window assumed to hold the water resonance when none is given.
DEFAULT_SOLVENT_WINDOWS: tuple[tuple[float, float], ...] = ((4.55, 4.85),)

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ChannelEnvelope:
    """Per-channel minimum and maximum intensity across a library."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self) -> None:
        mins = np.asarray(self.mins, dtype=float)
        maxs = np.asarray(self.maxs, dtype=float)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ValueError("mins and maxs must be 1-D arrays of equal length")
        if np.any(mins > maxs):
            raise ValueError("every channel must satisfy min <= max")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @property
    def n_channels(self) -> int:
        return self.mins.shape[0]


@dataclass(frozen=True)
class ChannelHistogram:
    """Occupancy counts of one channel's intensity bins."""

    counts: np.ndarray
    total: int

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or np.any(counts < 0):
            raise ValueError("counts must be a 1-D nonnegative vector")
        if int(counts.sum()) != self.total:
            raise ValueError(
                f"counts sum {int(counts.sum())} != declared total {self.total}"
            )
        if self.total <= 0:
            raise ValueError("total must be positive")
        object.__setattr__(self, "counts", counts)

    @property
    def n_bins(self) -> int:
        return self.counts.shape[0]


@dataclass(frozen=True)
class InformationModel:
    """Trained per-channel statistics: post-clip envelope plus one intensity
    histogram per channel, all with a common total population."""

    grid: PpmGrid
    max_threshold: float
    n_bins: int
    suppress_solvent: bool
    envelope: ChannelEnvelope
    bin_counts: np.ndarray  # (n_channels, n_bins)
    total: int

    def __post_init__(self) -> None:
        counts = np.asarray(self.bin_counts, dtype=np.int64)
        if self.n_bins < 2:
            raise ValueError("n_bins must be at least 2")
        if self.max_threshold <= 0:
            raise NonPositiveThresholdError("max_threshold must be positive")
        if counts.shape != (self.grid.n_channels, self.n_bins):
            raise ValueError(
                f"bin_counts shape {counts.shape} != "
                f"({self.grid.n_channels}, {self.n_bins})"
            )
        sums = counts.sum(axis=1)
        if np.any(sums != self.total):
            raise ValueError("every channel histogram must total the library size")
        if self.envelope.n_channels != self.grid.n_channels:
            raise ValueError("envelope length must match the grid")
        object.__setattr__(self, "bin_counts", counts)

    def histogram(self, channel: int) -> ChannelHistogram:
        return ChannelHistogram(self.bin_counts[channel], self.total)

    @property
    def histograms(self) -> list[ChannelHistogram]:
        return [self.histogram(c) for c in range(self.grid.n_channels)]


@dataclass(frozen=True)
class InformationSpectrum:
    """Per-channel information content in [0, 1] on the model's grid."""

    grid: PpmGrid
    info: np.ndarray

    def __post_init__(self) -> None:
        info = np.asarray(self.info, dtype=float)
        if info.ndim != 1 or info.shape[0] != self.grid.n_channels:
            raise ValueError("info length must match the grid")
        if np.any(info < 0.0) or np.any(info > 1.0):
            raise ValueError("information values must lie in [0, 1]")
        object.__setattr__(self, "info", info)


@dataclass(frozen=True)
class HotRegion:
    """A ppm interval of high mean information content."""

    start_ppm: float
    end_ppm: float
    mean_information: float


def compute_envelope(lib: SpectrumLibrary) -> ChannelEnvelope:
    """Column-wise min/max of all library spectra."""
    if len(lib) == 0:
        raise EmptyLibraryError("cannot compute an envelope of an empty library")
    matrix = lib.intensity_matrix()
    return ChannelEnvelope(matrix.min(axis=0), matrix.max(axis=0))


def clip_threshold(s: Spectrum, threshold: float) -> Spectrum:
    """Zero every point strictly above the threshold.

    Clipping is one-sided: sub-threshold values, including the surviving
    tails of a clipped peak and any negative values, pass through unchanged.
    """
    if threshold <= 0:
        raise NonPositiveThresholdError(f"threshold must be > 0, got {threshold}")
    v = s.intensities
    return Spectrum(s.grid, np.where(v > threshold, 0.0, v))


def suggest_threshold(
    env: ChannelEnvelope,
    grid: PpmGrid,
    solvent_windows: list[tuple[float, float]] | tuple[tuple[float, float], ...],
    safety_factor: float = 1.05,
) -> float:
    """Smallest clip level that spares every peak seen outside the solvent
    windows: the envelope maximum over non-solvent channels times a safety
    factor."""
    if env.n_channels != grid.n_channels:
        raise GridMismatchError("envelope length does not match the grid")
    if not solvent_windows:
        raise ValueError("solvent_windows must be non-empty")
    lo, hi = grid.window
    ppm = grid.ppm_values()
    solvent_mask = np.zeros(grid.n_channels, dtype=bool)
    for w_lo, w_hi in solvent_windows:
        w_lo, w_hi = sorted((float(w_lo), float(w_hi)))
        if w_lo < lo or w_hi > hi:
            raise WindowOutOfRangeError(
                f"solvent window [{w_lo}, {w_hi}] ppm outside grid [{lo}, {hi}] ppm"
            )
        solvent_mask |= (ppm >= w_lo) & (ppm <= w_hi)
    outside = env.maxs[~solvent_mask]
    reference = float(outside.max()) if outside.size else float(env.maxs.max())
    return safety_factor * reference


def bin_index(value: float, minimum: float, maximum: float, n_bins: int) -> int:
    """Map an intensity to its histogram bin.

    ``floor((value - min) / (max - min) * n_bins)`` clamped into
    ``[0, n_bins - 1]``: the clamp keeps the exact channel maximum in the top
    bin and absorbs query values outside the training envelope. A constant
    channel (max == min) maps everything to bin 0.
    """
    if n_bins < 2:
        raise ValueError(f"n_bins must be at least 2, got {n_bins}")
    if maximum == minimum:
        return 0
    k = math.floor((value - minimum) / (maximum - minimum) * n_bins)
    return min(max(k, 0), n_bins - 1)


def information_content(k: int, h: ChannelHistogram) -> float:
    """One minus the empirical frequency of bin ``k``: 0 for a value every
    library spectrum shares, 1 for a never-seen value."""
    if not 0 <= k < h.n_bins:
        raise BinOutOfRangeError(f"bin {k} outside [0, {h.n_bins - 1}]")
    return 1.0 - h.counts[k] / h.total


def _clip_windows_to_grid(
    windows: tuple[tuple[float, float], ...], grid: PpmGrid
) -> list[tuple[float, float]]:
    lo, hi = grid.window
    clipped = []
    for w_lo, w_hi in windows:
        w_lo, w_hi = sorted((float(w_lo), float(w_hi)))
        w_lo, w_hi = max(w_lo, lo), min(w_hi, hi)
        if w_lo <= w_hi:
            clipped.append((w_lo, w_hi))
    return clipped


def _bin_matrix(matrix: np.ndarray, env: ChannelEnvelope, n_bins: int) -> np.ndarray:
    """Vectorized :func:`bin_index` over rows of an (n, channels) matrix."""
    span = env.maxs - env.mins
    safe_span = np.where(span > 0, span, 1.0)
    k = np.floor((matrix - env.mins) / safe_span * n_bins)
    k = np.where(span > 0, k, 0.0)
    return np.clip(k, 0, n_bins - 1).astype(np.int64)


def _preprocess(s: Spectrum, threshold: float, suppress_solvent: bool) -> Spectrum:
    if suppress_solvent:
        s = vector_normalize(s)
    s = clip_threshold(s, threshold)
    return vector_normalize(s)


def train_model(
    lib: SpectrumLibrary,
    n_bins: int = DEFAULT_N_BINS,
    threshold: float | None = None,
    suppress_solvent: bool = True,
    solvent_windows: tuple[tuple[float, float], ...] = DEFAULT_SOLVENT_WINDOWS,
) -> InformationModel:
    """Train an information model from a library.

    ``threshold=None`` selects the clip level automatically from the
    pre-clip envelope via :func:`suggest_threshold`; windows falling outside
    the grid are ignored for that purpose. Raises ``ZeroSpectrumError`` if
    clipping annihilates a spectrum entirely (renormalization impossible).
    """
    if len(lib) == 0:
        raise EmptyLibraryError("cannot train on an empty library")
    if n_bins < 2:
        raise ValueError(f"n_bins must be at least 2, got {n_bins}")
    for e in lib.entries:
        if e.spectrum.grid != lib.grid:
            raise GridMismatchError(
                f"entry {e.label!r} is not on the library grid"
            )

    spectra = lib.spectra()
    if suppress_solvent:
        spectra = [vector_normalize(s) for s in spectra]

    pre_env = compute_envelope(SpectrumLibrary(lib.grid, tuple(
        (e.label, s) for e, s in zip(lib.entries, spectra)
    )))
    if threshold is None:
        windows = _clip_windows_to_grid(solvent_windows, lib.grid)
        threshold = (
            suggest_threshold(pre_env, lib.grid, windows)
            if windows
            else 1.05 * float(pre_env.maxs.max())
        )
    elif threshold <= 0:
        raise NonPositiveThresholdError(f"threshold must be > 0, got {threshold}")

    processed = [
        vector_normalize(clip_threshold(s, threshold)) for s in spectra
    ]
    matrix = np.stack([s.intensities for s in processed])
    env = ChannelEnvelope(matrix.min(axis=0), matrix.max(axis=0))

    k = _bin_matrix(matrix, env, n_bins)
    counts = np.zeros((lib.grid.n_channels, n_bins), dtype=np.int64)
    channel_idx = np.arange(lib.grid.n_channels)
    for row in k:
        counts[channel_idx, row] += 1

    return InformationModel(
        grid=lib.grid,
        max_threshold=float(threshold),
        n_bins=n_bins,
        suppress_solvent=suppress_solvent,
        envelope=env,
        bin_counts=counts,
        total=len(lib),
    )


def to_information(model: InformationModel, s: Spectrum) -> InformationSpectrum:
    """Transform one spectrum into its information spectrum.

    The query undergoes the same preprocessing as training (normalize when
    the model suppresses solvent, clip, renormalize) so repeat acquisitions
    of one sample land on near-identical information spectra.
    """
    if s.grid != model.grid:
        raise GridMismatchError("spectrum grid does not match the model grid")
    prepared = _preprocess(s, model.max_threshold, model.suppress_solvent)
    k = _bin_matrix(prepared.intensities[None, :], model.envelope, model.n_bins)[0]
    populations = model.bin_counts[np.arange(model.grid.n_channels), k]
    return InformationSpectrum(model.grid, 1.0 - populations / model.total)


def hot_regions(
    model: InformationModel,
    lib: SpectrumLibrary,
    top_fraction: float = 0.1,
) -> list[HotRegion]:
    """Information-rich ppm intervals relative to a library.

    Averages the information spectra of all library entries, marks channels
    in the top ``top_fraction`` quantile of mean information, and merges
    adjacent marked channels into intervals sorted by mean information,
    highest first.
    """
    if not 0 < top_fraction <= 1:
        raise ValueError("top_fraction must lie in (0, 1]")
    if len(lib) == 0:
        raise EmptyLibraryError("cannot locate hot regions of an empty library")
    mean_info = np.zeros(model.grid.n_channels)
    for e in lib.entries:
        mean_info += to_information(model, e.spectrum).info
    mean_info /= len(lib)

    cutoff = float(np.quantile(mean_info, 1.0 - top_fraction))
    marked = mean_info >= cutoff
    ppm = model.grid.ppm_values()

    regions: list[HotRegion] = []
    run_start: int | None = None
    for c in range(len(marked) + 1):
        inside = c < len(marked) and marked[c]
        if inside and run_start is None:
            run_start = c
        elif not inside and run_start is not None:
            lo, hi = sorted((float(ppm[run_start]), float(ppm[c - 1])))
            regions.append(
                HotRegion(lo, hi, float(mean_info[run_start:c].mean()))
            )
            run_start = None
    regions.sort(key=lambda r: r.mean_information, reverse=True)
    return regions


# --- on-disk formats -------------------------------------------------------


def save_model(model: InformationModel, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "grid": model.grid.to_dict(),
        "max_threshold": model.max_threshold,
        "n_bins": model.n_bins,
        "suppress_solvent": model.suppress_solvent,
        "mins": model.envelope.mins.tolist(),
        "maxs": model.envelope.maxs.tolist(),
        "histograms": model.bin_counts.tolist(),
    }
    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True, indent=1)
        f.write("\n")


def load_model(path: str | Path) -> InformationModel:
    with open(path) as f:
        payload = json.load(f)
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise FileFormatError(f"{path}: unsupported model format {version!r}")
    try:
        counts = np.asarray(payload["histograms"], dtype=np.int64)
        return InformationModel(
            grid=PpmGrid.from_dict(payload["grid"]),
            max_threshold=float(payload["max_threshold"]),
            n_bins=int(payload["n_bins"]),
            suppress_solvent=bool(payload["suppress_solvent"]),
            envelope=ChannelEnvelope(
                np.asarray(payload["mins"], dtype=float),
                np.asarray(payload["maxs"], dtype=float),
            ),
            bin_counts=counts,
            total=int(counts[0].sum()) if counts.size else 0,
        )
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: malformed model JSON ({exc})") from exc


def save_information_csv(fis: InformationSpectrum, path: str | Path) -> None:
    from .spectra import save_spectrum_csv

    save_spectrum_csv(Spectrum(fis.grid, fis.info), path, value_header="information")


def load_information_csv(path: str | Path) -> InformationSpectrum:
    from .spectra import load_spectrum_csv

    s = load_spectrum_csv(path, value_header="information")
    return InformationSpectrum(s.grid, s.intensities)
