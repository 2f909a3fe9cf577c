"""Core spectrum and library types shared by the whole pipeline.

A :class:`Spectrum` is a fixed-length intensity vector on a uniform ppm grid;
a :class:`SpectrumLibrary` is an ordered, class-labeled collection of spectra
on one common grid. This module also provides the two grid-level primitives
everything else builds on: unit-norm scaling (to cancel concentration
differences between acquisitions) and piecewise-linear resampling (to bring
spectra of different lengths onto one grid).

File formats owned here:

* spectrum CSV — header ``ppm,intensity``, one row per channel, monotone ppm;
* library JSON — ``{"grid": {...}, "entries": [{"label", "intensities"}]}``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import (
    FileFormatError,
    GridTooSmallError,
    NonFiniteError,
    WindowOutOfRangeError,
    ZeroSpectrumError,
)

__all__ = [
    "PpmGrid",
    "Spectrum",
    "LibraryEntry",
    "SpectrumLibrary",
    "Violation",
    "vector_normalize",
    "resample",
    "resample_library",
    "validate_library",
    "save_spectrum_csv",
    "load_spectrum_csv",
    "save_library",
    "load_library",
]


@dataclass(frozen=True)
class PpmGrid:
    """Uniform chemical-shift axis: channel ``c`` sits at
    ``start_ppm + c * (end_ppm - start_ppm) / (n_channels - 1)``."""

    start_ppm: float
    end_ppm: float
    n_channels: int

    def __post_init__(self) -> None:
        if self.n_channels < 2:
            raise GridTooSmallError(
                f"grid needs at least 2 channels, got {self.n_channels}"
            )
        if self.start_ppm == self.end_ppm:
            raise ValueError("start_ppm and end_ppm must differ")

    def ppm_values(self) -> np.ndarray:
        return np.linspace(self.start_ppm, self.end_ppm, self.n_channels)

    @property
    def window(self) -> tuple[float, float]:
        """(low, high) ppm bounds regardless of axis direction."""
        lo, hi = sorted((self.start_ppm, self.end_ppm))
        return lo, hi

    def to_dict(self) -> dict:
        return {
            "start_ppm": self.start_ppm,
            "end_ppm": self.end_ppm,
            "n_channels": self.n_channels,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PpmGrid":
        return cls(float(d["start_ppm"]), float(d["end_ppm"]), int(d["n_channels"]))


@dataclass(frozen=True)
class Spectrum:
    """One intensity vector on a :class:`PpmGrid`.

    Construction only checks the structural invariant (vector length). Value
    invariants such as finiteness are checked by the operations that need
    them and by :func:`validate_library`, so rule-breaking data read from
    disk can still be represented and reported on.
    """

    grid: PpmGrid
    intensities: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.intensities, dtype=float)
        if arr.ndim != 1:
            raise ValueError("intensities must be 1-D")
        if arr.shape[0] != self.grid.n_channels:
            raise ValueError(
                f"intensities length {arr.shape[0]} != grid channels "
                f"{self.grid.n_channels}"
            )
        object.__setattr__(self, "intensities", arr)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.intensities)))


class LibraryEntry(NamedTuple):
    label: str
    spectrum: Spectrum


@dataclass(frozen=True)
class SpectrumLibrary:
    """Ordered labeled spectra on one grid, grouped contiguously by class.

    The grouping requirement exists because downstream index partitions
    treat each class as one contiguous block of rows. Use
    :func:`validate_library` to check both it and the per-entry invariants.
    """

    grid: PpmGrid
    entries: tuple[LibraryEntry, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "entries",
            tuple(LibraryEntry(str(l), s) for l, s in self.entries),
        )

    def __len__(self) -> int:
        return len(self.entries)

    def labels(self) -> list[str]:
        return [e.label for e in self.entries]

    def spectra(self) -> list[Spectrum]:
        return [e.spectrum for e in self.entries]

    def intensity_matrix(self) -> np.ndarray:
        """Stack all entries into an (n_spectra, n_channels) array."""
        return np.stack([e.spectrum.intensities for e in self.entries])

    def class_blocks(self) -> list[tuple[str, int, int]]:
        """Contiguous (label, start, stop) row ranges, in entry order."""
        blocks: list[tuple[str, int, int]] = []
        for i, e in enumerate(self.entries):
            if blocks and blocks[-1][0] == e.label:
                label, start, _ = blocks[-1]
                blocks[-1] = (label, start, i + 1)
            else:
                blocks.append((e.label, i, i + 1))
        return blocks


@dataclass(frozen=True)
class Violation:
    """One broken library invariant; ``entry_index`` is None for
    library-level problems."""

    kind: str
    entry_index: int | None
    message: str


def vector_normalize(s: Spectrum) -> Spectrum:
    """Scale a spectrum to unit Euclidean norm.

    Cancels overall intensity scale, so two acquisitions of the same sample
    at different concentrations map to (nearly) the same vector.
    """
    v = s.intensities
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("spectrum contains NaN or infinite intensities")
    norm = float(np.sqrt(np.sum(v * v)))
    if norm == 0.0:
        raise ZeroSpectrumError("cannot normalize an all-zero spectrum")
    return Spectrum(s.grid, v / norm)


def resample(s: Spectrum, target: PpmGrid) -> Spectrum:
    """Evaluate a spectrum on a new grid by piecewise-linear interpolation.

    The target window must be contained in the source window; extrapolation
    is refused rather than guessed.
    """
    if not np.all(np.isfinite(s.intensities)):
        raise NonFiniteError("cannot resample non-finite intensities")
    src_lo, src_hi = s.grid.window
    tgt_lo, tgt_hi = target.window
    if tgt_lo < src_lo or tgt_hi > src_hi:
        raise WindowOutOfRangeError(
            f"target window [{tgt_lo}, {tgt_hi}] ppm not contained in "
            f"source window [{src_lo}, {src_hi}] ppm"
        )
    xp = s.grid.ppm_values()
    fp = s.intensities
    if xp[0] > xp[-1]:
        xp, fp = xp[::-1], fp[::-1]
    return Spectrum(target, np.interp(target.ppm_values(), xp, fp))


def resample_library(lib: SpectrumLibrary, target: PpmGrid) -> SpectrumLibrary:
    entries = [(e.label, resample(e.spectrum, target)) for e in lib.entries]
    return SpectrumLibrary(target, tuple(entries))


def validate_library(lib: SpectrumLibrary) -> list[Violation]:
    """Check all library invariants; returns one record per failure.

    Violations are data, not exceptions: an empty list means the library is
    well formed.
    """
    violations: list[Violation] = []
    for i, e in enumerate(lib.entries):
        if e.spectrum.grid != lib.grid:
            violations.append(
                Violation(
                    "GridMismatch",
                    i,
                    f"entry {i} ({e.label!r}) has grid {e.spectrum.grid}, "
                    f"library grid is {lib.grid}",
                )
            )
        if not e.spectrum.is_finite():
            violations.append(
                Violation(
                    "NonFinite",
                    i,
                    f"entry {i} ({e.label!r}) contains NaN or infinite values",
                )
            )
    seen: dict[str, int] = {}
    for i, e in enumerate(lib.entries):
        if e.label in seen and lib.entries[i - 1].label != e.label:
            violations.append(
                Violation(
                    "NonContiguousClass",
                    i,
                    f"class {e.label!r} reappears at entry {i} after other "
                    f"classes; entries must be grouped by class",
                )
            )
        seen[e.label] = i
    return violations


# --- on-disk formats -------------------------------------------------------


def save_spectrum_csv(s: Spectrum, path: str | Path, value_header: str = "intensity") -> None:
    ppm = s.grid.ppm_values()
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["ppm", value_header])
        for p, v in zip(ppm, s.intensities):
            writer.writerow([repr(float(p)), repr(float(v))])


def load_spectrum_csv(path: str | Path, value_header: str = "intensity") -> Spectrum:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["ppm", value_header]:
            raise FileFormatError(
                f"{path}: expected header 'ppm,{value_header}', got {header}"
            )
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    if len(rows) < 2:
        raise FileFormatError(f"{path}: need at least 2 rows")
    ppm = np.array([r[0] for r in rows])
    steps = np.diff(ppm)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise FileFormatError(f"{path}: ppm column must be strictly monotone")
    grid = PpmGrid(ppm[0], ppm[-1], len(rows))
    if not np.allclose(ppm, grid.ppm_values(), rtol=0, atol=1e-6 * abs(ppm[-1] - ppm[0])):
        raise FileFormatError(f"{path}: ppm column is not uniformly spaced")
    return Spectrum(grid, np.array([r[1] for r in rows]))


def save_library(lib: SpectrumLibrary, path: str | Path) -> None:
    payload = {
        "grid": lib.grid.to_dict(),
        "entries": [
            {"label": e.label, "intensities": e.spectrum.intensities.tolist()}
            for e in lib.entries
        ],
    }
    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True, indent=1)
        f.write("\n")


def load_library(path: str | Path) -> SpectrumLibrary:
    with open(path) as f:
        payload = json.load(f)
    try:
        grid = PpmGrid.from_dict(payload["grid"])
        entries: Iterable = payload["entries"]
        lib_entries = tuple(
            (str(e["label"]), Spectrum(grid, np.asarray(e["intensities"], dtype=float)))
            for e in entries
        )
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: malformed library JSON ({exc})") from exc
    return SpectrumLibrary(grid, lib_entries)
