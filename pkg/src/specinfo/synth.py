"""Deterministic generator of carbohydrate-like 1D spectra with class
structure.

Each class is a set of Lorentzian peaks confined to the anomeric
(4.5-5.5 ppm) and hump (3.3-4.3 ppm) windows. An individual spectrum adds
the acquisition-style corruptions the transform is meant to survive: a
uniform concentration scale factor, small per-peak position jitter, a huge
water-like solvent peak (3 orders of magnitude above the signal by default),
a slowly varying baseline drift, and i.i.d. Gaussian noise. Everything is a
pure function of (config, seed).

The drift model evaluates ``sum_j b_j * t^j * (1 - t)^(M - j)`` over the
normalized channel position t. Note this basis carries no binomial
coefficients, so equal coefficients do NOT make it constant for M >= 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TOutOfRangeError
from .metrics import ClassMultiplicities
from .spectra import PpmGrid, Spectrum, SpectrumLibrary

__all__ = [
    "ANOMERIC_WINDOW",
    "HUMP_WINDOW",
    "LINE_CUTOFF_WIDTHS",
    "PeakSpec",
    "ClassSpec",
    "VariationConfig",
    "SpectrumParts",
    "bernstein_baseline",
    "lorentzian_line",
    "gen_class_specs",
    "gen_spectrum_parts",
    "gen_spectrum",
    "gen_library",
    "default_multiplicities",
    "default_grid",
]

#: Information-rich windows of carbohydrate proton spectra.
ANOMERIC_WINDOW = (4.5, 5.5)
HUMP_WINDOW = (3.3, 4.3)

#: Lorentzian lines are truncated (and shifted to zero) at this many
#: half-widths from the center, giving every peak compact support.
LINE_CUTOFF_WIDTHS = 10.0

#: Extra margin on the solvent amplitude so the solvent/analyte intensity
#: ratio stays at or above the configured factor despite grid sampling of
#: the line shapes ("at least" three orders of magnitude, not "about").
SOLVENT_HEADROOM = 1.05

AMPLITUDE_RANGE = (0.3, 1.0)
WIDTH_RANGE = (0.002, 0.01)
SEPARATION_WIDTHS = 3.0
_MAX_SPEC_ATTEMPTS = 1000


@dataclass(frozen=True)
class PeakSpec:
    """One Lorentzian line: ppm center, peak amplitude, half-width at
    half-maximum in ppm."""

    center_ppm: float
    amplitude: float
    width_ppm: float

    def __post_init__(self) -> None:
        if self.amplitude <= 0 or self.width_ppm <= 0:
            raise ValueError("amplitude and width must be positive")


@dataclass(frozen=True)
class ClassSpec:
    label: str
    peaks: tuple[PeakSpec, ...]

    def __post_init__(self) -> None:
        if not self.peaks:
            raise ValueError("a class needs at least one peak")
        for p in self.peaks:
            if not (
                ANOMERIC_WINDOW[0] <= p.center_ppm <= ANOMERIC_WINDOW[1]
                or HUMP_WINDOW[0] <= p.center_ppm <= HUMP_WINDOW[1]
            ):
                raise ValueError(
                    f"peak at {p.center_ppm} ppm outside the anomeric and "
                    f"hump windows"
                )
        object.__setattr__(self, "peaks", tuple(self.peaks))

    @property
    def max_amplitude(self) -> float:
        return max(p.amplitude for p in self.peaks)


@dataclass(frozen=True)
class VariationConfig:
    """Per-spectrum corruption settings; noise is relative to the spectrum's
    largest analyte amplitude."""

    concentration_range: tuple[float, float] = (0.7, 1.3)
    shift_jitter_ppm: float = 0.002
    noise_sigma: float = 0.01
    # acquisitions are averaged only until the noise is acceptable, so the
    # residual noise level differs per spectrum by this uniform factor
    noise_scale_range: tuple[float, float] = (0.3, 3.0)
    drift_coeff_range: tuple[float, float] = (0.0, 0.05)
    drift_degree: int = 3
    solvent_amplitude_factor: float = 1000.0
    solvent_ppm: float = 4.7
    solvent_width_ppm: float = 0.02
    # water moves with temperature far more than analyte lines do; this is
    # the dominant class-independent variation between raw acquisitions
    solvent_shift_jitter_ppm: float = 0.015
    include_solvent: bool = True

    def __post_init__(self) -> None:
        lo, hi = self.concentration_range
        if not 0 < lo <= hi:
            raise ValueError("concentration_range must be a positive interval")
        if self.shift_jitter_ppm < 0 or self.noise_sigma < 0:
            raise ValueError("jitter and noise must be >= 0")
        ns_lo, ns_hi = self.noise_scale_range
        if not 0 <= ns_lo <= ns_hi:
            raise ValueError("noise_scale_range must be a nonnegative interval")
        d_lo, d_hi = self.drift_coeff_range
        if d_lo > d_hi:
            raise ValueError("drift_coeff_range must be an interval")
        if self.drift_degree < 0:
            raise ValueError("drift_degree must be >= 0")
        if self.solvent_amplitude_factor < 1:
            raise ValueError("solvent_amplitude_factor must be >= 1")
        if self.solvent_width_ppm <= 0 or self.solvent_shift_jitter_ppm < 0:
            raise ValueError("solvent width must be > 0 and jitter >= 0")


@dataclass(frozen=True)
class SpectrumParts:
    """The additive components of one generated spectrum."""

    grid: PpmGrid
    analyte: np.ndarray
    solvent: np.ndarray
    baseline: np.ndarray
    noise: np.ndarray

    def total(self) -> Spectrum:
        return Spectrum(
            self.grid, self.analyte + self.solvent + self.baseline + self.noise
        )


def bernstein_baseline(coeffs: np.ndarray, t: float | np.ndarray) -> float | np.ndarray:
    """Evaluate ``sum_j b_j * t^j * (1-t)^(M-j)`` at t in [0, 1].

    At t=0 only b_0 survives, at t=1 only b_M. No binomial weights are
    applied, so this is not a partition of unity.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.size < 1:
        raise ValueError("need at least one coefficient")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > 1.0):
        raise TOutOfRangeError("t must lie in [0, 1]")
    degree = coeffs.size - 1
    result = np.zeros_like(t_arr)
    for j, b in enumerate(coeffs):
        result = result + b * t_arr**j * (1.0 - t_arr) ** (degree - j)
    return float(result) if np.isscalar(t) else result


def lorentzian_line(
    ppm: np.ndarray,
    center: float,
    amplitude: float,
    width: float,
    cutoff_widths: float = LINE_CUTOFF_WIDTHS,
) -> np.ndarray:
    """Truncated-shifted Lorentzian: the usual ``a*w^2 / (d^2 + w^2)`` line
    minus its value at the cutoff distance, clamped at zero beyond the
    cutoff. Peak height is ``amplitude * (1 - 1/(1 + cutoff^2))``."""
    d = np.asarray(ppm, dtype=float) - center
    core = amplitude * width**2 / (d * d + width * width)
    floor = amplitude / (1.0 + cutoff_widths**2)
    return np.where(np.abs(d) < cutoff_widths * width, np.maximum(core - floor, 0.0), 0.0)


def _classes_distinct(a: ClassSpec, b: ClassSpec) -> bool:
    """True if either class has a peak center more than SEPARATION_WIDTHS
    times the (larger) width away from every peak of the other."""

    def has_lone_peak(src: ClassSpec, other: ClassSpec) -> bool:
        for p in src.peaks:
            if all(
                abs(p.center_ppm - q.center_ppm)
                > SEPARATION_WIDTHS * max(p.width_ppm, q.width_ppm)
                for q in other.peaks
            ):
                return True
        return False

    return has_lone_peak(a, b) or has_lone_peak(b, a)


def _draw_spec(label: str, n_peaks: int, rng: np.random.Generator) -> ClassSpec:
    peaks = []
    for i in range(n_peaks):
        if i == 0:
            window = ANOMERIC_WINDOW
        elif i == 1:
            window = HUMP_WINDOW
        else:
            window = ANOMERIC_WINDOW if rng.uniform() < 0.5 else HUMP_WINDOW
        width = rng.uniform(*WIDTH_RANGE)
        # inset so the truncated line support (and a little jitter room)
        # stays inside the window
        margin = LINE_CUTOFF_WIDTHS * width + 0.01
        center = rng.uniform(window[0] + margin, window[1] - margin)
        amplitude = rng.uniform(*AMPLITUDE_RANGE)
        peaks.append(PeakSpec(center, amplitude, width))
    return ClassSpec(label, tuple(peaks))


def gen_class_specs(
    n_classes: int,
    peaks_per_class: tuple[int, int] = (2, 6),
    seed: int = 0,
) -> list[ClassSpec]:
    """Deterministically draw peak layouts for ``n_classes`` classes,
    re-drawing any layout that is not distinguishable (by the lone-peak rule
    in :func:`_classes_distinct`) from every earlier class."""
    if n_classes < 1:
        raise ValueError("n_classes must be >= 1")
    lo, hi = peaks_per_class
    if not 1 <= lo <= hi:
        raise ValueError("peaks_per_class must be a positive interval")
    rng = np.random.default_rng(seed)
    specs: list[ClassSpec] = []
    for m in range(n_classes):
        label = f"class_{m:02d}"
        for _ in range(_MAX_SPEC_ATTEMPTS):
            n_peaks = int(rng.integers(lo, hi + 1))
            candidate = _draw_spec(label, n_peaks, rng)
            if all(_classes_distinct(candidate, s) for s in specs):
                specs.append(candidate)
                break
        else:
            raise RuntimeError(
                f"could not draw a distinct layout for class {m} after "
                f"{_MAX_SPEC_ATTEMPTS} attempts"
            )
    return specs


def gen_spectrum_parts(
    spec: ClassSpec,
    var: VariationConfig,
    grid: PpmGrid,
    seed: int,
) -> SpectrumParts:
    """Generate the additive components of one spectrum.

    Draw order is fixed (concentration, per-peak jitters, solvent jitter,
    noise scale, drift coefficients, noise) so a seed fully determines the
    output; the solvent jitter is drawn even when the solvent is disabled,
    keeping the other components identical across that switch.
    """
    rng = np.random.default_rng(seed)
    ppm = grid.ppm_values()

    concentration = rng.uniform(*var.concentration_range)
    jitters = rng.uniform(
        -var.shift_jitter_ppm, var.shift_jitter_ppm, size=len(spec.peaks)
    )
    solvent_jitter = rng.uniform(
        -var.solvent_shift_jitter_ppm, var.solvent_shift_jitter_ppm
    )
    noise_scale = rng.uniform(*var.noise_scale_range)

    analyte = np.zeros(grid.n_channels)
    for peak, jitter in zip(spec.peaks, jitters):
        analyte += lorentzian_line(
            ppm, peak.center_ppm + jitter, peak.amplitude * concentration,
            peak.width_ppm,
        )
    max_analyte_amp = concentration * spec.max_amplitude

    if var.include_solvent:
        solvent = lorentzian_line(
            ppm,
            var.solvent_ppm + solvent_jitter,
            var.solvent_amplitude_factor * max_analyte_amp,
            var.solvent_width_ppm,
        )
    else:
        solvent = np.zeros(grid.n_channels)

    coeffs = rng.uniform(*var.drift_coeff_range, size=var.drift_degree + 1)
    t = np.linspace(0.0, 1.0, grid.n_channels)
    baseline = np.asarray(bernstein_baseline(coeffs, t))

    noise = rng.normal(
        0.0, var.noise_sigma * noise_scale * max_analyte_amp, grid.n_channels
    )
    return SpectrumParts(grid, analyte, solvent, baseline, noise)


def gen_spectrum(
    spec: ClassSpec,
    var: VariationConfig,
    grid: PpmGrid,
    seed: int,
) -> Spectrum:
    return gen_spectrum_parts(spec, var, grid, seed).total()


def _spectrum_seed(master_seed: int, class_index: int, repeat: int) -> int:
    return int(
        np.random.SeedSequence((master_seed, class_index, repeat)).generate_state(1)[0]
    )


def gen_library(
    n_classes: int,
    multiplicities: ClassMultiplicities,
    var: VariationConfig,
    grid: PpmGrid,
    seed: int,
    peaks_per_class: tuple[int, int] = (2, 6),
) -> SpectrumLibrary:
    """Class specs plus ``multiplicities[m]`` spectra per class, each from
    its own seed derived from the master seed. Classes are contiguous."""
    if multiplicities.n_classes != n_classes:
        raise ValueError(
            f"{multiplicities.n_classes} multiplicities for {n_classes} classes"
        )
    specs = gen_class_specs(n_classes, peaks_per_class, seed)
    entries = []
    for m, (spec, count) in enumerate(zip(specs, multiplicities.counts)):
        for r in range(count):
            s = gen_spectrum(spec, var, grid, _spectrum_seed(seed, m, r))
            entries.append((spec.label, s))
    return SpectrumLibrary(grid, tuple(entries))


def default_multiplicities() -> ClassMultiplicities:
    """Nineteen classes with 4 spectra plus four singletons: 80 spectra."""
    return ClassMultiplicities(tuple([4] * 19 + [1] * 4))


def default_grid(n_channels: int = 2000) -> PpmGrid:
    return PpmGrid(1.0, 5.5, n_channels)
