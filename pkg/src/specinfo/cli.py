"""Command-line pipeline: synthesize a library, train/apply the information
transform, evaluate raw vs transformed separability, and train the MLP
benchmark. All randomness flows from explicit seeds, so every command is
reproducible byte for byte.

Subcommands: ``synth``, ``fit train``, ``fit apply``, ``eval``, ``ann``.
Parameters come from an optional JSON config file (sections ``synth``,
``fit``, ``eval``, ``ann``); command-line flags override config values.
Exit codes: 0 success, 2 usage or validation error, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import metrics, mlp, synth, transform
from .errors import SpecinfoError
from .spectra import (
    PpmGrid,
    SpectrumLibrary,
    load_library,
    load_spectrum_csv,
    resample_library,
    save_library,
    validate_library,
)

DEFAULT_ANN_CHANNELS = 500
DEFAULT_ANN_HIDDEN = 10
DEFAULT_ANN_SEEDS = (1, 2, 3, 4)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as f:
        config = json.load(f)
    if not isinstance(config, dict):
        raise SpecinfoError(f"{path}: config must be a JSON object")
    return config


def _param(args_value, section: dict, key: str, default):
    """Flag value if given, else config value, else default."""
    if args_value is not None:
        return args_value
    return section.get(key, default)


def _variation_from_dict(d: dict) -> synth.VariationConfig:
    kwargs = dict(d)
    for key in ("concentration_range", "drift_coeff_range"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    return synth.VariationConfig(**kwargs)


def _windows_from(value) -> tuple[tuple[float, float], ...]:
    return tuple((float(lo), float(hi)) for lo, hi in value)


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_valid_library(path: str) -> SpectrumLibrary:
    lib = load_library(path)
    violations = validate_library(lib)
    if violations:
        details = "; ".join(v.message for v in violations[:5])
        raise SpecinfoError(f"{path}: invalid library ({details})")
    return lib


def _safe_name(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label)


def _write_samples_csv(path: Path, values: np.ndarray) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["correlation"])
        for v in values:
            writer.writerow([repr(float(v))])


def _fit_kwargs(section: dict, args) -> dict:
    threshold = _param(getattr(args, "threshold", None), section, "threshold", None)
    if isinstance(threshold, str):
        if threshold != "auto":
            raise SpecinfoError(f"threshold must be a number or 'auto', got {threshold!r}")
        threshold = None
    kwargs = {
        "n_bins": int(_param(getattr(args, "bins", None), section, "n_bins",
                             transform.DEFAULT_N_BINS)),
        "threshold": None if threshold is None else float(threshold),
        "suppress_solvent": bool(section.get("suppress_solvent", True)),
    }
    if getattr(args, "no_suppress_solvent", False):
        kwargs["suppress_solvent"] = False
    if "solvent_windows" in section:
        kwargs["solvent_windows"] = _windows_from(section["solvent_windows"])
    return kwargs


# --- subcommands -----------------------------------------------------------


def cmd_synth(args) -> int:
    section = _load_config(args.config).get("synth", {})
    seed = _param(args.seed, section, "seed", None)
    if seed is None:
        print("error: synth requires a seed (--seed or config synth.seed)",
              file=sys.stderr)
        print(args._parser.format_usage(), end="", file=sys.stderr)
        return 2
    n_classes = int(_param(args.classes, section, "n_classes", 23))
    n_channels = int(_param(args.channels, section, "n_channels", 2000))

    if "multiplicities" in section:
        mult = metrics.ClassMultiplicities(tuple(int(c) for c in section["multiplicities"]))
    elif n_classes == 23:
        mult = synth.default_multiplicities()
    else:
        mult = metrics.ClassMultiplicities((4,) * n_classes)

    var = _variation_from_dict(section.get("variation", {}))
    grid_cfg = section.get("grid")
    grid = (
        PpmGrid.from_dict(grid_cfg) if grid_cfg else synth.default_grid(n_channels)
    )
    peaks_per_class = tuple(section.get("peaks_per_class", (2, 6)))

    lib = synth.gen_library(n_classes, mult, var, grid, int(seed), peaks_per_class)
    out = _out_dir(args) / "library.json"
    save_library(lib, out)
    print(f"wrote {out}: {len(lib)} spectra, {mult.n_classes} classes, "
          f"{grid.n_channels} channels")
    return 0


def cmd_fit_train(args) -> int:
    section = _load_config(args.config).get("fit", {})
    lib = _load_valid_library(args.library)
    model = transform.train_model(lib, **_fit_kwargs(section, args))
    out = _out_dir(args) / "model.json"
    transform.save_model(model, out)
    print(f"wrote {out}: threshold {model.max_threshold:.6g}, "
          f"{model.n_bins} bins, {model.total} spectra")
    return 0


def cmd_fit_apply(args) -> int:
    model = transform.load_model(args.model)
    out = _out_dir(args)
    written = []
    if args.library:
        lib = _load_valid_library(args.library)
        for i, entry in enumerate(lib.entries):
            fis = transform.to_information(model, entry.spectrum)
            path = out / f"fis_{i:03d}_{_safe_name(entry.label)}.csv"
            transform.save_information_csv(fis, path)
            written.append(path)
    elif args.spectrum:
        s = load_spectrum_csv(args.spectrum)
        fis = transform.to_information(model, s)
        path = out / f"{Path(args.spectrum).stem}_information.csv"
        transform.save_information_csv(fis, path)
        written.append(path)
    else:
        raise SpecinfoError("fit apply needs --library or --spectrum")
    print(f"wrote {len(written)} information spectra to {out}")
    return 0


def cmd_eval(args) -> int:
    config = _load_config(args.config)
    section = config.get("eval", {})
    lib = _load_valid_library(args.library)
    mult = metrics.multiplicities_from_library(lib)
    bayes_bins = int(_param(args.bayes_bins, section, "bayes_bins",
                            metrics.DEFAULT_BAYES_BINS))

    if args.model:
        model = transform.load_model(args.model)
    else:
        model = transform.train_model(lib, **_fit_kwargs(config.get("fit", {}), args))

    raw_vectors = [e.spectrum.intensities for e in lib.entries]
    fit_vectors = [
        transform.to_information(model, e.spectrum).info for e in lib.entries
    ]

    out = _out_dir(args)
    reports = {}
    for name, vectors in (("raw", raw_vectors), ("fit", fit_vectors)):
        dist, bayes = metrics.evaluate_transform(lib, vectors, mult, bayes_bins)
        reports[name] = (dist, bayes)
        part = metrics.partition_indices(mult)
        measured = metrics.correlation_matrix(vectors)
        intra_idx = np.array(sorted(part.intra))
        inter_idx = np.array(sorted(part.inter))
        _write_samples_csv(
            out / f"{name}_intra_correlations.csv",
            measured.values[intra_idx[:, 0], intra_idx[:, 1]],
        )
        _write_samples_csv(
            out / f"{name}_inter_correlations.csv",
            measured.values[inter_idx[:, 0], inter_idx[:, 1]],
        )
        print(f"{name}: d_avg {dist.d_avg:.4f}, bayes error "
              f"{bayes.error_probability:.4f}")

    metrics.save_reports(out / "eval_report.json", reports)
    print(f"wrote {out / 'eval_report.json'}")
    return 0


def cmd_ann(args) -> int:
    config = _load_config(args.config)
    section = config.get("ann", {})
    lib = _load_valid_library(args.library)

    n_channels = int(_param(args.channels, section, "n_channels",
                            DEFAULT_ANN_CHANNELS))
    if n_channels != lib.grid.n_channels:
        lib = resample_library(
            lib, PpmGrid(lib.grid.start_ppm, lib.grid.end_ppm, n_channels)
        )

    inputs_kind = _param(args.inputs, section, "inputs", "fit")
    if inputs_kind == "raw":
        inputs = lib.intensity_matrix()
    elif inputs_kind == "fit":
        model = transform.train_model(lib, **_fit_kwargs(config.get("fit", {}), args))
        inputs = np.stack([
            transform.to_information(model, e.spectrum).info for e in lib.entries
        ])
    else:
        raise SpecinfoError(f"--inputs must be 'raw' or 'fit', got {inputs_kind!r}")

    blocks = lib.class_blocks()
    class_index = {label: i for i, (label, _, _) in enumerate(blocks)}
    targets = np.zeros((len(lib), len(blocks)))
    for row, entry in enumerate(lib.entries):
        targets[row, class_index[entry.label]] = 1.0

    seeds = _param(
        None if args.seeds is None else [int(s) for s in args.seeds.split(",")],
        section, "seeds", list(DEFAULT_ANN_SEEDS),
    )
    target_error = _param(args.target_error, section, "target_max_bit_error", None)
    cfg = mlp.TrainConfig(
        step_size=float(_param(args.step, section, "step_size", 0.01)),
        max_epochs=int(_param(args.epochs, section, "max_epochs", 1000)),
        target_max_bit_error=None if target_error is None else float(target_error),
        n_repeats=len(seeds),
    )
    topology = mlp.MlpTopology(
        n_inputs=inputs.shape[1],
        n_hidden=int(_param(args.hidden, section, "n_hidden", DEFAULT_ANN_HIDDEN)),
        n_outputs=len(blocks),
    )

    curves = []
    final_net = None
    for seed in seeds:
        net, curve = mlp.train(mlp.init_network(topology, int(seed)),
                               inputs, targets, cfg)
        curves.append(curve)
        final_net = net
    averaged = mlp.average_curves(curves)

    out = _out_dir(args)
    mlp.save_curve_csv(averaged, out / "learning_curve.csv")
    mlp.save_network(final_net, out / "network.json")
    print(f"final max bit error {averaged.max_bit_error[-1]:.4f}, "
          f"training accuracy {averaged.final_accuracy:.4f} "
          f"({inputs_kind} inputs, {len(averaged.max_bit_error)} epochs)")
    return 0


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specinfo",
        description="Information-content transformation pipeline for 1D spectra",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (default .)")
        p.set_defaults(_parser=p)

    p_synth = sub.add_parser("synth", help="generate a synthetic library")
    common(p_synth)
    p_synth.add_argument("--seed", type=int, help="master RNG seed (required)")
    p_synth.add_argument("--classes", type=int, help="number of classes")
    p_synth.add_argument("--channels", type=int, help="grid channels")
    p_synth.set_defaults(func=cmd_synth)

    p_fit = sub.add_parser("fit", help="train or apply the transform")
    fit_sub = p_fit.add_subparsers(dest="fit_command", required=True)

    p_train = fit_sub.add_parser("train", help="train a model from a library")
    common(p_train)
    p_train.add_argument("--library", required=True, help="library JSON")
    p_train.add_argument("--bins", type=int, help="histogram bins per channel")
    p_train.add_argument("--threshold",
                         help="clip threshold (number or 'auto', default auto)")
    p_train.add_argument("--no-suppress-solvent", action="store_true",
                         help="skip the pre-clip normalization stage")
    p_train.set_defaults(func=cmd_fit_train)

    p_apply = fit_sub.add_parser("apply", help="transform spectra to information")
    common(p_apply)
    p_apply.add_argument("--model", required=True, help="model JSON")
    p_apply.add_argument("--library", help="library JSON to transform")
    p_apply.add_argument("--spectrum", help="single spectrum CSV to transform")
    p_apply.set_defaults(func=cmd_fit_apply)

    p_eval = sub.add_parser("eval", help="evaluate raw vs transformed separability")
    common(p_eval)
    p_eval.add_argument("--library", required=True, help="library JSON")
    p_eval.add_argument("--model", help="model JSON (default: train in place)")
    p_eval.add_argument("--bayes-bins", type=int, help="histogram bins")
    p_eval.add_argument("--bins", type=int, help="transform bins when training")
    p_eval.add_argument("--threshold", help="transform threshold when training")
    p_eval.set_defaults(func=cmd_eval)

    p_ann = sub.add_parser("ann", help="train the MLP benchmark")
    common(p_ann)
    p_ann.add_argument("--library", required=True, help="library JSON")
    p_ann.add_argument("--inputs", choices=("raw", "fit"),
                       help="feed raw spectra or information spectra")
    p_ann.add_argument("--channels", type=int, help="resample to this many channels")
    p_ann.add_argument("--hidden", type=int, help="hidden layer size")
    p_ann.add_argument("--step", type=float, help="gradient step size")
    p_ann.add_argument("--epochs", type=int, help="epoch budget")
    p_ann.add_argument("--seeds", help="comma-separated repeat seeds")
    p_ann.add_argument("--target-error", type=float,
                       help="stop when max bit error reaches this level")
    p_ann.add_argument("--bins", type=int, help="transform bins for fit inputs")
    p_ann.add_argument("--threshold", help="transform threshold for fit inputs")
    p_ann.set_defaults(func=cmd_ann)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
