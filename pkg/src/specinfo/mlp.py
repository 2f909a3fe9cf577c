"""Minimal two-stage feed-forward network trained by per-pattern
backpropagation.

Deliberately a 1980s-style trainer: logistic sigmoid on both layers,
sum-of-squared-error loss ``E = sum((y - t)^2)`` (so the output delta is
``2 * (y - t) * y * (1 - y)``), fixed step size, zero momentum, patterns
presented in fixed order. Everything is deterministic given the seed, and
the learning-curve metric is the maximum absolute output error over all
patterns and output units after each epoch.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    FileFormatError,
    LengthMismatchError,
    NonOneHotTargetError,
)

__all__ = [
    "MlpTopology",
    "MlpNetwork",
    "TrainConfig",
    "LearningCurve",
    "init_network",
    "forward",
    "backprop_gradients",
    "train",
    "classify",
    "average_curves",
    "train_repeated",
    "save_network",
    "load_network",
    "save_curve_csv",
    "load_curve_csv",
]

NETWORK_FORMAT_VERSION = 1
INIT_WEIGHT_RANGE = 0.1


@dataclass(frozen=True)
class MlpTopology:
    n_inputs: int
    n_hidden: int
    n_outputs: int

    def __post_init__(self) -> None:
        if min(self.n_inputs, self.n_hidden, self.n_outputs) < 1:
            raise ValueError("all layer sizes must be >= 1")


@dataclass(frozen=True)
class MlpNetwork:
    """Weights include a trailing bias column on each layer."""

    topology: MlpTopology
    hidden_weights: np.ndarray  # (n_hidden, n_inputs + 1)
    output_weights: np.ndarray  # (n_outputs, n_hidden + 1)
    rng_seed: int

    def __post_init__(self) -> None:
        hw = np.asarray(self.hidden_weights, dtype=float)
        ow = np.asarray(self.output_weights, dtype=float)
        t = self.topology
        if hw.shape != (t.n_hidden, t.n_inputs + 1):
            raise DimensionMismatchError(
                f"hidden weights shape {hw.shape} != "
                f"({t.n_hidden}, {t.n_inputs + 1})"
            )
        if ow.shape != (t.n_outputs, t.n_hidden + 1):
            raise DimensionMismatchError(
                f"output weights shape {ow.shape} != "
                f"({t.n_outputs}, {t.n_hidden + 1})"
            )
        if not (np.all(np.isfinite(hw)) and np.all(np.isfinite(ow))):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "hidden_weights", hw)
        object.__setattr__(self, "output_weights", ow)


@dataclass(frozen=True)
class TrainConfig:
    step_size: float = 0.01
    momentum: float = 0.0  # fixed at zero; kept explicit for the record
    max_epochs: int = 1000
    target_max_bit_error: float | None = None
    n_repeats: int = 4

    def __post_init__(self) -> None:
        if self.step_size < 0:
            raise ValueError("step_size must be >= 0")
        if self.momentum != 0.0:
            raise ValueError("momentum is fixed at zero")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")


@dataclass(frozen=True)
class LearningCurve:
    """Per-epoch maximum bit error plus the final training accuracy."""

    max_bit_error: np.ndarray
    final_accuracy: float

    def __post_init__(self) -> None:
        curve = np.asarray(self.max_bit_error, dtype=float)
        if np.any(curve < 0) or np.any(curve > 1):
            raise ValueError("max bit error values must lie in [0, 1]")
        object.__setattr__(self, "max_bit_error", curve)

    def epochs_to_reach(self, level: float) -> int | None:
        """1-based epoch at which the curve first drops to <= level."""
        hits = np.nonzero(self.max_bit_error <= level)[0]
        return int(hits[0]) + 1 if hits.size else None


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def init_network(topology: MlpTopology, seed: int) -> MlpNetwork:
    """Weights i.i.d. uniform on [-0.1, 0.1] from a seeded generator."""
    rng = np.random.default_rng(seed)
    hw = rng.uniform(
        -INIT_WEIGHT_RANGE, INIT_WEIGHT_RANGE,
        (topology.n_hidden, topology.n_inputs + 1),
    )
    ow = rng.uniform(
        -INIT_WEIGHT_RANGE, INIT_WEIGHT_RANGE,
        (topology.n_outputs, topology.n_hidden + 1),
    )
    return MlpNetwork(topology, hw, ow, int(seed))


def forward(net: MlpNetwork, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (net.topology.n_inputs,):
        raise DimensionMismatchError(
            f"input shape {x.shape} != ({net.topology.n_inputs},)"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("input must be finite")
    hidden = _sigmoid(net.hidden_weights[:, :-1] @ x + net.hidden_weights[:, -1])
    return _sigmoid(net.output_weights[:, :-1] @ hidden + net.output_weights[:, -1])


def _forward_batch(hw: np.ndarray, ow: np.ndarray, xa: np.ndarray) -> np.ndarray:
    """Outputs for bias-augmented inputs xa of shape (n, n_inputs + 1)."""
    hidden = _sigmoid(xa @ hw.T)
    ha = np.concatenate([hidden, np.ones((hidden.shape[0], 1))], axis=1)
    return _sigmoid(ha @ ow.T)


def backprop_gradients(
    net: MlpNetwork, x: np.ndarray, target: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of sum((y - t)^2) for one pattern, as (dW_hidden,
    dW_output) matching the weight matrix shapes."""
    x = np.asarray(x, dtype=float)
    target = np.asarray(target, dtype=float)
    t = net.topology
    if x.shape != (t.n_inputs,) or target.shape != (t.n_outputs,):
        raise DimensionMismatchError("pattern shapes do not match the topology")
    xa = np.concatenate([x, [1.0]])
    hidden = _sigmoid(net.hidden_weights @ xa)
    ha = np.concatenate([hidden, [1.0]])
    y = _sigmoid(net.output_weights @ ha)
    delta_out = 2.0 * (y - target) * y * (1.0 - y)
    grad_out = np.outer(delta_out, ha)
    delta_hidden = (net.output_weights[:, :-1].T @ delta_out) * hidden * (1.0 - hidden)
    grad_hidden = np.outer(delta_hidden, xa)
    return grad_hidden, grad_out


def _validate_patterns(
    net: MlpNetwork, inputs: np.ndarray, targets: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    t = net.topology
    if inputs.ndim != 2 or inputs.shape[1] != t.n_inputs:
        raise DimensionMismatchError(
            f"inputs shape {inputs.shape} != (n, {t.n_inputs})"
        )
    if targets.shape != (inputs.shape[0], t.n_outputs):
        raise DimensionMismatchError(
            f"targets shape {targets.shape} != ({inputs.shape[0]}, {t.n_outputs})"
        )
    one = np.isclose(targets, 1.0)
    zero = np.isclose(targets, 0.0)
    if not np.all(one | zero) or np.any(one.sum(axis=1) != 1):
        raise NonOneHotTargetError("every target must be one-hot (a single 1)")
    return inputs, targets


def train(
    net: MlpNetwork,
    inputs: np.ndarray,
    targets: np.ndarray,
    cfg: TrainConfig,
) -> tuple[MlpNetwork, LearningCurve]:
    """Per-pattern gradient descent in fixed presentation order.

    The max bit error is evaluated after each epoch; training stops at
    ``max_epochs`` or as soon as it reaches ``target_max_bit_error``.
    """
    inputs, targets = _validate_patterns(net, inputs, targets)
    hw = net.hidden_weights.copy()
    ow = net.output_weights.copy()
    n_hidden = net.topology.n_hidden
    xa = np.concatenate([inputs, np.ones((inputs.shape[0], 1))], axis=1)
    lr = cfg.step_size

    curve: list[float] = []
    for _ in range(cfg.max_epochs):
        for i in range(xa.shape[0]):
            xi = xa[i]
            hidden = _sigmoid(hw @ xi)
            ha = np.concatenate([hidden, [1.0]])
            y = _sigmoid(ow @ ha)
            delta_out = 2.0 * (y - targets[i]) * y * (1.0 - y)
            delta_hidden = (ow[:, :n_hidden].T @ delta_out) * hidden * (1.0 - hidden)
            ow -= lr * np.outer(delta_out, ha)
            hw -= lr * np.outer(delta_hidden, xi)
        outputs = _forward_batch(hw, ow, xa)
        mbe = float(np.abs(targets - outputs).max())
        curve.append(mbe)
        if cfg.target_max_bit_error is not None and mbe <= cfg.target_max_bit_error:
            break

    outputs = _forward_batch(hw, ow, xa)
    accuracy = float(
        np.mean(outputs.argmax(axis=1) == targets.argmax(axis=1))
    )
    trained = MlpNetwork(net.topology, hw, ow, net.rng_seed)
    return trained, LearningCurve(np.array(curve), accuracy)


def classify(net: MlpNetwork, x: np.ndarray) -> int:
    """Index of the highest output; ties break toward the lowest index."""
    return int(np.argmax(forward(net, x)))


def average_curves(curves: list[LearningCurve]) -> LearningCurve:
    """Element-wise mean of learning curves; shorter curves are padded with
    their final value so early-stopped runs keep contributing."""
    if not curves:
        raise LengthMismatchError("need at least one curve")
    longest = max(len(c.max_bit_error) for c in curves)
    padded = np.stack([
        np.concatenate([
            c.max_bit_error,
            np.full(longest - len(c.max_bit_error), c.max_bit_error[-1]),
        ])
        for c in curves
    ])
    accuracy = float(np.mean([c.final_accuracy for c in curves]))
    return LearningCurve(padded.mean(axis=0), accuracy)


def train_repeated(
    topology: MlpTopology,
    inputs: np.ndarray,
    targets: np.ndarray,
    cfg: TrainConfig,
    seeds: list[int],
) -> LearningCurve:
    """Average the learning curves of one fresh run per seed, damping the
    effect of the initial random weights."""
    if len(seeds) != cfg.n_repeats:
        raise LengthMismatchError(
            f"{len(seeds)} seeds given for n_repeats={cfg.n_repeats}"
        )
    curves = []
    for seed in seeds:
        _, curve = train(init_network(topology, seed), inputs, targets, cfg)
        curves.append(curve)
    return average_curves(curves)


# --- on-disk formats -------------------------------------------------------


def save_network(net: MlpNetwork, path: str | Path) -> None:
    payload = {
        "format_version": NETWORK_FORMAT_VERSION,
        "topology": {
            "n_inputs": net.topology.n_inputs,
            "n_hidden": net.topology.n_hidden,
            "n_outputs": net.topology.n_outputs,
        },
        "hidden_weights": net.hidden_weights.ravel().tolist(),
        "output_weights": net.output_weights.ravel().tolist(),
        "rng_seed": net.rng_seed,
    }
    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True, indent=1)
        f.write("\n")


def load_network(path: str | Path) -> MlpNetwork:
    with open(path) as f:
        payload = json.load(f)
    if payload.get("format_version") != NETWORK_FORMAT_VERSION:
        raise FileFormatError(
            f"{path}: unsupported network format {payload.get('format_version')!r}"
        )
    try:
        t = MlpTopology(
            int(payload["topology"]["n_inputs"]),
            int(payload["topology"]["n_hidden"]),
            int(payload["topology"]["n_outputs"]),
        )
        hw = np.asarray(payload["hidden_weights"], dtype=float).reshape(
            t.n_hidden, t.n_inputs + 1
        )
        ow = np.asarray(payload["output_weights"], dtype=float).reshape(
            t.n_outputs, t.n_hidden + 1
        )
        return MlpNetwork(t, hw, ow, int(payload["rng_seed"]))
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: malformed network JSON ({exc})") from exc


def save_curve_csv(curve: LearningCurve, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "max_bit_error"])
        for epoch, value in enumerate(curve.max_bit_error, start=1):
            writer.writerow([epoch, repr(float(value))])


def load_curve_csv(path: str | Path) -> np.ndarray:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["epoch", "max_bit_error"]:
            raise FileFormatError(f"{path}: expected header 'epoch,max_bit_error'")
        return np.array([float(row[1]) for row in reader if row])
