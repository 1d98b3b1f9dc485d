"""Dataset ingestion (libsvm sparse text), synthetic generators, and the
plain-text model dumps used by the command line."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .core import Dataset, LinearClassifier
from .kernel import KernelClassifier, KernelSpec

__all__ = [
    "LoadResult",
    "load_dataset",
    "save_dataset",
    "gaussian_blobs",
    "replicated_with_noise",
    "generate_synthetic",
    "save_model",
    "load_model",
    "derived_rng",
]


def derived_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Named substream of the master seed; all package randomness flows
    through these, never from ambient entropy."""
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key)))


@dataclass(frozen=True, eq=False)
class LoadResult:
    dataset: Dataset
    zero_one_labels: bool  # labels were {0, 1} and 0 was mapped to -1


class DatasetFormatError(ValueError):
    pass


def load_dataset(path, dim: Optional[int] = None) -> LoadResult:
    """Parse libsvm sparse text: `label idx:val idx:val ...` per line with
    1-based indices; missing indices are zeros and the dimension is the
    largest index seen (or the explicit `dim`).  Labels must be {-1, +1}
    or {0, 1}; in the latter case 0 maps to -1 and the result is flagged.
    """
    rows = []
    max_index = 0
    saw_zero = False
    saw_minus = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            try:
                label = float(tokens[0])
            except ValueError:
                raise DatasetFormatError(f"line {lineno}: bad label field {tokens[0]!r}") from None
            if label not in (-1.0, 0.0, 1.0):
                raise DatasetFormatError(f"line {lineno}: invalid label {tokens[0]!r}")
            saw_zero = saw_zero or label == 0.0
            saw_minus = saw_minus or label == -1.0
            entries = {}
            for tok in tokens[1:]:
                idx_str, _, val_str = tok.partition(":")
                if not val_str:
                    raise DatasetFormatError(f"line {lineno}: malformed feature {tok!r}")
                try:
                    idx = int(idx_str)
                    val = float(val_str)
                except ValueError:
                    raise DatasetFormatError(f"line {lineno}: malformed feature {tok!r}") from None
                if idx < 1:
                    raise DatasetFormatError(f"line {lineno}: indices are 1-based, got {idx}")
                if idx in entries:
                    raise DatasetFormatError(f"line {lineno}: duplicate index {idx}")
                if not math.isfinite(val):
                    raise DatasetFormatError(f"line {lineno}: non-finite value {val_str!r}")
                entries[idx] = val
                max_index = max(max_index, idx)
            rows.append((label, entries))
    if not rows:
        raise DatasetFormatError(f"{path}: no samples")
    if saw_zero and saw_minus:
        raise DatasetFormatError(f"{path}: labels mix the 0/1 and -1/+1 schemes")
    n = dim if dim is not None else max_index
    if n < max_index:
        raise DatasetFormatError(f"{path}: explicit dim {dim} below max index {max_index}")
    if n < 1:
        raise DatasetFormatError(f"{path}: no feature indices and no explicit dim")
    X = np.zeros((len(rows), n))
    y = np.empty(len(rows), dtype=int)
    for i, (label, entries) in enumerate(rows):
        y[i] = -1 if label <= 0.0 else 1
        for idx, val in entries.items():
            X[i, idx - 1] = val
    return LoadResult(dataset=Dataset.from_arrays(X, y), zero_one_labels=saw_zero)


def save_dataset(ds: Dataset, path) -> None:
    """Write libsvm sparse text with shortest-round-trip float formatting,
    so save-then-load reproduces the dataset exactly (element-wise)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for x, label in zip(ds.X, ds.y):
            parts = [f"{int(label):+d}"]
            for j, v in enumerate(x):
                if v != 0.0:
                    parts.append(f"{j + 1}:{float(v)!r}")
            fh.write(" ".join(parts) + "\n")


def gaussian_blobs(m: int, seed: Union[int, np.random.Generator], dim: int = 2,
                   separation: float = 2.0, scale: float = 1.0) -> Dataset:
    """Two balanced gaussian classes with means +-separation/2 along the
    first axis.  Equal means (separation 0) make any classifier a coin
    flip on fresh data."""
    if m < 2:
        raise ValueError("need at least 2 samples")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n_pos = m // 2
    y = np.concatenate([np.ones(n_pos, dtype=int), -np.ones(m - n_pos, dtype=int)])
    centers = np.zeros((m, dim))
    centers[:, 0] = y * separation / 2.0
    X = centers + scale * rng.standard_normal((m, dim))
    return Dataset.from_arrays(X, y)


def replicated_with_noise(base: Dataset, noise_scale: float,
                          seed: Union[int, np.random.Generator]) -> Tuple[Dataset, Dataset]:
    """A base set plus a disturbed copy (same labels, jittered features),
    the raw material for designing a regularizer from observed variation."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noise = noise_scale * rng.standard_normal(base.X.shape)
    return base, Dataset.from_arrays(base.X + noise, base.y)


def generate_synthetic(kind: str, params: dict, seed: int):
    """Dispatch for the CLI: `gaussian-blobs` returns one dataset,
    `replicated-with-noise` a (base, disturbed copy) pair."""
    rng = np.random.default_rng(seed)
    params = dict(params)
    if kind == "gaussian-blobs":
        return gaussian_blobs(
            m=int(params.pop("m")),
            seed=rng,
            dim=int(params.pop("dim", 2)),
            separation=float(params.pop("separation", 2.0)),
            scale=float(params.pop("scale", 1.0)),
        )
    if kind == "replicated-with-noise":
        base = gaussian_blobs(
            m=int(params.pop("m")),
            seed=rng,
            dim=int(params.pop("dim", 2)),
            separation=float(params.pop("separation", 2.0)),
            scale=float(params.pop("scale", 1.0)),
        )
        return replicated_with_noise(base, float(params.pop("noise_scale", 0.1)), rng)
    raise ValueError(f"unknown synthetic kind {kind!r}")


def save_model(path, model) -> None:
    """Plain-text dump of a linear (w, b) or kernel (alphas, b) model."""
    if isinstance(model, LinearClassifier):
        payload = {"kind": "linear", "w": model.w.tolist(), "b": model.b}
    elif isinstance(model, KernelClassifier):
        payload = {
            "kind": "kernel",
            "alphas": model.alphas.tolist(),
            "b": model.offset,
            "kernel": {
                "kind": model.spec.kind,
                "degree": model.spec.degree,
                "gamma": model.spec.gamma,
            },
            "anchors_X": model.anchors.X.tolist(),
            "anchors_y": model.anchors.y.tolist(),
        }
    else:
        raise TypeError(f"cannot dump model of type {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("kind") == "linear":
        return LinearClassifier(np.asarray(payload["w"], dtype=float), float(payload["b"]))
    if payload.get("kind") == "kernel":
        spec = KernelSpec(
            payload["kernel"]["kind"],
            degree=int(payload["kernel"]["degree"]),
            gamma=float(payload["kernel"]["gamma"]),
        )
        anchors = Dataset.from_arrays(
            np.asarray(payload["anchors_X"], dtype=float),
            np.asarray(payload["anchors_y"], dtype=int),
        )
        return KernelClassifier(
            alphas=np.asarray(payload["alphas"], dtype=float),
            offset=float(payload["b"]),
            anchors=anchors,
            spec=spec,
        )
    raise ValueError(f"{path}: unknown model kind {payload.get('kind')!r}")
