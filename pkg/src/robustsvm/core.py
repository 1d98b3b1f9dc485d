"""Core data types: labeled samples, datasets, norms with exact duals,
linear classifiers and hinge loss.

Everything here is immutable after construction and all operations are
pure functions, so values can be shared freely across threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "LabeledSample",
    "Dataset",
    "NormSpec",
    "LinearClassifier",
    "predict",
    "decision_values",
    "signed_margins",
    "hinge_loss",
    "empirical_hinge",
    "norm_value",
    "dual_norm",
    "dual",
    "classification_error",
]


def _vector(x, name: str = "x") -> np.ndarray:
    v = np.array(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must have finite entries")
    v.flags.writeable = False
    return v


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """A feature vector x with a binary label y in {-1, +1}."""

    x: np.ndarray
    y: int

    def __post_init__(self):
        object.__setattr__(self, "x", _vector(self.x))
        if self.y not in (-1, 1):
            raise ValueError(f"label must be -1 or +1, got {self.y!r}")
        object.__setattr__(self, "y", int(self.y))

    @property
    def dim(self) -> int:
        return self.x.shape[0]


class Dataset:
    """Ordered list of same-dimension labeled samples, stored densely.

    The feature matrix ``X`` has shape (m, n) and labels ``y`` shape (m,)
    with values in {-1, +1}; both arrays are read-only.
    """

    def __init__(self, samples: Iterable[LabeledSample]):
        samples = tuple(samples)
        if not samples:
            raise ValueError("dataset needs at least one sample")
        dims = {s.dim for s in samples}
        if len(dims) != 1:
            raise ValueError(f"samples have mixed dimensions: {sorted(dims)}")
        X = np.vstack([s.x for s in samples])
        y = np.array([s.y for s in samples], dtype=int)
        X.flags.writeable = False
        y.flags.writeable = False
        self._X = X
        self._y = y
        self._samples = samples

    @classmethod
    def from_arrays(cls, X, y) -> "Dataset":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError("y length must match number of rows of X")
        return cls(LabeledSample(row, int(lbl)) for row, lbl in zip(X, y))

    @property
    def X(self) -> np.ndarray:
        return self._X

    @property
    def y(self) -> np.ndarray:
        return self._y

    @property
    def samples(self) -> tuple:
        return self._samples

    @property
    def dim(self) -> int:
        return self._X.shape[1]

    def __len__(self) -> int:
        return self._X.shape[0]

    def __iter__(self):
        return iter(self._samples)


class NormSpec:
    """One of the supported vector norms: L1, L2, Linf, or the ellipsoidal
    norm whose unit ball is {x : x' inv(Sigma) x <= 1} for a symmetric
    positive-definite Sigma.

    For the ellipsoidal kind, Sigma's Cholesky factor is computed once at
    construction and construction fails fast on non-PD input.
    """

    L1 = "l1"
    L2 = "l2"
    LINF = "linf"
    ELLIPSOIDAL = "ellipsoidal"

    _SIMPLE = (L1, L2, LINF)

    def __init__(self, kind: str, sigma=None):
        if kind not in (*self._SIMPLE, self.ELLIPSOIDAL):
            raise ValueError(f"unknown norm kind {kind!r}")
        self.kind = kind
        self.sigma = None
        self._chol = None
        self._chol_inv = None
        self._sigma_inv = None
        if kind == self.ELLIPSOIDAL:
            if sigma is None:
                raise ValueError("ellipsoidal norm requires a shape matrix")
            S = np.array(sigma, dtype=float)
            if S.ndim != 2 or S.shape[0] != S.shape[1]:
                raise ValueError("sigma must be a square matrix")
            if not np.all(np.isfinite(S)):
                raise ValueError("sigma must have finite entries")
            if not np.allclose(S, S.T, rtol=1e-10, atol=1e-12):
                raise ValueError("sigma must be symmetric")
            try:
                L = np.linalg.cholesky(S)
            except np.linalg.LinAlgError:
                raise ValueError("sigma must be positive definite") from None
            S.flags.writeable = False
            self.sigma = S
            self._chol = L
            self._chol_inv = np.linalg.inv(L)
            inv = self._chol_inv.T @ self._chol_inv
            self._sigma_inv = (inv + inv.T) / 2.0
        elif sigma is not None:
            raise ValueError(f"{kind} norm takes no shape matrix")

    @classmethod
    def l1(cls) -> "NormSpec":
        return cls(cls.L1)

    @classmethod
    def l2(cls) -> "NormSpec":
        return cls(cls.L2)

    @classmethod
    def linf(cls) -> "NormSpec":
        return cls(cls.LINF)

    @classmethod
    def ellipsoidal(cls, sigma) -> "NormSpec":
        return cls(cls.ELLIPSOIDAL, sigma)

    @property
    def dim(self):
        """Fixed dimension for ellipsoidal norms, None otherwise."""
        return None if self.sigma is None else self.sigma.shape[0]

    @property
    def sigma_inv(self) -> np.ndarray:
        if self._sigma_inv is None:
            raise ValueError("not an ellipsoidal norm")
        return self._sigma_inv

    def __repr__(self):
        if self.kind == self.ELLIPSOIDAL:
            return f"NormSpec.ellipsoidal(dim={self.sigma.shape[0]})"
        return f"NormSpec({self.kind!r})"


def norm_value(norm: NormSpec, x) -> float:
    """Evaluate the norm; `x` may also be a batch with vectors on the last axis."""
    v = np.asarray(x, dtype=float)
    if norm.kind == NormSpec.L1:
        out = np.abs(v).sum(axis=-1)
    elif norm.kind == NormSpec.L2:
        out = np.sqrt((v * v).sum(axis=-1))
    elif norm.kind == NormSpec.LINF:
        out = np.abs(v).max(axis=-1)
    else:
        if v.shape[-1] != norm.sigma.shape[0]:
            raise ValueError("vector dimension does not match sigma")
        u = v @ norm._chol_inv.T  # rows become inv(L) x
        out = np.sqrt((u * u).sum(axis=-1))
    return float(out) if out.ndim == 0 else out


def dual(norm: NormSpec) -> NormSpec:
    """The dual norm's spec: L1 <-> Linf, L2 self-dual,
    ellipsoidal(Sigma) <-> ellipsoidal(inv(Sigma))."""
    if norm.kind == NormSpec.L1:
        return NormSpec.linf()
    if norm.kind == NormSpec.LINF:
        return NormSpec.l1()
    if norm.kind == NormSpec.L2:
        return NormSpec.l2()
    return NormSpec.ellipsoidal(norm.sigma_inv)


def dual_norm(norm: NormSpec, z) -> float:
    """sup{z.x : ||x|| <= 1}, via closed forms (never numeric maximization).

    L2 is self dual, L1 and Linf swap, and for the ellipsoidal norm with
    shape matrix Sigma the dual value is sqrt(z' Sigma z).
    """
    v = np.asarray(z, dtype=float)
    if norm.kind == NormSpec.L1:
        out = np.abs(v).max(axis=-1)
    elif norm.kind == NormSpec.LINF:
        out = np.abs(v).sum(axis=-1)
    elif norm.kind == NormSpec.L2:
        out = np.sqrt((v * v).sum(axis=-1))
    else:
        if v.shape[-1] != norm.sigma.shape[0]:
            raise ValueError("vector dimension does not match sigma")
        u = v @ norm._chol  # rows become L' z, |L'z|_2 = sqrt(z' Sigma z)
        out = np.sqrt((u * u).sum(axis=-1))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class LinearClassifier:
    """sgn(<w, x> + b) with the tie at exactly 0 predicting +1."""

    w: np.ndarray
    b: float

    def __post_init__(self):
        object.__setattr__(self, "w", _vector(self.w, "w"))
        b = float(self.b)
        if not np.isfinite(b):
            raise ValueError("b must be finite")
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.w.shape[0]


def _check_dim(clf: LinearClassifier, n: int):
    if clf.dim != n:
        raise ValueError(f"classifier dimension {clf.dim} != data dimension {n}")


def decision_values(clf: LinearClassifier, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != clf.dim:
        raise ValueError(f"classifier dimension {clf.dim} != data dimension {X.shape[-1]}")
    return X @ clf.w + clf.b


def predict(clf: LinearClassifier, x) -> int:
    """+1 if <w,x>+b >= 0 else -1 (the tie at 0 predicts +1 by convention)."""
    v = float(decision_values(clf, _vector(x)))
    return 1 if v >= 0.0 else -1


def signed_margins(clf: LinearClassifier, ds: Dataset) -> np.ndarray:
    """y_i (<w, x_i> + b) for every sample."""
    _check_dim(clf, ds.dim)
    return ds.y * (ds.X @ clf.w + clf.b)


def hinge_loss(clf: LinearClassifier, s: LabeledSample) -> float:
    """max(1 - y (<w,x> + b), 0)."""
    _check_dim(clf, s.dim)
    return float(max(1.0 - s.y * (clf.w @ s.x + clf.b), 0.0))


def empirical_hinge(clf: LinearClassifier, ds: Dataset) -> float:
    """Total hinge loss over the dataset."""
    return float(np.maximum(1.0 - signed_margins(clf, ds), 0.0).sum())


def classification_error(clf: LinearClassifier, ds: Dataset) -> float:
    """Fraction of samples whose predicted sign differs from the label."""
    _check_dim(clf, ds.dim)
    scores = ds.X @ clf.w + clf.b
    pred = np.where(scores >= 0.0, 1, -1)
    return float(np.mean(pred != ds.y))
