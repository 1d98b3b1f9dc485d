"""Transform from robust min-max hinge problems to regularized problems.

For any sublinear aggregated uncertainty set, the worst-case total hinge
loss at a fixed classifier equals (when some margin is strictly negative)
the nominal hinge loss plus the atomic support function of w, so the
min-max problem collapses to a penalized problem that depends only on the
atomic set, not on the aggregation.  Slack variables are never
materialized: at any (w, b) the optimal slack is the hinge value itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Dataset, LinearClassifier, NormSpec, norm_value, signed_margins
from .uncertainty import AtomicSet, BoxSet, SublinearSet, support_function, validate_atomic

__all__ = [
    "Regularizer",
    "RegularizedProblem",
    "robustify",
    "robust_objective",
    "box_robust_objective",
    "conservatism_gap",
]


@dataclass(frozen=True, eq=False)
class Regularizer:
    """Base regularizer descriptor r(w, b): either identically zero or a
    scaled norm of w.  Covers every r used in this package."""

    coefficient: float = 0.0
    norm: Optional[NormSpec] = None

    @classmethod
    def zero(cls) -> "Regularizer":
        return cls(0.0, None)

    @classmethod
    def scaled_norm(cls, coefficient: float, norm: NormSpec) -> "Regularizer":
        if coefficient < 0:
            raise ValueError("regularizer coefficient must be nonnegative")
        return cls(float(coefficient), norm)

    def value(self, w, b: float) -> float:
        if self.norm is None or self.coefficient == 0.0:
            return 0.0
        return self.coefficient * norm_value(self.norm, w)


@dataclass(frozen=True, eq=False)
class RegularizedProblem:
    """Regularized equivalent of a robust problem: minimize
    base(w, b) + support(atomic, w) + total hinge over the dataset."""

    dataset: Dataset
    atomic: AtomicSet
    base: Regularizer

    def penalty(self, w) -> float:
        return support_function(self.atomic, w)


def robustify(ds: Dataset, s: SublinearSet, base: Optional[Regularizer] = None) -> RegularizedProblem:
    """Reduce the min-max problem over a sublinear aggregated set to its
    regularized equivalent.  The result is the same for every aggregation
    built on the same atomic set."""
    base = base or Regularizer.zero()
    report = validate_atomic(s.atomic, ds.dim, trials=32)
    if not report.passed:
        raise ValueError(f"invalid atomic set: {report.failures[0]}")
    return RegularizedProblem(dataset=ds, atomic=s.atomic, base=base)


def robust_objective(clf: LinearClassifier, p: RegularizedProblem) -> float:
    """base(w, b) + support(atomic, w) + total hinge at the given classifier."""
    hinges = np.maximum(1.0 - signed_margins(clf, p.dataset), 0.0).sum()
    return float(p.base.value(clf.w, clf.b) + p.penalty(clf.w) + hinges)


def box_robust_objective(clf: LinearClassifier, ds: Dataset, box: BoxSet) -> float:
    """Per-sample worst case under box uncertainty:
    sum_i max(1 - y_i(<w,x_i>+b) + support(a_i, w), 0).

    Exact because the box decouples samples and each atomic set is
    symmetric (the label sign drops out of the support term).
    """
    if len(box) != len(ds):
        raise ValueError(f"box set has {len(box)} atomic sets for {len(ds)} samples")
    args = 1.0 - signed_margins(clf, ds)
    sups = np.array([support_function(a, clf.w) for a in box.per_sample])
    return float(np.maximum(args + sups, 0.0).sum())


def conservatism_gap(clf: LinearClassifier, ds: Dataset, s: SublinearSet, box: BoxSet) -> float:
    """Box worst case minus the sublinear-aggregated objective (r = 0).

    Nonnegative whenever some sample is hinge-active at (w, b) (margin at
    most 1), which holds in particular on non-separable instances; for a
    classifier that over-separates every sample the box value can drop
    below the aggregated upper bound.
    """
    if len(box) != len(ds):
        raise ValueError("box set size must match the dataset")
    for a in box.per_sample:
        if not a.same_geometry(s.atomic):
            raise ValueError("box atomic sets must match the sublinear set's atomic set")
    problem = RegularizedProblem(dataset=ds, atomic=s.atomic, base=Regularizer.zero())
    return box_robust_objective(clf, ds, box) - robust_objective(clf, problem)
