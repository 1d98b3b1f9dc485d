import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustsvm import (
    Dataset,
    LabeledSample,
    LinearClassifier,
    NormSpec,
    classification_error,
    dual,
    dual_norm,
    empirical_hinge,
    hinge_loss,
    norm_value,
    predict,
)


def test_predict_examples():
    assert predict(LinearClassifier([1.0, 0.0], 0.0), [2.0, 5.0]) == 1
    assert predict(LinearClassifier([0.0, 0.0], -1.0), [3.0, -7.0]) == -1
    # tie at exactly zero predicts +1 by convention
    assert predict(LinearClassifier([1.0, 1.0], -2.0), [1.0, 1.0]) == 1


def test_predict_dimension_mismatch():
    with pytest.raises(ValueError):
        predict(LinearClassifier([1.0, 0.0], 0.0), [1.0])


def test_hinge_examples():
    assert hinge_loss(LinearClassifier([1.0], 0.0), LabeledSample([1.0], 1)) == 0.0
    assert hinge_loss(LinearClassifier([1.0], 0.0), LabeledSample([1.0], -1)) == 2.0
    assert hinge_loss(LinearClassifier([0.0], 0.0), LabeledSample([3.0], 1)) == 1.0


def test_empirical_hinge_examples():
    ds = Dataset.from_arrays([[1.0], [1.0]], [1, -1])
    assert empirical_hinge(LinearClassifier([1.0], 0.0), ds) == 2.0
    wide = Dataset.from_arrays([[2.0], [-2.0]], [1, -1])
    assert empirical_hinge(LinearClassifier([1.0], 0.0), wide) == 0.0
    degenerate = Dataset.from_arrays([[0.0], [0.0]], [1, -1])
    assert empirical_hinge(LinearClassifier([0.0], 0.0), degenerate) == 2.0


def test_dual_norm_examples():
    assert dual_norm(NormSpec.l2(), [3.0, 4.0]) == pytest.approx(5.0)
    assert dual_norm(NormSpec.linf(), [1.0, -2.0, 3.0]) == pytest.approx(6.0)
    sigma = np.diag([4.0, 1.0])
    assert dual_norm(NormSpec.ellipsoidal(sigma), [1.0, 1.0]) == pytest.approx(np.sqrt(5.0))


def test_classification_error_examples():
    ds = Dataset.from_arrays([[-1.0], [1.0]], [-1, 1])
    clf = LinearClassifier([1.0], 0.0)
    assert classification_error(clf, ds) == 0.0
    flipped = Dataset.from_arrays([[-1.0], [1.0]], [1, -1])
    assert classification_error(clf, flipped) == 1.0
    pair = Dataset.from_arrays([[1.0], [1.0]], [1, -1])
    assert classification_error(clf, pair) == 0.5


def _norm_specs():
    return [
        NormSpec.l1(),
        NormSpec.l2(),
        NormSpec.linf(),
        NormSpec.ellipsoidal([[2.0, 0.3], [0.3, 1.0]]),
    ]


def test_dual_round_trip():
    rng = np.random.default_rng(0)
    for spec in _norm_specs():
        for _ in range(50):
            z = rng.standard_normal(2)
            assert dual_norm(dual(spec), z) == pytest.approx(norm_value(spec, z), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-100, 100), min_size=3, max_size=3),
    st.lists(st.floats(-100, 100), min_size=3, max_size=3),
    st.sampled_from(["l1", "l2", "linf"]),
)
def test_norm_axioms(xs, ys, kind):
    spec = NormSpec(kind)
    x = np.array(xs)
    y = np.array(ys)
    nx = norm_value(spec, x)
    assert nx >= 0.0
    assert (nx == 0.0) == (not np.any(x))
    assert norm_value(spec, 2.5 * x) == pytest.approx(2.5 * nx, rel=1e-12, abs=1e-12)
    assert norm_value(spec, x + y) <= nx + norm_value(spec, y) + 1e-9


def test_ellipsoidal_norm_axioms():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((3, 3))
    spec = NormSpec.ellipsoidal(A @ A.T + 3.0 * np.eye(3))
    for _ in range(100):
        x, y = rng.standard_normal(3), rng.standard_normal(3)
        lam = rng.uniform(0, 3)
        nx = norm_value(spec, x)
        assert nx >= 0
        assert norm_value(spec, lam * x) == pytest.approx(lam * nx, rel=1e-10, abs=1e-12)
        assert norm_value(spec, x + y) <= nx + norm_value(spec, y) + 1e-10


def test_hinge_dominates_zero_one_loss():
    rng = np.random.default_rng(1)
    for _ in range(50):
        m, n = int(rng.integers(1, 8)), int(rng.integers(1, 4))
        ds = Dataset.from_arrays(rng.standard_normal((m, n)), rng.choice([-1, 1], m))
        clf = LinearClassifier(rng.standard_normal(n), float(rng.standard_normal()))
        for s in ds:
            miss = 1.0 if predict(clf, s.x) != s.y else 0.0
            assert hinge_loss(clf, s) >= miss - 1e-12
        assert empirical_hinge(clf, ds) / m >= classification_error(clf, ds) - 1e-12


def test_hinge_convex_in_parameters():
    rng = np.random.default_rng(2)
    s = LabeledSample([0.7, -1.2], -1)
    for _ in range(100):
        p1 = (rng.standard_normal(2), float(rng.standard_normal()))
        p2 = (rng.standard_normal(2), float(rng.standard_normal()))
        lam = float(rng.random())
        mid = LinearClassifier(lam * p1[0] + (1 - lam) * p2[0], lam * p1[1] + (1 - lam) * p2[1])
        lhs = hinge_loss(mid, s)
        rhs = lam * hinge_loss(LinearClassifier(*p1), s) + (1 - lam) * hinge_loss(
            LinearClassifier(*p2), s
        )
        assert lhs <= rhs + 1e-12


def test_validation_errors():
    with pytest.raises(ValueError):
        LabeledSample([1.0], 2)
    with pytest.raises(ValueError):
        LabeledSample([np.nan], 1)
    with pytest.raises(ValueError):
        LinearClassifier([np.inf], 0.0)
    with pytest.raises(ValueError):
        Dataset([])
    with pytest.raises(ValueError):
        Dataset([LabeledSample([1.0], 1), LabeledSample([1.0, 2.0], -1)])
    with pytest.raises(ValueError):
        NormSpec.ellipsoidal([[1.0, 2.0], [2.0, 1.0]])  # indefinite
    with pytest.raises(ValueError):
        NormSpec.ellipsoidal([[1.0, 0.5], [0.4, 1.0]])  # asymmetric


def test_dataset_arrays_read_only():
    ds = Dataset.from_arrays([[1.0, 2.0]], [1])
    with pytest.raises(ValueError):
        ds.X[0, 0] = 3.0
    with pytest.raises(ValueError):
        ds.y[0] = -1
