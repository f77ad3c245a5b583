import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from spamstream.learners import (
    ALGORITHMS,
    FIRST_ORDER,
    SECOND_ORDER,
    AlgorithmSpec,
    CovarianceDegenerate,
    GaussianModelState,
    Learner,
    UnknownAlgorithm,
    hinge_loss,
    init_model,
    predict,
    probit,
    update,
)
from spamstream.learners import snapshot
from spamstream.learners.models import FULL_COVARIANCE_MAX_DIM


# -- construction ---------------------------------------------------------------

def test_init_perceptron_zero():
    m = init_model(AlgorithmSpec("perceptron"), 3)
    assert m.w.tolist() == [0.0, 0.0, 0.0] and m.step_count == 0 and m.mistake_count == 0


def test_init_arow_identity():
    m = init_model(AlgorithmSpec("arow"), 2)
    assert m.mu.tolist() == [0.0, 0.0] and np.array_equal(m.sigma, np.eye(2))


@pytest.mark.parametrize("d", [1, 4, 9])
def test_init_scw_predicts_tie_label(d):
    m = init_model(AlgorithmSpec("scw"), d)
    assert predict(m, np.ones(d)) == (-1, 0.0)


def test_init_errors():
    with pytest.raises(ValueError, match="invalid dimension"):
        init_model(AlgorithmSpec("pa"), 0)
    with pytest.raises(UnknownAlgorithm, match="unknown algorithm"):
        AlgorithmSpec("svm")


def test_hyperparameter_range_checks():
    with pytest.raises(ValueError):
        AlgorithmSpec("scw", {"eta": 0.4})
    with pytest.raises(ValueError):
        AlgorithmSpec("pa1", {"C": -1})
    with pytest.raises(ValueError):
        AlgorithmSpec("arow", {"gamma": 1})
    assert AlgorithmSpec("ogd", {"eta": 2.0})["eta"] == 2.0


def test_diagonal_mode_selection():
    assert init_model(AlgorithmSpec("arow"), FULL_COVARIANCE_MAX_DIM + 1).diagonal
    assert not init_model(AlgorithmSpec("arow"), FULL_COVARIANCE_MAX_DIM).diagonal
    assert init_model(AlgorithmSpec("arow", covariance="diag"), 3).diagonal


# -- prediction and loss ------------------------------------------------------------

def test_predict_tie_and_sign():
    m = init_model(AlgorithmSpec("perceptron"), 2)
    assert predict(m, {0: 3.0}) == (-1, 0.0)
    m.w = np.array([2.0, -1.0])
    assert predict(m, {0: 1.0, 1: 3.0}) == (-1, -1.0)


def test_predict_dimension_overflow():
    m = init_model(AlgorithmSpec("perceptron"), 2)
    with pytest.raises(ValueError, match="dimension overflow"):
        predict(m, {2: 1.0})


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.floats(0.01, 100))
def test_prediction_scale_invariance(x, c):
    m = init_model(AlgorithmSpec("perceptron"), 3)
    m.w = np.array([0.3, -1.2, 2.0])
    x = np.array(x)
    assert predict(m, x)[0] == predict(m, c * x)[0] or abs(m.w @ x) < 1e-12


def test_hinge_examples():
    assert hinge_loss(np.zeros(2), {0: 7.0}, 1, 1.0) == 1.0
    assert hinge_loss(np.array([2.0]), {0: 1.0}, 1, 1.0) == 0.0
    assert hinge_loss(np.array([0.5]), {0: 1.0}, -1, 1.0) == 1.5
    with pytest.raises(ValueError):
        hinge_loss(np.zeros(1), {0: 1.0}, 1, -0.1)


# -- closed forms ---------------------------------------------------------------------

def test_pa_example():
    m = init_model(AlgorithmSpec("pa"), 2)
    out = update(m, AlgorithmSpec("pa"), {0: 1.0}, 1)
    assert (out.loss, out.step_size) == (1.0, 1.0)
    assert m.w.tolist() == [1.0, 0.0]
    assert hinge_loss(m.w, {0: 1.0}, 1) == 0.0


def test_arow_example():
    spec = AlgorithmSpec("arow", {"r": 1.0})
    m = init_model(spec, 2)
    out = update(m, spec, {0: 1.0}, 1)
    assert out.step_size == 0.5
    assert m.mu.tolist() == [0.5, 0.0]
    assert np.array_equal(m.sigma, np.diag([0.5, 1.0]))


def test_pa1_and_pa2_steps():
    x = np.array([2.0, 0.0])
    for name, expected in (("pa1", min(0.1, 1 / 4)), ("pa2", 1 / (4 + 1 / (2 * 0.1)))):
        spec = AlgorithmSpec(name, {"C": 0.1})
        m = init_model(spec, 2)
        assert update(m, spec, x, 1).step_size == pytest.approx(expected, rel=1e-15)


def test_sop_matches_batch_regularized_least_squares_form():
    rng = np.random.default_rng(0)
    spec = AlgorithmSpec("sop", {"a": 2.0})
    m = init_model(spec, 3)
    A = np.eye(3) / 2.0
    b = np.zeros(3)
    for _ in range(40):
        x = rng.normal(size=3)
        y = 1 if rng.random() < 0.5 else -1
        # prediction with the current example folded into the correlation matrix
        aug = np.linalg.solve(A + np.outer(x, x), x) @ b
        out = update(m, spec, x, y)
        assert out.prediction == (1 if aug > 0 else -1)
        if out.was_mistake:
            A += np.outer(x, x)
            b += y * x
        np.testing.assert_allclose(m.mu, np.linalg.solve(A, b), atol=1e-9)
        np.testing.assert_allclose(m.sigma, np.linalg.inv(A), atol=1e-9)


def test_iellip_shrinks_along_x_and_moves_mean():
    spec = AlgorithmSpec("iellip")
    m = init_model(spec, 2)
    out = update(m, spec, {0: 1.0}, 1)
    assert out.model_changed and m.mu[0] > 0
    assert np.linalg.eigvalsh(m.sigma).min() > 0


def test_probit_against_reference():
    grid = np.concatenate([np.linspace(1e-10, 1e-3, 200), np.linspace(1e-3, 1 - 1e-3, 2000),
                           1 - np.linspace(1e-10, 1e-3, 200)])
    worst = max(abs(probit(float(p)) - norm.ppf(p)) for p in grid)
    assert worst < 1e-8
    with pytest.raises(ValueError):
        probit(1.0)


# -- passive behaviour -------------------------------------------------------------

def _confident_model(spec, x, y):
    m = init_model(spec, x.shape[0])
    w = 10.0 * y * x / float(x @ x)
    if spec.second_order:
        m.mu = w
    else:
        m.w = w
    return m


@pytest.mark.parametrize("name", ALGORITHMS)
def test_passive_when_margin_is_satisfied(name):
    spec = AlgorithmSpec(name)
    x = np.array([0.6, -0.8, 0.5])
    for y in (1, -1):
        m = _confident_model(spec, x, y)
        before = [a.copy() for a in ((m.mu, m.sigma) if spec.second_order else (m.w,))]
        out = update(m, spec, x, y)
        after = (m.mu, m.sigma) if spec.second_order else (m.w,)
        assert not out.model_changed and out.step_size == 0.0 and not out.was_mistake
        for a, b in zip(before, after):
            assert np.array_equal(a, b)


@pytest.mark.parametrize("name", ALGORITHMS)
def test_zero_vector_is_passive(name):
    spec = AlgorithmSpec(name)
    m = init_model(spec, 3)
    out = update(m, spec, np.zeros(3), 1)
    assert not out.model_changed and out.step_size == 0.0


@pytest.mark.parametrize("name", ALGORITHMS)
def test_changed_false_implies_zero_step(name):
    spec = AlgorithmSpec(name)
    rng = np.random.default_rng(4)
    m = init_model(spec, 4)
    for _ in range(200):
        x = rng.normal(size=4)
        out = update(m, spec, x, 1 if x[0] + 0.3 * x[1] > 0 else -1)
        assert out.model_changed or out.step_size == 0.0
        assert out.loss >= 0.0


# -- properties -------------------------------------------------------------------------

@given(st.integers(0, 2**32), st.integers(1, 8))
@settings(max_examples=100, deadline=None)
def test_pa_exactness(seed, d):
    rng = np.random.default_rng(seed)
    spec = AlgorithmSpec("pa")
    m = init_model(spec, d)
    m.w = rng.normal(size=d)
    x = rng.normal(size=d)
    y = 1 if rng.random() < 0.5 else -1
    if hinge_loss(m.w, x, y) <= 0:
        return
    update(m, spec, x, y)
    assert hinge_loss(m.w, x, y) <= 1e-9


@pytest.mark.parametrize("name", SECOND_ORDER)
def test_psd_on_realizable_stream(name):
    rng = np.random.default_rng(11)
    teacher = rng.normal(size=10)
    spec = AlgorithmSpec(name)
    m = init_model(spec, 10)
    for _ in range(1000):
        x = rng.normal(size=10)
        update(m, spec, x, 1 if x @ teacher > 0 else -1)
    s = m.sigma
    assert np.max(np.abs(s - s.T)) <= 1e-10
    assert np.linalg.eigvalsh(s).min() > 0


@pytest.mark.parametrize("name", SECOND_ORDER)
def test_degenerate_variance_raises_and_leaves_model(name):
    spec = AlgorithmSpec(name)
    m = GaussianModelState(np.zeros(2), np.eye(2) * 1e-14)
    mu, sigma = m.mu.copy(), m.sigma.copy()
    with pytest.raises(CovarianceDegenerate, match="covariance degenerate"):
        update(m, spec, np.array([1.0, 0.0]), 1)
    assert np.array_equal(m.mu, mu) and np.array_equal(m.sigma, sigma)


def test_alma_norm_bound():
    spec = AlgorithmSpec("alma")
    rng = np.random.default_rng(2)
    m = init_model(spec, 5)
    for _ in range(2000):
        x = rng.normal(size=5) * rng.uniform(0.1, 20)
        update(m, spec, x, 1 if rng.random() < 0.5 else -1)
        assert np.linalg.norm(m.w) <= 1 + 1e-12


def test_perceptron_scale_equivariance():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(300, 4))
    y = np.where(X @ np.array([1.0, -2.0, 0.5, 0.0]) + 0.3 * rng.normal(size=300) > 0, 1, -1)
    runs = []
    for c in (1.0, 7.5):
        learner = Learner("perceptron", 4)
        runs.append([learner.update(c * x, int(t)).prediction for x, t in zip(X, y)])
    assert runs[0] == runs[1]


@pytest.mark.parametrize("name", ALGORITHMS)
def test_determinism(name):
    rng = np.random.default_rng(8)
    X = rng.normal(size=(150, 3))
    y = np.where(X[:, 0] > 0, 1, -1)
    states = []
    for _ in range(2):
        learner = Learner(name, 3)
        for x, t in zip(X, y):
            learner.update(x, int(t))
        states.append(snapshot.dumps(learner.spec, learner.model))
    assert states[0] == states[1]


def test_diagonal_downdate_matches_full_on_first_step():
    x = np.array([1.0, 2.0, -1.0])
    full, diag = Learner("arow", 3), Learner(AlgorithmSpec("arow", covariance="diag"), 3)
    full.update(x, 1)
    diag.update(x, 1)
    np.testing.assert_allclose(diag.model.sigma, np.diag(full.model.sigma), rtol=1e-15)
    np.testing.assert_allclose(diag.model.mu, full.model.mu, rtol=1e-15)


# -- snapshots ------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["pa2", "alma", "scw", "narow"])
def test_snapshot_round_trip(tmp_path, name):
    rng = np.random.default_rng(3)
    learner = Learner(AlgorithmSpec(name), 4)
    for _ in range(50):
        x = rng.normal(size=4)
        learner.update(x, 1 if x.sum() > 0 else -1)
    path = tmp_path / "model.txt"
    snapshot.save(path, learner.spec, learner.model)
    spec, model = snapshot.load(path)
    assert spec == learner.spec
    assert snapshot.dumps(spec, model) == snapshot.dumps(learner.spec, learner.model)
    for attr in ("step_count", "mistake_count", "update_count"):
        assert getattr(model, attr) == getattr(learner.model, attr)
    x = rng.normal(size=4)
    assert update(model, spec, x, 1) == learner.update(x, 1)


def test_label_validation():
    with pytest.raises(ValueError):
        Learner("pa", 2).update(np.ones(2), 0)


def test_first_and_second_order_partition():
    assert len(FIRST_ORDER) == len(SECOND_ORDER) == 8
    assert set(FIRST_ORDER) | set(SECOND_ORDER) == set(ALGORITHMS)
    assert math.isclose(probit(0.75), norm.ppf(0.75), abs_tol=1e-9)
