import numpy as np
import pytest

from spamstream.baseline import BaselinePolicy, FitConfig, fit_batch, run_policy
from spamstream.stream import (
    ExampleStream,
    LabeledExample,
    SyntheticSpec,
    flip_drift_specs,
    generate_synthetic,
    split_into_parts,
)


def two_points():
    return [LabeledExample("p", {0: 1.0}, 1), LabeledExample("n", {0: -1.0}, -1)]


def test_separable_two_points():
    model = fit_batch(two_points(), reg=1e-4, dim=2)
    X = np.array([[1.0, 0.0], [-1.0, 0.0]])
    assert model.predict(X).tolist() == [1, -1]


def test_heavy_regularization_shrinks_weights():
    model = fit_batch(two_points(), reg=1e6, dim=2)
    assert np.linalg.norm(model.w) < 1e-6


def test_fit_is_deterministic():
    s = generate_synthetic(SyntheticSpec(3, 40, (1, 0, 0), (0, 1, 0), 0.8, seed=2))
    a, b = fit_batch(s), fit_batch(s)
    assert np.array_equal(a.w, b.w) and a.bias == b.bias


def test_single_class_is_flagged_not_rejected():
    model = fit_batch([LabeledExample(str(i), {0: float(i)}, 1) for i in range(4)])
    assert model.single_class
    assert np.all(model.predict(np.array([[0.0], [3.0]])) == 1)


def test_invalid_fit_arguments():
    with pytest.raises(ValueError):
        fit_batch(two_points(), reg=0.0)
    with pytest.raises(ValueError):
        fit_batch([], dim=1)


def parts_of(stream, n, seed=0):
    return split_into_parts(stream, n, seed).parts(stream)


def test_train_once_predicts_part_two_only():
    s = generate_synthetic(SyntheticSpec(2, 30, (1, 0), (0, 1), 0.5))
    parts = parts_of(s, 2)
    run = run_policy(parts, "train_once")
    assert len(run.predictions) == len(parts[1])
    assert run.n_fits == 1 and run.skipped == len(parts[0])


def test_retrain_fits_once_per_later_part():
    s = generate_synthetic(SyntheticSpec(2, 50, (1, 0), (0, 1), 0.5))
    parts = parts_of(s, 20)
    run = run_policy(parts, BaselinePolicy.RETRAIN_EACH_INTERVAL)
    assert run.n_fits == 19
    assert [m.trained_on for m in run.models] == [(k - 1, k) for k in range(1, 20)]
    assert len(run.predictions) == len(s) - len(parts[0])


def test_train_once_uses_one_model_for_all_parts():
    s = generate_synthetic(SyntheticSpec(2, 50, (1, 0), (0, 1), 0.5))
    run = run_policy(parts_of(s, 5), "train_once")
    assert len(run.models) == 1 and run.models[0].trained_on == (0, 1)


def test_fewer_than_two_parts_raise():
    s = generate_synthetic(SyntheticSpec(2, 5, (1, 0), (0, 1), 0.5))
    with pytest.raises(ValueError, match="at least 2 parts"):
        run_policy(parts_of(s, 1), "train_once")


def test_policy_aliases():
    assert BaselinePolicy.parse("RF-1") is BaselinePolicy.TRAIN_ONCE
    assert BaselinePolicy.parse("rf2") is BaselinePolicy.RETRAIN_EACH_INTERVAL
    with pytest.raises(ValueError):
        BaselinePolicy.parse("forest")


def test_flip_stream_train_once_worse_than_retrain_on_late_parts():
    spec_a, spec_b = flip_drift_specs(5, 200, 2.0, 1.0, seed=4)
    a, b = generate_synthetic(spec_a), generate_synthetic(spec_b)
    parts = parts_of(a, 10) + parts_of(b, 10)
    once = run_policy(parts, "train_once")
    again = run_policy(parts, "retrain_each_interval")
    late = slice(len(a) - len(parts[0]), None)
    err_once = np.mean(once.predictions[late] != once.labels[late])
    err_again = np.mean(again.predictions[late] != again.labels[late])
    assert err_once > 0.8 and err_again < 0.2


def test_zero_noise_stationary_stream_is_error_free():
    s = generate_synthetic(SyntheticSpec(2, 100, (1, 0), (-1, 0), 1e-12, seed=3))
    for policy in BaselinePolicy:
        run = run_policy(parts_of(s, 4), policy, FitConfig(reg=1e-6))
        assert np.all(run.predictions == run.labels)


def test_predictions_follow_part_order():
    ex = [LabeledExample(str(i), {0: 1.0 if i % 2 else -1.0}, 1 if i % 2 else -1) for i in range(8)]
    parts = [ExampleStream(tuple(ex[k:k + 2]), f"p{k}", ("f",)) for k in range(0, 8, 2)]
    run = run_policy(parts, "train_once")
    assert run.labels.tolist() == [ex.label for ex in ex[2:]]
