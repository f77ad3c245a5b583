import numpy as np
import pytest

from spamstream.features import ABLATION_COMBOS, UserRecord
from spamstream.features.synthetic import generate_users
from spamstream.harness import (
    DEFAULT_CHECKPOINTS,
    Phase,
    RunAborted,
    checkpoint_position,
    emit_report,
    read_report,
    render_report,
    render_table,
    run_ablation,
    run_drift_experiment,
    run_prequential,
    run_single_dataset,
)
from spamstream.harness.report import ALIGNMENT_NOTE, results_from_rows
from spamstream.harness.runs import validate_checkpoints
from spamstream.learners import AlgorithmSpec, Learner
from spamstream.stream import (
    ExampleStream,
    LabeledExample,
    SyntheticSpec,
    flip_drift_specs,
    generate_synthetic,
)


def stream_of(rows, name="t"):
    dim = len(rows[0][0])
    ex = tuple(LabeledExample(f"{name}-{i}", {j: float(v) for j, v in enumerate(x) if v}, y, name)
               for i, (x, y) in enumerate(rows))
    return ExampleStream(ex, name, tuple(f"f{j}" for j in range(dim)))


@pytest.fixture(scope="module")
def drift_pair():
    sa, sb = flip_drift_specs(20, 1000, 1.5, 1.5, seed=3)
    return generate_synthetic(sa), generate_synthetic(sb)


# -- checkpoints ------------------------------------------------------------------

def test_checkpoint_arithmetic():
    assert checkpoint_position(50, 200) == 100
    assert checkpoint_position(5, 10) == 1
    assert checkpoint_position(33, 10) == 4
    assert checkpoint_position(100, 7) == 7
    assert len(DEFAULT_CHECKPOINTS) == 20 and DEFAULT_CHECKPOINTS[-1] == 100


@pytest.mark.parametrize("bad", [(), (10, 5), (0, 50), (50, 101), (5, 5)])
def test_checkpoint_validation(bad):
    with pytest.raises(ValueError):
        validate_checkpoints(bad)


# -- prequential -----------------------------------------------------------------------

def test_ten_examples_two_mistakes():
    # errs on the opening tie and on the lone negative-valued positive
    rows = [((1.0,), 1)] * 5 + [((-0.5,), 1)] + [((1.0,), 1)] * 4
    r = run_prequential(stream_of(rows), "perceptron", (50, 100))
    assert r.mistakes == 2 and r.final_error == pytest.approx(0.2)


def test_fifty_percent_counts_first_half():
    rows = [((1.0, 0.0), 1)] * 100 + [((0.0, 1.0), -1)] * 100
    r = run_prequential(stream_of(rows), "perceptron", (50, 100))
    half = r.checkpoints[0]
    assert half.seen == 100 and half.mistakes == 1
    flags = []
    run_prequential(stream_of(rows), "perceptron", (100,), on_step=lambda i, o: flags.append(o.was_mistake))
    assert sum(flags[:100]) == half.mistakes


def test_test_then_train_order_on_three_example_trace():
    rows = [((1.0, 0.0), 1), ((0.0, 1.0), -1), ((1.0, 1.0), 1)]
    s = stream_of(rows)
    shadow = Learner("arow", 2)
    seen = []

    def check(i, outcome):
        x, y = s.matrix()[0][i], int(s.labels()[i])
        expected, _ = shadow.predict(x)  # shadow has not yet seen example i
        seen.append((outcome.prediction, expected))
        shadow.update(x, y)

    run_prequential(s, "arow", (100,), on_step=check)
    assert len(seen) == 3 and all(a == b for a, b in seen)


def test_perceptron_error_within_bound_divided_by_length():
    s = generate_synthetic(SyntheticSpec(3, 200, (1.0, 0.5, -0.5), (-1.0, -0.5, 0.5), 0.3, seed=8))
    X, y = s.matrix()
    u = np.array([1.0, 0.5, -0.5]) / np.linalg.norm([1.0, 0.5, -0.5])
    gamma, radius = float(np.min(y * (X @ u))), float(np.max(np.linalg.norm(X, axis=1)))
    assert gamma > 0
    r = run_prequential(s, "perceptron")
    assert r.final_error <= (radius / gamma) ** 2 / len(s)


def test_counts_monotone_and_errors_bounded(drift_pair):
    for r in run_drift_experiment(*drift_pair, ["pa", "arow"], ["train_once"]):
        m = [c.mistakes for c in r.checkpoints]
        assert m == sorted(m)
        assert all(0.0 <= c.error <= 1.0 for c in r.checkpoints)
        assert all(c.error == c.mistakes / c.seen for c in r.checkpoints)


def test_learner_failure_aborts_with_index():
    rows = [((1.0, 0.0), 1), ((1.0, 0.0), -1), ((2.0, 0.0), 1)] * 40
    with pytest.raises(RunAborted) as info:
        run_prequential(stream_of(rows), AlgorithmSpec("cw", {"eta": 0.99}), (100,))
    assert info.value.index >= 0
    assert f"example {info.value.index}" in str(info.value)


def test_empty_stream_rejected():
    with pytest.raises(ValueError, match="empty stream"):
        run_prequential(ExampleStream((), "e", ("f",)), "pa")


# -- drift -------------------------------------------------------------------------------

def test_drift_phases_and_baseline_alignment(drift_pair):
    a, b = drift_pair
    online, base = run_drift_experiment(a, b, ["scw"], ["train_once"])
    assert [c.phase for c in online.checkpoints] == ["A"] * 20 + ["B"] * 20
    assert online.checkpoints[19].seen == len(a) and online.checkpoints[-1].seen == len(a) + len(b)
    # baseline rows sit on the same global positions, minus part 1
    skipped = base.skipped
    assert base.checkpoints[-1].seen == len(a) + len(b) - skipped
    assert skipped == len(a) // 20


def test_online_recovers_after_drift(drift_pair):
    (scw,) = run_drift_experiment(*drift_pair, ["scw"])
    series = scw.series("B")
    peak = int(np.argmax(series))
    tail = series[peak:]
    assert all(x >= y for x, y in zip(tail, tail[1:]))
    assert series[-1] < series[peak]


def test_train_once_degrades_after_drift(drift_pair):
    (once,) = run_drift_experiment(*drift_pair, [], ["train_once"])
    series = once.series("B")
    assert all(x < y for x, y in zip(series, series[1:]))


def test_no_drift_control(drift_pair):
    a, _ = drift_pair
    scw, retrain = run_drift_experiment(a, a, ["scw"], ["retrain_each_interval"])
    assert abs(scw.final_error - retrain.final_error) <= 0.05


def test_workers_do_not_change_results(drift_pair):
    serial = run_drift_experiment(*drift_pair, ["pa", "scw"], ["retrain_each_interval"])
    parallel = run_drift_experiment(*drift_pair, ["pa", "scw"], ["retrain_each_interval"], workers=2)
    assert serial == parallel


# -- ablation -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def users():
    return generate_users(100, seed=5)


def test_ablation_defaults(users):
    results = run_ablation(users)
    assert len(results) == 2 * 14
    assert [r.feature_set for r in results[::2]] == list(ABLATION_COMBOS)
    assert {r.algorithm for r in results} == {"scw", "alma"}


def test_ablation_is_deterministic(users):
    assert run_ablation(users, ["scw"], ["UN+UA"]) == run_ablation(users, ["scw"], ["UN+UA"])


def test_ablation_with_two_populations(users):
    other = generate_users(60, seed=9)
    (r,) = run_ablation(users, ["alma"], ["UP"], users_b=other)
    assert {c.phase for c in r.checkpoints} == {"A", "B"}


def test_constant_features_give_base_rate_error():
    same = dict(screen_name="same", account_age_hours=100.0, following_count=10,
                follower_count=10, bidirectional_count=5)
    pop = [UserRecord(user_id=str(i), label=1 if i < 30 else 0, **same) for i in range(100)]
    for r in run_ablation(pop, ["scw", "alma"], ["UP", "UN"]):
        assert r.final_error == pytest.approx(0.3)


# -- reports ---------------------------------------------------------------------------

def test_report_row_arithmetic_and_format(tmp_path):
    s = generate_synthetic(SyntheticSpec(2, 100, (1, 0), (0, 1), 0.8, seed=1))
    grid = tuple(range(5, 100, 5))
    results = run_single_dataset(s, ["scw", "alma"], checkpoints=grid)
    path = emit_report(results, tmp_path / "r.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 1 + 38
    assert lines[0] == "run_id,phase,checkpoint_pct,cumulative_error,mistakes,seen"
    assert all(len(line.split(",")[3].split(".")[1]) == 3 for line in lines[1:])
    again = emit_report(run_single_dataset(s, ["scw", "alma"], checkpoints=grid), tmp_path / "q.csv")
    assert again.read_bytes() == path.read_bytes()


def test_report_notes_only_with_baselines():
    s = generate_synthetic(SyntheticSpec(2, 60, (1, 0), (0, 1), 0.8, seed=1))
    online = run_single_dataset(s, ["pa"])
    assert not render_report(online).startswith("#")
    mixed = run_single_dataset(s, ["pa"], ["train_once"])
    text = render_report(mixed)
    assert f"# {ALIGNMENT_NOTE}" in text and "logistic regression" in text


def test_report_round_trip(tmp_path, drift_pair):
    results = run_drift_experiment(*drift_pair, ["pa"], ["retrain_each_interval"])
    path = emit_report(results, tmp_path / "r.csv")
    back = results_from_rows(read_report(path))
    assert render_report(back) == render_report(results)


def test_wide_table_shape(drift_pair):
    results = run_drift_experiment(*drift_pair, ["pa", "scw"], ["train_once"])
    lines = render_table(results).splitlines()
    body = [line for line in lines if not line.startswith("#")]
    assert len(body) == 1 + 40
    assert body[0].split(",")[2:] == [r.run_id for r in results]


def test_empty_report_rejected():
    with pytest.raises(ValueError):
        render_report([])


def test_phase_checkpoints_skip_unseen_baseline_positions():
    s = generate_synthetic(SyntheticSpec(2, 50, (1, 0), (0, 1), 0.5, seed=2))
    (base,) = run_single_dataset(s, [], ["train_once"], checkpoints=(2, 50, 100), n_parts=4)
    assert [c.pct for c in base.checkpoints] == [50, 100]
    assert Phase("all", 0, 100).length == 100
