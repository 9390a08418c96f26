import math

import pytest

import warmstop


def test_standardize_three_values():
    z = warmstop.standardize([1.0, 2.0, 3.0])
    assert z == pytest.approx([-math.sqrt(1.5), 0.0, math.sqrt(1.5)])


def test_changepoints_and_annotation():
    values = [10.0] * 60 + [1.0 + 0.001 * (i % 3) for i in range(240)]
    assert warmstop.changepoints(values) == [60]
    assert warmstop.annotate(values) == 61
    assert warmstop.annotate([1.0] * 300) == 1


def test_sampling_steps():
    assert warmstop.sampling_steps(3000, 1001) == (20, 39)


def test_statistics():
    assert warmstop.wee(120, 101, 1.0) == 20.0
    assert warmstop.a12([1, 2, 3, 5], [2, 3, 3, 4]) == 0.625
    assert warmstop.rank_biserial([3, 1, -2]) == pytest.approx(1 / 3)
    assert warmstop.wilcoxon(list(range(1, 11))) == pytest.approx(2 / 1024)
    with pytest.raises(warmstop.DataError):
        warmstop.wilcoxon([0.0, 0.0])
    assert warmstop.ratio_ci([[2.0] * 10], [[1.0] * 10], resamples=1000) == pytest.approx((2.0, 2.0))


def test_errors_are_value_errors():
    assert issubclass(warmstop.DataError, ValueError)
    assert issubclass(warmstop.ConfigError, ValueError)
    with pytest.raises(warmstop.ConfigError):
        warmstop.heuristic_stop([1.0] * 300, "median")


def test_train_predict_stop_roundtrip(tmp_path):
    corpus = warmstop.synthetic_corpus(count=6, st_min=150, st_max=250, seed=3)
    segments, labels = [], []
    for series in corpus:
        values, st = series["values"], series["st"]
        for start in range(0, 600, 10):
            segments.append(values[start:start + 100])
            labels.append("stable" if start + 1 >= st else "unstable")
    model = warmstop.train_rocket(segments, labels, num_kernels=100, seed=1)
    assert model.window == 100
    assert model.num_kernels == 100
    assert model.predict(corpus[0]["values"][700:800]) == "stable"

    path = tmp_path / "model.bin"
    model.save(path)
    loaded = warmstop.RocketModel.load(path)
    assert loaded == model
    window = corpus[1]["values"][:100]
    assert loaded.decision_score(window) == model.decision_score(window)

    result = warmstop.run_stopper(corpus[0]["values"], model)
    assert result["halt_reason"] in {"model_stable", "cap_reached"}
    assert len(result["measurements"]) == 100
    assert result["queries"] == result["warmup_iterations"] + 1


def test_heuristic_on_constant_series():
    result = warmstop.heuristic_stop([2.0] * 800, "cv")
    assert result["warmup_iterations"] == 104
    assert result["halt_reason"] == "model_stable"


def test_empty_training_set():
    with pytest.raises(warmstop.DataError, match="empty dataset"):
        warmstop.train_rocket([], [])
