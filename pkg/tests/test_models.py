import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mentalstate import models
from mentalstate.errors import FormatError, ParameterError, VersionError
from mentalstate.features import N_FEATURES
from mentalstate.models.baseline import RandomModel
from mentalstate.models.base import canonical_kind, softmax
from mentalstate.synthetic import make_blobs
from conftest import QUICK_CONFIGS

PROBABILISTIC = ("dnn", "cnn", "xgb")


def inputs_for(model, n, seed=0):
    rng = np.random.default_rng(seed)
    shape = (n, model.window_width, N_FEATURES) if model.input_mode == "window" else (n, N_FEATURES)
    return 3 * rng.standard_normal(shape)


@pytest.mark.parametrize("kind", models.KINDS)
def test_training_accuracy_on_blobs(kind, quick_models, blobs, blob_windows):
    X, y = blob_windows if kind == "cnn" else blobs
    acc = np.mean(quick_models[kind].predict_labels(X) == y)
    if kind == "random":
        assert 0.2 < acc < 0.5
    else:
        assert acc >= 0.99


@pytest.mark.parametrize("kind", ["svm", "dnn", "xgb"])
def test_default_configs_fit_300_blobs(kind, blobs):
    X, y = blobs
    model = models.train(kind, blobs)
    assert np.mean(model.predict_labels(X) == y) >= 0.99


@pytest.mark.parametrize("kind", PROBABILISTIC)
def test_scores_are_a_simplex(kind, quick_models):
    model = quick_models[kind]

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31), scale=st.floats(1e-3, 1e3))
    def check(seed, scale):
        s = model.predict_scores(scale * inputs_for(model, 5, seed))
        assert np.all(s >= 0)
        np.testing.assert_allclose(s.sum(axis=1), 1.0, atol=1e-9)

    check()


@settings(max_examples=100)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(2, 6)), elements=st.floats(-700, 700)))
def test_softmax_simplex(z):
    p = softmax(z)
    assert np.all(p >= 0) and np.all(np.isfinite(p))
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("kind", models.KINDS)
def test_label_is_argmax_and_scale_invariant(kind, quick_models):
    model = quick_models[kind]
    X = inputs_for(model, 40)
    scores = model.predict_scores(X)
    labels = model.predict_labels(X)
    assert np.array_equal(labels, np.argmax(scores, axis=1))
    for c in (1e-6, 0.5, 7.0, 1e6):
        assert np.array_equal(np.argmax(c * scores, axis=1), labels)


@pytest.mark.parametrize("kind", models.KINDS)
def test_seed_determinism(kind, blobs, blob_windows):
    data = blob_windows if kind == "cnn" else blobs
    cfg = QUICK_CONFIGS[kind]
    a, b = models.train(kind, data, cfg), models.train(kind, data, cfg)
    assert models.dumps(a) == models.dumps(b)


def test_different_seed_changes_network(blobs):
    a = models.train("dnn", blobs, models.default_config("dnn", hidden=(8, 8), epochs=2, seed=1))
    b = models.train("dnn", blobs, models.default_config("dnn", hidden=(8, 8), epochs=2, seed=2))
    assert not np.array_equal(a.params["W0"], b.params["W0"])


@pytest.mark.parametrize("kind", models.KINDS)
def test_save_load_roundtrip(kind, quick_models, tmp_path):
    model = quick_models[kind]
    path = tmp_path / f"{kind}.model"
    models.save(model, path)
    back = models.load(path)
    assert back.kind == kind and back.input_mode == model.input_mode
    X = inputs_for(model, 100, seed=5)
    assert model.predict_scores(X).tobytes() == back.predict_scores(X).tobytes()
    np.testing.assert_array_equal(back.normalizer.mean, model.normalizer.mean)
    assert models.dumps(back) == path.read_bytes()


@pytest.mark.parametrize("kind", models.KINDS)
def test_single_row_equals_batch_row(kind, quick_models):
    model = quick_models[kind]
    X = inputs_for(model, 37, seed=9)
    batch = model.predict_scores(X)
    for i in (0, 17, 36):
        assert model.predict_scores(X[i]).tobytes() == batch[i : i + 1].tobytes()


class TestFileErrors:
    @pytest.fixture
    def blob(self, quick_models):
        return models.dumps(quick_models["xgb"])

    def test_bad_magic(self, blob):
        with pytest.raises(FormatError, match="magic"):
            models.loads(b"X" + blob[1:])

    def test_future_version(self, quick_models):
        data = models.dumps(quick_models["svm"], version=models.FORMAT_VERSION + 1)
        with pytest.raises(VersionError) as err:
            models.loads(data)
        msg = str(err.value)
        assert str(models.FORMAT_VERSION + 1) in msg and str(models.FORMAT_VERSION) in msg
        assert isinstance(err.value, FormatError)

    @pytest.mark.parametrize("cut", [1, 4, 100, 0.5])
    def test_truncated(self, blob, cut):
        n = int(len(blob) * cut) if isinstance(cut, float) else len(blob) - cut
        with pytest.raises(FormatError):
            models.loads(blob[:n])

    def test_flipped_byte(self, blob):
        damaged = bytearray(blob)
        damaged[len(blob) // 2] ^= 0xFF
        with pytest.raises(FormatError):
            models.loads(bytes(damaged))


@pytest.mark.parametrize("kind", ["svm", "dnn", "xgb", "random"])
def test_windows_rejected_by_frame_models(kind, blob_windows):
    with pytest.raises(ParameterError, match="frame"):
        models.train(kind, blob_windows)


@pytest.mark.parametrize("kind", models.KINDS)
def test_wrong_input_dimension(kind, quick_models):
    model = quick_models[kind]
    with pytest.raises(ParameterError):
        model.predict_scores(np.zeros((2, 10)))


def test_unknown_kind():
    with pytest.raises(ParameterError):
        canonical_kind("forest")
    assert canonical_kind("MLP") == "dnn" and canonical_kind("xgboost") == "xgb"


def test_empty_training_data():
    with pytest.raises(ParameterError):
        models.train("svm", (np.zeros((0, 11)), np.zeros(0)))


class TestRandomBaseline:
    def test_frequencies(self):
        X = np.random.default_rng(0).standard_normal((100_000, 11))
        labels = RandomModel(seed=42).predict_labels(X)
        freq = np.bincount(labels, minlength=3) / len(labels)
        np.testing.assert_allclose(freq, 1 / 3, atol=0.01)

    def test_training_is_a_noop(self, blobs):
        model = models.train("random", blobs, models.default_config("random", seed=9))
        assert model.get_state() == ({"seed": 9, "classes": [0, 1, 2]}, {})

    def test_seeds_differ(self):
        X = np.random.default_rng(0).standard_normal((200, 11))
        a, b = RandomModel(1).predict_labels(X), RandomModel(2).predict_labels(X)
        assert not np.array_equal(a, b)
        assert np.array_equal(a, RandomModel(1).predict_labels(X[::-1])[::-1])


def test_concurrent_prediction(quick_models):
    model = quick_models["dnn"]
    X = inputs_for(model, 64)
    expected = model.predict_scores(X)
    results = [None] * 8

    def work(i):
        results[i] = model.predict_scores(X)

    threads = [threading.Thread(target=work, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(r.tobytes() == expected.tobytes() for r in results)


def test_config_validation():
    with pytest.raises(ParameterError):
        models.train("dnn", make_blobs(30), models.default_config("dnn", epochs=0))
    with pytest.raises(ParameterError):
        models.default_config("svm", C=-1.0).validate()
    with pytest.raises(ParameterError):
        models.default_config("xgb", depth=3)
    assert models.coerce_overrides("xgb", {"xgb.n_rounds": "5", "dnn.epochs": "3", "seed": "7"}) == {"n_rounds": 5, "seed": 7}
