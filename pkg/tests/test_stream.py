import json
import threading

import numpy as np
import pytest

from mentalstate import models
from mentalstate.dataset import LabeledDataset
from mentalstate.errors import ParameterError
from mentalstate.features import FrameFeatures, window_array
from mentalstate.stream import StreamSession, replay


def session_frames(n=100, seed=0):
    rng = np.random.default_rng(seed)
    X = np.zeros((n, 11))
    X[:, :8] = rng.standard_normal((n, 8))
    X[:, 8], X[:, 10] = 1.0, 25.0
    return LabeledDataset.from_arrays(X, np.zeros(n), subject=["s"] * n)


def test_warm_up_and_first_decision(quick_models):
    session = StreamSession(quick_models["cnn"])
    frames = session_frames(20).X
    for x in frames[:19]:
        assert session.push_frame(x) is None
    decision = session.push_frame(frames[19])
    assert decision is not None and decision.frame_index == 19
    expected = quick_models["cnn"].predict_scores(frames[None])[0]
    assert decision.scores.tobytes() == expected.tobytes()


@pytest.mark.parametrize("kind", models.KINDS)
def test_hundred_frames_give_81_decisions(kind, quick_models):
    decisions = replay(StreamSession(quick_models[kind]), session_frames())
    assert len(decisions) == 81
    assert [d.frame_index for d in decisions] == list(range(19, 100))
    for d in decisions:
        assert d.latency > 0 and d.label == int(np.argmax(d.scores))


@pytest.mark.parametrize("stride,expected", [(1, 81), (5, 17), (11, 8), (81, 1), (82, 1)])
def test_emit_stride(stride, expected, quick_models):
    assert len(replay(StreamSession(quick_models["svm"], stride), session_frames())) == expected


@pytest.mark.parametrize("kind", models.KINDS)
def test_offline_online_equivalence(kind, quick_models):
    model = quick_models[kind]
    X = session_frames(60, seed=3).X
    online = replay(StreamSession(model), X)
    offline_input = window_array(X, 20, 1) if model.input_mode == "window" else X[19:]
    offline = model.predict_scores(offline_input)
    assert np.array_equal([d.label for d in online], np.argmax(offline, axis=1))
    assert np.stack([d.scores for d in online]).tobytes() == offline.tobytes()


def test_throttled_matches_unthrottled(quick_models):
    X = session_frames(24).X
    flat = replay(StreamSession(quick_models["xgb"]), X)
    paced = replay(StreamSession(quick_models["xgb"]), X, rate=200.0)
    assert [d.label for d in flat] == [d.label for d in paced]
    assert [d.scores.tobytes() for d in flat] == [d.scores.tobytes() for d in paced]


def test_empty_input(quick_models):
    assert replay(StreamSession(quick_models["dnn"]), []) == []


def test_dimension_mismatch(quick_models):
    with pytest.raises(ParameterError):
        StreamSession(quick_models["dnn"]).push_frame(np.zeros(10))
    with pytest.raises(ParameterError):
        StreamSession(quick_models["dnn"], emit_stride=0)


def test_ring_buffer_is_bounded_and_chronological(quick_models):
    session = StreamSession(quick_models["cnn"])
    for i in range(57):
        session.push_frame(FrameFeatures(np.full(11, float(i)), frame_index=i))
    assert session._buffer.shape == (20, 11)
    assert session.window()[:, 0].tolist() == list(range(37, 57))
    session.reset()
    assert session.frames_seen == 0 and session.push_frame(np.zeros(11)) is None


def test_callback_order_and_json(quick_models):
    seen = []
    session = StreamSession(quick_models["dnn"], on_decision=lambda d: seen.append(d.to_json()))
    replay(session, session_frames(25))
    records = [json.loads(s) for s in seen]
    assert [r["frame"] for r in records] == list(range(19, 25))
    assert set(records[0]) == {"frame", "label", "scores", "latency_s"}
    assert records[0]["label"] in ("engaged", "confused", "relaxed")


def test_independent_concurrent_sessions(quick_models):
    model = quick_models["cnn"]
    streams = [session_frames(40, seed=s).X for s in range(4)]
    expected = [[d.scores.tobytes() for d in replay(StreamSession(model), X)] for X in streams]
    got = [None] * 4

    def run(i):
        got[i] = [d.scores.tobytes() for d in replay(StreamSession(model), streams[i])]

    threads = [threading.Thread(target=run, args=(i,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert got == expected


def test_replay_rejects_windows(blob_windows, quick_models):
    ds = LabeledDataset.from_arrays(*blob_windows)
    with pytest.raises(ParameterError):
        replay(StreamSession(quick_models["cnn"]), ds)
