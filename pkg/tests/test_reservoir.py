import numpy as np
import pytest

from tdsnn import (ConfigurationError, FeedbackParams, NetworkConfig, RlsState,
                   TargetSpec, TrainConfig, build_network, encode_feedback,
                   evaluate, normalized_state, pulse_train_from_rate, readout,
                   rls_update, train_force)


# ---------------------------------------------------------------------------
# readout
# ---------------------------------------------------------------------------

def test_readout_zero_weights():
    assert readout(np.ones(10), np.zeros(10)) == 0.0


def test_readout_normalization():
    # all synapses at f_max -> r = 1 everywhere; w = 1/N each -> z = 1
    n = 20
    r = normalized_state(np.full(n, 200.0), 15.0, 200.0)
    assert np.allclose(r, 1.0)
    assert readout(r, np.full(n, 1.0 / n)) == pytest.approx(1.0)


def test_readout_matches_direct_dot():
    rng = np.random.default_rng(2)
    r = rng.random(50)
    w = rng.normal(size=50)
    assert readout(r, w) == pytest.approx(float(np.dot(w, r)))


def test_readout_length_mismatch():
    with pytest.raises(ValueError):
        readout(np.ones(3), np.ones(4))


def test_normalized_state_clamps():
    r = normalized_state(np.array([0.0, 15.0, 107.5, 200.0, 500.0]), 15.0, 200.0)
    assert r[0] == 0.0          # silent synapse
    assert r[1] == 0.0          # at onset frequency
    assert r[2] == pytest.approx(0.5)
    assert r[3] == 1.0
    assert r[4] == 1.0          # clamped


# ---------------------------------------------------------------------------
# rls_update
# ---------------------------------------------------------------------------

def test_rls_zero_state_is_noop():
    rls = RlsState.initial(4)
    out = rls_update(rls, np.zeros(4), 1.0, 0.0)
    assert np.array_equal(out.w, rls.w)
    assert np.array_equal(out.P, rls.P)


def test_rls_zero_error_keeps_weights():
    rng = np.random.default_rng(0)
    rls = RlsState.initial(4)
    r = rng.random(4)
    z = readout(r, rls.w)
    out = rls_update(rls, r, z, z)
    assert np.array_equal(out.w, rls.w)
    assert not np.array_equal(out.P, rls.P)  # P still absorbs the sample


def test_rls_matches_ridge_solution():
    rng = np.random.default_rng(11)
    n, d, alpha = 200, 5, 1.0
    X = rng.normal(size=(n, d))
    w_true = rng.normal(size=d)
    y = X @ w_true + 0.05 * rng.normal(size=n)
    rls = RlsState.initial(d, alpha)
    for i in range(n):
        z = readout(X[i], rls.w)
        rls = rls_update(rls, X[i], z, y[i])
    ridge = np.linalg.solve(X.T @ X + alpha * np.eye(d), X.T @ y)
    assert np.abs(rls.w - ridge).max() < 1e-6


def test_rls_training_error_nondivergent():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(500, 8))
    y = X @ rng.normal(size=8)
    rls = RlsState.initial(8)
    errs = []
    for i in range(500):
        z = readout(X[i], rls.w)
        errs.append(abs(z - y[i]))
        rls = rls_update(rls, X[i], z, y[i])
    assert np.mean(errs[-100:]) < np.mean(errs[:100])


def test_p_stays_symmetric_over_many_updates():
    rng = np.random.default_rng(8)
    rls = RlsState.initial(20)
    for _ in range(10_000):
        r = rng.random(20)
        z = readout(r, rls.w)
        rls = rls_update(rls, r, z, rng.normal())
    assert np.abs(rls.P - rls.P.T).max() <= 1e-9


def test_rls_rejects_nonfinite():
    rls = RlsState.initial(3)
    with pytest.raises(ValueError):
        rls_update(rls, np.array([1.0, np.nan, 0.0]), 0.0, 0.0)
    with pytest.raises(ValueError):
        rls_update(rls, np.ones(3), np.inf, 0.0)


# ---------------------------------------------------------------------------
# feedback encoding
# ---------------------------------------------------------------------------

def test_encode_feedback_zero():
    assert encode_feedback(0.0, FeedbackParams()) == (0.0, 0.0)


def test_encode_feedback_sign_split():
    fb = FeedbackParams(gain=200.0, f_fb_max=200.0)
    assert encode_feedback(0.5, fb) == (100.0, 0.0)
    assert encode_feedback(-0.5, fb) == (0.0, 100.0)


def test_encode_feedback_caps_and_exclusivity():
    fb = FeedbackParams(gain=200.0, f_fb_max=200.0)
    for z in np.linspace(-5, 5, 101):
        f_exc, f_inh = encode_feedback(float(z), fb)
        assert f_exc * f_inh == 0.0
        assert 0.0 <= f_exc <= fb.f_fb_max
        assert 0.0 <= f_inh <= fb.f_fb_max


def test_encode_feedback_nonfinite():
    with pytest.raises(ValueError):
        encode_feedback(float("nan"), FeedbackParams())


# ---------------------------------------------------------------------------
# pulse_train_from_rate
# ---------------------------------------------------------------------------

def test_rate_zero_gives_empty_train():
    assert len(pulse_train_from_rate(0.0, 1e-3, 1.0)) == 0


def test_constant_rate_pulse_spacing():
    train = pulse_train_from_rate(100.0, 1e-3, 0.1)
    assert len(train) == 10
    assert np.allclose(np.diff(train.rises), 0.01, atol=2e-5)


def test_sinusoidal_rate_count_matches_quadrature():
    duration = 2.0
    f = lambda t: 120.0 * (1.0 + np.sin(2 * np.pi * 3.0 * t)) / 2.0
    train = pulse_train_from_rate(f, 0.5e-3, duration, dt=1e-5)
    ts = np.arange(0, duration, 1e-6)
    integral = np.trapz([f(t) for t in ts], ts)
    assert abs(len(train) - int(integral)) <= 1


def test_rate_width_guard():
    with pytest.raises(ConfigurationError):
        pulse_train_from_rate(200.0, 6e-3, 1.0)  # width > 1/200


def test_rate_rejects_negative():
    with pytest.raises(ValueError):
        pulse_train_from_rate(-1.0, 1e-3, 1.0)


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def test_evaluate_perfect_and_null():
    t = np.linspace(0, 1, 500)
    target = 0.8 * np.sin(2 * np.pi * 10 * t)
    assert evaluate(target, target)["nrmse"] == 0.0
    assert evaluate(np.zeros_like(target), target)["nrmse"] == pytest.approx(
        1.0, rel=1e-6)


def test_evaluate_matches_two_pass_computation():
    rng = np.random.default_rng(5)
    z = rng.normal(size=400)
    tgt = rng.normal(size=400)
    got = evaluate(z, tgt)
    err = z - tgt
    rms_err = np.sqrt(np.sum(err ** 2) / len(err))
    rms_tgt = np.sqrt(np.sum((tgt - np.mean(tgt)) ** 2) / len(tgt))
    assert got["nrmse"] == pytest.approx(rms_err / rms_tgt)
    assert got["mean_abs_err"] == pytest.approx(np.abs(err).mean())


def test_evaluate_constant_target_is_explicit_error():
    with pytest.raises(ValueError, match="constant target"):
        evaluate(np.ones(10), np.ones(10))


# ---------------------------------------------------------------------------
# train_force plumbing
# ---------------------------------------------------------------------------

def _small_setup(seed=0, **train_kw):
    cfg = NetworkConfig(n_neurons=20, connection_probability=0.1, seed=seed)
    net = build_network(cfg)
    tcfg = TrainConfig(**train_kw)
    return net, tcfg, FeedbackParams()


def test_train_force_deterministic():
    net, tcfg, fb = _small_setup(train_periods=1, eval_periods=1)
    rls1, tr1 = train_force(net, tcfg, fb)
    rls2, tr2 = train_force(net, tcfg, fb)
    assert np.array_equal(rls1.w, rls2.w)
    assert np.array_equal(tr1.z, tr2.z)


def test_train_force_traces_shapes():
    net, tcfg, fb = _small_setup(train_periods=2, eval_periods=1)
    rls, tr = train_force(net, tcfg, fb)
    # 3 periods of a 10 Hz target at 1 ms learn interval
    assert len(tr.z) == 300
    assert tr.r_states.shape == (300, 20)
    assert tr.train_end_time == pytest.approx(0.2)
    assert np.array_equal(tr.z_times, tr.target * 0 + tr.z_times)  # finite
    assert np.all(np.isfinite(tr.z))


def test_teacher_forced_error_trend_down():
    cfg = NetworkConfig(n_neurons=100, connection_probability=0.1, seed=42)
    net = build_network(cfg)
    tcfg = TrainConfig(teacher_forcing=True)
    rls, tr = train_force(net, tcfg, FeedbackParams())
    train_sel = tr.z_times <= tr.train_end_time
    e = np.abs(tr.z[train_sel] - tr.target[train_sel])
    per_period = 100  # 10 Hz target, 1 ms learn interval
    assert e[-per_period:].mean() < e[:per_period].mean()


def test_untrained_random_readout_is_worse():
    net, _, fb = _small_setup()
    trained_cfg = TrainConfig(train_periods=5, eval_periods=2)
    rls, tr = train_force(net, trained_cfg, fb)
    sel = tr.z_times > tr.train_end_time
    trained = evaluate(tr.z[sel], tr.target[sel])["nrmse"]

    random_cfg = TrainConfig(train_periods=0, eval_periods=2, init_w_scale=1.0)
    _, tr_rand = train_force(net, random_cfg, fb)
    rand = evaluate(tr_rand.z, tr_rand.target)["nrmse"]
    assert rand > trained


def test_target_spec_validation():
    with pytest.raises(ConfigurationError):
        TargetSpec(kind="square")
    with pytest.raises(ConfigurationError):
        TargetSpec(frequency=0.0)


def test_train_config_validation():
    with pytest.raises(ConfigurationError):
        TrainConfig(train_periods=-1)
    with pytest.raises(ConfigurationError):
        TrainConfig(train_periods=0, eval_periods=0)
    with pytest.raises(ConfigurationError):
        TrainConfig(learn_interval=0.0)
    with pytest.raises(ConfigurationError):
        TrainConfig(frequency_range=(200.0, 15.0))
