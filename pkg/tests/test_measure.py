import numpy as np
import pytest

from tdsnn import (CalibrationError, NeuronParams, SynapseParams, calibrate,
                   firing_rate, free_run_period, steady_state_frequency)
from tdsnn.measure import run_chain, run_neuron, weighted_drive


def test_firing_rate_regular_train():
    spikes = np.arange(1, 201) * 0.005  # 200 Hz for 1 s
    assert firing_rate(spikes, 0.1, 10) == pytest.approx(200.0)


def test_firing_rate_empty():
    assert firing_rate([], 0.1, 10) == 0.0


def test_firing_rate_insufficient_recording():
    with pytest.raises(ValueError):
        firing_rate([0.05], 0.1, 10, duration=0.5)


def test_firing_rate_invalid_args():
    with pytest.raises(ValueError):
        firing_rate([0.05], 0.0, 10)
    with pytest.raises(ValueError):
        firing_rate([0.05], 0.1, 0)


def test_firing_rate_partition_phase_invariance():
    spikes = np.arange(1, 2001) * 0.005  # periodic, 10 s
    r1 = firing_rate(spikes, 0.1, 100)
    r2 = firing_rate(spikes, 0.25, 40)
    assert r1 == pytest.approx(r2, rel=1e-6)


def test_firing_rate_matches_closed_form_over_1024_windows():
    # measurement protocol: average over 1024 windows of 100 ms
    params = NeuronParams()
    dt = 5e-5
    duration = 102.4
    spikes, _ = run_neuron(params, duration, dt)
    est = firing_rate(spikes, 0.1, 1024, duration=duration)
    assert est == pytest.approx(1.0 / free_run_period(params), rel=0.01)


def test_weighted_drive_is_shaped_source():
    train = weighted_drive(100.0, 12, 0.05)
    assert len(train) == 5
    assert np.allclose(train.widths, 650e-6)
    assert np.allclose(np.diff(train.rises), 0.01)


def test_calibrate_free_run_only_closed_form():
    result = calibrate({"free_run_hz": 200.0})
    assert result.neuron.r_base == pytest.approx(0.5 * 200.0)
    assert result.achieved["free_run_hz"] == pytest.approx(200.0)
    assert result.residuals["free_run_hz"] == pytest.approx(0.0, abs=1e-12)


def test_calibrate_unknown_anchor_rejected():
    with pytest.raises(ValueError):
        calibrate({"nonsense_hz": 1.0})


@pytest.fixture(scope="module")
def paper_fit():
    return calibrate()


def test_calibrate_paper_anchors_within_tolerance(paper_fit):
    res = paper_fit.residuals
    assert abs(res["free_run_hz"]) <= 0.02
    assert abs(res["syn_free_hz"]) <= 0.05
    assert abs(res["syn_excited_hz"]) <= 0.05
    assert abs(res["syn_inhibited_hz"]) <= 0.15


def test_calibrated_chain_reproduces_anchors(paper_fit):
    # independent re-simulation of the full neuron+synapse chain
    duration, dt = 5.0, 1e-5
    drive = weighted_drive(100.0, 12, duration)
    cases = {
        "syn_inhibited_hz": (None, drive, 41.0, 0.15),
        "syn_free_hz": (None, None, 90.0, 0.05),
        "syn_excited_hz": (drive, None, 98.0, 0.05),
    }
    for name, (exc, inh, target, tol) in cases.items():
        _, edges = run_chain(paper_fit.neuron, paper_fit.synapse, duration, dt,
                             exc_train=exc, inh_train=inh)
        measured = len(edges) / duration
        assert abs(measured - target) / target <= tol, (name, measured)


def test_perturbed_anchors_shift_fit_proportionally(paper_fit):
    anchors = {
        "free_run_hz": 200.0,
        "syn_inhibited_hz": 41.0 * 1.1,
        "syn_free_hz": 90.0 * 1.1,
        "syn_excited_hz": 98.0 * 1.1,
    }
    shifted = calibrate(anchors, tolerances={
        "free_run_hz": 0.02, "syn_inhibited_hz": 0.2,
        "syn_free_hz": 0.1, "syn_excited_hz": 0.1})
    base_free = steady_state_frequency(200.0, paper_fit.synapse)
    new_free = steady_state_frequency(200.0, shifted.synapse)
    assert new_free / base_free == pytest.approx(1.1, abs=0.15)


def test_calibrate_reports_failure_with_residuals():
    # an infeasible anchor set: synapse faster than its own ceiling
    anchors = {"free_run_hz": 200.0, "syn_free_hz": 90.0,
               "syn_excited_hz": 20.0, "syn_inhibited_hz": 41.0}
    with pytest.raises(CalibrationError) as exc_info:
        calibrate(anchors)
    assert exc_info.value.residuals
