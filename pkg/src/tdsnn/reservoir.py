"""Reservoir-computing harness over the pulse network.

The reservoir state observed by the readout is the vector of normalized
instantaneous synapse frequencies. A linear readout z = w.r is trained
online with recursive least squares while the target signal is fed back
into the network as excitatory/inhibitory pulse trains (teacher forcing);
after training the loop closes on the network's own output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .network import Network, NetworkSim, TraceSet
from .pulses import PulseTrain


@dataclass
class RlsState:
    """Readout weights and inverse-correlation matrix."""

    w: np.ndarray
    P: np.ndarray

    @classmethod
    def initial(cls, n: int, alpha: float = 1.0) -> "RlsState":
        """Zero weights, P = I/alpha."""
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        return cls(w=np.zeros(n), P=np.eye(n) / alpha)


def readout(r, w) -> float:
    """Linear readout z = w.r over the normalized state vector."""
    r = np.asarray(r, dtype=float)
    w = np.asarray(w, dtype=float)
    if r.shape != w.shape or r.ndim != 1:
        raise ValueError(f"state/weight length mismatch: {r.shape} vs {w.shape}")
    return float(w @ r)


def rls_update(rls: RlsState, r, z: float, target: float) -> RlsState:
    """One recursive least-squares step against the target.

    e = z - target, k = P r, c = 1/(1 + r.k), P' = P - c k k^T,
    w' = w - c e k. Returns a new state; the inputs are not mutated.
    """
    r = np.asarray(r, dtype=float)
    if not (np.all(np.isfinite(r)) and np.isfinite(z) and np.isfinite(target)):
        raise ValueError("rls_update received non-finite inputs")
    e = z - target
    k = rls.P @ r
    c = 1.0 / (1.0 + r @ k)
    P = rls.P - c * np.outer(k, k)
    w = rls.w - c * e * k
    return RlsState(w=w, P=P)


def normalized_state(freqs, f_min: float, f_max: float) -> np.ndarray:
    """Map instantaneous synapse frequencies into [0, 1] readout coordinates.

    Silent synapses (frequency 0, below onset) land at 0 via the clamp.
    """
    f = np.asarray(freqs, dtype=float)
    return np.clip((f - f_min) / (f_max - f_min), 0.0, 1.0)


@dataclass(frozen=True)
class FeedbackParams:
    """Output-to-pulse-train conversion.

    gain: pulse rate per unit output amplitude (Hz).
    f_fb_max: cap on either feedback pulse rate (Hz).
    pulse_width: width of each feedback pulse (s).
    """

    gain: float = 200.0
    f_fb_max: float = 200.0
    pulse_width: float = 200e-6

    def __post_init__(self):
        if self.gain <= 0 or self.f_fb_max <= 0 or self.pulse_width <= 0:
            raise ValueError("feedback gain, cap, and pulse width must be positive")


def encode_feedback(z: float, params: FeedbackParams) -> tuple[float, float]:
    """Split the output into excitatory/inhibitory pulse rates.

    Positive output drives the excitatory channel, negative the inhibitory
    one, each at gain*|z| capped at f_fb_max; at most one is nonzero.
    """
    if not np.isfinite(z):
        raise ValueError("feedback input must be finite")
    f_exc = min(params.gain * max(z, 0.0), params.f_fb_max)
    f_inh = min(params.gain * max(-z, 0.0), params.f_fb_max)
    return f_exc, f_inh


def pulse_train_from_rate(f, width: float, duration: float,
                          dt: float = 1e-5) -> PulseTrain:
    """Emit a pulse at every unit crossing of the integrated rate.

    f may be a scalar, an array of per-step rates, or a callable of time.
    The accumulator starts at half phase, so a constant rate emits its first
    pulse after half a period and the total count is round(integral of f);
    crossing instants are interpolated within the step.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(round(duration / dt))
    times = np.arange(n) * dt
    if callable(f):
        rates = np.asarray([float(f(t)) for t in times])
    else:
        rates = np.broadcast_to(np.asarray(f, dtype=float), (n,)).copy()
    if np.any(rates < 0):
        raise ValueError("rates must be nonnegative")
    if len(rates) and width * rates.max() >= 1.0:
        raise ConfigurationError(
            "pulse width exceeds the minimum inter-pulse gap at the peak rate")

    rises = []
    phase = 0.5
    for k in range(n):
        r = rates[k]
        phase += r * dt
        while phase >= 1.0 and r > 0:
            over = phase - 1.0  # rate integral accumulated past the crossing
            rises.append(times[k] + dt - over / r)
            phase -= 1.0
    rises = np.asarray(rises)
    rises = rises[rises < duration]
    return PulseTrain(rises, np.full(len(rises), width))


@dataclass(frozen=True)
class TargetSpec:
    """Supervisory signal; only sine targets are defined."""

    kind: str = "sine"
    frequency: float = 10.0
    amplitude: float = 0.8

    def __post_init__(self):
        if self.kind != "sine":
            raise ConfigurationError(f"unknown target kind {self.kind!r}")
        if self.frequency <= 0:
            raise ConfigurationError("target frequency must be positive")

    def value(self, t):
        return self.amplitude * np.sin(2.0 * math.pi * self.frequency * t)


@dataclass
class TrainConfig:
    target: TargetSpec = field(default_factory=TargetSpec)
    train_periods: int = 5
    eval_periods: int = 2
    learn_interval: float = 1e-3
    rls_init_alpha: float = 1.0
    frequency_range: tuple = (15.0, 200.0)
    teacher_forcing: bool = True
    init_w_scale: float = 0.0

    def __post_init__(self):
        if self.train_periods < 0:
            raise ConfigurationError("train_periods must be >= 0")
        if self.eval_periods < 0:
            raise ConfigurationError("eval_periods must be >= 0")
        if self.train_periods + self.eval_periods < 1:
            raise ConfigurationError("must run at least one period")
        if self.learn_interval <= 0:
            raise ConfigurationError("learn_interval must be positive")
        if self.rls_init_alpha <= 0:
            raise ConfigurationError("rls_init_alpha must be positive")
        f_lo, f_hi = self.frequency_range
        if not 0 < f_lo <= f_hi:
            raise ConfigurationError("frequency_range must satisfy 0 < f_min <= f_max")


class _PulseEmitter:
    """Online unit-crossing emitter feeding a pulse countdown."""

    def __init__(self, width_steps: int):
        self.phase = 0.5
        self.countdown = 0
        self.width_steps = width_steps

    def step(self, rate: float, dt: float) -> bool:
        """Advance by dt at the given rate; returns the level for this step."""
        if rate > 0:
            self.phase += rate * dt
            if self.phase >= 1.0:
                self.phase -= 1.0
                self.countdown = self.width_steps
        level = self.countdown > 0
        if self.countdown > 0:
            self.countdown -= 1
        return level


def train_force(network: Network, train_cfg: TrainConfig, fb: FeedbackParams,
                init_rls: Optional[RlsState] = None) -> tuple[RlsState, TraceSet]:
    """Run the reservoir with online RLS training of the readout weights.

    During the training periods the feedback encoder sees the target
    (teacher forcing, unless disabled); afterwards the weights are frozen
    and the loop closes on the network's own readout, held between learn
    intervals. Returns the final weights and the full traces of z, target,
    and the sampled state vectors. Pass init_rls to start from existing
    weights (evaluation of a stored readout).
    """
    cfg = network.config
    dt = cfg.dt
    if train_cfg.learn_interval < dt:
        raise ConfigurationError("learn_interval must be >= network dt")
    f_lo, f_hi = train_cfg.frequency_range
    syn = replace(cfg.synapse, f_min=f_lo, f_max=f_hi)
    sim = NetworkSim(network, synapse_override=syn)
    n = cfg.n_neurons

    target = train_cfg.target
    period = 1.0 / target.frequency
    steps_per_period = int(round(period / dt))
    train_steps = train_cfg.train_periods * steps_per_period
    total_steps = (train_cfg.train_periods + train_cfg.eval_periods) * steps_per_period
    m = max(1, int(round(train_cfg.learn_interval / dt)))

    if init_rls is not None:
        rls = RlsState(w=np.array(init_rls.w, dtype=float),
                       P=np.array(init_rls.P, dtype=float))
    else:
        rls = RlsState.initial(n, train_cfg.rls_init_alpha)
        if train_cfg.init_w_scale > 0:
            rng = np.random.default_rng(cfg.seed + 1)
            rls.w = rng.normal(0.0, train_cfg.init_w_scale / math.sqrt(n), n)

    fb_steps = max(1, int(round(fb.pulse_width / dt)))
    exc_gen = _PulseEmitter(fb_steps)
    inh_gen = _PulseEmitter(fb_steps)

    n_updates = total_steps // m
    z_times = np.empty(n_updates)
    z_trace = np.empty(n_updates)
    tgt_trace = np.empty(n_updates)
    r_states = np.empty((n_updates, n))

    every = max(1, int(round(cfg.sample_interval / dt)))
    n_samples = total_steps // every + 1
    sample_times = np.empty(n_samples)
    v_mem = np.empty((n_samples, n))
    v_syn = np.empty((n_samples, n))
    freq = np.empty((n_samples, n))
    sample_times[0] = 0.0
    v_mem[0] = sim.v
    v_syn[0] = sim.sv
    freq[0] = sim.synapse_frequencies()

    spike_steps: list[int] = []
    spike_ids: list[int] = []

    z_held = readout(normalized_state(sim.synapse_frequencies(), f_lo, f_hi), rls.w)
    si = 1
    ui = 0
    for k in range(total_steps):
        training = k < train_steps
        if training and train_cfg.teacher_forcing:
            sig = float(target.value(k * dt))
        else:
            sig = z_held
        f_exc, f_inh = encode_feedback(sig, fb)
        ext_exc = exc_gen.step(f_exc, dt)
        ext_inh = inh_gen.step(f_inh, dt)

        fired = sim.step(ext_exc, ext_inh)
        if fired.any():
            ids = np.nonzero(fired)[0]
            spike_steps.extend([k + 1] * len(ids))
            spike_ids.extend(ids.tolist())

        if (k + 1) % m == 0:
            t = (k + 1) * dt
            r = normalized_state(sim.synapse_frequencies(), f_lo, f_hi)
            z = readout(r, rls.w)
            tgt = float(target.value(t))
            if training:
                rls = rls_update(rls, r, z, tgt)
            z_times[ui] = t
            z_trace[ui] = z
            tgt_trace[ui] = tgt
            r_states[ui] = r
            ui += 1
            z_held = z

        if (k + 1) % every == 0:
            sample_times[si] = (k + 1) * dt
            v_mem[si] = sim.v
            v_syn[si] = sim.sv
            freq[si] = sim.synapse_frequencies()
            si += 1

    spike_steps = np.asarray(spike_steps, dtype=np.int64)
    spike_ids = np.asarray(spike_ids, dtype=np.intp)
    spikes = [spike_steps[spike_ids == i] * dt for i in range(n)]
    traces = TraceSet(dt=dt, duration=total_steps * dt, n_neurons=n,
                      spikes=spikes, sample_times=sample_times[:si],
                      v_mem=v_mem[:si], v_syn=v_syn[:si], freq_hz=freq[:si],
                      z_times=z_times[:ui], z=z_trace[:ui], target=tgt_trace[:ui],
                      r_states=r_states[:ui], train_end_time=train_steps * dt)
    return rls, traces


def evaluate(z_trace, target_trace) -> dict:
    """NRMSE and mean absolute error of an output trace against its target.

    nrmse = rms(z - target) / rms(target - mean(target)); a constant target
    makes the normalization undefined and is reported as an error.
    """
    z = np.asarray(z_trace, dtype=float)
    tgt = np.asarray(target_trace, dtype=float)
    if z.shape != tgt.shape or z.ndim != 1 or len(z) == 0:
        raise ValueError("z and target must be nonempty 1-D arrays of equal length")
    denom = math.sqrt(float(np.mean((tgt - tgt.mean()) ** 2)))
    if denom == 0.0:
        raise ValueError("constant target: NRMSE normalization would divide by zero")
    nrmse = math.sqrt(float(np.mean((z - tgt) ** 2))) / denom
    return {"nrmse": nrmse, "mean_abs_err": float(np.mean(np.abs(z - tgt)))}
