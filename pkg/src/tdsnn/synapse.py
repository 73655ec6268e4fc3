"""Behavioral model of the ring-oscillator synapse.

Each presynaptic spike dumps charge onto the oscillator supply node V_SYN,
which otherwise leaks exponentially toward zero. Above an onset voltage the
ring oscillates; its frequency is a linear function of V_SYN between the
onset and saturation levels. Only rising-edge timing matters downstream, so
the three-inverter ring is reduced to a phase accumulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class SynapseParams:
    """Charge/leak dynamics of V_SYN and the frequency map of the ring.

    delta_up: per-spike charge injection as a fraction of the remaining
        headroom, v_syn += delta_up * (v_max - v_syn). Saturating by
        construction, so v_syn never exceeds v_max.
    tau_leak: exponential leak time constant toward zero (s).
    v_osc: oscillation onset voltage (normalized).
    v_max: saturation level of v_syn (normalized).
    f_min, f_max: ring frequency at onset and at saturation (Hz).
    """

    delta_up: float = 0.08
    tau_leak: float = 0.05
    v_osc: float = 0.2
    v_max: float = 1.0
    f_min: float = 15.0
    f_max: float = 200.0

    def __post_init__(self):
        if not 0 < self.delta_up <= 1:
            raise ValueError("delta_up must be in (0, 1]")
        if self.tau_leak <= 0:
            raise ValueError("tau_leak must be positive")
        if not 0 <= self.v_osc < self.v_max:
            raise ValueError("need 0 <= v_osc < v_max")
        if not 0 < self.f_min <= self.f_max:
            raise ValueError("need 0 < f_min <= f_max")


@dataclass
class SynapseState:
    """Oscillator supply voltage and phase accumulator."""

    v_syn: float = 0.0
    phase: float = 0.0


def osc_frequency(v_syn, params: SynapseParams):
    """Ring frequency for a supply voltage: 0 below onset, else linear.

    Accepts scalars or arrays. The active branch is clamped to
    [f_min, f_max].
    """
    v = np.asarray(v_syn, dtype=float)
    span = params.v_max - params.v_osc
    f = params.f_min + (params.f_max - params.f_min) * (v - params.v_osc) / span
    f = np.clip(f, params.f_min, params.f_max)
    f = np.where(v < params.v_osc, 0.0, f)
    if np.ndim(v_syn) == 0:
        return float(f)
    return f


def synapse_step(state: SynapseState, params: SynapseParams, spike_in: bool,
                 dt: float) -> tuple[SynapseState, list[float]]:
    """Advance the synapse by one step of length dt.

    An input spike charges v_syn before the leak is applied. The phase
    accumulator advances at the current ring frequency; each wrap emits one
    rising edge, reported as an offset within the step. dt must resolve the
    fastest oscillation (dt * f_max < 0.5), which also guarantees at most
    one edge per step.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt * params.f_max >= 0.5:
        raise ConfigurationError(
            f"dt={dt:g} undersamples the oscillator (need dt*f_max < 0.5, "
            f"got {dt * params.f_max:g})")
    v = state.v_syn
    if spike_in:
        v = v + params.delta_up * (params.v_max - v)
    v *= math.exp(-dt / params.tau_leak)
    f = osc_frequency(v, params)
    phase = state.phase + f * dt
    edges = []
    if phase >= 1.0:
        edges.append((1.0 - state.phase) / f)
        phase -= 1.0
    return SynapseState(v_syn=v, phase=phase), edges


def steady_state_v(spike_rate: float, params: SynapseParams) -> float:
    """Fixed point of the per-interval charge/leak map (pre-spike value).

    Under constant input rate the voltage cycles between a pre-spike minimum
    and a post-spike peak; this returns the minimum.
    """
    if spike_rate < 0:
        raise ValueError("spike_rate must be nonnegative")
    if spike_rate == 0:
        return 0.0
    e = math.exp(-1.0 / (spike_rate * params.tau_leak))
    return params.delta_up * params.v_max * e / (1.0 - (1.0 - params.delta_up) * e)


def steady_state_frequency(spike_rate: float, params: SynapseParams) -> float:
    """Mean ring frequency under a constant presynaptic spike rate.

    Averages the instantaneous frequency over one steady-state cycle of
    v_syn (post-spike peak decaying to the pre-spike minimum), including the
    frozen-phase fraction where v_syn sits below onset. Matches the long-run
    edge rate of a step simulation.
    """
    if spike_rate < 0:
        raise ValueError("spike_rate must be nonnegative")
    if spike_rate == 0:
        return 0.0
    period = 1.0 / spike_rate
    v_pre = steady_state_v(spike_rate, params)
    v_post = v_pre + params.delta_up * (params.v_max - v_pre)
    if v_post <= params.v_osc:
        return 0.0
    tau = params.tau_leak
    if params.v_osc <= 0 or v_pre >= params.v_osc:
        t_active = period
    else:
        t_active = min(period, tau * math.log(v_post / params.v_osc))
    # integral of v over the active part of the cycle
    int_v = v_post * tau * (1.0 - math.exp(-t_active / tau))
    slope = (params.f_max - params.f_min) / (params.v_max - params.v_osc)
    mean_f = (t_active * params.f_min + slope * (int_v - params.v_osc * t_active)) / period
    return mean_f
