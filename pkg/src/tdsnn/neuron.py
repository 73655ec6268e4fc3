"""Behavioral model of the time-domain leaky integrate-and-fire neuron.

The membrane integrates a net charging rate that is modulated by excitatory
and inhibitory input pulses. Crossing the threshold fires the neuron and
resets the membrane to zero within the same step; the positive-feedback rush
of the real circuit is treated as instantaneous.

Dynamics are piecewise linear in time: the transistor leakage balance is
lumped into constant rates, and the membrane capacitor is absorbed into
them. Voltages are normalized to a 1.0 supply.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class NeuronParams:
    """Behavioral rates and threshold of one neuron.

    v_th: firing threshold of the inverter-based comparator (normalized V).
    r_base: net baseline charging rate with no input (V/s); sets the
        free-run rate v_th/r_base. Default gives 200 Hz free-run.
    r_exc: extra charging rate while an excitatory pulse is high (V/s).
    r_inh: discharging rate while an inhibitory pulse is high (V/s).
    spike_width: width of the emitted output spike (s).
    """

    v_th: float = 0.5
    r_base: float = 100.0
    r_exc: float = 200.0
    r_inh: float = 750.0
    spike_width: float = 100e-6

    def __post_init__(self):
        if self.v_th <= 0:
            raise ValueError("v_th must be positive")
        if self.r_base <= 0:
            raise ValueError("r_base must be positive (the free neuron must fire)")
        if self.r_exc < 0 or self.r_inh < 0:
            raise ValueError("r_exc and r_inh must be nonnegative")
        if self.spike_width <= 0:
            raise ValueError("spike_width must be positive")


@dataclass
class NeuronState:
    """Membrane potential plus bookkeeping for one neuron."""

    v_mem: float = 0.0
    t: float = 0.0
    last_spike_time: Optional[float] = None


def neuron_step(state: NeuronState, params: NeuronParams, exc_high: bool,
                inh_high: bool, dt: float) -> tuple[NeuronState, bool]:
    """Advance the neuron by one step of length dt.

    The membrane ramps at the net rate for the whole step, clamped at zero
    from below. Reaching v_th fires the neuron and resets the membrane
    atomically within the step. Returns the new state and the fired flag.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    rate = params.r_base
    if exc_high:
        rate += params.r_exc
    if inh_high:
        rate -= params.r_inh
    v = max(state.v_mem + rate * dt, 0.0)
    t = state.t + dt
    if v >= params.v_th:
        return NeuronState(v_mem=0.0, t=t, last_spike_time=t), True
    return NeuronState(v_mem=v, t=t, last_spike_time=state.last_spike_time), False


def free_run_period(params: NeuronParams) -> float:
    """Closed-form firing period with no input: v_th / r_base.

    Exact for the linear ramp model; the reset itself takes no time.
    """
    if params.r_base <= 0:
        raise ValueError("r_base must be positive")
    return params.v_th / params.r_base
