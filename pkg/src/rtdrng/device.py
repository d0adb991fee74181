"""Phenomenological model of a resonant tunnelling diode under current bias.

The static I-V curve is N-shaped: a first positive-differential-resistance
(PDR) branch rising linearly to the resonance peak, an unstable NDR region,
and a second PDR branch past the valley.  Under current bias the device sits
on one of two stable branches, L (low resistance, first PDR) or H (high
resistance, second PDR).  Currents between the valley and the peak admit
both branches, and the L->H switching current is a random variable, which we
model with an exponential hazard in current:

    rate(i) = lambda0 * exp((i - (i_peak + drift)) / i_scale)

The hazard is zero at or below the (drift-shifted) valley and infinite above
the (drift-shifted) peak, so the hard bounds of the bistable window are
respected for every random seed.  Slow environmental drift is an
Ornstein-Uhlenbeck offset added to both switching thresholds.

Units: currents in mA, voltages in V, times in ms, except ``drift_tau``
which is in seconds (the drift is orders of magnitude slower than a pulse).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtri

_MS_PER_S = 1000.0

# Smallest uniform fed to the inverse normal CDF; rng.random() can return
# exactly 0.0, which would map to -inf.
_MIN_UNIFORM = 2.0**-54

# Default stochastic calibration: with a 1 ms pulse the switching
# probability crosses 0.5 at 1.515 mA, so the two working amplitudes
# 1.50 mA and 1.53 mA straddle the 50/50 point.
_I_SCALE_DEFAULT = 0.08
_LAMBDA0_DEFAULT = math.log(2.0) * math.exp((1.55 - 1.515) / _I_SCALE_DEFAULT)

# Slope of the second PDR branch, fixed so the H branch sits at 1.15 V when
# carrying 1.50 mA.
_G_HIGH_DEFAULT = (1.50 - 0.40) / (1.15 - 0.70)


class Branch(Enum):
    """Stable resistance branch occupied by the device."""

    L = "L"
    H = "H"


class BranchRangeError(ValueError):
    """Current outside the selected branch's range.

    Physically this is exactly the condition that forces a branch switch.
    """


class ModelRangeError(ValueError):
    """Drift pushed the thresholds outside the model's validity range."""


@dataclass(frozen=True)
class DeviceParams:
    """Static branch geometry plus stochastic switching and drift parameters.

    i_peak / i_valley bound the bistable current window (mA); v_peak /
    v_valley are the voltages ending the first PDR branch and starting the
    second (V); g_high is the slope of the second PDR branch (mA/V).
    lambda0 is the switching hazard at the peak (1/ms) and i_scale the
    e-folding current of the hazard (mA).  drift_sigma (mA) and drift_tau
    (s) set the stationary spread and correlation time of the threshold
    drift.
    """

    i_peak: float = 1.55
    i_valley: float = 0.40
    v_peak: float = 0.40
    v_valley: float = 0.70
    g_high: float = _G_HIGH_DEFAULT
    lambda0: float = _LAMBDA0_DEFAULT
    i_scale: float = _I_SCALE_DEFAULT
    # default drift keeps the working amplitudes several sigma below the
    # deterministic-switching boundary: saturated stretches carry no entropy
    drift_sigma: float = 0.008
    drift_tau: float = 60.0

    def __post_init__(self):
        if not 0.0 < self.i_valley < self.i_peak:
            raise ValueError("require 0 < i_valley < i_peak")
        if not 0.0 < self.v_peak < self.v_valley:
            raise ValueError("require 0 < v_peak < v_valley")
        for name in ("lambda0", "i_scale", "g_high", "drift_tau"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.drift_sigma < 0.0:
            raise ValueError("drift_sigma must be nonnegative")


@dataclass
class DeviceState:
    """Branch occupancy, threshold drift (mA) and elapsed time (ms).

    An instance is advanced sequentially; distinct instances are independent
    and safe to run in parallel.
    """

    branch: Branch = Branch.L
    drift: float = 0.0
    clock: float = 0.0

    def copy_from(self, other: "DeviceState") -> None:
        self.branch = other.branch
        self.drift = other.drift
        self.clock = other.clock


@dataclass(frozen=True)
class SweepTrace:
    """Recorded (current, voltage) points from one current ramp."""

    currents: np.ndarray
    voltages: np.ndarray
    switch_current: float | None

    @property
    def points(self) -> np.ndarray:
        """(steps, 2) array of (current mA, voltage V) pairs."""
        return np.column_stack((self.currents, self.voltages))


def iv_current(params: DeviceParams, v: float) -> float:
    """Static single-valued current at voltage v (voltage-sweep curve).

    Piecewise linear: 0 -> i_peak over [0, v_peak], i_peak -> i_valley over
    [v_peak, v_valley] (the NDR interpolation, only used for plotting), then
    slope g_high beyond v_valley.
    """
    if v < 0.0:
        raise ValueError("voltage must be nonnegative")
    if v <= params.v_peak:
        return params.i_peak * v / params.v_peak
    if v <= params.v_valley:
        frac = (v - params.v_peak) / (params.v_valley - params.v_peak)
        return params.i_peak + (params.i_valley - params.i_peak) * frac
    return params.i_valley + params.g_high * (v - params.v_valley)


def _branch_voltage_unchecked(params: DeviceParams, branch: Branch, i: float) -> float:
    # Linear branch lines without range enforcement; under drift the L
    # branch extends slightly past i_peak (the effective peak is shifted).
    if branch is Branch.L:
        return i * params.v_peak / params.i_peak
    return params.v_valley + (i - params.i_valley) / params.g_high


def branch_voltage(params: DeviceParams, branch: Branch, i: float) -> float:
    """Voltage on the given branch at current i; inverts iv_current.

    L maps [0, i_peak] into [0, v_peak]; H maps [i_valley, inf) into
    [v_valley, inf).  A current outside the branch's range raises
    BranchRangeError.
    """
    if branch is Branch.L:
        if not 0.0 <= i <= params.i_peak:
            raise BranchRangeError(f"current {i} mA outside L branch [0, {params.i_peak}]")
    else:
        if i < params.i_valley:
            raise BranchRangeError(f"current {i} mA below H branch minimum {params.i_valley}")
    return _branch_voltage_unchecked(params, branch, i)


def switching_hazard(params: DeviceParams, state: DeviceState, i: float) -> float:
    """Instantaneous L->H switching rate (1/ms) at current i.

    Zero at or below the drift-shifted valley, exponential in current up to
    the drift-shifted peak, infinite above it (deterministic switch).
    """
    if state.branch is not Branch.L:
        raise ValueError("switching hazard is defined on the L branch")
    return _hazard(params, i, state.drift)


def _hazard(params: DeviceParams, i: float, drift: float) -> float:
    if i <= params.i_valley + drift:
        return 0.0
    if i > params.i_peak + drift:
        return math.inf
    return params.lambda0 * math.exp((i - (params.i_peak + drift)) / params.i_scale)


def step_device(
    state: DeviceState, params: DeviceParams, i: float, dt: float, rng: np.random.Generator
) -> DeviceState:
    """Advance the branch dynamics by dt at constant current i.

    H->L is deterministic below the valley threshold and H is absorbing
    above it (hysteresis); L->H is deterministic above the peak threshold
    and happens with probability 1 - exp(-rate*dt) in between.  Drift is not
    advanced here; see drift_step.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    branch = state.branch
    if branch is Branch.H:
        if i < params.i_valley + state.drift:
            branch = Branch.L
    else:
        if i > params.i_peak + state.drift:
            branch = Branch.H
        elif i > params.i_valley + state.drift:
            rate = _hazard(params, i, state.drift)
            if rng.random() < -math.expm1(-rate * dt):
                branch = Branch.H
    return DeviceState(branch=branch, drift=state.drift, clock=state.clock + dt)


def _ou_coefficients(params: DeviceParams, dt: float) -> tuple[float, float]:
    # Exact discretisation of the mean-reverting drift over a step of dt ms.
    tau_ms = params.drift_tau * _MS_PER_S
    decay = math.exp(-dt / tau_ms)
    scatter = params.drift_sigma * math.sqrt(-math.expm1(-2.0 * dt / tau_ms))
    return decay, scatter


def _draw_normal(rng: np.random.Generator) -> float:
    # Inverse-CDF sampling: one uniform per normal keeps scalar and batched
    # generation on identical rng streams.
    return float(ndtri(max(rng.random(), _MIN_UNIFORM)))


def drift_step(
    state: DeviceState, params: DeviceParams, dt: float, rng: np.random.Generator
) -> DeviceState:
    """Advance the threshold drift by dt (ms) as a mean-reverting walk.

    drift' = drift*exp(-dt/tau) + sigma*sqrt(1 - exp(-2dt/tau))*z with z
    standard normal, so the stationary standard deviation is drift_sigma.
    Always consumes one uniform draw, even for drift_sigma = 0.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    decay, scatter = _ou_coefficients(params, dt)
    z = _draw_normal(rng)
    return DeviceState(
        branch=state.branch, drift=state.drift * decay + scatter * z, clock=state.clock
    )


def sweep_current(
    params: DeviceParams,
    start: float,
    stop: float,
    steps: int,
    dt_per_step: float,
    rng: np.random.Generator,
    state: DeviceState | None = None,
) -> SweepTrace:
    """Ramp the bias current across `steps` points and record the response.

    Each point dwells dt_per_step at its current before the voltage is read,
    mimicking an SMU staircase sweep.  The recorded switch current is the
    grid current for a stochastic L->H jump and the crossed threshold itself
    (peak or valley plus drift) for deterministic jumps.  If `state` is
    given it seeds the sweep and is advanced in place; otherwise the sweep
    starts fresh on the branch consistent with the start current.
    """
    if steps < 2:
        raise ValueError("steps must be at least 2")
    work = DeviceState()
    if state is not None:
        work.copy_from(state)
    # pre-position for the starting bias point: settling there is part of the
    # sweep setup, not a recorded switch
    if work.branch is Branch.L and start > params.i_peak + work.drift:
        work.branch = Branch.H
    elif work.branch is Branch.H and start < params.i_valley + work.drift:
        work.branch = Branch.L
    currents = np.linspace(start, stop, steps)
    voltages = np.empty(steps, dtype=np.float64)
    switch_current: float | None = None
    for k in range(steps):
        i = float(currents[k])
        drift_before = work.drift
        prev = work.branch
        work = step_device(work, params, i, dt_per_step, rng)
        if work.branch is not prev and switch_current is None:
            if work.branch is Branch.H:
                switch_current = min(i, params.i_peak + drift_before)
            else:
                switch_current = params.i_valley + drift_before
        voltages[k] = _branch_voltage_unchecked(params, work.branch, i)
        if params.drift_sigma != 0.0:
            work = drift_step(work, params, dt_per_step, rng)
    if state is not None:
        state.copy_from(work)
    return SweepTrace(currents=currents, voltages=voltages, switch_current=switch_current)


def sweep_switch_probabilities(
    params: DeviceParams, currents: np.ndarray, dt_per_step: float, drift: float = 0.0
) -> np.ndarray:
    """Closed-form switch-current distribution for a forward staircase sweep.

    Probability of the L->H jump landing on each grid point: the device
    survives every earlier dwell and switches during this one.  Grid points
    above the effective peak collapse onto the threshold crossing itself
    (deterministic switch), reported on the first such point.
    """
    currents = np.asarray(currents, dtype=np.float64)
    rates = np.array([_hazard(params, float(i), drift) for i in currents])
    finite = np.isfinite(rates)
    p_switch = np.where(finite, -np.expm1(-np.where(finite, rates, 0.0) * dt_per_step), 1.0)
    survive = np.cumprod(1.0 - p_switch)
    prob = p_switch * np.concatenate(([1.0], survive[:-1]))
    # zero out everything past the deterministic switch
    first_inf = np.argmax(~finite) if (~finite).any() else prob.size
    prob[first_inf + 1 :] = 0.0
    return prob


__all__ = [
    "Branch",
    "BranchRangeError",
    "ModelRangeError",
    "DeviceParams",
    "DeviceState",
    "SweepTrace",
    "iv_current",
    "branch_voltage",
    "switching_hazard",
    "step_device",
    "drift_step",
    "sweep_current",
    "sweep_switch_probabilities",
]
