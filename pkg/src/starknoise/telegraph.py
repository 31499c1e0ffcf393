"""Two-state Markov (telegraph) occupancy dynamics for charge traps."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class TelegraphRates:
    """Capture rate k+ and release rate k-, in a shared (arbitrary) time unit."""

    k_plus: float
    k_minus: float

    def __post_init__(self) -> None:
        if self.k_plus < 0.0 or self.k_minus < 0.0:
            raise ValueError("rates must be non-negative")
        if self.k_plus + self.k_minus <= 0.0:
            raise ValueError("k_plus + k_minus must be positive")


@dataclass(frozen=True)
class OccupancySteadyState:
    p: float
    tau: float


def steady_state(rates: TelegraphRates) -> OccupancySteadyState:
    """Stationary occupancy p = k+/(k+ + k-) and switching time tau = 1/(k+ + k-)."""
    total = rates.k_plus + rates.k_minus
    return OccupancySteadyState(p=rates.k_plus / total, tau=1.0 / total)


@dataclass(frozen=True)
class TelegraphTrajectory:
    """Piecewise-constant path: segment i holds states[i] from times[i] on."""

    times: np.ndarray
    states: np.ndarray
    duration: float

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=int)
        if times.shape != states.shape or times.ndim != 1 or times.size == 0:
            raise ValueError("times and states must be equal-length 1-D arrays")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0.0):
            raise ValueError("times must start at 0 and increase strictly")
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def state_at(self, t: float | np.ndarray) -> np.ndarray:
        """State of the path at time(s) t in [0, duration]."""
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right") - 1
        return self.states[np.clip(idx, 0, self.states.size - 1)]

    def occupied_fraction(self) -> float:
        """Fraction of the total duration spent in state 1."""
        ends = np.append(self.times[1:], self.duration)
        return float(((ends - self.times) * self.states).sum() / self.duration)

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w") as fh:
            fh.write("t,state\n")
            for t, s in zip(self.times, self.states):
                fh.write(f"{float(t):.12g},{int(s)}\n")


def sample_trajectory(
    rates: TelegraphRates,
    duration: float,
    initial: int,
    seed: int,
) -> TelegraphTrajectory:
    """Simulate one telegraph path with exponential waiting times.

    Waiting time in state 0 is exponential with rate k+; in state 1 with
    rate k-.  A zero exit rate pins the path in its current state.
    Deterministic for a given seed.
    """
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    if initial not in (0, 1):
        raise ValueError("initial state must be 0 or 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    exit_rate = (rates.k_plus, rates.k_minus)
    times = [0.0]
    states = [initial]
    t, s = 0.0, initial
    while True:
        rate = exit_rate[s]
        if rate <= 0.0:
            break
        t += rng.exponential(1.0 / rate)
        if t >= duration:
            break
        s = 1 - s
        times.append(t)
        states.append(s)
    return TelegraphTrajectory(times=np.array(times), states=np.array(states), duration=duration)


def sample_stationary(p: float, n_traps: int, seed: int) -> np.ndarray:
    """Independent Bernoulli(p) occupancy snapshot for n_traps traps."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    if n_traps < 0:
        raise ValueError("n_traps must be non-negative")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return (rng.random(n_traps) < p).astype(int)
