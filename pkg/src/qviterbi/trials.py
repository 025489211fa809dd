"""Probabilistic decoding variant: load path probabilities straight into
amplitudes, repeat single-shot trials, and extract the mode.

The trial-count planning follows the multinomial-selection analysis: with b
and b' the top-two outcome probabilities, the chance that the empirical
mode misses the most probable outcome decays like exp(-lambda * r) in the
trial count r.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .qva import PathSpace

DEFAULT_TARGET_FAILURE = math.exp(-2.0)

# Absorbs last-ulp float noise so trial counts at exact integer boundaries
# do not round up spuriously.
_CEIL_GUARD = 1e-9


def amplitude_loaded_state(ps: PathSpace, epsilon: float) -> np.ndarray:
    """Statevector with amplitude proportional to sqrt(path probability).

    For code-backed spaces the path probability is epsilon^e (1-epsilon)^(B-e)
    up to the constant uniform message prior, with e the path's bit-error
    count and B the received length in bits.  The argmax amplitude is the
    classical most-likely path.
    """
    if not 0.0 <= epsilon < 0.5:
        raise ValueError("epsilon must lie in [0, 0.5)")
    if ps.code is not None and ps.errors is not None:
        e = ps.errors.astype(float)
        total_bits = ps.n_steps * ps.code.n
        weights = epsilon**e * (1.0 - epsilon) ** (total_bits - e)
    elif ps.weights is not None:
        weights = np.exp(-ps.weights)
    else:
        raise ValueError("path space carries neither a code nor log weights")
    norm = math.sqrt(float(weights.sum()))
    if norm == 0.0:
        raise ValueError("every path has probability zero at this epsilon")
    return np.sqrt(weights).astype(complex) / norm


def mode_failure_rate(b: float, b_prime: float, symmetric: bool = False) -> float:
    """Exponential decay rate of the mode-miss probability, lambda.

    The default denominator carries the term b'(1 + (b-b')^2); symmetric=True
    uses b'(1 + (b-b'))^2 instead, mirroring the b term.
    """
    if not 0.0 <= b_prime <= b <= 1.0:
        raise ValueError("need 0 <= b' <= b <= 1")
    gap = b - b_prime
    second = (1.0 + gap) ** 2 if symmetric else 1.0 + gap**2
    denom = 2.0 * (b * (1.0 - gap) ** 2 + b_prime * second)
    if denom <= 0.0:
        raise ValueError("degenerate distribution: zero denominator")
    return gap**2 / denom


def reduced_mode_failure_rate(e0: float, n_steps: int) -> float:
    """Error-free-codeword reduction of the rate: E0^N / (2 (6 - E0^N))."""
    if not 0.0 < e0 < 1.0:
        raise ValueError("e0 must lie in (0, 1)")
    p = e0**n_steps
    return 0.5 * p / (6.0 - p)


def required_trials(
    n_steps: int,
    e0: float = 0.8,
    target_failure: float = DEFAULT_TARGET_FAILURE,
) -> int:
    """Trials needed so the mode-miss probability drops to target_failure.

    Solves exp(-lambda r) = target with the reduced rate; for e0 = 0.8 and
    target exp(-2) this is ceil(24 * 1.25^N - 4).
    """
    if not 0.0 < target_failure <= 1.0:
        raise ValueError("target_failure must lie in (0, 1]")
    rate = reduced_mode_failure_rate(e0, n_steps)
    raw = -math.log(target_failure) / rate
    return max(1, math.ceil(raw - _CEIL_GUARD * max(1.0, raw)))


@dataclass(frozen=True)
class TrialPlan:
    """A planned trial campaign for a two-outcome-dominated distribution."""

    r: int
    target_failure: float
    b: float
    b_prime: float


def plan_trials(
    b: float,
    b_prime: float,
    target_failure: float = DEFAULT_TARGET_FAILURE,
    symmetric: bool = False,
) -> TrialPlan:
    """Trial count from the general rate formula for given top-two odds."""
    if not 0.0 < target_failure <= 1.0:
        raise ValueError("target_failure must lie in (0, 1]")
    rate = mode_failure_rate(b, b_prime, symmetric=symmetric)
    if rate == 0.0:
        raise ValueError("b == b': no trial count separates the outcomes")
    raw = -math.log(target_failure) / rate
    r = max(1, math.ceil(raw - _CEIL_GUARD * max(1.0, raw)))
    return TrialPlan(r=r, target_failure=target_failure, b=b, b_prime=b_prime)


@dataclass(frozen=True)
class TrialOutcome:
    mode_index: int
    mode_count: int
    counts: Counter


def run_trials(v: np.ndarray, r: int, seed) -> TrialOutcome:
    """Draw r single-shot measurements and extract the mode.

    The draws are sorted and scanned for the longest run, so ties resolve to
    the lexicographically smallest outcome.
    """
    if r < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    p = np.abs(np.asarray(v)) ** 2
    p = p / p.sum()
    draws = np.sort(rng.choice(len(p), size=r, p=p))
    best_value = int(draws[0])
    best_run = 0
    run_value, run_len = int(draws[0]), 0
    for d in draws:
        d = int(d)
        if d == run_value:
            run_len += 1
        else:
            run_value, run_len = d, 1
        if run_len > best_run:
            best_value, best_run = run_value, run_len
    values, counts = np.unique(draws, return_counts=True)
    histogram = Counter({int(i): int(c) for i, c in zip(values, counts)})
    return TrialOutcome(mode_index=best_value, mode_count=best_run, counts=histogram)


@dataclass(frozen=True)
class CostReport:
    """Oracle-call totals for the two decoding strategies at one frame size."""

    n_steps: int
    probabilistic_calls: int
    amplified_calls: int
    ratio: float


def compare_costs(
    n_steps: int,
    fanout: int = 2,
    prob_trials: int | None = None,
    qva_iterations: int | None = None,
    e0: float = 0.8,
    target_failure: float = DEFAULT_TARGET_FAILURE,
) -> CostReport:
    """Single-iteration trials versus iterated amplification call counts.

    The probabilistic strategy spends one marking pass per trial; the
    iterated strategy spends ceil(pi/4 sqrt(F^N)) passes on O(1) trials.
    """
    if prob_trials is None:
        prob_trials = required_trials(n_steps, e0, target_failure)
    if qva_iterations is None:
        qva_iterations = math.ceil(math.pi / 4.0 * math.sqrt(float(fanout**n_steps)))
    return CostReport(
        n_steps=n_steps,
        probabilistic_calls=prob_trials,
        amplified_calls=qva_iterations,
        ratio=prob_trials / qva_iterations,
    )
