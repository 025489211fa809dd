"""Classical most-likely-path decoding.

viterbi_decode is the dynamic-programming decoder used as ground truth for
the quantum simulations; brute_force_decode enumerates every admissible
path and exists purely as an independent oracle for tests and verification.

Code-derived HMMs (those carrying branch_errors metadata) are decoded with
exact integer bit-error metrics; general HMMs fall back to negative log
probability with a small comparison slack.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import NoPathError, SizeLimitError
from .hmm import Hmm

# Largest admissible-path count the enumeration oracle will walk.
ENUMERATION_LIMIT = 1 << 24

# Relative slack for float metric comparisons; integer metrics compare exactly.
FLOAT_SLACK = 1e-12


@dataclass(frozen=True)
class DecodeResult:
    """A decoded path, the message driving it, its metric, and the tie count.

    path includes the start state, so it has one more entry than the number
    of receive blocks.  metric is the total bit-error count for code-derived
    HMMs and the negative log probability otherwise.  ties counts co-optimal
    paths; the reported path is the lexicographically smallest of them.
    """

    path: tuple[int, ...]
    message: str | None
    metric: float
    ties: int


def _branch_cost(h: Hmm, i: int, j: int, y: str) -> float:
    if h.branch_errors is not None:
        return h.branch_errors[(i, j, y)]
    p = h.trans[(i, j, y)] * h.emit.get((i, j, y), 0.0)
    return math.inf if p == 0.0 else -math.log(p)

def _slack(h: Hmm, value: float) -> float:
    if h.branch_errors is not None:
        return 0.0
    return FLOAT_SLACK * max(1.0, abs(value))


def _check_emissions(h: Hmm, emissions: Sequence[str]) -> None:
    if len(emissions) < 1:
        raise ValueError("need at least one receive block")
    for y in emissions:
        if y not in h._emission_set:
            raise ValueError(f"emission {y!r} not in the model alphabet")


def _message(h: Hmm, path: Sequence[int]) -> str | None:
    if h.edge_inputs is None or h.input_bits is None:
        return None
    blocks = [
        format(h.edge_inputs[(path[t], path[t + 1])], f"0{h.input_bits}b")
        for t in range(len(path) - 1)
    ]
    return "".join(blocks)


def viterbi_decode(h: Hmm, emissions: Sequence[str], initial_state: int = 0) -> DecodeResult:
    """Most probable state path given the receive blocks.

    Runs a backward cost-to-go pass followed by a greedy forward traceback,
    so that among co-optimal paths the lexicographically smallest state
    sequence is returned deterministically.
    """
    _check_emissions(h, emissions)
    if not 0 <= initial_state < h.num_states:
        raise ValueError("initial state out of range")
    n = len(emissions)
    q = h.num_states

    # cost-to-go[t][i]: best total branch cost from state i at time t to the end
    to_go = [[math.inf] * q for _ in range(n + 1)]
    ways = [[0] * q for _ in range(n + 1)]
    to_go[n] = [0.0] * q
    ways[n] = [1] * q
    for t in range(n - 1, -1, -1):
        y = emissions[t]
        for i in range(q):
            candidates = [
                (_branch_cost(h, i, j, y) + to_go[t + 1][j], j)
                for j, _p in h.successors(i, y)
            ]
            if not candidates:
                continue
            best = min(c for c, _ in candidates)
            if best == math.inf:
                continue
            tol = _slack(h, best)
            to_go[t][i] = best
            ways[t][i] = sum(ways[t + 1][j] for c, j in candidates if c <= best + tol)

    total = to_go[0][initial_state]
    if total == math.inf:
        raise NoPathError(f"no admissible path from state {initial_state}")

    path = [initial_state]
    i = initial_state
    for t in range(n):
        y = emissions[t]
        tol = _slack(h, to_go[t][i])
        for j, _p in h.successors(i, y):
            if _branch_cost(h, i, j, y) + to_go[t + 1][j] <= to_go[t][i] + tol:
                path.append(j)
                i = j
                break
    metric = int(total) if h.branch_errors is not None else total
    return DecodeResult(
        path=tuple(path),
        message=_message(h, path),
        metric=metric,
        ties=ways[0][initial_state],
    )


def _guard_enumeration(h: Hmm, n: int) -> None:
    fan = h.fanout().fanout
    if fan**n > ENUMERATION_LIMIT:
        raise SizeLimitError(f"about {fan}^{n} paths exceeds the enumeration guard")


def brute_force_decode(h: Hmm, emissions: Sequence[str], initial_state: int = 0) -> DecodeResult:
    """Exhaustive oracle: walk every admissible path and keep the best.

    Depth-first in successor order, so paths are visited in lexicographic
    order and the first optimum seen is the lexicographically smallest.
    """
    _check_emissions(h, emissions)
    n = len(emissions)
    _guard_enumeration(h, n)

    best_metric = math.inf
    best_path: tuple[int, ...] | None = None
    ties = 0

    def walk(i: int, t: int, acc: float, trail: list[int]):
        nonlocal best_metric, best_path, ties
        if t == n:
            tol = _slack(h, min(acc, best_metric))
            if acc < best_metric - tol:
                best_metric, best_path, ties = acc, tuple(trail), 1
            elif abs(acc - best_metric) <= tol:
                ties += 1
            return
        for j, _p in h.successors(i, emissions[t]):
            cost = _branch_cost(h, i, j, emissions[t])
            if cost == math.inf:
                continue
            trail.append(j)
            walk(j, t + 1, acc + cost, trail)
            trail.pop()

    walk(initial_state, 0, 0.0, [initial_state])
    if best_path is None:
        raise NoPathError(f"no admissible path from state {initial_state}")
    metric = int(best_metric) if h.branch_errors is not None else best_metric
    return DecodeResult(
        path=best_path,
        message=_message(h, best_path),
        metric=metric,
        ties=ties,
    )


def path_metric_multiset(h: Hmm, emissions: Sequence[str], initial_state: int = 0) -> Counter:
    """Multiset of total bit-error counts over all admissible paths.

    These are exactly the exponents appearing on the phase-marking diagonal,
    so this enumeration serves as the oracle for the path-space builder.
    """
    if h.branch_errors is None:
        raise ValueError("integer branch metrics required (code-derived HMM)")
    _check_emissions(h, emissions)
    n = len(emissions)
    _guard_enumeration(h, n)

    out: Counter = Counter()

    def walk(i: int, t: int, acc: int):
        if t == n:
            out[acc] += 1
            return
        y = emissions[t]
        for j, _p in h.successors(i, y):
            walk(j, t + 1, acc + h.branch_errors[(i, j, y)])

    walk(initial_state, 0, 0)
    return out
