"""Path-space statevector simulation of amplitude-amplified trellis search.

The simulation lives directly on the L = F^N admissible paths rather than
the full register Hilbert space: the marking and diffusion operators act as
the identity off that subspace, and indexing paths by their message bits
keeps a million-path space (N = 20 for a rate-1/2 code) tractable.

One amplification iteration is a phase-marking pass (each path amplitude is
multiplied by exp(i * omega * bit_error_count)) followed by inversion about
the mean restricted to the admissible subspace.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .convcode import ConvCode, hamming, split_blocks
from .errors import DecodeFailure, SizeLimitError
from .hmm import Hmm

PATH_SPACE_LIMIT = 1 << 24

PHASE_MODES = ("errors", "neglog")


class PathSpace:
    """Ordered admissible paths with their per-path phase exponents.

    Code-backed spaces index paths by the message bits read as an integer
    and reconstruct state sequences on demand; HMM-backed spaces store the
    enumerated paths explicitly.  errors holds integer bit-error counts,
    weights holds negative log path probabilities (general HMM mode).
    """

    def __init__(
        self,
        n_steps: int,
        errors: np.ndarray | None,
        weights: np.ndarray | None,
        *,
        code: ConvCode | None = None,
        blocks: tuple[str, ...] | None = None,
        initial_state: int = 0,
        next_table: np.ndarray | None = None,
        explicit_paths: tuple[tuple[int, ...], ...] | None = None,
        input_bits: int | None = None,
    ):
        self.n_steps = n_steps
        self.errors = errors
        self.weights = weights
        self.code = code
        self.blocks = blocks
        self.initial_state = initial_state
        self._next = next_table
        self._paths = explicit_paths
        self._input_bits = input_bits
        ref = errors if errors is not None else weights
        self.L = int(len(ref))

    def exponents(self, phase_mode: str = "errors") -> np.ndarray:
        if phase_mode == "errors":
            if self.errors is None:
                raise ValueError("this path space carries no integer error counts")
            return self.errors
        if phase_mode == "neglog":
            if self.weights is None:
                raise ValueError("this path space carries no log-probability weights")
            return self.weights
        raise ValueError(f"unknown phase mode {phase_mode!r}")

    @property
    def viterbi_index(self) -> int:
        """Index of the most probable path (ties go to the smallest index)."""
        ref = self.errors if self.errors is not None else self.weights
        return int(np.argmin(ref))

    def path(self, index: int) -> tuple[int, ...]:
        """State sequence of path `index`, including the start state."""
        if not 0 <= index < self.L:
            raise IndexError("path index out of range")
        if self._paths is not None:
            return self._paths[index]
        k = self.code.k
        state = self.initial_state
        out = [state]
        for t in range(self.n_steps):
            u = (index >> (k * (self.n_steps - 1 - t))) & ((1 << k) - 1)
            state = int(self._next[state, u])
            out.append(state)
        return tuple(out)

    def paths(self) -> list[tuple[int, ...]]:
        """Materialized path list; guarded because it is O(L * N) memory."""
        if self.L > (1 << 16):
            raise SizeLimitError("path list too large to materialize; use path(i)")
        return [self.path(i) for i in range(self.L)]

    def message(self, index: int) -> str | None:
        """Message bits driving path `index` (code-backed spaces only)."""
        if self._input_bits is None:
            return None
        return format(index, f"0{self._input_bits * self.n_steps}b")

    def exponent_multiset(self) -> Counter:
        if self.errors is None:
            raise ValueError("this path space carries no integer error counts")
        return Counter(int(e) for e in self.errors)


def build_path_space(code: ConvCode, received: str, initial_state: int = 0) -> PathSpace:
    """Enumerate all message sequences and their total bit-error counts.

    Path i is the one driven by the k*N message bits of i (most significant
    block first) starting from initial_state.
    """
    if set(received) - {"0", "1"}:
        raise ValueError("received word may only contain '0' and '1'")
    blocks = tuple(split_blocks(received, code.n))
    n = len(blocks)
    if n < 1:
        raise ValueError("received word is empty")
    if not 0 <= initial_state < code.num_states:
        raise ValueError("initial state out of range")
    if code.fanout**n > PATH_SPACE_LIMIT:
        raise SizeLimitError(f"{code.fanout}^{n} paths exceeds the path-space guard")

    fan = code.fanout
    next_table = np.zeros((code.num_states, fan), dtype=np.int64)
    outputs = [[""] * fan for _ in range(code.num_states)]
    for t in code.state_diagram():
        next_table[t.from_state, t.input] = t.to_state
        outputs[t.from_state][t.input] = t.output

    L = fan**n
    idx = np.arange(L, dtype=np.int64)
    states = np.full(L, initial_state, dtype=np.int64)
    errors = np.zeros(L, dtype=np.int64)
    for t, y in enumerate(blocks):
        err_table = np.array(
            [[hamming(out, y) for out in row] for row in outputs], dtype=np.int64
        )
        u = (idx >> (code.k * (n - 1 - t))) & (fan - 1)
        errors += err_table[states, u]
        states = next_table[states, u]

    return PathSpace(
        n_steps=n,
        errors=errors,
        weights=None,
        code=code,
        blocks=blocks,
        initial_state=initial_state,
        next_table=next_table,
        input_bits=code.k,
    )


def build_path_space_hmm(h: Hmm, emissions: Sequence[str], initial_state: int = 0) -> PathSpace:
    """Enumerate admissible paths of a general HMM with neg-log weights."""
    n = len(emissions)
    if n < 1:
        raise ValueError("need at least one emission")
    fan = h.fanout().fanout
    if fan**n > PATH_SPACE_LIMIT:
        raise SizeLimitError(f"about {fan}^{n} paths exceeds the path-space guard")

    paths: list[tuple[int, ...]] = []
    weights: list[float] = []
    errors: list[int] = []
    has_errors = h.branch_errors is not None

    def walk(i: int, t: int, w: float, e: int, trail: list[int]):
        if t == n:
            paths.append(tuple(trail))
            weights.append(w)
            if has_errors:
                errors.append(e)
            return
        y = emissions[t]
        for j, p in h.successors(i, y):
            joint = p * h.emit.get((i, j, y), 0.0)
            wj = math.inf if joint == 0.0 else -math.log(joint)
            ej = h.branch_errors[(i, j, y)] if has_errors else 0
            trail.append(j)
            walk(j, t + 1, w + wj, e + ej, trail)
            trail.pop()

    walk(initial_state, 0, 0.0, 0, [initial_state])
    if not paths:
        raise ValueError("no admissible path; check the model and emissions")
    return PathSpace(
        n_steps=n,
        errors=np.asarray(errors, dtype=np.int64) if has_errors else None,
        weights=np.asarray(weights, dtype=float),
        initial_state=initial_state,
        explicit_paths=tuple(paths),
        input_bits=h.input_bits if h.edge_inputs is not None else None,
    )


@dataclass(frozen=True)
class QvaParams:
    """Phase unit, iteration count, and phase-exponent source for a run."""

    omega: float
    iterations: int
    phase_mode: str = "errors"

    def __post_init__(self):
        if not 0.0 <= self.omega <= math.pi:
            raise ValueError("omega must lie in [0, pi]")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.phase_mode not in PHASE_MODES:
            raise ValueError(f"phase_mode must be one of {PHASE_MODES}")


@dataclass(frozen=True)
class RunResult:
    """Final statevector plus the probabilities the experiments report."""

    statevector: np.ndarray
    prob_top: float      # probability of the classically optimal path
    top_index: int       # argmax of the measured distribution


def uniform_superposition(ps: PathSpace) -> np.ndarray:
    """Equal amplitude 1/sqrt(L) on every admissible path."""
    if ps.L < 1:
        raise ValueError("empty path space")
    return np.full(ps.L, 1.0 / math.sqrt(ps.L), dtype=complex)


def phase_mark(ps: PathSpace, v: np.ndarray, params: QvaParams) -> np.ndarray:
    """Multiply amplitude i by exp(i * omega * exponent_i); norm preserved."""
    x = ps.exponents(params.phase_mode)
    return v * np.exp(1j * params.omega * x)


def diffuse(v: np.ndarray) -> np.ndarray:
    """Inversion about the mean restricted to the admissible subspace.

    Row i of the operator is 2/L everywhere except -(L-2)/L on the diagonal,
    the standard Grover diffusion.
    """
    L = len(v)
    return (2.0 / L) * v.sum() - v


def amplify_phases(g: np.ndarray, iterations: int) -> np.ndarray:
    """Run `iterations` mark+diffuse rounds from uniform with marking diagonal g."""
    g = np.asarray(g, dtype=complex)
    v = np.full(len(g), 1.0 / math.sqrt(len(g)), dtype=complex)
    for _ in range(iterations):
        v = g * v
        v = diffuse(v)
    return v


def run_qva(ps: PathSpace, params: QvaParams) -> RunResult:
    """Uniform superposition, then `iterations` mark+diffuse rounds.

    prob_top is the probability of measuring the classical-Viterbi optimal
    path; top_index is the most likely measurement outcome.
    """
    v = uniform_superposition(ps)
    for _ in range(params.iterations):
        v = phase_mark(ps, v, params)
        v = diffuse(v)
    probs = np.abs(v) ** 2
    return RunResult(
        statevector=v,
        prob_top=float(probs[ps.viterbi_index]),
        top_index=int(np.argmax(probs)),
    )


def single_iteration_prob(g: np.ndarray, target: int) -> float:
    """Closed form for the target probability after one mark+diffuse round.

    For a unit-modulus marking diagonal g the amplitude of entry t after one
    round from uniform is -(g_t (L-2) - 2 sum_{i != t} g_i) / L^(3/2).
    """
    g = np.asarray(g, dtype=complex)
    L = len(g)
    if L < 2:
        raise ValueError("need at least two paths")
    if not 0 <= target < L:
        raise ValueError("target index out of range")
    if np.max(np.abs(np.abs(g) - 1.0)) > 1e-9:
        raise ValueError("marking diagonal must have unit modulus entries")
    rest = g.sum() - g[target]
    return float(np.abs(g[target] * (L - 2) - 2.0 * rest) ** 2 / L**3)


@dataclass(frozen=True)
class SweepResult:
    omega_star: float
    prob_star: float
    omegas: np.ndarray
    probs: np.ndarray
    top_indices: np.ndarray


def _golden_max(f, lo: float, hi: float, tol: float = 1e-4) -> tuple[float, float]:
    """Golden-section maximization of a unimodal-enough bracket."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def sweep_omega(
    ps: PathSpace,
    iterations: int,
    grid: float = 0.005,
    phase_mode: str = "errors",
) -> SweepResult:
    """Grid search over omega in (0, pi), then golden-section refinement.

    The objective is the probability of the classically optimal path after
    the given number of iterations.  The full grid curve is returned so
    callers can plot or diff it.
    """
    if not 0.0 < grid < math.pi:
        raise ValueError("grid step must lie in (0, pi)")
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    x = ps.exponents(phase_mode)
    vit = ps.viterbi_index
    omegas = np.arange(grid, math.pi, grid)

    marks = np.exp(1j * omegas[:, None] * x[None, :])
    amps = np.full((len(omegas), ps.L), 1.0 / math.sqrt(ps.L), dtype=complex)
    for _ in range(iterations):
        amps *= marks
        amps = (2.0 / ps.L) * amps.sum(axis=1, keepdims=True) - amps
    probs = np.abs(amps[:, vit]) ** 2
    top_indices = np.argmax(np.abs(amps) ** 2, axis=1)

    best = int(np.argmax(probs))

    def objective(w: float) -> float:
        v = amplify_phases(np.exp(1j * w * x), iterations)
        return float(np.abs(v[vit]) ** 2)

    lo = max(omegas[best] - grid, 1e-9)
    hi = min(omegas[best] + grid, math.pi - 1e-9)
    w_star, p_star = _golden_max(objective, lo, hi)
    if probs[best] > p_star:
        w_star, p_star = float(omegas[best]), float(probs[best])
    return SweepResult(
        omega_star=w_star,
        prob_star=p_star,
        omegas=omegas,
        probs=probs,
        top_indices=top_indices,
    )


def measure(v: np.ndarray, seed, shots: int) -> Counter:
    """Sample `shots` outcomes from |v|^2 with a seeded generator."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(seed)
    p = np.abs(np.asarray(v)) ** 2
    p = p / p.sum()
    draws = rng.choice(len(p), size=shots, p=p)
    values, counts = np.unique(draws, return_counts=True)
    return Counter({int(i): int(c) for i, c in zip(values, counts)})


def mode_of(counts: Counter) -> tuple[int, int]:
    """Most frequent outcome; ties broken toward the smallest index."""
    if not counts:
        raise ValueError("empty histogram")
    index = min(counts, key=lambda i: (-counts[i], i))
    return index, counts[index]


@dataclass(frozen=True)
class ScheduleEntry:
    """One error class of an adaptive schedule.

    max_errors is the class's re-encoding budget: a measured mode is accepted
    when its re-encoded codeword is within max_errors bits of the received
    word.
    """

    omega: float
    iterations: int
    trials: int
    max_errors: int


@dataclass(frozen=True)
class ClassAttempt:
    class_index: int
    max_errors: int
    mode_index: int
    mode_count: int
    distance: int
    accepted: bool


@dataclass(frozen=True)
class AdaptiveDecodeResult:
    message: str
    path: tuple[int, ...]
    metric: int          # re-encoding distance of the accepted mode
    accepted_class: int
    attempts: tuple[ClassAttempt, ...]


def _seed_list(seed) -> list:
    if seed is None:
        return [0]
    if isinstance(seed, (list, tuple)):
        return list(seed)
    return [seed]


def adaptive_decode(
    code: ConvCode,
    received: str,
    schedule: Sequence[ScheduleEntry],
    initial_state: int = 0,
    seed=0,
) -> AdaptiveDecodeResult:
    """Adaptive decoding over a schedule of error classes.

    For each class, run the amplification at the class's phase unit, take the
    mode of `trials` single-shot measurements, and accept it if re-encoding
    lands within the class's error budget of the received word.  Classes are
    consulted in the given order; exhaustion raises DecodeFailure.
    """
    if not schedule:
        raise ValueError("schedule must not be empty")
    if not received:
        raise ValueError("received word is empty")
    ps = build_path_space(code, received, initial_state)
    base = _seed_list(seed)
    attempts: list[ClassAttempt] = []
    for cls, entry in enumerate(schedule):
        params = QvaParams(omega=entry.omega, iterations=entry.iterations)
        result = run_qva(ps, params)
        counts = measure(result.statevector, base + [cls], entry.trials)
        mode, count = mode_of(counts)
        message = ps.message(mode)
        distance = hamming(code.encode(message, initial_state), received)
        accepted = distance <= entry.max_errors
        attempts.append(
            ClassAttempt(cls, entry.max_errors, mode, count, distance, accepted)
        )
        if accepted:
            return AdaptiveDecodeResult(
                message=message,
                path=ps.path(mode),
                metric=distance,
                accepted_class=cls,
                attempts=tuple(attempts),
            )
    raise DecodeFailure(f"all {len(schedule)} error classes exhausted: {attempts}")


def formula_iterations(code: ConvCode, n_steps: int) -> int:
    """ceil(pi/4 * sqrt(F^N)), the usual amplitude-amplification count."""
    return math.ceil(math.pi / 4.0 * math.sqrt(float(code.fanout**n_steps)))


def representative_received(code: ConvCode, n_steps: int, n_errors: int) -> str:
    """All-zero codeword with n_errors flips spread one per block."""
    bits = list("0" * (n_steps * code.n))
    total = len(bits)
    if n_errors > total:
        raise ValueError("more errors than codeword bits")
    for i in range(n_errors):
        pos = (i % n_steps) * code.n + (i // n_steps)
        bits[pos] = "1"
    return "".join(bits)


def default_schedule(
    code: ConvCode,
    n_steps: int,
    epsilon: float,
    max_errors: int = 2,
    trials: int = 7,
    iterations: int | None = None,
    grid: float = 0.01,
    initial_state: int = 0,
) -> list[ScheduleEntry]:
    """Schedule over error classes 0..max_errors ordered by class probability.

    The phase unit of each class is precomputed by sweeping on a
    representative received word with that many channel errors.
    """
    if iterations is None:
        iterations = formula_iterations(code, n_steps)
    total_bits = n_steps * code.n
    classes = list(range(max_errors + 1))
    classes.sort(
        key=lambda e: -(
            math.comb(total_bits, e) * epsilon**e * (1.0 - epsilon) ** (total_bits - e)
        )
    )
    schedule = []
    for e in classes:
        rep = representative_received(code, n_steps, e)
        sw = sweep_omega(build_path_space(code, rep, initial_state), iterations, grid)
        schedule.append(
            ScheduleEntry(
                omega=sw.omega_star,
                iterations=iterations,
                trials=trials,
                max_errors=e,
            )
        )
    return schedule
