"""Seeded Monte Carlo emulation of the gated generator.

Each detection gate draws input photon numbers, routes them through the
splitter, applies threshold detection and classifies the gate as bit 0,
bit 1, a discarded collision, or no click.

Randomness comes from a counter-based Philox stream: every gate owns a fixed
budget of 8 uniforms (two Philox blocks), so each gate's draws are a pure
function of (seed, gate_index). Runs can therefore be chunked or partitioned
across workers by gate ranges and still reproduce the serial outcome
sequence bit for bit. This internal generator is simulation plumbing only;
the randomness being modeled is the physics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import BinaryIO, Iterator

import numpy as np

from .detection import DetectorPair
from .fock import (
    OccupationPair,
    SourceKind,
    SourceModel,
    _bs_probabilities_array,
    _routing_probabilities_array,
)

_UNIFORMS_PER_GATE = 8  # two Philox blocks of four 64-bit outputs each
_BLOCKS_PER_GATE = 2

# Uniform slot assignment within a gate.
_SLOT_ARM_A = 0
_SLOT_ARM_B = 1
_SLOT_BRANCH = 2
_SLOT_SPLITTER = 3
_SLOT_CLICK0 = 4
_SLOT_CLICK1 = 5

_PHOTON_TAIL = 1e-15


class ResourceLimitError(RuntimeError):
    """Raised when a run would buffer more gates than allowed without a sink."""


class Outcome(IntEnum):
    """Per-gate classification; values match the streamed byte format."""

    NONE = 0x00
    BIT0 = 0x01
    BIT1 = 0x02
    COLLISION = 0x03


@dataclass(frozen=True)
class SimConfig:
    seed: int
    n_gates: int
    mu: float
    source: SourceModel
    detectors: DetectorPair = DetectorPair()
    gate_rate: float = 100_000.0  # gates per second, metadata only

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit value, got {self.seed}")
        if self.n_gates < 1:
            raise ValueError(f"n_gates must be at least 1, got {self.n_gates}")
        if self.mu <= 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.gate_rate <= 0.0:
            raise ValueError(f"gate_rate must be positive, got {self.gate_rate}")


@dataclass(frozen=True)
class EventRecord:
    gate_index: int
    outcome: Outcome


@dataclass(frozen=True)
class EventTally:
    """Outcome counts of a run plus empirical rates with binomial errors."""

    n_gates: int
    bit0: int
    bit1: int
    collision: int
    none: int

    def __post_init__(self):
        if self.bit0 + self.bit1 + self.collision + self.none != self.n_gates:
            raise ValueError("outcome counts must sum to n_gates")

    @classmethod
    def from_outcomes(cls, outcomes: np.ndarray) -> "EventTally":
        counts = np.bincount(outcomes, minlength=4)
        return cls(
            n_gates=int(outcomes.size),
            bit0=int(counts[Outcome.BIT0]),
            bit1=int(counts[Outcome.BIT1]),
            collision=int(counts[Outcome.COLLISION]),
            none=int(counts[Outcome.NONE]),
        )

    def __add__(self, other: "EventTally") -> "EventTally":
        return EventTally(
            self.n_gates + other.n_gates,
            self.bit0 + other.bit0,
            self.bit1 + other.bit1,
            self.collision + other.collision,
            self.none + other.none,
        )

    @property
    def p_gen(self) -> float:
        return (self.bit0 + self.bit1) / self.n_gates

    @property
    def p_disc(self) -> float:
        return self.collision / self.n_gates

    def p_gen_stderr(self) -> float:
        return math.sqrt(self.p_gen * (1.0 - self.p_gen) / self.n_gates)

    def p_disc_stderr(self) -> float:
        return math.sqrt(self.p_disc * (1.0 - self.p_disc) / self.n_gates)

    def to_text(self) -> str:
        lines = [
            f"n_gates={self.n_gates}",
            f"bit0={self.bit0}",
            f"bit1={self.bit1}",
            f"collision={self.collision}",
            f"none={self.none}",
            f"p_gen={self.p_gen:.9g}",
            f"p_gen_stderr={self.p_gen_stderr():.9g}",
            f"p_disc={self.p_disc:.9g}",
            f"p_disc_stderr={self.p_disc_stderr():.9g}",
        ]
        return "\n".join(lines) + "\n"


def gate_uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """Uniform draws for gates [start, stop), shape (stop-start, 8).

    Row i holds the draws of gate start+i, taken from Philox output blocks
    [2*(start+i), 2*(start+i)+2). The mapping depends only on (seed, index).
    """
    n = stop - start
    bitgen = np.random.Philox(key=seed, counter=start * _BLOCKS_PER_GATE)
    u = np.random.Generator(bitgen).random(n * _UNIFORMS_PER_GATE)
    return u.reshape(n, _UNIFORMS_PER_GATE)


def _poisson_cdf_array(mean: float) -> np.ndarray:
    """Poisson CDF table covering all but ~1e-15 of the mass."""
    cap = int(mean + 12.0 * math.sqrt(mean) + 60.0)
    terms = [math.exp(-mean)]
    cum = terms[0]
    k = 0
    while cum < 1.0 - _PHOTON_TAIL and k < cap:
        k += 1
        terms.append(terms[-1] * mean / k)
        cum += terms[-1]
    return np.cumsum(terms)


def _inverse_cdf(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1)


class _SamplerTables:
    """Precomputed inverse-CDF tables for one configuration.

    Splitter outcome rows are laid out per input pair (m, n); the tables are
    tiny and amortize over millions of gates.
    """

    def __init__(self, cfg: SimConfig):
        kind = cfg.source.kind
        if kind is SourceKind.SINGLE:
            self.arm_a_cdf = _poisson_cdf_array(cfg.mu)
            self.arm_b_cdf = None
            max_arm_a = len(self.arm_a_cdf) - 1
            max_arm_b = 0
        else:
            half = _poisson_cdf_array(cfg.mu / 2.0)
            self.arm_a_cdf = half
            self.arm_b_cdf = half
            max_arm_a = max_arm_b = len(half) - 1
        self.max_arm_a = max_arm_a
        self.max_arm_b = max_arm_b
        self.max_total = max_arm_a + max_arm_b

        width = self.max_total + 1
        self._row_stride = max_arm_b + 1

        def build(rows_fn):
            table = np.ones((max_arm_a + 1, max_arm_b + 1, width))
            for m in range(max_arm_a + 1):
                for n in range(max_arm_b + 1):
                    row = np.cumsum(rows_fn(m, n))
                    table[m, n, : len(row)] = row
                    table[m, n, len(row) :] = 1.0
            return table.reshape(-1, width)

        self.interfering_cdf = (
            build(_bs_probabilities_array)
            if kind in (SourceKind.INDISTINGUISHABLE, SourceKind.MIXTURE)
            else None
        )
        self.routing_cdf = (
            build(_routing_probabilities_array)
            if kind is not SourceKind.INDISTINGUISHABLE
            else None
        )

        counts = np.arange(width)
        self.click0 = 1.0 - (1.0 - cfg.detectors.eta0) ** counts
        self.click1 = 1.0 - (1.0 - cfg.detectors.eta1) ** counts

    def row_index(self, m: np.ndarray, n: np.ndarray) -> np.ndarray:
        return m * self._row_stride + n


def _sample_rows(cdf_rows: np.ndarray, rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF sample one value per gate from per-gate table rows."""
    out = np.empty(len(rows), dtype=np.int64)
    if len(rows) == 0:
        return out
    order = np.argsort(rows, kind="stable")
    sorted_rows = rows[order]
    boundaries = np.flatnonzero(np.diff(sorted_rows)) + 1
    for seg in np.split(order, boundaries):
        row = rows[seg[0]]
        out[seg] = _inverse_cdf(cdf_rows[row], u[seg])
    return out


def _simulate_range(
    cfg: SimConfig, start: int, stop: int, tables: _SamplerTables | None = None
) -> np.ndarray:
    """Outcome codes for gates [start, stop); pure in (cfg, start, stop)."""
    if tables is None:
        tables = _SamplerTables(cfg)
    u = gate_uniforms(cfg.seed, start, stop)
    n_gates = stop - start

    m = _inverse_cdf(tables.arm_a_cdf, u[:, _SLOT_ARM_A])
    if tables.arm_b_cdf is None:
        n = np.zeros(n_gates, dtype=np.int64)
    else:
        n = _inverse_cdf(tables.arm_b_cdf, u[:, _SLOT_ARM_B])
    total = m + n
    rows = tables.row_index(m, n)

    kind = cfg.source.kind
    if kind is SourceKind.INDISTINGUISHABLE:
        out_m = _sample_rows(tables.interfering_cdf, rows, u[:, _SLOT_SPLITTER])
    elif kind is SourceKind.MIXTURE:
        interfere = u[:, _SLOT_BRANCH] < cfg.source.overlap
        out_m = np.empty(n_gates, dtype=np.int64)
        if interfere.any():
            out_m[interfere] = _sample_rows(
                tables.interfering_cdf, rows[interfere], u[interfere, _SLOT_SPLITTER]
            )
        if (~interfere).any():
            out_m[~interfere] = _sample_rows(
                tables.routing_cdf, rows[~interfere], u[~interfere, _SLOT_SPLITTER]
            )
    else:
        out_m = _sample_rows(tables.routing_cdf, rows, u[:, _SLOT_SPLITTER])
    out_n = total - out_m

    click0 = u[:, _SLOT_CLICK0] < tables.click0[out_m]
    click1 = u[:, _SLOT_CLICK1] < tables.click1[out_n]

    outcomes = np.full(n_gates, Outcome.NONE, dtype=np.uint8)
    outcomes[click0 & ~click1] = Outcome.BIT0
    outcomes[~click0 & click1] = Outcome.BIT1
    outcomes[click0 & click1] = Outcome.COLLISION
    return outcomes


def sample_gate(cfg: SimConfig, gate_index: int) -> EventRecord:
    """Classify a single gate; identical to the matching entry of a full run."""
    if not 0 <= gate_index < cfg.n_gates:
        raise ValueError(f"gate_index {gate_index} outside [0, {cfg.n_gates})")
    outcome = _simulate_range(cfg, gate_index, gate_index + 1)[0]
    return EventRecord(gate_index, Outcome(int(outcome)))


def sample_bs_outcome(
    input_pair: OccupationPair | tuple[int, int],
    source: SourceModel,
    rng: np.random.Generator,
) -> OccupationPair:
    """Draw one splitter output for a Fock input; conserves the photon total.

    Mixture sources first draw the interfering/routed branch, then the
    outcome, consuming two uniforms in that order.
    """
    pair = OccupationPair(*input_pair)
    if source.kind is SourceKind.INDISTINGUISHABLE:
        probs = _bs_probabilities_array(pair.first, pair.second)
    elif source.kind is SourceKind.MIXTURE:
        if rng.random() < source.overlap:
            probs = _bs_probabilities_array(pair.first, pair.second)
        else:
            probs = _routing_probabilities_array(pair.first, pair.second)
    else:
        probs = _routing_probabilities_array(pair.first, pair.second)
    out_m = int(_inverse_cdf(np.cumsum(probs), np.array([rng.random()]))[0])
    return OccupationPair(out_m, pair.total() - out_m)


def _click_by_thinning(eta: float, photons: int, rng: np.random.Generator) -> bool:
    # Reference model: each photon is seen independently with probability eta.
    # Distributionally identical to one Bernoulli(1 - (1-eta)^photons) draw.
    if photons == 0:
        return False
    return bool((rng.random(photons) < eta).any())


DEFAULT_CHUNK_GATES = 1 << 20
DEFAULT_MEMORY_BUDGET_GATES = 1 << 28


def run(
    cfg: SimConfig,
    *,
    sink: BinaryIO | None = None,
    chunk_gates: int = DEFAULT_CHUNK_GATES,
    memory_budget_gates: int = DEFAULT_MEMORY_BUDGET_GATES,
) -> tuple[EventTally, np.ndarray | None]:
    """Simulate all gates of ``cfg``.

    Returns the tally and the per-gate outcome array (one code per gate,
    indexed by gate). With ``sink`` set, outcome bytes are streamed there
    instead and the array is not kept. Without a sink, runs longer than
    ``memory_budget_gates`` are refused.
    """
    if sink is None and cfg.n_gates > memory_budget_gates:
        raise ResourceLimitError(
            f"{cfg.n_gates} gates exceed the in-memory budget of "
            f"{memory_budget_gates}; stream to a sink instead"
        )
    tables = _SamplerTables(cfg)
    tally = EventTally(0, 0, 0, 0, 0)
    chunks: list[np.ndarray] = []
    for lo in range(0, cfg.n_gates, chunk_gates):
        hi = min(lo + chunk_gates, cfg.n_gates)
        outcomes = _simulate_range(cfg, lo, hi, tables)
        tally = tally + EventTally.from_outcomes(outcomes)
        if sink is not None:
            sink.write(outcomes.tobytes())
        else:
            chunks.append(outcomes)
    if sink is not None:
        return tally, None
    return tally, np.concatenate(chunks) if len(chunks) > 1 else chunks[0]


def iter_records(outcomes: np.ndarray) -> Iterator[EventRecord]:
    """View a run's outcome array as per-gate event records."""
    for i, code in enumerate(outcomes):
        yield EventRecord(i, Outcome(int(code)))
