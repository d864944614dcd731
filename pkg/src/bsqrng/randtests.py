"""Statistical randomness tests applied block-wise with pass/fail at 0.01.

Seven tests of the standard battery are implemented: frequency (monobit),
block frequency, runs, longest run of ones, cumulative sums (both
directions), approximate entropy and serial. Each returns a p-value in
[0, 1]; a block passes a test when every p-value of that test is at or above
the significance level. The remaining tests of the full battery are reported
as not run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .postproc import BitStream
from .special import erfc, gammainc_upper, normal_cdf


class InsufficientDataError(ValueError):
    """Raised when the input is too short for the requested evaluation."""


def _as_bits(bits) -> np.ndarray:
    if isinstance(bits, BitStream):
        return bits.bits()
    if isinstance(bits, str):
        return np.array([int(c) for c in bits], dtype=np.uint8)
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit input must be one-dimensional")
    if arr.size and arr.max() > 1:
        raise ValueError("bit values must be 0 or 1")
    return arr


def frequency_monobit(bits, *, min_length: int = 100) -> float:
    """Excess of ones over zeros against the half-normal law."""
    b = _as_bits(bits)
    n = len(b)
    if n < min_length:
        raise InsufficientDataError(f"monobit needs at least {min_length} bits, got {n}")
    s = 2.0 * int(b.sum()) - n
    return erfc(abs(s) / math.sqrt(2.0 * n))


def block_frequency(bits, block_len: int = 128) -> float:
    """Chi-square of per-block ones proportions around one half."""
    b = _as_bits(bits)
    if block_len < 2:
        raise ValueError(f"block length must be at least 2, got {block_len}")
    n_blocks = len(b) // block_len
    if n_blocks < 1:
        raise InsufficientDataError(
            f"block frequency needs at least {block_len} bits, got {len(b)}"
        )
    proportions = b[: n_blocks * block_len].reshape(n_blocks, block_len).mean(axis=1)
    chi_sq = 4.0 * block_len * float(((proportions - 0.5) ** 2).sum())
    return gammainc_upper(n_blocks / 2.0, chi_sq / 2.0)


def runs(bits) -> float:
    """Total number of runs against the expectation for the observed bias."""
    b = _as_bits(bits)
    n = len(b)
    if n < 2:
        raise InsufficientDataError(f"runs needs at least 2 bits, got {n}")
    pi = float(b.mean())
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return 0.0  # frequency pre-test failed; runs statistic is meaningless
    v = 1 + int((b[1:] != b[:-1]).sum())
    return erfc(
        abs(v - 2.0 * n * pi * (1.0 - pi))
        / (2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi))
    )


# (block length M, category probabilities for longest run <=lo .. >=hi)
_LONGEST_RUN_TABLES = (
    (128, 8, 1, (0.2148, 0.3672, 0.2305, 0.1875)),
    (6272, 128, 4, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (750_000, 10_000, 10, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
)


def longest_run_of_ones(bits) -> float:
    """Distribution of the longest 1-run per block against tabulated categories."""
    b = _as_bits(bits)
    n = len(b)
    if n < 128:
        raise InsufficientDataError(f"longest run needs at least 128 bits, got {n}")
    for threshold, block_len, low, pi_table in reversed(_LONGEST_RUN_TABLES):
        if n >= threshold:
            break
    n_blocks = n // block_len
    n_cats = len(pi_table)
    counts = np.zeros(n_cats)
    blocks = b[: n_blocks * block_len].reshape(n_blocks, block_len)
    for block in blocks:
        counts[int(np.clip(_longest_ones(block), low, low + n_cats - 1)) - low] += 1
    expected = n_blocks * np.asarray(pi_table)
    chi_sq = float(((counts - expected) ** 2 / expected).sum())
    return gammainc_upper((n_cats - 1) / 2.0, chi_sq / 2.0)


def _longest_ones(block: np.ndarray) -> int:
    if not block.any():
        return 0
    # lengths of 1-runs via boundaries of the padded sequence
    padded = np.concatenate(([0], block, [0]))
    edges = np.flatnonzero(np.diff(padded))
    return int((edges[1::2] - edges[::2]).max())


def cumulative_sums(bits, direction: str = "forward") -> float:
    """Maximum partial-sum excursion of the +-1 walk."""
    b = _as_bits(bits)
    n = len(b)
    if n < 2:
        raise InsufficientDataError(f"cumulative sums needs at least 2 bits, got {n}")
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    x = 2.0 * b - 1.0
    if direction == "backward":
        x = x[::-1]
    z = float(np.max(np.abs(np.cumsum(x))))
    sqrt_n = math.sqrt(n)
    total = 1.0
    for k in range(int(math.floor((-n / z + 1) / 4)), int(math.floor((n / z - 1) / 4)) + 1):
        total -= normal_cdf((4 * k + 1) * z / sqrt_n) - normal_cdf((4 * k - 1) * z / sqrt_n)
    for k in range(int(math.floor((-n / z - 3) / 4)), int(math.floor((n / z - 1) / 4)) + 1):
        total += normal_cdf((4 * k + 3) * z / sqrt_n) - normal_cdf((4 * k + 1) * z / sqrt_n)
    return min(max(total, 0.0), 1.0)


def _pattern_counts(b: np.ndarray, m: int) -> np.ndarray:
    """Occurrences of each overlapping m-bit pattern, wrapping around the end."""
    n = len(b)
    extended = np.concatenate([b, b[: m - 1]]) if m > 1 else b
    value = np.zeros(n, dtype=np.int64)
    for i in range(m):
        value = (value << 1) | extended[i : i + n]
    return np.bincount(value, minlength=2**m)


def approximate_entropy(bits, m: int = 4) -> float:
    """Entropy gap between overlapping m-bit and (m+1)-bit pattern statistics."""
    b = _as_bits(bits)
    n = len(b)
    if m < 1:
        raise ValueError(f"pattern length must be at least 1, got {m}")
    if n < m + 2:
        raise InsufficientDataError(
            f"approximate entropy with m={m} needs at least {m + 2} bits, got {n}"
        )

    def phi(length: int) -> float:
        freq = _pattern_counts(b, length) / n
        freq = freq[freq > 0]
        return float((freq * np.log(freq)).sum())

    ap_en = phi(m) - phi(m + 1)
    chi_sq = 2.0 * n * (math.log(2.0) - ap_en)
    return gammainc_upper(2.0 ** (m - 1), chi_sq / 2.0)


def serial(bits, m: int = 5) -> tuple[float, float]:
    """Uniformity of overlapping m-bit patterns; first and second difference p-values."""
    b = _as_bits(bits)
    n = len(b)
    if m < 2:
        raise ValueError(f"pattern length must be at least 2, got {m}")
    if n < m + 1:
        raise InsufficientDataError(
            f"serial with m={m} needs at least {m + 1} bits, got {n}"
        )

    def psi_sq(length: int) -> float:
        if length < 1:
            return 0.0
        counts = _pattern_counts(b, length).astype(float)
        return (2.0**length / n) * float((counts**2).sum()) - n

    delta1 = psi_sq(m) - psi_sq(m - 1)
    delta2 = psi_sq(m) - 2.0 * psi_sq(m - 1) + psi_sq(m - 2)
    return (
        gammainc_upper(2.0 ** (m - 2), delta1 / 2.0),
        gammainc_upper(2.0 ** (m - 3), delta2 / 2.0),
    )


@dataclass(frozen=True)
class BatteryParams:
    """Per-test parameters of the battery; valid for blocks of 1e4 bits and up."""

    block_frequency_len: int = 128
    approximate_entropy_m: int = 4
    serial_m: int = 5


@dataclass(frozen=True)
class TestResult:
    test: str
    block: int
    p_value: float
    passed: bool


#: Component result names produced per block, in report order.
COMPONENTS = (
    "monobit",
    "block_frequency",
    "runs",
    "longest_run",
    "cumulative_sums_forward",
    "cumulative_sums_backward",
    "approximate_entropy",
    "serial_1",
    "serial_2",
)

#: Logical tests and the components each aggregates over.
LOGICAL_TESTS: dict[str, tuple[str, ...]] = {
    "monobit": ("monobit",),
    "block_frequency": ("block_frequency",),
    "runs": ("runs",),
    "longest_run": ("longest_run",),
    "cumulative_sums": ("cumulative_sums_forward", "cumulative_sums_backward"),
    "approximate_entropy": ("approximate_entropy",),
    "serial": ("serial_1", "serial_2"),
}

#: Battery members that are not implemented, listed explicitly in reports.
NOT_RUN = (
    "binary_matrix_rank",
    "discrete_fourier_transform",
    "non_overlapping_template",
    "overlapping_template",
    "maurer_universal",
    "linear_complexity",
    "random_excursions",
    "random_excursions_variant",
)

_CSV_HEADER = "test,block,p_value,pass"


@dataclass(frozen=True)
class TestReport:
    """All per-block p-values of a battery run plus pass bookkeeping."""

    block_size: int
    n_blocks: int
    significance: float
    results: tuple[TestResult, ...]
    not_run: tuple[str, ...] = field(default=NOT_RUN)

    def pass_fraction(self) -> dict[str, float]:
        """Fraction of blocks passing each logical test (all components at once)."""
        by_key = {(r.test, r.block): r.passed for r in self.results}
        fractions = {}
        for name, components in LOGICAL_TESTS.items():
            passed_blocks = sum(
                all(by_key[(c, blk)] for c in components) for blk in range(self.n_blocks)
            )
            fractions[name] = passed_blocks / self.n_blocks
        return fractions

    def to_csv(self) -> str:
        lines = [_CSV_HEADER]
        for r in self.results:
            lines.append(f"{r.test},{r.block},{r.p_value!r},{int(r.passed)}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lines = [
            f"block_size={self.block_size} n_blocks={self.n_blocks} "
            f"significance={self.significance:g}",
        ]
        for r in self.results:
            verdict = "pass" if r.passed else "FAIL"
            lines.append(f"{r.test} {r.block} {r.p_value:.6f} {verdict}")
        for name, frac in self.pass_fraction().items():
            lines.append(f"pass_fraction {name} {frac:.3f}")
        for name in self.not_run:
            lines.append(f"{name} not_run")
        return "\n".join(lines) + "\n"


def evaluate_block(block: np.ndarray, params: BatteryParams) -> dict[str, float]:
    """All component p-values for one block of bits."""
    p_serial_1, p_serial_2 = serial(block, params.serial_m)
    return {
        "monobit": frequency_monobit(block),
        "block_frequency": block_frequency(block, params.block_frequency_len),
        "runs": runs(block),
        "longest_run": longest_run_of_ones(block),
        "cumulative_sums_forward": cumulative_sums(block, "forward"),
        "cumulative_sums_backward": cumulative_sums(block, "backward"),
        "approximate_entropy": approximate_entropy(block, params.approximate_entropy_m),
        "serial_1": p_serial_1,
        "serial_2": p_serial_2,
    }


def run_battery(
    bits,
    block_size: int,
    significance: float = 0.01,
    params: BatteryParams = BatteryParams(),
) -> TestReport:
    """Partition the input into consecutive blocks and run every test on each."""
    b = _as_bits(bits)
    if not 0.0 < significance < 1.0:
        raise ValueError(f"significance must lie in (0, 1), got {significance}")
    if block_size < 128:
        raise ValueError(f"block size must be at least 128, got {block_size}")
    n_blocks = len(b) // block_size
    if n_blocks < 1:
        raise InsufficientDataError(
            f"need at least one block of {block_size} bits, got {len(b)}"
        )
    results = []
    for blk in range(n_blocks):
        block = b[blk * block_size : (blk + 1) * block_size]
        for name, p in evaluate_block(block, params).items():
            results.append(TestResult(name, blk, p, p >= significance))
    return TestReport(block_size, n_blocks, significance, tuple(results))


def parse_report_csv(text: str) -> TestReport:
    """Rebuild a report from its CSV export.

    Block size and significance are not stored in the CSV; the recorded pass
    flags are taken as authoritative.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != _CSV_HEADER:
        raise ValueError("not a battery report CSV (unexpected header)")
    results = []
    for ln in lines[1:]:
        test, block, p_value, passed = ln.split(",")
        results.append(TestResult(test, int(block), float(p_value), passed == "1"))
    n_blocks = max((r.block for r in results), default=-1) + 1
    return TestReport(0, n_blocks, 0.01, tuple(results))
