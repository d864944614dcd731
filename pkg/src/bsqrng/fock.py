"""Exact photon-number statistics at the outputs of a symmetric beam splitter.

Weak coherent inputs with uniformly random phases are diagonal in photon
number, so everything reduces to Poisson-weighted Fock-state transforms.
Supported source configurations: a single weak coherent state plus vacuum,
two indistinguishable weak coherent states (interfering), two mutually
distinguishable ones (no interference), and a convex mixture of the last two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .special import poisson_cdf

_LN2 = math.log(2.0)

#: Hard cap on the total photon number accepted by the splitter transform.
MAX_INPUT_TOTAL = 200


class TruncationError(RuntimeError):
    """Raised when a truncated distribution captures too little probability."""

    def __init__(self, message: str, bound: int):
        super().__init__(message)
        self.bound = bound


class OccupationPair(NamedTuple):
    """Photon counts in the two spatial modes; the Fock-basis index."""

    first: int
    second: int

    def total(self) -> int:
        return self.first + self.second


class SourceKind(Enum):
    SINGLE = "single"
    INDISTINGUISHABLE = "indist"
    DISTINGUISHABLE = "dist"
    MIXTURE = "mix"


@dataclass(frozen=True)
class SourceModel:
    """Which input illuminates the splitter.

    ``overlap`` is the mixing weight of the interfering component and is only
    meaningful for ``SourceKind.MIXTURE``: overlap 1 reproduces the
    indistinguishable pair, overlap 0 the distinguishable pair.
    """

    kind: SourceKind
    overlap: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError(f"overlap must lie in [0, 1], got {self.overlap}")

    @classmethod
    def single(cls) -> "SourceModel":
        return cls(SourceKind.SINGLE)

    @classmethod
    def indistinguishable_pair(cls) -> "SourceModel":
        return cls(SourceKind.INDISTINGUISHABLE)

    @classmethod
    def distinguishable_pair(cls) -> "SourceModel":
        return cls(SourceKind.DISTINGUISHABLE)

    @classmethod
    def partial_mixture(cls, overlap: float) -> "SourceModel":
        return cls(SourceKind.MIXTURE, overlap)

    @classmethod
    def from_label(cls, label: str) -> "SourceModel":
        """Parse ``single``, ``indist``, ``dist`` or ``mix:<overlap>``."""
        if label.startswith("mix:"):
            return cls.partial_mixture(float(label[4:]))
        try:
            return cls(SourceKind(label))
        except ValueError:
            raise ValueError(
                f"unknown source {label!r}; expected single, indist, dist or mix:<overlap>"
            ) from None

    @property
    def label(self) -> str:
        if self.kind is SourceKind.MIXTURE:
            return f"mix:{self.overlap:g}"
        return self.kind.value


@dataclass(frozen=True)
class TruncationPolicy:
    """Fock-space truncation rule: drop at most ``tail_mass`` probability."""

    tail_mass: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.tail_mass <= 0.01:
            raise ValueError(f"tail_mass must lie in (0, 0.01], got {self.tail_mass}")


DEFAULT_TRUNCATION = TruncationPolicy()

# Mass floor every constructed distribution must meet, per the 99.9% rule.
_REQUIRED_MASS = 0.999
_MASS_SLACK = 1e-9


@dataclass(frozen=True)
class AmplitudeMap:
    """Output-state amplitudes of the splitter for one Fock input."""

    entries: dict[OccupationPair, complex]

    def squared(self) -> dict[OccupationPair, float]:
        return {k: abs(a) ** 2 for k, a in self.entries.items()}

    def total_probability(self) -> float:
        return sum(abs(a) ** 2 for a in self.entries.values())


@dataclass(frozen=True)
class JointPhotonDistribution:
    """Probability table over output photon-number pairs.

    ``truncation_mass`` is the probability captured by the enumerated inputs;
    the remainder (at most the policy's tail) was dropped.
    """

    probs: dict[OccupationPair, float]
    mu_eff: float
    source: SourceModel
    truncation_mass: float

    def __post_init__(self):
        if self.truncation_mass < _REQUIRED_MASS - _MASS_SLACK:
            raise TruncationError(
                f"captured probability {self.truncation_mass:.6f} is below "
                f"{_REQUIRED_MASS} for mu_eff={self.mu_eff}",
                bound=max((p.total() for p in self.probs), default=0),
            )
        for pair, p in self.probs.items():
            if not -1e-12 <= p <= 1.0 + 1e-12:
                raise ValueError(f"probability out of range at {pair}: {p}")

    def prob(self, pair: OccupationPair | tuple[int, int]) -> float:
        return self.probs.get(OccupationPair(*pair), 0.0)

    def marginal_first(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for (m, _n), p in self.probs.items():
            out[m] = out.get(m, 0.0) + p
        return out


def poisson_pair_pmf(mu: float, occ: OccupationPair | tuple[int, int]) -> float:
    """Joint probability of ``occ`` photons in the two input arms.

    Equals the product of two independent Poisson(mu/2) laws:
    exp(-mu) mu^(m+n) / (m! n! 2^(m+n)).
    """
    occ = OccupationPair(*occ)
    _check_occupation(occ)
    if mu <= 0.0:
        raise ValueError(f"mean photon number must be positive, got {mu}")
    m, n = occ
    log_p = -mu + (m + n) * (math.log(mu) - _LN2) - math.lgamma(m + 1) - math.lgamma(n + 1)
    return math.exp(log_p)


def truncation_bound(mu: float, policy: TruncationPolicy = DEFAULT_TRUNCATION) -> int:
    """Smallest k with Poisson(mu) CDF at k >= 1 - tail_mass."""
    if mu <= 0.0:
        raise ValueError(f"mean photon number must be positive, got {mu}")
    target = 1.0 - policy.tail_mass
    k = 0
    while poisson_cdf(k, mu) < target:
        k += 1
    return k


def _check_occupation(occ: OccupationPair) -> None:
    if occ.first < 0 or occ.second < 0:
        raise ValueError(f"photon counts must be non-negative, got {tuple(occ)}")


@lru_cache(maxsize=None)
def _log_factorials(n: int) -> np.ndarray:
    return np.array([math.lgamma(i + 1) for i in range(n + 1)])


@lru_cache(maxsize=None)
def _bs_amplitudes_array(m: int, n: int) -> np.ndarray:
    """Output amplitudes over M = 0..m+n for the Fock input (m, n).

    The splitter maps a -> (c + j d)/sqrt(2) and b -> (j c + d)/sqrt(2);
    expanding the binomials and collecting creation operators gives, for each
    (u, v) term, the output ket (m - u + v, n - v + u) with coefficient
    j^(u+v) sqrt(m! n! M! N!) / (2^((m+n)/2) (m-u)! u! (n-v)! v!).
    Coefficients are accumulated coherently per output ket, with factorials
    handled in log space and the j^(u+v) phase tracked separately.
    """
    total = m + n
    lf = _log_factorials(total)
    u = np.arange(m + 1)[:, None]
    v = np.arange(n + 1)[None, :]
    out_m = m - u + v
    log_coef = (
        0.5 * (lf[m] + lf[n] + lf[out_m] + lf[total - out_m])
        - 0.5 * total * _LN2
        - lf[m - u]
        - lf[u]
        - lf[n - v]
        - lf[v]
    )
    phase = np.array([1.0, 1.0j, -1.0, -1.0j])[(u + v) % 4]
    amplitudes = np.zeros(total + 1, dtype=complex)
    np.add.at(amplitudes, out_m.ravel(), (phase * np.exp(log_coef)).ravel())
    return amplitudes


@lru_cache(maxsize=None)
def _bs_probabilities_array(m: int, n: int) -> np.ndarray:
    """|amplitude|^2 over M = 0..m+n for the interfering transform."""
    return np.abs(_bs_amplitudes_array(m, n)) ** 2


@lru_cache(maxsize=None)
def _routing_probabilities_array(m: int, n: int) -> np.ndarray:
    """Output distribution over M for independent 50/50 routing of each photon.

    Each arm splits binomially; the output count in the first mode is the
    convolution Binomial(m, 1/2) * Binomial(n, 1/2). This is the
    no-interference transform used for mutually distinguishable inputs.
    """
    pm = np.array([math.comb(m, k) for k in range(m + 1)], dtype=float) / 2.0**m
    pn = np.array([math.comb(n, k) for k in range(n + 1)], dtype=float) / 2.0**n
    return np.convolve(pm, pn)


def bs_output_amplitudes(input_pair: OccupationPair | tuple[int, int]) -> AmplitudeMap:
    """Beam-splitter transform of one Fock input, as a map over output kets.

    Every output ket with the same total photon number is present, including
    interference nulls with amplitude exactly zero.
    """
    pair = OccupationPair(*input_pair)
    _check_occupation(pair)
    total = pair.total()
    if total > MAX_INPUT_TOTAL:
        raise OverflowError(
            f"input total {total} exceeds the supported bound {MAX_INPUT_TOTAL}"
        )
    amps = _bs_amplitudes_array(pair.first, pair.second)
    entries = {
        OccupationPair(out_m, total - out_m): complex(amps[out_m])
        for out_m in range(total + 1)
    }
    return AmplitudeMap(entries)


def output_joint_distribution(
    source: SourceModel,
    mu_eff: float,
    policy: TruncationPolicy = DEFAULT_TRUNCATION,
    *,
    min_total: int = 0,
) -> JointPhotonDistribution:
    """Joint output photon-number distribution for a source at mean ``mu_eff``.

    The interfering pair sums the squared splitter amplitudes over all Fock
    inputs, weighted by their Poisson probabilities; photon-number
    conservation restricts each output total to its input total. The single
    and distinguishable sources produce two independent Poisson(mu_eff/2)
    output modes; the distinguishable case is evaluated through explicit
    binomial routing of each arm. A mixture combines the two convexly.

    ``min_total`` forces enumeration at least up to that total photon number,
    regardless of the policy bound.
    """
    if mu_eff <= 0.0:
        raise ValueError(f"mean photon number must be positive, got {mu_eff}")
    bound = max(truncation_bound(mu_eff, policy), min_total)

    kind = source.kind
    if kind is SourceKind.SINGLE:
        probs = _product_poisson_probs(mu_eff, bound)
    elif kind is SourceKind.INDISTINGUISHABLE:
        probs = _transformed_probs(mu_eff, bound, _bs_probabilities_array)
    elif kind is SourceKind.DISTINGUISHABLE:
        probs = _transformed_probs(mu_eff, bound, _routing_probabilities_array)
    else:
        w = source.overlap
        interfering = _transformed_probs(mu_eff, bound, _bs_probabilities_array)
        routed = _transformed_probs(mu_eff, bound, _routing_probabilities_array)
        probs = {
            key: w * interfering[key] + (1.0 - w) * routed[key] for key in routed
        }

    mass = math.fsum(probs.values())
    return JointPhotonDistribution(probs, mu_eff, source, mass)


def _product_poisson_probs(mu: float, bound: int) -> dict[OccupationPair, float]:
    return {
        OccupationPair(m, t - m): poisson_pair_pmf(mu, (m, t - m))
        for t in range(bound + 1)
        for m in range(t + 1)
    }


def _transformed_probs(mu: float, bound: int, rows) -> dict[OccupationPair, float]:
    probs: dict[OccupationPair, float] = {}
    for t in range(bound + 1):
        sector = np.zeros(t + 1)
        for m in range(t + 1):
            sector += poisson_pair_pmf(mu, (m, t - m)) * rows(m, t - m)
        for out_m in range(t + 1):
            probs[OccupationPair(out_m, t - out_m)] = float(sector[out_m])
    return probs


# Tight truncation for the contrast ratio: the default 0.1% tail empties the
# two-photon coincidence sector entirely below mu_eff ~ 0.05.
_CONTRAST_POLICY = TruncationPolicy(tail_mass=1e-12)


def coincidence_contrast(
    mu_eff: float,
    eta0: float = 1.0,
    eta1: float = 1.0,
    source: SourceModel | None = None,
) -> float:
    """Coincidence-count contrast of ``source`` against the no-interference baseline.

    Returns 1 - P_cc(source) / P_cc(distinguishable), where P_cc sums the
    probability of both threshold detectors clicking. Defaults to the
    indistinguishable pair, whose contrast is capped at 0.5 by multi-photon
    input events and decays as mu_eff grows.
    """
    for name, eta in (("eta0", eta0), ("eta1", eta1)):
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {eta}")
    if source is None:
        source = SourceModel.indistinguishable_pair()
    numerator_dist = output_joint_distribution(
        source, mu_eff, _CONTRAST_POLICY, min_total=2
    )
    baseline_dist = output_joint_distribution(
        SourceModel.distinguishable_pair(), mu_eff, _CONTRAST_POLICY, min_total=2
    )
    p_cc_source = _coincidence_probability(numerator_dist, eta0, eta1)
    p_cc_baseline = _coincidence_probability(baseline_dist, eta0, eta1)
    if p_cc_baseline <= 0.0 or not math.isfinite(p_cc_baseline):
        raise ValueError(
            f"baseline coincidence probability underflows at mu_eff={mu_eff}"
        )
    return 1.0 - p_cc_source / p_cc_baseline


def _coincidence_probability(
    dist: JointPhotonDistribution, eta0: float, eta1: float
) -> float:
    total = 0.0
    for (m, n), p in dist.probs.items():
        if m >= 1 and n >= 1:
            total += p * (1.0 - (1.0 - eta0) ** m) * (1.0 - (1.0 - eta1) ** n)
    return total
