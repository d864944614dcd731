"""Photon statistics of the splitter: transform, distributions, contrast."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bsqrng.fock import (
    MAX_INPUT_TOTAL,
    OccupationPair,
    SourceModel,
    TruncationPolicy,
    bs_output_amplitudes,
    coincidence_contrast,
    output_joint_distribution,
    poisson_pair_pmf,
    truncation_bound,
)

TIGHT = TruncationPolicy(tail_mass=1e-9)

counts = st.integers(min_value=0, max_value=8)
means = st.floats(min_value=0.05, max_value=8.0)


def poisson_pmf(mean, k):
    return math.exp(-mean) * mean**k / math.factorial(k)


class TestPoissonPairPmf:
    def test_vacuum_term(self):
        for mu in (0.2, 1.0, 3.7):
            assert poisson_pair_pmf(mu, (0, 0)) == pytest.approx(math.exp(-mu), rel=1e-14)

    def test_one_one_at_mu_two(self):
        # product of two Poisson(1.0) pmfs at 1 and 1
        assert poisson_pair_pmf(2.0, (1, 1)) == pytest.approx(
            0.1353352832366127, rel=1e-12
        )

    @given(means, counts, counts)
    def test_matches_product_of_independent_arms(self, mu, m, n):
        oracle = poisson_pmf(mu / 2, m) * poisson_pmf(mu / 2, n)
        assert poisson_pair_pmf(mu, (m, n)) == pytest.approx(oracle, rel=1e-10)

    def test_truncated_mass_meets_rule(self):
        for mu in (0.1, 1.0, 2.1, 5.0, 20.0):
            bound = truncation_bound(mu)
            mass = sum(
                poisson_pair_pmf(mu, (m, t - m))
                for t in range(bound + 1)
                for m in range(t + 1)
            )
            assert mass >= 0.999

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            poisson_pair_pmf(0.0, (0, 0))
        with pytest.raises(ValueError):
            poisson_pair_pmf(-1.0, (0, 0))
        with pytest.raises(ValueError):
            poisson_pair_pmf(1.0, (-1, 0))


class TestTruncationBound:
    @pytest.mark.parametrize("mu", [0.05, 0.3, 1.0, 2.1, 7.5, 20.0])
    def test_matches_direct_cdf_summation(self, mu):
        # oracle: first k whose directly summed CDF reaches the target
        target = 0.999
        term = math.exp(-mu)
        cumulative = term
        k = 0
        while cumulative < target:
            k += 1
            term *= mu / k
            cumulative += term
        assert truncation_bound(mu) == k

    def test_vacuum_dominated_limit(self):
        assert truncation_bound(1e-4) in (0, 1)

    def test_monotone_in_mean(self):
        grid = np.geomspace(0.01, 30.0, 40)
        bounds = [truncation_bound(float(m)) for m in grid]
        assert all(b1 <= b2 for b1, b2 in zip(bounds, bounds[1:]))

    def test_respects_policy(self):
        assert truncation_bound(1.0, TruncationPolicy(1e-2)) <= truncation_bound(1.0)
        with pytest.raises(ValueError):
            TruncationPolicy(0.5)
        with pytest.raises(ValueError):
            TruncationPolicy(0.0)


class TestSplitterTransform:
    def test_vacuum_invariant(self):
        amp = bs_output_amplitudes((0, 0))
        assert amp.entries == {OccupationPair(0, 0): 1.0 + 0.0j}

    def test_single_photon_superposition(self):
        amp = bs_output_amplitudes((1, 0)).entries
        assert amp[OccupationPair(1, 0)] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
        assert amp[OccupationPair(0, 1)] == pytest.approx(1j / math.sqrt(2), abs=1e-15)

    def test_two_photon_bunching_null(self):
        amp = bs_output_amplitudes((1, 1)).entries
        assert amp[OccupationPair(1, 1)] == 0.0  # exact cancellation
        assert abs(amp[OccupationPair(2, 0)]) ** 2 == pytest.approx(0.5, abs=1e-14)
        assert abs(amp[OccupationPair(0, 2)]) ** 2 == pytest.approx(0.5, abs=1e-14)

    def test_two_photons_one_arm(self):
        # oracle: expanding ((c + j d)/sqrt(2))^2 on vacuum gives
        # |2,0>/2 + j|1,1>/sqrt(2) - |0,2>/2
        amp = bs_output_amplitudes((2, 0)).entries
        assert amp[OccupationPair(1, 1)] == pytest.approx(1j / math.sqrt(2), abs=1e-14)
        assert abs(amp[OccupationPair(1, 1)]) ** 2 == pytest.approx(0.5, abs=1e-14)
        assert amp[OccupationPair(2, 0)] == pytest.approx(0.5, abs=1e-14)
        assert amp[OccupationPair(0, 2)] == pytest.approx(-0.5, abs=1e-14)

    @given(counts, counts)
    def test_unitarity_and_conservation(self, m, n):
        amp = bs_output_amplitudes((m, n))
        assert amp.total_probability() == pytest.approx(1.0, abs=1e-12)
        assert all(key.total() == m + n for key in amp.entries)

    def test_overflow_guard(self):
        with pytest.raises(OverflowError):
            bs_output_amplitudes((MAX_INPUT_TOTAL, 1))


def routing_oracle(mu, bound):
    """Independent fair-coin routing of every photon of every Fock input."""
    probs = {}
    for m in range(bound + 1):
        for n in range(bound + 1 - m):
            weight = poisson_pmf(mu / 2, m) * poisson_pmf(mu / 2, n)
            for k in range(m + 1):
                for l in range(n + 1):
                    key = (k + l, (m - k) + (n - l))
                    probs[key] = probs.get(key, 0.0) + (
                        weight * math.comb(m, k) * math.comb(n, l) / 2 ** (m + n)
                    )
    return probs


class TestJointDistribution:
    def test_interfering_pair_coincidence_entry(self):
        # oracle: hand expansion over the three two-photon inputs; the (1,1)
        # input contributes nothing, (2,0) and (0,2) contribute half each
        for mu in (0.3, 1.3, 2.1):
            dist = output_joint_distribution(SourceModel.indistinguishable_pair(), mu)
            assert dist.prob((1, 1)) == pytest.approx(
                math.exp(-mu) * mu**2 / 8, rel=1e-12
            )

    def test_single_source_coincidence_is_twice_interfering(self):
        for mu in (0.3, 1.3, 2.1):
            dist = output_joint_distribution(SourceModel.single(), mu)
            assert dist.prob((1, 1)) == pytest.approx(
                math.exp(-mu) * mu**2 / 4, rel=1e-12
            )

    def test_distinguishable_matches_routing_oracle(self):
        mu = 1.3
        dist = output_joint_distribution(SourceModel.distinguishable_pair(), mu)
        bound = truncation_bound(mu)
        oracle = routing_oracle(mu, bound)
        assert set(map(tuple, dist.probs)) == set(oracle)
        for key, expected in oracle.items():
            assert dist.prob(key) == pytest.approx(expected, abs=1e-13)

    @pytest.mark.parametrize("mu", [0.1, 1.0, 5.0])
    def test_distinguishable_equals_single_benchmark(self, mu):
        single = output_joint_distribution(SourceModel.single(), mu)
        routed = output_joint_distribution(SourceModel.distinguishable_pair(), mu)
        assert set(single.probs) == set(routed.probs)
        for key in single.probs:
            assert abs(single.probs[key] - routed.probs[key]) <= 1e-12

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_mixture_interpolates(self, overlap):
        mu = 1.7
        mix = output_joint_distribution(SourceModel.partial_mixture(overlap), mu)
        interfering = output_joint_distribution(
            SourceModel.indistinguishable_pair(), mu
        )
        routed = output_joint_distribution(SourceModel.distinguishable_pair(), mu)
        for key in mix.probs:
            expected = overlap * interfering.probs[key] + (1 - overlap) * routed.probs[key]
            assert mix.probs[key] == pytest.approx(expected, abs=1e-14)

    def test_mixture_endpoints(self):
        mu = 2.1
        ind = output_joint_distribution(SourceModel.indistinguishable_pair(), mu)
        mix1 = output_joint_distribution(SourceModel.partial_mixture(1.0), mu)
        for key in ind.probs:
            assert abs(ind.probs[key] - mix1.probs[key]) <= 1e-12
        routed = output_joint_distribution(SourceModel.distinguishable_pair(), mu)
        mix0 = output_joint_distribution(SourceModel.partial_mixture(0.0), mu)
        for key in routed.probs:
            assert abs(routed.probs[key] - mix0.probs[key]) <= 1e-12

    @pytest.mark.parametrize(
        "source",
        [
            SourceModel.single(),
            SourceModel.indistinguishable_pair(),
            SourceModel.distinguishable_pair(),
            SourceModel.partial_mixture(0.6),
        ],
    )
    def test_symmetry_and_mass(self, source):
        dist = output_joint_distribution(source, 1.9)
        assert dist.truncation_mass >= 0.999
        assert dist.truncation_mass <= 1.0 + 1e-12
        for (m, n), p in dist.probs.items():
            assert 0.0 <= p <= 1.0
            assert abs(p - dist.prob((n, m))) <= 1e-12

    def test_single_marginal_is_half_mean_poisson(self):
        mu = 1.9
        dist = output_joint_distribution(SourceModel.single(), mu, TIGHT)
        marginal = dist.marginal_first()
        for m in range(6):
            assert marginal[m] == pytest.approx(poisson_pmf(mu / 2, m), abs=1e-8)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            output_joint_distribution(SourceModel.single(), 0.0)

    def test_loose_policy_below_mass_floor_raises(self):
        # a 1% tail at this mean stops short of the required 99.9% mass
        from bsqrng.fock import TruncationError

        with pytest.raises(TruncationError) as info:
            output_joint_distribution(SourceModel.single(), 5.0, TruncationPolicy(0.01))
        assert info.value.bound >= 0

    def test_overlap_validation(self):
        with pytest.raises(ValueError):
            SourceModel.partial_mixture(1.5)


class TestSourceLabels:
    def test_round_trip(self):
        for label in ("single", "indist", "dist", "mix:0.35"):
            assert SourceModel.from_label(label).label == label

    def test_unknown_label(self):
        with pytest.raises(ValueError):
            SourceModel.from_label("laser")


class TestCoincidenceContrast:
    def test_low_mean_approaches_half(self):
        # oracle: leading order in mu^2 gives exactly 1/2
        assert 0.49 <= coincidence_contrast(0.01) <= 0.50

    def test_monotone_decay(self):
        grid = np.geomspace(0.01, 20.0, 20)
        values = [coincidence_contrast(float(m)) for m in grid]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_distinguishable_against_itself_vanishes(self):
        assert coincidence_contrast(
            1.0, source=SourceModel.distinguishable_pair()
        ) == pytest.approx(0.0, abs=1e-14)

    def test_detector_pair_allowed(self):
        with_loss = coincidence_contrast(0.05, eta0=0.15, eta1=0.15)
        assert 0.45 <= with_loss <= 0.50

    def test_underflow_guard(self):
        with pytest.raises(ValueError):
            coincidence_contrast(1e-200)
