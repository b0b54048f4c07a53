"""Monte-Carlo oracle: determinism, collapse sampling, agreement tests."""

import numpy as np
import pytest

from twostate.algebra import (
    SpectralObservable,
    StateVector,
    Unitary,
    basis_state,
    bell_basis,
    expand_observable,
    identity_observable,
    pauli,
    spin_observable,
    spin_state,
    state_projector_observable,
    tensor,
)
from twostate.errors import (
    AllRejectedError,
    InsufficientAcceptedTrialsError,
)
from twostate.montecarlo import (
    MeasureStage,
    UnitaryStage,
    chunk_rng,
    compare_to_abl,
    interpretation_b_experiment,
    simulate,
    symmetry_experiment,
)
from twostate.rules import TwoStateVector, abl_probabilities, born_probabilities

UP_Z = basis_state(2, 0)


def random_state(rng, dim):
    return StateVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_observable(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return SpectralObservable.from_hermitian((m + m.conj().T) / 2)


class TestRngDerivation:
    def test_golden_stream(self):
        # pins the documented (seed, chunk) -> Philox key derivation
        np.testing.assert_allclose(
            chunk_rng(12345, 0).random(4),
            [0.6463801884227345, 0.7742675977164786, 0.7864362639285933, 0.15959668272284822],
            rtol=0,
            atol=1e-15,
        )
        np.testing.assert_allclose(
            chunk_rng(12345, 1).random(4),
            [0.3457138384499022, 0.91432964790616, 0.3330928825814764, 0.05342747044166918],
            rtol=0,
            atol=1e-15,
        )

    def test_streams_reproduce(self):
        assert np.array_equal(chunk_rng(9, 3).random(16), chunk_rng(9, 3).random(16))

    def test_rejects_negative_seed(self):
        with pytest.raises(ValueError):
            chunk_rng(-1, 0)


class TestSimulate:
    def test_eigenstate_rechecked_every_trial(self):
        stats = simulate(UP_Z, [], (pauli("z"), 1.0), 5000, 1)
        assert stats.accepted == stats.trials == 5000

    def test_golden_tallies(self):
        stats = simulate(
            UP_Z, [MeasureStage(spin_observable(np.pi / 2), "probe")], (pauli("z"), 1.0), 1000, 42
        )
        assert stats.accepted == 500
        assert stats.stages[0].counts_all == (498, 502)
        assert stats.stages[0].counts_accepted == (248, 252)
        assert stats.post_counts == (500, 500)

    def test_deterministic_for_fixed_seed(self):
        args = (
            UP_Z,
            [MeasureStage(spin_observable(0.9), "probe")],
            (pauli("z"), 1.0),
            10_000,
            17,
        )
        assert simulate(*args) == simulate(*args)

    def test_seed_changes_stream(self):
        probe = MeasureStage(spin_observable(0.9), "probe")
        a = simulate(UP_Z, [probe], (pauli("z"), 1.0), 10_000, 17)
        b = simulate(UP_Z, [probe], (pauli("z"), 1.0), 10_000, 18)
        assert a != b

    def test_all_rejected(self):
        with pytest.raises(AllRejectedError):
            simulate(UP_Z, [], (pauli("z"), -1.0), 1000, 0)

    def test_unknown_post_eigenvalue(self):
        with pytest.raises(ValueError):
            simulate(UP_Z, [], (pauli("z"), 0.25), 10, 0)

    def test_collapse_frequencies_match_single_measurement_rule(self):
        # trivial identity post: nothing is conditioned away
        rng = np.random.default_rng(2)
        for _ in range(5):
            psi = random_state(rng, 2)
            obs = random_observable(rng, 2)
            stats = simulate(
                psi, [MeasureStage(obs, "m")], (identity_observable(2), 1.0), 40_000, 3
            )
            assert stats.accepted == stats.trials
            predicted = born_probabilities(psi, obs)
            for stat in stats.conditional("m"):
                p = predicted.probability(stat.eigenvalue)
                se = max(stat.std_error, np.sqrt(p * (1 - p) / stats.trials))
                assert abs(stat.frequency - p) <= 4 * se + 1e-12

    def test_conditional_frequency_matches_abl(self):
        probe = spin_observable(np.pi / 2)
        stats = simulate(UP_Z, [MeasureStage(probe, "probe")], (pauli("z"), 1.0), 100_000, 5)
        predicted = abl_probabilities(TwoStateVector(UP_Z, UP_Z), probe)
        report = compare_to_abl(stats, predicted, z=4)
        assert report.passed

    def test_unitary_stage_transports(self):
        # flip up to down before re-measuring: acceptance selects the flipped state
        flip = UnitaryStage(Unitary(np.array([[0, 1], [1, 0]], dtype=complex)))
        stats = simulate(UP_Z, [flip], (pauli("z"), -1.0), 2000, 8)
        assert stats.accepted == 2000

    def test_joint_tallies_and_branch_conditioning(self):
        particle = spin_state(0.9, 0.4)
        pre = tensor(particle, basis_state(2, 0))
        stages = [
            MeasureStage(bell_basis(), "bell"),
            MeasureStage(expand_observable(pauli("y"), after=2), "sy"),
        ]
        post = (expand_observable(pauli("x"), after=2), 1.0)
        stats = simulate(pre, stages, post, 60_000, 12)
        total_joint = sum(count for _, count in stats.joint_accepted)
        assert total_joint == stats.accepted
        for branch in (1.0, 2.0, 3.0, 4.0):
            for stat in stats.conditional_given("sy", {"bell": branch}):
                assert abs(stat.frequency - 0.5) <= 4 * stat.std_error


class TestCompareToAbl:
    def test_exact_match_rule_for_degenerate_se(self):
        stats = simulate(UP_Z, [MeasureStage(pauli("z"), "m")], (pauli("z"), 1.0), 5000, 3)
        predicted = abl_probabilities(TwoStateVector(UP_Z, UP_Z), pauli("z"))
        report = compare_to_abl(stats, predicted, z=4)
        assert report.passed
        assert all(o.std_error == 0.0 for o in report.outcomes)

    def test_wrong_prediction_rejected(self):
        # swapping in the unconditioned prediction (0.75) must fail loudly
        from twostate.rules import OutcomeDistribution

        probe = spin_observable(np.pi / 3)
        stats = simulate(UP_Z, [MeasureStage(probe, "probe")], (pauli("z"), 1.0), 100_000, 6)
        wrong = OutcomeDistribution((1.0, -1.0), (0.75, 0.25))
        report = compare_to_abl(stats, wrong, z=4)
        assert not report.passed
        assert max(abs(o.z_score) for o in report.outcomes) > 50

    def test_accepted_floor(self):
        stats = simulate(UP_Z, [MeasureStage(pauli("z"), "m")], (pauli("z"), 1.0), 300, 3)
        predicted = abl_probabilities(TwoStateVector(UP_Z, UP_Z), pauli("z"))
        with pytest.raises(InsufficientAcceptedTrialsError):
            compare_to_abl(stats, predicted, min_accepted=1000)


class TestInterpretationB:
    def test_sixty_degrees(self):
        report = interpretation_b_experiment(np.pi / 3, 100_000, 21)
        assert report.born_value == pytest.approx(0.75, abs=1e-12)
        assert report.abl_value == pytest.approx(0.9, abs=1e-12)
        assert abs(report.z_vs_abl) <= 4
        assert abs(report.z_vs_born) >= 50

    def test_aligned(self):
        report = interpretation_b_experiment(0.0, 2000, 22)
        assert report.born_value == pytest.approx(1.0, abs=1e-12)
        assert report.abl_value == pytest.approx(1.0, abs=1e-12)
        assert report.frequency == 1.0

    def test_anti_aligned(self):
        report = interpretation_b_experiment(np.pi, 2000, 23)
        assert report.born_value == pytest.approx(0.0, abs=1e-12)
        assert report.abl_value == pytest.approx(0.0, abs=1e-12)
        assert report.frequency == 0.0


class TestSymmetryExperiment:
    def test_probe_before_equals_probe_after(self):
        report = symmetry_experiment(UP_Z, pauli("x"), pauli("y"), 50_000, 31)
        assert report.passed
        for stat in report.early:
            assert abs(stat.frequency - 0.5) <= 4 * stat.std_error

    def test_repeatability_when_probe_equals_middle(self):
        report = symmetry_experiment(UP_Z, pauli("x"), pauli("x"), 20_000, 32)
        assert report.passed
        early = {s.eigenvalue: s.frequency for s in report.early}
        late = {s.eigenvalue: s.frequency for s in report.late}
        assert early.keys() == late.keys()

    def test_eigenstate_probe_certain(self):
        report = symmetry_experiment(UP_Z, pauli("z"), pauli("z"), 5000, 33)
        assert report.passed
        freqs = {s.eigenvalue: s.frequency for s in report.early}
        assert freqs[1.0] == 1.0 and freqs[-1.0] == 0.0


class TestAblAgreementBattery:
    def test_random_scenarios_pass_at_z4(self):
        rng = np.random.default_rng(41)
        done = 0
        while done < 10:
            pre, post = random_state(rng, 2), random_state(rng, 2)
            obs = random_observable(rng, 2)
            acceptance = sum(
                abs(np.vdot(post.amps, p @ pre.amps)) ** 2 for p in obs.projectors
            )
            if acceptance < 0.05:
                continue
            stats = simulate(
                pre,
                [MeasureStage(obs, "m")],
                (state_projector_observable(post), 1.0),
                30_000,
                int(rng.integers(0, 2**32)),
            )
            predicted = abl_probabilities(TwoStateVector(pre, post), obs)
            assert compare_to_abl(stats, predicted, z=4).passed
            done += 1
