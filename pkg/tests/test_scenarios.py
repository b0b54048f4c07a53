"""Scenario schema, builtin catalog, and the analytic/oracle runner."""

import copy

import numpy as np
import pytest

from twostate.algebra import (
    SpectralObservable,
    StateVector,
    Unitary,
    basis_state,
    pauli,
    spin_state,
    state_projector_observable,
)
from twostate.errors import ScenarioFormatError, ZeroDenominatorError
from twostate.montecarlo import MeasureStage, UnitaryStage
from twostate.rules import TwoStateVector, abl_probabilities
from twostate.scenarios import (
    ScenarioSpec,
    WeakStage,
    analytic_predictions,
    builtin,
    builtin_names,
    load_scenario,
    run_scenario,
    to_document,
)

MINIMAL = {
    "dim": 2,
    "pre": [1, 0],
    "timeline": [],
    "post": {"observable": {"pauli": "z"}, "select": 1},
}


def random_state(rng, dim):
    return StateVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_unitary(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, _ = np.linalg.qr(m)
    return Unitary(q)


class TestLoader:
    def test_minimal_document(self):
        spec = load_scenario(MINIMAL)
        assert spec.dim == 2 and spec.timeline == ()
        assert spec.post_select == 1.0

    def test_bare_and_paired_amplitudes(self):
        doc = dict(MINIMAL, pre=[[0.6, 0.0], [0.0, 0.8]])
        spec = load_scenario(doc)
        np.testing.assert_allclose(spec.pre.amps, [0.6, 0.8j])

    def test_malformed_projector_names_branch(self):
        doc = copy.deepcopy(MINIMAL)
        doc["post"] = {
            "observable": {
                "explicit": [
                    {"eigenvalue": 1.0, "projector": [[0.5, 0.0], [0.0, 0.5]]},
                    {"eigenvalue": -1.0, "projector": [[0.5, 0.0], [0.0, 0.5]]},
                ]
            },
            "select": 1.0,
        }
        with pytest.raises(ScenarioFormatError, match=r"post\.observable.*branch 0"):
            load_scenario(doc)

    def test_unknown_field_rejected(self):
        with pytest.raises(ScenarioFormatError, match="bogus"):
            load_scenario(dict(MINIMAL, bogus=1))

    def test_unnormalized_pre_rejected(self):
        with pytest.raises(ScenarioFormatError, match="pre"):
            load_scenario(dict(MINIMAL, pre=[1, 1]))

    def test_non_unitary_rejected(self):
        doc = dict(MINIMAL, timeline=[{"unitary": [[1, 1], [0, 1]]}])
        with pytest.raises(ScenarioFormatError, match=r"timeline\[0\]"):
            load_scenario(doc)

    def test_multiple_post_entries_rejected(self):
        doc = dict(MINIMAL, post=[MINIMAL["post"], MINIMAL["post"]])
        with pytest.raises(ScenarioFormatError, match="exactly one"):
            load_scenario(doc)

    def test_select_must_be_branch(self):
        doc = dict(MINIMAL, post={"observable": {"pauli": "z"}, "select": 0.5})
        with pytest.raises(ScenarioFormatError, match="select"):
            load_scenario(doc)

    def test_dimension_mismatch_path(self):
        doc = dict(MINIMAL, dim=4)
        with pytest.raises(ScenarioFormatError):
            load_scenario(doc)

    def test_json_text_accepted(self):
        import json

        spec = load_scenario(json.dumps(MINIMAL))
        assert spec.dim == 2

    def test_non_object_stage_body(self):
        doc = dict(MINIMAL, timeline=[{"measure": "oops"}])
        with pytest.raises(ScenarioFormatError, match=r"timeline\[0\]\.measure"):
            load_scenario(doc)

    def test_non_object_observable_body(self):
        doc = dict(MINIMAL, post={"observable": {"spin": "x"}, "select": 1})
        with pytest.raises(ScenarioFormatError, match=r"spin"):
            load_scenario(doc)

    def test_non_numeric_param(self):
        doc = dict(MINIMAL, params={"theta": "x"})
        with pytest.raises(ScenarioFormatError, match=r"params\.theta"):
            load_scenario(doc)

    def test_duplicate_stage_labels(self):
        doc = dict(
            MINIMAL,
            timeline=[
                {"measure": {"observable": {"pauli": "z"}, "label": "m"}},
                {"measure": {"observable": {"pauli": "x"}, "label": "m"}},
            ],
        )
        with pytest.raises(ScenarioFormatError, match="unique"):
            load_scenario(doc)

    def test_weak_measure_entry(self):
        doc = dict(
            MINIMAL,
            timeline=[
                {"weak_measure": {"operator": {"pauli": "z"}, "strength": 0.05, "label": "wz"}}
            ],
            post={"observable": {"pauli": "x"}, "select": 1},
        )
        spec = load_scenario(doc)
        assert isinstance(spec.timeline[0], WeakStage)

    def test_round_trip_builtin(self):
        for name in builtin_names():
            spec = builtin(name)
            doc = to_document(spec)
            again = to_document(load_scenario(doc))
            assert doc == again

    def test_round_trip_preserves_semantics(self):
        spec = builtin("sharp-shanks")
        loaded = load_scenario(to_document(spec))
        np.testing.assert_allclose(loaded.pre.amps, spec.pre.amps)
        original = run_scenario(spec, mode="analytic")
        reloaded = run_scenario(loaded, mode="analytic")
        np.testing.assert_allclose(
            original.stages[0].analytic, reloaded.stages[0].analytic, atol=1e-14
        )


class TestBuiltins:
    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown builtin"):
            builtin("not-a-scenario")

    def test_unknown_parameter(self):
        with pytest.raises(ValueError, match="parameter"):
            builtin("spin-zz-xi", angle=1.0)

    def test_out_of_range_parameter(self):
        with pytest.raises(ValueError, match="range"):
            builtin("spin-zz-xi", theta=7.0)

    def test_catalog_complete(self):
        assert set(builtin_names()) == {
            "spin-zz-xi",
            "sharp-shanks",
            "mach-zehnder",
            "tandem-mz",
            "erasure",
            "reality-pair",
        }

    def test_spin_zz_xi_aligned_probe(self):
        report = run_scenario(builtin("spin-zz-xi", theta=0.0), mode="analytic")
        assert report.stages[0].analytic[0] == pytest.approx(1.0, abs=1e-12)

    def test_sharp_shanks_values(self):
        report = run_scenario(
            builtin("sharp-shanks", theta_ab=np.pi / 3, theta_bc=np.pi / 2), mode="analytic"
        )
        assert report.acceptance_analytic == pytest.approx(0.5, abs=1e-12)
        assert report.stages[0].analytic[0] == pytest.approx(0.75, abs=1e-12)

    def test_mach_zehnder_dark_port(self):
        with_path = run_scenario(builtin("mach-zehnder"), mode="analytic")
        assert with_path.acceptance_analytic == pytest.approx(0.5, abs=1e-12)
        np.testing.assert_allclose(with_path.stages[0].analytic, [0.5, 0.5], atol=1e-12)
        without = run_scenario(
            builtin("mach-zehnder", which_path_stage=False), mode="analytic"
        )
        assert without.acceptance_analytic == pytest.approx(1.0, abs=1e-12)

    def test_reality_pair_reports(self):
        report = run_scenario(builtin("reality-pair"), mode="analytic")
        entries = {e.label: e for e in report.reality.entries}
        assert entries["sz"].certain and entries["sz"].eigenvalue == 1.0
        assert entries["sx"].certain and entries["sx"].eigenvalue == 1.0
        audit = dict(report.product_audits)["sz*sx"]
        assert audit.ab_weak == pytest.approx(-1.0)
        assert audit.failed


class TestAnalyticEnumeration:
    def test_single_stage_reduces_to_conditional_rule(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            pre, post = random_state(rng, 2), random_state(rng, 2)
            if abs(np.vdot(post.amps, pre.amps)) < 0.05:
                continue
            m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            obs = SpectralObservable.from_hermitian((m + m.conj().T) / 2)
            spec = ScenarioSpec(
                name="reduction",
                dim=2,
                pre=pre,
                timeline=(MeasureStage(obs, "m"),),
                post_observable=state_projector_observable(post),
                post_select=1.0,
            )
            dists, _ = analytic_predictions(spec)
            expected = abl_probabilities(TwoStateVector(pre, post), obs)
            np.testing.assert_allclose(
                dists[0].probabilities, expected.probabilities, atol=1e-12
            )

    def test_unitary_transport_in_timeline(self):
        rng = np.random.default_rng(14)
        u1, u2 = random_unitary(rng, 2), random_unitary(rng, 2)
        pre, post = random_state(rng, 2), random_state(rng, 2)
        obs = pauli("z")
        spec = ScenarioSpec(
            name="transport",
            dim=2,
            pre=pre,
            timeline=(UnitaryStage(u1), MeasureStage(obs, "m"), UnitaryStage(u2)),
            post_observable=state_projector_observable(post),
            post_select=1.0,
        )
        dists, _ = analytic_predictions(spec)
        pre_t = StateVector(u1.matrix @ pre.amps)
        post_t = StateVector(u2.matrix.conj().T @ post.amps)
        expected = abl_probabilities(TwoStateVector(pre_t, post_t), obs)
        np.testing.assert_allclose(dists[0].probabilities, expected.probabilities, atol=1e-12)

    def test_multi_stage_chain_against_hand_enumeration(self):
        # chain: probe z then x, pre up-z, post up-x; amplitudes by hand
        spec = ScenarioSpec(
            name="chain",
            dim=2,
            pre=basis_state(2, 0),
            timeline=(MeasureStage(pauli("z"), "first"), MeasureStage(pauli("x"), "second")),
            post_observable=pauli("x"),
            post_select=1.0,
        )
        dists, acceptance = analytic_predictions(spec)
        # up-z collapses to itself on z (prob 1); then x outcomes 1/2 each; the
        # post-selection keeps only the +x branch
        assert acceptance == pytest.approx(0.5, abs=1e-12)
        first = dict(zip(dists[0].eigenvalues, dists[0].probabilities))
        second = dict(zip(dists[1].eigenvalues, dists[1].probabilities))
        assert first[1.0] == pytest.approx(1.0, abs=1e-12)
        assert second[1.0] == pytest.approx(1.0, abs=1e-12)

    def test_unreachable_post_selection(self):
        spec = ScenarioSpec(
            name="dead",
            dim=2,
            pre=basis_state(2, 0),
            timeline=(),
            post_observable=pauli("z"),
            post_select=-1.0,
        )
        with pytest.raises(ZeroDenominatorError, match="dead"):
            analytic_predictions(spec)


class TestRunScenario:
    def test_both_mode_attaches_verdicts(self):
        report = run_scenario(builtin("spin-zz-xi"), mode="both", trials=40_000, seed=2)
        assert report.passed is True
        assert report.stages[0].z_scores is not None
        assert report.acceptance is not None

    def test_oracle_mode_has_no_analytic(self):
        report = run_scenario(builtin("spin-zz-xi"), mode="oracle", trials=5_000, seed=2)
        assert report.stages[0].analytic is None
        assert report.stages[0].frequencies is not None
        assert report.passed is None

    def test_every_builtin_passes_both_mode(self):
        for i, name in enumerate(builtin_names()):
            report = run_scenario(builtin(name), mode="both", trials=30_000, seed=50 + i)
            assert report.passed is True, name

    def test_erasure_branch_conditionals(self):
        spec = builtin("erasure", theta=0.8, phi=0.3)
        report = run_scenario(spec, mode="both", trials=60_000, seed=3)
        assert report.passed is True
        sy = next(st for st in report.stages if st.label == "sy")
        np.testing.assert_allclose(sy.analytic, [0.5, 0.5], atol=1e-12)

    def test_csv_rows_schema(self):
        report = run_scenario(builtin("sharp-shanks"), mode="both", trials=20_000, seed=4)
        rows = report.csv_rows()
        assert {"scenario", "stage", "eigenvalue", "analytic", "frequency", "se", "z", "pass"} == set(
            rows[0]
        )
        assert len(rows) == 2

    def test_to_dict_serializes(self):
        import json

        report = run_scenario(builtin("reality-pair"), mode="analytic")
        text = json.dumps(report.to_dict())
        assert "product_audits" in text

    def test_weak_stage_report_and_validation(self):
        spec = ScenarioSpec(
            name="weak-probe",
            dim=2,
            pre=spin_state(2 * np.pi / 3),
            timeline=(WeakStage(pauli("z").operator, 0.05, "wz"),),
            post_observable=pauli("z"),
            post_select=1.0,
        )
        analytic = run_scenario(spec, mode="analytic")
        wv = analytic.weak[0].value
        assert analytic.weak[0].passed is None
        validated = run_scenario(spec, mode="both", trials=1_000, seed=5)
        assert validated.weak[0].passed is True
        assert validated.weak[0].value == pytest.approx(wv)
        assert validated.weak[0].extrapolated == pytest.approx(wv.real, abs=1e-5)

    def test_weak_stage_validation_survives_amplification(self):
        # near-orthogonal selections push the weak value far outside the
        # spectrum; the pointer cross-check must still land on it
        spec = ScenarioSpec(
            name="amplified",
            dim=2,
            pre=spin_state(3.0),
            timeline=(WeakStage(pauli("x").operator, 0.05, "wx"),),
            post_observable=pauli("z"),
            post_select=1.0,
        )
        report = run_scenario(spec, mode="analytic")
        assert abs(report.weak[0].value.real) > 10
        from twostate.scenarios import _weak_reports

        validated = _weak_reports(spec, validate=True)[0]
        assert validated.passed is True
        assert validated.extrapolated == pytest.approx(
            validated.value.real, rel=1e-5
        )

    def test_weak_stage_rejects_strong_company(self):
        spec = ScenarioSpec(
            name="mixed",
            dim=2,
            pre=basis_state(2, 0),
            timeline=(
                MeasureStage(pauli("x"), "strong"),
                WeakStage(pauli("z").operator, 0.05, "wz"),
            ),
            post_observable=pauli("z"),
            post_select=1.0,
        )
        with pytest.raises(ScenarioFormatError, match="weak"):
            run_scenario(spec, mode="analytic")

    def test_counterfactuals_require_unitary_timeline(self):
        spec = ScenarioSpec(
            name="bad-cf",
            dim=2,
            pre=basis_state(2, 0),
            timeline=(MeasureStage(pauli("x"), "strong"),),
            post_observable=pauli("x"),
            post_select=1.0,
            counterfactuals=(("sz", pauli("z")),),
        )
        with pytest.raises(ScenarioFormatError, match="counterfactual"):
            run_scenario(spec, mode="analytic")

    def test_dimension_guard_in_spec(self):
        with pytest.raises(ScenarioFormatError):
            ScenarioSpec(
                name="bad",
                dim=3,
                pre=basis_state(2, 0),
                timeline=(),
                post_observable=pauli("z"),
                post_select=1.0,
            )
