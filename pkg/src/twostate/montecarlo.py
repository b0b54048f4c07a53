"""Seeded Monte-Carlo oracle for sequential projective measurements.

This is the brute-force counterpart to the analytic rules: prepare, walk a
timeline of unitaries and collapse-sampled measurements, sample the final
measurement, and keep only runs whose final outcome matches the
post-selection.  Conditional frequencies over the kept runs estimate the
analytic conditional probabilities, with binomial standard errors.

Determinism contract
--------------------
Trials are partitioned into fixed chunks of 4096.  Chunk ``k`` of a run with
seed ``s`` draws from ``numpy.random.Generator(Philox(key=[s mod 2**64, k]))``
(Philox is counter-based with a 128-bit key, so substreams are independent by
construction).  Within a chunk, one uniform array is consumed per measurement
stage and one for the final measurement, in timeline order.  Tallies are
plain integer sums, so the result for a given ``(seed, trials)`` pair is
identical no matter how chunks are scheduled.  A golden test pins the
derivation.

Branch sampling is inverse-CDF over branches in observable order, with the
cumulative weights renormalized so the last entry is exactly 1.  Branches of
Born weight below 1e-15 get exact weight 0, so a null vector is never
normalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .algebra import (
    SpectralObservable,
    StateVector,
    Unitary,
    pauli,
    spin_observable,
    state_projector_observable,
)
from .errors import (
    AllRejectedError,
    DimensionMismatchError,
    InsufficientAcceptedTrialsError,
)
from .rules import OutcomeDistribution, TwoStateVector, abl_probabilities, born_probabilities

CHUNK_SIZE = 4096
ZERO_WEIGHT = 1e-15
MAX_PATHS = 10**6
DEFAULT_MIN_ACCEPTED = 100


@dataclass(frozen=True)
class UnitaryStage:
    unitary: Unitary

    @property
    def dim(self) -> int:
        return self.unitary.dim


@dataclass(frozen=True)
class MeasureStage:
    observable: SpectralObservable
    label: str

    @property
    def dim(self) -> int:
        return self.observable.dim


Stage = Union[UnitaryStage, MeasureStage]


def chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    """The documented substream derivation: (seed, chunk) → Philox key."""
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    key = np.array([seed % 2**64, chunk_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class OutcomeStat:
    eigenvalue: float
    count: int
    frequency: float
    std_error: float


@dataclass(frozen=True)
class StageTally:
    label: str
    eigenvalues: tuple[float, ...]
    counts_all: tuple[int, ...]  # over every trial
    counts_accepted: tuple[int, ...]  # over post-selected trials only


def _freq_stats(eigenvalues, counts, total) -> tuple[OutcomeStat, ...]:
    out = []
    for eig, count in zip(eigenvalues, counts):
        f = count / total
        out.append(OutcomeStat(float(eig), int(count), f, float(np.sqrt(f * (1 - f) / total))))
    return tuple(out)


@dataclass(frozen=True)
class EnsembleStats:
    """Tallies from one simulate() run; all statistics derive from integers."""

    trials: int
    accepted: int
    seed: int
    stages: tuple[StageTally, ...]
    joint_accepted: tuple[tuple[tuple[float, ...], int], ...]  # (outcome tuple, count)
    post_eigenvalues: tuple[float, ...]
    post_counts: tuple[int, ...]
    selected_eigenvalue: float

    @property
    def acceptance(self) -> OutcomeStat:
        f = self.accepted / self.trials
        return OutcomeStat(
            self.selected_eigenvalue,
            self.accepted,
            f,
            float(np.sqrt(f * (1 - f) / self.trials)),
        )

    def _stage(self, label: str | None) -> StageTally:
        if label is None:
            if len(self.stages) != 1:
                raise ValueError("label required when the run has multiple measurement stages")
            return self.stages[0]
        for st in self.stages:
            if st.label == label:
                return st
        raise ValueError(f"no measurement stage labeled {label!r}")

    def conditional(self, label: str | None = None) -> tuple[OutcomeStat, ...]:
        """Per-outcome frequency ± SE among accepted trials for one stage."""
        st = self._stage(label)
        return _freq_stats(st.eigenvalues, st.counts_accepted, self.accepted)

    def conditional_given(
        self, label: str, given: dict[str, float], tol: float = 1e-9
    ) -> tuple[OutcomeStat, ...]:
        """Conditional frequencies for one stage, additionally fixing other stages.

        ``given`` maps stage labels to required eigenvalues; counts come from
        the accepted-run joint tallies.
        """
        labels = [st.label for st in self.stages]
        target = labels.index(self._stage(label).label)
        fixed = {labels.index(self._stage(k).label): v for k, v in given.items()}
        st = self._stage(label)
        counts = np.zeros(len(st.eigenvalues), dtype=np.int64)
        for outcome, count in self.joint_accepted:
            if all(abs(outcome[i] - v) <= tol for i, v in fixed.items()):
                j = int(np.argmin([abs(e - outcome[target]) for e in st.eigenvalues]))
                counts[j] += count
        total = int(counts.sum())
        if total == 0:
            raise InsufficientAcceptedTrialsError("no accepted trials match the given outcomes")
        return _freq_stats(st.eigenvalues, counts, total)


def _build_tree(pre: StateVector, stages: Sequence[Stage], post: SpectralObservable):
    """Precompute all collapse paths: per measurement stage, the branch CDF and
    child index for every reachable node, plus final-stage CDFs per leaf."""
    dim = pre.dim
    for stage in stages:
        if stage.dim != dim:
            raise DimensionMismatchError(f"stage dim {stage.dim} vs system dim {dim}")
    if post.dim != dim:
        raise DimensionMismatchError(f"post observable dim {post.dim} vs system dim {dim}")

    labels = [s.label for s in stages if isinstance(s, MeasureStage)]
    if len(set(labels)) != len(labels):
        raise ValueError(f"measurement stage labels must be unique, got {labels}")

    states: list[np.ndarray] = [pre.amps.copy()]
    paths: list[tuple[int, ...]] = [()]
    tables = []  # one (cum, child) pair per MeasureStage, in timeline order
    for stage in stages:
        if isinstance(stage, UnitaryStage):
            states = [stage.unitary.matrix @ s for s in states]
            continue
        if not isinstance(stage, MeasureStage):
            raise TypeError(f"unsupported stage type {type(stage).__name__}")
        n_branch = stage.observable.num_branches
        if len(states) * n_branch > MAX_PATHS:
            raise ValueError(f"collapse path count exceeds {MAX_PATHS}")
        cum = np.zeros((len(states), n_branch))
        child = np.zeros((len(states), n_branch), dtype=np.int64)
        new_states: list[np.ndarray] = []
        new_paths: list[tuple[int, ...]] = []
        for ni, s in enumerate(states):
            weights = np.empty(n_branch)
            collapsed = []
            for j, proj in enumerate(stage.observable.projectors):
                v = proj @ s
                w = float(np.vdot(v, v).real)
                if w < ZERO_WEIGHT:
                    w, v = 0.0, np.zeros_like(v)
                else:
                    v = v / np.sqrt(w)
                weights[j] = w
                collapsed.append(v)
            total = weights.sum()
            if total < ZERO_WEIGHT:  # dead-end node below a zero-weight branch
                cum[ni] = 1.0
            else:
                cum[ni] = np.cumsum(weights / total)
                cum[ni, -1] = 1.0
            for j, v in enumerate(collapsed):
                child[ni, j] = len(new_states)
                new_states.append(v)
                new_paths.append(paths[ni] + (j,))
        tables.append((cum, child))
        states, paths = new_states, new_paths

    n_post = post.num_branches
    post_cum = np.zeros((len(states), n_post))
    for ni, s in enumerate(states):
        weights = np.array(
            [max(float(np.vdot(s, proj @ s).real), 0.0) for proj in post.projectors]
        )
        weights[weights < ZERO_WEIGHT] = 0.0
        total = weights.sum()
        if total < ZERO_WEIGHT:  # dead-end path (zero-weight ancestor); never sampled
            post_cum[ni] = 1.0
        else:
            post_cum[ni] = np.cumsum(weights / total)
            post_cum[ni, -1] = 1.0
    return tables, post_cum, paths


def simulate(
    pre: StateVector,
    stages: Sequence[Stage],
    post: tuple[SpectralObservable, float],
    trials: int,
    seed: int,
    chunk_size: int = CHUNK_SIZE,
) -> EnsembleStats:
    """Run ``trials`` prepare/measure/post-select experiments.

    Each trial starts in ``pre``, applies unitary stages exactly, samples
    every measurement stage with Born weights and collapses, then samples the
    final observable and is accepted iff the outcome equals the selected
    eigenvalue.  Raises AllRejectedError when nothing survives.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    post_obs, selected = post
    sel_idx = post_obs.branch_index(selected)
    tables, post_cum, paths = _build_tree(pre, stages, post_obs)
    measure_stages = [s for s in stages if isinstance(s, MeasureStage)]
    n_leaves = len(paths)

    stage_counts_all = [np.zeros(st.observable.num_branches, dtype=np.int64) for st in measure_stages]
    stage_counts_acc = [np.zeros(st.observable.num_branches, dtype=np.int64) for st in measure_stages]
    joint_counts = np.zeros(n_leaves, dtype=np.int64)
    post_counts = np.zeros(post_obs.num_branches, dtype=np.int64)

    n_chunks = (trials + chunk_size - 1) // chunk_size
    for k in range(n_chunks):
        m = min(chunk_size, trials - k * chunk_size)
        rng = chunk_rng(seed, k)
        node = np.zeros(m, dtype=np.int64)
        branches = []
        for cum, child in tables:
            u = rng.random(m)
            br = (u[:, None] >= cum[node]).sum(axis=1)
            branches.append(br)
            node = child[node, br]
        u = rng.random(m)
        br_post = (u[:, None] >= post_cum[node]).sum(axis=1)
        accepted_mask = br_post == sel_idx

        for i, br in enumerate(branches):
            stage_counts_all[i] += np.bincount(br, minlength=stage_counts_all[i].size)
            stage_counts_acc[i] += np.bincount(
                br[accepted_mask], minlength=stage_counts_acc[i].size
            )
        joint_counts += np.bincount(node[accepted_mask], minlength=n_leaves)
        post_counts += np.bincount(br_post, minlength=post_counts.size)

    accepted = int(joint_counts.sum())
    if accepted == 0:
        raise AllRejectedError("zero accepted trials; conditional frequencies undefined")

    tallies = tuple(
        StageTally(
            label=st.label,
            eigenvalues=tuple(float(e) for e in st.observable.eigenvalues),
            counts_all=tuple(int(c) for c in stage_counts_all[i]),
            counts_accepted=tuple(int(c) for c in stage_counts_acc[i]),
        )
        for i, st in enumerate(measure_stages)
    )
    joint = tuple(
        (
            tuple(
                float(measure_stages[d].observable.eigenvalues[j])
                for d, j in enumerate(paths[leaf])
            ),
            int(count),
        )
        for leaf, count in enumerate(joint_counts)
        if count > 0
    )
    return EnsembleStats(
        trials=trials,
        accepted=accepted,
        seed=seed,
        stages=tallies,
        joint_accepted=joint,
        post_eigenvalues=tuple(float(e) for e in post_obs.eigenvalues),
        post_counts=tuple(int(c) for c in post_counts),
        selected_eigenvalue=float(selected),
    )


@dataclass(frozen=True)
class OutcomeComparison:
    eigenvalue: float
    predicted: float
    frequency: float
    std_error: float
    z_score: float
    passed: bool


@dataclass(frozen=True)
class ComparisonReport:
    stage: str
    accepted: int
    z_threshold: float
    outcomes: tuple[OutcomeComparison, ...]
    passed: bool


def compare_to_abl(
    stats: EnsembleStats,
    predicted: OutcomeDistribution,
    z: float = 4.0,
    stage_label: str | None = None,
    min_accepted: int = DEFAULT_MIN_ACCEPTED,
) -> ComparisonReport:
    """Per-outcome agreement test: |frequency - predicted| ≤ z·SE.

    SE is the binomial error of the observed frequency.  When the frequency
    is degenerate (0 or 1, hence SE = 0): an exactly degenerate prediction
    must match exactly; otherwise the prediction's own binomial SE is used.
    """
    if stats.accepted < min_accepted:
        raise InsufficientAcceptedTrialsError(
            f"{stats.accepted} accepted trials < floor {min_accepted}"
        )
    observed = stats.conditional(stage_label)
    outcomes = []
    all_pass = True
    for eig, p in zip(predicted.eigenvalues, predicted.probabilities):
        hits = [s for s in observed if abs(s.eigenvalue - eig) <= 1e-9]
        if len(hits) != 1:
            raise ValueError(f"predicted eigenvalue {eig!r} does not match the sampled stage")
        stat = hits[0]
        se = stat.std_error
        if se > 0.0:
            z_score = (stat.frequency - p) / se
            ok = abs(z_score) <= z
        elif p <= 1e-12 or p >= 1 - 1e-12:
            ok = abs(stat.frequency - p) <= 1e-12
            z_score = 0.0 if ok else float("inf")
        else:
            se = float(np.sqrt(p * (1 - p) / stats.accepted))
            z_score = (stat.frequency - p) / se
            ok = abs(z_score) <= z
        outcomes.append(OutcomeComparison(eig, p, stat.frequency, se, z_score, ok))
        all_pass &= ok
    stage = stage_label if stage_label is not None else stats.stages[0].label
    return ComparisonReport(stage, stats.accepted, z, tuple(outcomes), all_pass)


@dataclass(frozen=True)
class InterpretationBReport:
    """Unconditioned prediction vs conditional frequency for the same angle."""

    theta: float
    born_value: float  # what a measurement would show with no conditioning on the later result
    abl_value: float  # the conditional prediction with the measurement actually performed
    frequency: float
    std_error: float
    accepted: int
    trials: int
    z_vs_abl: float
    z_vs_born: float


def interpretation_b_experiment(theta: float, trials: int, seed: int) -> InterpretationBReport:
    """Pre- and post-select spin-up along z; probe spin along an axis at ``theta``.

    Ensemble (i): nothing happens between the selections, every trial is
    accepted, and the unconditioned single-measurement prediction for a
    hypothetical probe is cos²(θ/2).  Ensemble (ii): the probe measurement is
    actually performed; its conditional frequency follows the conditional
    rule, not the unconditioned one.  Sub-ensembles use seed and seed+1.
    """
    up_z = StateVector(np.array([1.0, 0.0], dtype=complex))
    probe = spin_observable(theta)
    post = (pauli("z"), 1.0)

    baseline = simulate(up_z, [], post, trials, seed)
    assert baseline.accepted == baseline.trials
    born = born_probabilities(up_z, probe).probability(1.0)

    stats = simulate(up_z, [MeasureStage(probe, "probe")], post, trials, seed + 1)
    abl = abl_probabilities(TwoStateVector(up_z, up_z), probe).probability(1.0)
    stat = stats.conditional("probe")[0]
    assert abs(stat.eigenvalue - 1.0) <= 1e-12
    se = stat.std_error

    def z_against(target: float) -> float:
        if se == 0.0:
            return 0.0 if abs(stat.frequency - target) <= 1e-12 else float("inf")
        return (stat.frequency - target) / se

    return InterpretationBReport(
        theta=theta,
        born_value=born,
        abl_value=abl,
        frequency=stat.frequency,
        std_error=se,
        accepted=stats.accepted,
        trials=trials,
        z_vs_abl=z_against(abl),
        z_vs_born=z_against(born),
    )


@dataclass(frozen=True)
class SymmetryReport:
    """Distribution of an early probe vs the same probe run late, boundary states equal."""

    probe_label: str
    early: tuple[OutcomeStat, ...]
    late: tuple[OutcomeStat, ...]
    max_z: float
    passed: bool


def symmetry_experiment(
    psi: StateVector,
    middle: SpectralObservable,
    probe: SpectralObservable,
    trials: int,
    seed: int,
    z: float = 4.0,
) -> SymmetryReport:
    """With pre = post = psi, probing before the middle measurement must match
    probing after it.

    Runs [probe, middle] and [middle, probe], both post-selected on finding
    ``psi`` again, and compares the probe's conditional distributions.
    """
    post = (state_projector_observable(psi), 1.0)
    early = simulate(
        psi, [MeasureStage(probe, "probe"), MeasureStage(middle, "middle")], post, trials, seed
    ).conditional("probe")
    late = simulate(
        psi, [MeasureStage(middle, "middle"), MeasureStage(probe, "probe")], post, trials, seed + 1
    ).conditional("probe")
    max_z = 0.0
    for a, b in zip(early, late):
        se = float(np.hypot(a.std_error, b.std_error))
        if se == 0.0:
            if abs(a.frequency - b.frequency) > 1e-12:
                max_z = float("inf")
            continue
        max_z = max(max_z, abs(a.frequency - b.frequency) / se)
    return SymmetryReport("probe", early, late, max_z, passed=max_z <= z)
