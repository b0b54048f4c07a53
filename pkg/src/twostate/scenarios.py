"""Declarative pre/post-selection scenarios: schema, loader, catalog, runner.

A scenario names a preparation, an ordered timeline of unitary segments and
measurement stages, and a single post-selection outcome.  Each scenario can
run in analytic mode (conditional probabilities by exhaustive branch-path
enumeration), oracle mode (the seeded Monte-Carlo sampler), or both, in which
case the report carries per-outcome agreement verdicts.

Document format (JSON object)::

    {
      "name": str,                  # optional
      "dim": int,
      "pre": [amp, ...],            # amp = number or [re, im]
      "timeline": [
        {"unitary": [[amp, ...], ...]},
        {"measure": {"observable": <obs>, "label": str}},
        {"weak_measure": {"operator": <obs> | {"matrix": [[amp,...],...]},
                          "strength": float, "label": str}}
      ],
      "post": {"observable": <obs>, "select": eigenvalue},
      "params": {str: float},      # optional
      "trials": int, "seed": int,  # optional
      "counterfactuals": [{"observable": <obs>, "label": str}],          # optional
      "products": [{"label": str, "left": <op>, "right": <op>}]          # optional
    }

where ``<obs>`` is one of ``{"pauli": "x"|"y"|"z"}``,
``{"spin": {"theta": r, "phi": r}}``,
``{"explicit": [{"eigenvalue": r, "projector": [[amp,...],...]}, ...]}``,
``{"which_path": {}}``, ``{"bell_basis": {}}``, or
``{"detector_basis": {"unitary": [[amp,...],...]}}``.

Counterfactuals are alternative measurements considered one at a time at the
end of the timeline (several incompatible ones may be listed together); they
power the element-of-reality and product-rule reports and are only allowed in
timelines without strong measurement stages.  Angles are radians everywhere.
The 50/50 beamsplitter convention used by the interferometer builtins is
(1/sqrt2)[[1, i], [i, 1]], which makes the dark output port explicit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

import numpy as np

from . import pointer as pointer_model
from .algebra import (
    LinearOperator,
    SpectralObservable,
    StateVector,
    Unitary,
    basis_state,
    beamsplitter,
    bell_basis,
    detector_basis,
    expand_observable,
    pauli,
    pauli_operator,
    spin_observable,
    spin_state,
    tensor,
    which_path,
)
from .errors import (
    AllRejectedError,
    ObservableError,
    NormalizationError,
    ScenarioFormatError,
    ZeroDenominatorError,
)
from .montecarlo import (
    MAX_PATHS,
    EnsembleStats,
    MeasureStage,
    OutcomeStat,
    UnitaryStage,
    compare_to_abl,
    simulate,
)
from .rules import (
    OutcomeDistribution,
    ProductRuleReport,
    RealityReport,
    TwoStateVector,
    abl_probabilities,
    elements_of_reality,
    product_rule_audit,
    transport_backward,
    transport_forward,
    weak_value,
)

DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 7


@dataclass(frozen=True)
class WeakStage:
    """A weakly coupled probe of an operator at a point in the timeline."""

    operator: LinearOperator
    strength: float
    label: str

    @property
    def dim(self) -> int:
        return self.operator.dim


TimelineEntry = Union[UnitaryStage, MeasureStage, WeakStage]


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    dim: int
    pre: StateVector
    timeline: tuple[TimelineEntry, ...]
    post_observable: SpectralObservable
    post_select: float
    params: Mapping[str, float] = field(default_factory=dict)
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    counterfactuals: tuple[tuple[str, SpectralObservable], ...] = ()
    products: tuple[tuple[str, LinearOperator, LinearOperator], ...] = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.pre.dim != self.dim:
            raise ScenarioFormatError(f"pre: dimension {self.pre.dim} != dim {self.dim}")
        for i, entry in enumerate(self.timeline):
            if entry.dim != self.dim:
                raise ScenarioFormatError(
                    f"timeline[{i}]: dimension {entry.dim} != dim {self.dim}"
                )
        if self.post_observable.dim != self.dim:
            raise ScenarioFormatError(
                f"post.observable: dimension {self.post_observable.dim} != dim {self.dim}"
            )
        labels = [e.label for e in self.timeline if isinstance(e, (MeasureStage, WeakStage))]
        if len(set(labels)) != len(labels):
            raise ScenarioFormatError(f"stage labels must be unique, got {labels}")
        self.post_observable.branch_index(self.post_select)  # must exist
        for label, obs in self.counterfactuals:
            if obs.dim != self.dim:
                raise ScenarioFormatError(f"counterfactual {label!r}: dimension mismatch")
        for label, left, right in self.products:
            if left.dim != self.dim or right.dim != self.dim:
                raise ScenarioFormatError(f"product {label!r}: dimension mismatch")
        if self.trials < 1:
            raise ScenarioFormatError("trials must be >= 1")

    @property
    def measure_labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.timeline if isinstance(e, MeasureStage))


# ---------------------------------------------------------------------------
# document parsing


def _complex_from(value, path: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(x, (int, float)) for x in value
    ):
        return complex(value[0], value[1])
    raise ScenarioFormatError(f"{path}: expected a number or [re, im] pair, got {value!r}")


def _vector_from(values, path: str) -> np.ndarray:
    if not isinstance(values, (list, tuple)) or not values:
        raise ScenarioFormatError(f"{path}: expected a nonempty amplitude list")
    return np.array([_complex_from(v, f"{path}[{i}]") for i, v in enumerate(values)])


def _matrix_from(values, path: str) -> np.ndarray:
    if not isinstance(values, (list, tuple)) or not values:
        raise ScenarioFormatError(f"{path}: expected a nonempty matrix")
    rows = [_vector_from(row, f"{path}[{i}]") for i, row in enumerate(values)]
    if len({r.size for r in rows}) != 1:
        raise ScenarioFormatError(f"{path}: ragged matrix rows")
    return np.array(rows)


def _number_from(value, path: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ScenarioFormatError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _mapping_from(value, path: str) -> Mapping:
    if not isinstance(value, Mapping):
        raise ScenarioFormatError(f"{path}: expected an object, got {value!r}")
    return value


def resolve_observable(spec, dim: int | None, path: str) -> SpectralObservable:
    """Expand an observable document node into a SpectralObservable."""
    if not isinstance(spec, Mapping) or len(spec) != 1:
        raise ScenarioFormatError(f"{path}: expected a single-key observable object")
    (kind, body), = spec.items()
    try:
        if kind == "pauli":
            if body not in ("x", "y", "z"):
                raise ScenarioFormatError(f"{path}.pauli: expected 'x', 'y' or 'z'")
            obs = pauli(body)
        elif kind == "spin":
            body = _mapping_from(body, f"{path}.spin")
            theta = _number_from(body.get("theta"), f"{path}.spin.theta")
            phi = _number_from(body.get("phi", 0.0), f"{path}.spin.phi")
            obs = spin_observable(theta, phi)
        elif kind == "which_path":
            obs = which_path()
        elif kind == "bell_basis":
            obs = bell_basis()
        elif kind == "detector_basis":
            body = _mapping_from(body, f"{path}.detector_basis")
            mat = _matrix_from(body.get("unitary"), f"{path}.detector_basis.unitary")
            obs = detector_basis(Unitary(mat))
        elif kind == "explicit":
            if not isinstance(body, (list, tuple)) or not body:
                raise ScenarioFormatError(f"{path}.explicit: expected a branch list")
            eigs, projs = [], []
            for i, branch in enumerate(body):
                branch = _mapping_from(branch, f"{path}.explicit[{i}]")
                eigs.append(_number_from(branch.get("eigenvalue"), f"{path}.explicit[{i}].eigenvalue"))
                projs.append(_matrix_from(branch.get("projector"), f"{path}.explicit[{i}].projector"))
            obs = SpectralObservable(np.array(eigs), np.array(projs))
        else:
            raise ScenarioFormatError(f"{path}: unknown observable kind {kind!r}")
    except (ObservableError, NormalizationError, ValueError) as exc:
        raise ScenarioFormatError(f"{path}: {exc}") from exc
    if dim is not None and obs.dim != dim:
        raise ScenarioFormatError(f"{path}: observable dimension {obs.dim} != dim {dim}")
    return obs


def _resolve_operator(spec, dim: int, path: str) -> LinearOperator:
    if isinstance(spec, Mapping) and set(spec) == {"matrix"}:
        mat = _matrix_from(spec["matrix"], f"{path}.matrix")
        if mat.shape[0] != dim:
            raise ScenarioFormatError(f"{path}.matrix: dimension {mat.shape[0]} != dim {dim}")
        return LinearOperator(mat)
    return resolve_observable(spec, dim, path).operator


def load_scenario(document) -> ScenarioSpec:
    """Validate a scenario document (dict or JSON text) into a ScenarioSpec."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise ScenarioFormatError("scenario document must be a JSON object")
    known = {
        "name", "dim", "pre", "timeline", "post",
        "params", "trials", "seed", "counterfactuals", "products",
    }
    for key in document:
        if key not in known:
            raise ScenarioFormatError(f"{key}: unknown field")

    dim = document.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ScenarioFormatError("dim: expected a positive integer")
    try:
        pre = StateVector(_vector_from(document.get("pre"), "pre"))
    except NormalizationError as exc:
        raise ScenarioFormatError(f"pre: {exc}") from exc

    timeline: list[TimelineEntry] = []
    entries = document.get("timeline", [])
    if not isinstance(entries, (list, tuple)):
        raise ScenarioFormatError("timeline: expected a list")
    for i, entry in enumerate(entries):
        path = f"timeline[{i}]"
        if not isinstance(entry, Mapping) or len(entry) != 1:
            raise ScenarioFormatError(f"{path}: expected a single-key stage object")
        (kind, body), = entry.items()
        if kind == "unitary":
            try:
                timeline.append(UnitaryStage(Unitary(_matrix_from(body, f"{path}.unitary"))))
            except NormalizationError as exc:
                raise ScenarioFormatError(f"{path}.unitary: {exc}") from exc
        elif kind == "measure":
            body = _mapping_from(body, f"{path}.measure")
            obs = resolve_observable(body.get("observable"), dim, f"{path}.measure.observable")
            label = body.get("label")
            if not isinstance(label, str) or not label:
                raise ScenarioFormatError(f"{path}.measure.label: expected a nonempty string")
            timeline.append(MeasureStage(obs, label))
        elif kind == "weak_measure":
            body = _mapping_from(body, f"{path}.weak_measure")
            op = _resolve_operator(body.get("operator"), dim, f"{path}.weak_measure.operator")
            strength = _number_from(body.get("strength"), f"{path}.weak_measure.strength")
            label = body.get("label")
            if not isinstance(label, str) or not label:
                raise ScenarioFormatError(f"{path}.weak_measure.label: expected a nonempty string")
            timeline.append(WeakStage(op, strength, label))
        else:
            raise ScenarioFormatError(f"{path}: unknown stage kind {kind!r}")

    post = document.get("post")
    if isinstance(post, (list, tuple)):
        raise ScenarioFormatError("post: exactly one post-selection entry is allowed")
    if not isinstance(post, Mapping):
        raise ScenarioFormatError("post: expected an object with observable and select")
    post_obs = resolve_observable(post.get("observable"), dim, "post.observable")
    select = _number_from(post.get("select"), "post.select")
    try:
        post_obs.branch_index(select)
    except ValueError as exc:
        raise ScenarioFormatError(f"post.select: {exc}") from exc

    params = document.get("params", {})
    if not isinstance(params, Mapping):
        raise ScenarioFormatError("params: expected an object")
    params = {str(k): _number_from(v, f"params.{k}") for k, v in params.items()}
    counterfactuals = []
    for i, entry in enumerate(document.get("counterfactuals", [])):
        path = f"counterfactuals[{i}]"
        if not isinstance(entry, Mapping):
            raise ScenarioFormatError(f"{path}: expected an object")
        label = entry.get("label")
        if not isinstance(label, str) or not label:
            raise ScenarioFormatError(f"{path}.label: expected a nonempty string")
        counterfactuals.append((label, resolve_observable(entry.get("observable"), dim, f"{path}.observable")))
    products = []
    for i, entry in enumerate(document.get("products", [])):
        path = f"products[{i}]"
        if not isinstance(entry, Mapping):
            raise ScenarioFormatError(f"{path}: expected an object")
        label = entry.get("label")
        if not isinstance(label, str) or not label:
            raise ScenarioFormatError(f"{path}.label: expected a nonempty string")
        products.append((
            label,
            _resolve_operator(entry.get("left"), dim, f"{path}.left"),
            _resolve_operator(entry.get("right"), dim, f"{path}.right"),
        ))

    trials = document.get("trials", DEFAULT_TRIALS)
    seed = document.get("seed", DEFAULT_SEED)
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        raise ScenarioFormatError("trials: expected a positive integer")
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ScenarioFormatError("seed: expected a nonnegative integer")
    return ScenarioSpec(
        name=str(document.get("name", "unnamed")),
        dim=dim,
        pre=pre,
        timeline=tuple(timeline),
        post_observable=post_obs,
        post_select=select,
        params=params,
        trials=trials,
        seed=seed,
        counterfactuals=tuple(counterfactuals),
        products=tuple(products),
    )


def _encode_complex(z: complex):
    return [float(z.real), float(z.imag)]


def _encode_matrix(mat: np.ndarray):
    return [[_encode_complex(z) for z in row] for row in mat]


def _encode_observable(obs: SpectralObservable):
    return {
        "explicit": [
            {"eigenvalue": float(e), "projector": _encode_matrix(p)}
            for e, p in obs.branches()
        ]
    }


def to_document(spec: ScenarioSpec) -> dict[str, Any]:
    """Serialize a ScenarioSpec back to the JSON document schema."""
    timeline = []
    for entry in spec.timeline:
        if isinstance(entry, UnitaryStage):
            timeline.append({"unitary": _encode_matrix(entry.unitary.matrix)})
        elif isinstance(entry, MeasureStage):
            timeline.append({"measure": {"observable": _encode_observable(entry.observable),
                                         "label": entry.label}})
        else:
            timeline.append({"weak_measure": {"operator": {"matrix": _encode_matrix(entry.operator.matrix)},
                                              "strength": entry.strength,
                                              "label": entry.label}})
    doc: dict[str, Any] = {
        "name": spec.name,
        "dim": spec.dim,
        "pre": [_encode_complex(a) for a in spec.pre.amps],
        "timeline": timeline,
        "post": {"observable": _encode_observable(spec.post_observable),
                 "select": float(spec.post_select)},
        "params": dict(spec.params),
        "trials": spec.trials,
        "seed": spec.seed,
    }
    if spec.counterfactuals:
        doc["counterfactuals"] = [
            {"label": label, "observable": _encode_observable(obs)}
            for label, obs in spec.counterfactuals
        ]
    if spec.products:
        doc["products"] = [
            {"label": label,
             "left": {"matrix": _encode_matrix(left.matrix)},
             "right": {"matrix": _encode_matrix(right.matrix)}}
            for label, left, right in spec.products
        ]
    return doc


# ---------------------------------------------------------------------------
# builtin catalog


def _check_angle(name: str, value: float, low: float, high: float) -> float:
    value = float(value)
    if not np.isfinite(value) or not (low <= value <= high):
        raise ValueError(f"parameter {name}={value!r} outside documented range [{low}, {high}]")
    return value


def _detector_observable() -> SpectralObservable:
    # D1 <-> port d (index 1), D2 <-> port u (index 0); for the balanced
    # interferometer fed through port u, all amplitude exits at D1.
    proj_d = np.array([[0, 0], [0, 1]], dtype=complex)
    proj_u = np.array([[1, 0], [0, 0]], dtype=complex)
    return SpectralObservable(np.array([1.0, 2.0]), np.array([proj_d, proj_u]))


def _builtin_spin_zz_xi(theta: float = np.pi / 3) -> ScenarioSpec:
    theta = _check_angle("theta", theta, 0.0, np.pi)
    up_z = basis_state(2, 0)
    return ScenarioSpec(
        name="spin-zz-xi",
        dim=2,
        pre=up_z,
        timeline=(MeasureStage(spin_observable(theta), "probe"),),
        post_observable=pauli("z"),
        post_select=1.0,
        params={"theta": theta},
        notes=(
            "pre- and post-select spin-up along z; probe the spin component "
            "tilted by theta in between",
        ),
    )


def _builtin_sharp_shanks(theta_ab: float = np.pi / 3, theta_bc: float = np.pi / 2) -> ScenarioSpec:
    theta_ab = _check_angle("theta_ab", theta_ab, 0.0, np.pi)
    theta_bc = _check_angle("theta_bc", theta_bc, 0.0, np.pi)
    return ScenarioSpec(
        name="sharp-shanks",
        dim=2,
        pre=basis_state(2, 0),
        timeline=(MeasureStage(spin_observable(theta_ab), "middle"),),
        post_observable=spin_observable(theta_ab + theta_bc),
        post_select=1.0,
        params={"theta_ab": theta_ab, "theta_bc": theta_bc},
        notes=(
            "three consecutive spin-component measurements along coplanar axes "
            "a, b, c with relative angles theta_ab and theta_bc; prepared up "
            "along a, post-selected up along c",
        ),
    )


def _builtin_mach_zehnder(which_path_stage: float | bool = True) -> ScenarioSpec:
    timeline: list[TimelineEntry] = [UnitaryStage(beamsplitter())]
    if which_path_stage:
        timeline.append(MeasureStage(which_path(), "path"))
    timeline.append(UnitaryStage(beamsplitter()))
    return ScenarioSpec(
        name="mach-zehnder",
        dim=2,
        pre=basis_state(2, 0),
        timeline=tuple(timeline),
        post_observable=_detector_observable(),
        post_select=1.0,
        params={"which_path": 1.0 if which_path_stage else 0.0},
        notes=(
            "balanced interferometer reconstruction: input port u, 50/50 "
            "splitters (1/sqrt2)[[1,i],[i,1]], optional path detector between "
            "them; detector D1 sits on the bright output port",
        ),
    )


def _builtin_tandem_mz(
    theta_1a: float = 0.6,
    theta_1b: float = 1.1,
    theta_2a: float = 0.8,
    theta_2b: float = 0.5,
    which_path_stage: float | bool = True,
) -> ScenarioSpec:
    angles = {
        "theta_1a": _check_angle("theta_1a", theta_1a, 0.0, np.pi / 2),
        "theta_1b": _check_angle("theta_1b", theta_1b, 0.0, np.pi / 2),
        "theta_2a": _check_angle("theta_2a", theta_2a, 0.0, np.pi / 2),
        "theta_2b": _check_angle("theta_2b", theta_2b, 0.0, np.pi / 2),
    }
    timeline: list[TimelineEntry] = [
        UnitaryStage(beamsplitter(angles["theta_1a"])),
        UnitaryStage(beamsplitter(angles["theta_1b"])),
    ]
    if which_path_stage:
        timeline.append(MeasureStage(which_path(), "path"))
    timeline += [
        UnitaryStage(beamsplitter(angles["theta_2a"])),
        UnitaryStage(beamsplitter(angles["theta_2b"])),
    ]
    params = dict(angles)
    params["which_path"] = 1.0 if which_path_stage else 0.0
    return ScenarioSpec(
        name="tandem-mz",
        dim=2,
        pre=basis_state(2, 0),
        timeline=tuple(timeline),
        post_observable=_detector_observable(),
        post_select=1.0,
        params=params,
        notes=(
            "two cascaded two-mode interferometers on one path space with an "
            "optional which-path detector between them; generic reconstruction "
            "parameterized by both splitter-angle pairs",
        ),
    )


def _builtin_erasure(theta: float = 0.7, phi: float = 1.1) -> ScenarioSpec:
    theta = _check_angle("theta", theta, 0.0, np.pi)
    phi = float(phi)
    if not np.isfinite(phi):
        raise ValueError("parameter phi must be finite")
    particle = spin_state(theta, phi)
    ancilla = basis_state(2, 0)
    return ScenarioSpec(
        name="erasure",
        dim=4,
        pre=tensor(particle, ancilla),
        timeline=(
            MeasureStage(bell_basis(), "bell"),
            MeasureStage(expand_observable(pauli("y"), after=2), "sy"),
        ),
        post_observable=expand_observable(pauli("x"), after=2),
        post_select=1.0,
        params={"theta": theta, "phi": phi},
        notes=(
            "particle (slow factor) plus ancilla: an entangling Bell-basis "
            "measurement erases the particle's prepared past, so retrodiction "
            "of the in-between spin-y from the later spin-x outcome becomes "
            "symmetric: 50/50 in every Bell branch",
        ),
    )


def _builtin_reality_pair() -> ScenarioSpec:
    return ScenarioSpec(
        name="reality-pair",
        dim=2,
        pre=basis_state(2, 0),
        timeline=(),
        post_observable=pauli("x"),
        post_select=1.0,
        counterfactuals=(("sz", pauli("z")), ("sx", pauli("x"))),
        products=(("sz*sx", pauli_operator("z"), pauli_operator("x")),),
        notes=(
            "prepared up along z and post-selected up along x, both sz=+1 and "
            "sx=+1 are certain (elements of reality), yet the weak value of "
            "the product sz*sx is -1, breaking the product rule",
        ),
    )


_BUILTINS = {
    "spin-zz-xi": (_builtin_spin_zz_xi, ("theta",)),
    "sharp-shanks": (_builtin_sharp_shanks, ("theta_ab", "theta_bc")),
    "mach-zehnder": (_builtin_mach_zehnder, ("which_path_stage",)),
    "tandem-mz": (
        _builtin_tandem_mz,
        ("theta_1a", "theta_1b", "theta_2a", "theta_2b", "which_path_stage"),
    ),
    "erasure": (_builtin_erasure, ("theta", "phi")),
    "reality-pair": (_builtin_reality_pair, ()),
}


def builtin_names() -> tuple[str, ...]:
    return tuple(_BUILTINS)


def builtin(name: str, **params) -> ScenarioSpec:
    """Instantiate a named catalog scenario; see builtin_names()."""
    if name not in _BUILTINS:
        raise ValueError(
            f"unknown builtin {name!r}; available: {', '.join(sorted(_BUILTINS))}"
        )
    factory, allowed = _BUILTINS[name]
    for key in params:
        if key not in allowed:
            raise ValueError(f"builtin {name!r} takes no parameter {key!r}; allowed: {allowed}")
    return factory(**params)


# ---------------------------------------------------------------------------
# runner


@dataclass(frozen=True)
class StageReport:
    label: str
    eigenvalues: tuple[float, ...]
    analytic: tuple[float, ...] | None = None
    frequencies: tuple[float, ...] | None = None
    std_errors: tuple[float, ...] | None = None
    z_scores: tuple[float, ...] | None = None
    passed: bool | None = None


@dataclass(frozen=True)
class WeakValueReport:
    label: str
    strength: float
    value: complex
    shift_per_strength: float | None = None
    extrapolated: float | None = None
    momentum_sign_ok: bool | None = None
    passed: bool | None = None


@dataclass(frozen=True)
class ScenarioReport:
    scenario: str
    mode: str
    trials: int | None
    seed: int | None
    acceptance_analytic: float | None
    acceptance: OutcomeStat | None
    stages: tuple[StageReport, ...]
    weak: tuple[WeakValueReport, ...] = ()
    reality: RealityReport | None = None
    product_audits: tuple[tuple[str, ProductRuleReport], ...] = ()
    notes: tuple[str, ...] = ()
    passed: bool | None = None

    def to_dict(self) -> dict[str, Any]:
        def stat(s: OutcomeStat | None):
            if s is None:
                return None
            return {"frequency": s.frequency, "std_error": s.std_error, "count": s.count}

        return {
            "scenario": self.scenario,
            "mode": self.mode,
            "trials": self.trials,
            "seed": self.seed,
            "acceptance_analytic": self.acceptance_analytic,
            "acceptance": stat(self.acceptance),
            "stages": [
                {
                    "label": st.label,
                    "eigenvalues": list(st.eigenvalues),
                    "analytic": None if st.analytic is None else list(st.analytic),
                    "frequencies": None if st.frequencies is None else list(st.frequencies),
                    "std_errors": None if st.std_errors is None else list(st.std_errors),
                    "z_scores": None if st.z_scores is None else list(st.z_scores),
                    "passed": st.passed,
                }
                for st in self.stages
            ],
            "weak": [
                {
                    "label": w.label,
                    "strength": w.strength,
                    "value": [w.value.real, w.value.imag],
                    "shift_per_strength": w.shift_per_strength,
                    "extrapolated": w.extrapolated,
                    "momentum_sign_ok": w.momentum_sign_ok,
                    "passed": w.passed,
                }
                for w in self.weak
            ],
            "reality": None
            if self.reality is None
            else [
                {
                    "label": e.label,
                    "eigenvalue": e.eigenvalue,
                    "probability": e.probability,
                    "certain": e.certain,
                    "error": e.error,
                }
                for e in self.reality.entries
            ],
            "product_audits": [
                {
                    "label": label,
                    "a_weak": [r.a_weak.real, r.a_weak.imag],
                    "b_weak": [r.b_weak.real, r.b_weak.imag],
                    "ab_weak": [r.ab_weak.real, r.ab_weak.imag],
                    "discrepancy": [r.discrepancy.real, r.discrepancy.imag],
                    "failed": r.failed,
                }
                for label, r in self.product_audits
            ],
            "notes": list(self.notes),
            "passed": self.passed,
        }

    def csv_rows(self) -> list[dict[str, Any]]:
        """One row per (stage, eigenvalue) for plot-ready output."""
        rows = []
        for st in self.stages:
            for i, eig in enumerate(st.eigenvalues):
                rows.append(
                    {
                        "scenario": self.scenario,
                        "stage": st.label,
                        "eigenvalue": eig,
                        "analytic": None if st.analytic is None else st.analytic[i],
                        "frequency": None if st.frequencies is None else st.frequencies[i],
                        "se": None if st.std_errors is None else st.std_errors[i],
                        "z": None if st.z_scores is None else st.z_scores[i],
                        "pass": st.passed,
                    }
                )
        return rows


def _analytic_paths(spec: ScenarioSpec):
    """Enumerate collapse paths: unnormalized path vectors and branch tuples."""
    vectors = [spec.pre.amps]
    paths: list[tuple[int, ...]] = [()]
    measure_stages: list[MeasureStage] = []
    for entry in spec.timeline:
        if isinstance(entry, UnitaryStage):
            vectors = [entry.unitary.matrix @ v for v in vectors]
        elif isinstance(entry, MeasureStage):
            measure_stages.append(entry)
            n_branch = entry.observable.num_branches
            if len(vectors) * n_branch > MAX_PATHS:
                raise ValueError(f"collapse path count exceeds {MAX_PATHS}")
            new_vectors, new_paths = [], []
            for v, p in zip(vectors, paths):
                for j, proj in enumerate(entry.observable.projectors):
                    w = proj @ v
                    if np.vdot(w, w).real < 1e-30:
                        continue
                    new_vectors.append(w)
                    new_paths.append(p + (j,))
            vectors, paths = new_vectors, new_paths
    return vectors, paths, measure_stages


def analytic_predictions(spec: ScenarioSpec):
    """Conditional outcome distributions per measurement stage + acceptance probability.

    With one measurement stage this reduces exactly to the two-state
    conditional rule; with several, every intermediate-outcome path amplitude
    is enumerated, squared, and conditioned on the post-selection.
    """
    vectors, paths, measure_stages = _analytic_paths(spec)
    q_sel = spec.post_observable.projectors[
        spec.post_observable.branch_index(spec.post_select)
    ]
    weights = np.array([max(np.vdot(q_sel @ v, q_sel @ v).real, 0.0) for v in vectors])
    total = float(weights.sum())
    if total <= 1e-14:
        raise ZeroDenominatorError(
            f"scenario {spec.name!r}: post-selection unreachable through every branch"
        )
    distributions = []
    for d, stage in enumerate(measure_stages):
        probs = np.zeros(stage.observable.num_branches)
        for w, p in zip(weights, paths):
            probs[p[d]] += w
        distributions.append(
            OutcomeDistribution(tuple(stage.observable.eigenvalues), tuple(probs / total))
        )
    return distributions, total


def _weak_reports(spec: ScenarioSpec, validate: bool) -> tuple[WeakValueReport, ...]:
    weak_stages = [e for e in spec.timeline if isinstance(e, WeakStage)]
    if not weak_stages:
        return ()
    if any(isinstance(e, MeasureStage) for e in spec.timeline):
        raise ScenarioFormatError(
            f"scenario {spec.name!r}: weak stages require a timeline free of "
            "strong measurement stages"
        )
    q_sel = spec.post_observable.projectors[
        spec.post_observable.branch_index(spec.post_select)
    ]
    if round(np.trace(q_sel).real) != 1:
        raise ScenarioFormatError(
            f"scenario {spec.name!r}: weak stages require a rank-1 post-selection branch"
        )
    post_end = _rank_one_state(q_sel)

    reports = []
    for stage in weak_stages:
        before: list[Unitary] = []
        after: list[Unitary] = []
        seen = False
        for entry in spec.timeline:
            if entry is stage:
                seen = True
            elif isinstance(entry, UnitaryStage):
                (after if seen else before).append(entry.unitary)
        pre_t = transport_forward(spec.pre, before)
        post_t = transport_backward(post_end, after)
        tsv = TwoStateVector(pre_t, post_t)
        value = weak_value(tsv, stage.operator)
        if not validate:
            reports.append(WeakValueReport(stage.label, stage.strength, value))
            continue
        reports.append(_validate_weak(stage, tsv, value))
    return tuple(reports)


def _rank_one_state(projector: np.ndarray) -> StateVector:
    vals, vecs = np.linalg.eigh(projector)
    return StateVector(vecs[:, int(np.argmax(vals))])


def _validate_weak(stage: WeakStage, tsv: TwoStateVector, value: complex) -> WeakValueReport:
    """Cross-check a weak value against the pointer model.

    Uses two couplings (λ and λ/2) and Richardson-extrapolates the
    quadratic-in-λ pointer error away; the extrapolation must land on
    Re(A_w).  The check coupling shrinks with |A_w| so the true expansion
    parameter λ·|A_w|/σ stays small even for amplified weak values.  When
    Im(A_w) is appreciable, the post-selected momentum mean must shift with
    the matching sign.
    """
    if not stage.operator.is_hermitian():
        # pointer validation is only meaningful for Hermitian couplings
        return WeakValueReport(stage.label, stage.strength, value)
    obs = SpectralObservable.from_hermitian(stage.operator.matrix)
    lam = min(stage.strength if stage.strength > 0 else 0.05, 0.1, 0.05 / max(1.0, abs(value)))
    pointer = pointer_model.make_gaussian_pointer()
    shifts = []
    for li in (lam, lam / 2):
        s = pointer_model.post_selected_mean_shift(
            tsv.pre, tsv.post, pointer_model.CouplingSpec(li, obs), pointer
        )
        shifts.append(s / li)
    extrapolated = (4 * shifts[1] - shifts[0]) / 3
    re_ok = abs(extrapolated - value.real) <= 1e-5 * max(1.0, abs(value.real))
    sign_ok: bool | None = None
    if abs(value.imag) > 1e-6:
        p_mean = pointer_model.post_selected_momentum_mean(
            tsv.pre, tsv.post, pointer_model.CouplingSpec(lam, obs), pointer
        )
        sign_ok = bool(np.sign(p_mean) == np.sign(value.imag))
    passed = re_ok and (sign_ok is not False)
    return WeakValueReport(
        stage.label, stage.strength, value,
        shift_per_strength=shifts[0], extrapolated=extrapolated,
        momentum_sign_ok=sign_ok, passed=passed,
    )


def _counterfactual_reports(spec: ScenarioSpec):
    if not (spec.counterfactuals or spec.products):
        return None, ()
    if any(isinstance(e, MeasureStage) for e in spec.timeline):
        raise ScenarioFormatError(
            f"scenario {spec.name!r}: counterfactuals require a timeline free of "
            "strong measurement stages"
        )
    q_sel = spec.post_observable.projectors[
        spec.post_observable.branch_index(spec.post_select)
    ]
    if round(np.trace(q_sel).real) != 1:
        raise ScenarioFormatError(
            f"scenario {spec.name!r}: counterfactuals require a rank-1 post-selection branch"
        )
    unitaries = [e.unitary for e in spec.timeline if isinstance(e, UnitaryStage)]
    tsv = TwoStateVector(transport_forward(spec.pre, unitaries), _rank_one_state(q_sel))
    reality = elements_of_reality(tsv, spec.counterfactuals) if spec.counterfactuals else None
    audits = tuple(
        (label, product_rule_audit(tsv, left, right)) for label, left, right in spec.products
    )
    return reality, audits


def run_scenario(
    spec: ScenarioSpec,
    mode: str = "both",
    trials: int | None = None,
    seed: int | None = None,
    z: float = 4.0,
) -> ScenarioReport:
    """Run one scenario in 'analytic', 'oracle', or 'both' mode."""
    if mode not in ("analytic", "oracle", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    trials = spec.trials if trials is None else trials
    seed = spec.seed if seed is None else seed
    want_analytic = mode in ("analytic", "both")
    want_oracle = mode in ("oracle", "both")

    distributions: list[OutcomeDistribution] = []
    acceptance_analytic = None
    if want_analytic:
        distributions, acceptance_analytic = analytic_predictions(spec)
    weak = _weak_reports(spec, validate=want_oracle)
    reality, audits = _counterfactual_reports(spec)

    stats: EnsembleStats | None = None
    mc_stages = [e for e in spec.timeline if isinstance(e, (UnitaryStage, MeasureStage))]
    if want_oracle:
        try:
            stats = simulate(
                spec.pre, mc_stages, (spec.post_observable, spec.post_select), trials, seed
            )
        except AllRejectedError as exc:
            raise AllRejectedError(f"scenario {spec.name!r}: {exc}") from exc

    stage_reports: list[StageReport] = []
    labels = spec.measure_labels
    overall: bool | None = None
    for i, label in enumerate(labels):
        analytic = tuple(distributions[i].probabilities) if want_analytic else None
        eigenvalues = (
            tuple(distributions[i].eigenvalues)
            if want_analytic
            else stats.stages[i].eigenvalues  # type: ignore[union-attr]
        )
        freqs = errs = zs = None
        passed = None
        if stats is not None:
            cond = stats.conditional(label)
            freqs = tuple(s.frequency for s in cond)
            errs = tuple(s.std_error for s in cond)
            if want_analytic:
                comparison = compare_to_abl(stats, distributions[i], z=z, stage_label=label)
                zs = tuple(o.z_score for o in comparison.outcomes)
                passed = comparison.passed
                overall = passed if overall is None else (overall and passed)
        stage_reports.append(
            StageReport(label, eigenvalues, analytic, freqs, errs, zs, passed)
        )

    # counterfactual observables are validated one at a time by appending the
    # alternative measurement at the end of the (unitary-only) timeline
    if want_oracle and spec.counterfactuals:
        for j, (label, obs) in enumerate(spec.counterfactuals):
            alt_stats = simulate(
                spec.pre,
                mc_stages + [MeasureStage(obs, label)],
                (spec.post_observable, spec.post_select),
                trials,
                seed + 1 + j,
            )
            cond = alt_stats.conditional(label)
            analytic = zs = None
            passed = None
            if want_analytic:
                unitaries = [e.unitary for e in spec.timeline if isinstance(e, UnitaryStage)]
                q_sel = spec.post_observable.projectors[
                    spec.post_observable.branch_index(spec.post_select)
                ]
                tsv = TwoStateVector(
                    transport_forward(spec.pre, unitaries), _rank_one_state(q_sel)
                )
                dist = abl_probabilities(tsv, obs)
                analytic = tuple(dist.probabilities)
                comparison = compare_to_abl(alt_stats, dist, z=z, stage_label=label)
                zs = tuple(o.z_score for o in comparison.outcomes)
                passed = comparison.passed
                overall = passed if overall is None else (overall and passed)
            stage_reports.append(
                StageReport(
                    f"counterfactual:{label}",
                    tuple(s.eigenvalue for s in cond),
                    analytic,
                    tuple(s.frequency for s in cond),
                    tuple(s.std_error for s in cond),
                    zs,
                    passed,
                )
            )

    for w in weak:
        if w.passed is not None:
            overall = w.passed if overall is None else (overall and w.passed)

    return ScenarioReport(
        scenario=spec.name,
        mode=mode,
        trials=trials if want_oracle else None,
        seed=seed if want_oracle else None,
        acceptance_analytic=acceptance_analytic,
        acceptance=stats.acceptance if stats is not None else None,
        stages=tuple(stage_reports),
        weak=weak,
        reality=reality,
        product_audits=audits,
        notes=spec.notes,
        passed=overall,
    )
