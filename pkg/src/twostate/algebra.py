"""Dense complex linear algebra over small Hilbert spaces.

Everything here is a plain value: states, operators, unitaries and spectral
observables are immutable after construction and every function is pure.
Dimensions of interest are 2..8 (composite systems via Kronecker products),
so all representations are dense ``complex128`` arrays.

Tolerances follow one convention throughout: structural validation at 1e-10,
post-construction normalization at 1e-12.  Inputs that violate an invariant
raise; nothing is silently renormalized except the explicit
:meth:`StateVector.normalized` path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import DimensionMismatchError, NormalizationError, ObservableError

VALIDATE_TOL = 1e-10
CONSTRUCT_TOL = 1e-12
DEGENERACY_TOL = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def _as_complex_vector(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{what} must be a nonempty 1-d amplitude array")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{what} contains non-finite amplitudes")
    return arr


def _as_complex_matrix(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"{what} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{what} contains non-finite entries")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    """A unit-normalized ket over a finite Hilbert space."""

    amps: np.ndarray

    def __post_init__(self):
        arr = _as_complex_vector(self.amps, "state")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > VALIDATE_TOL:
            raise NormalizationError(
                f"state norm is {norm!r}; expected 1 within {VALIDATE_TOL} "
                "(use StateVector.normalized for unnormalized input)"
            )
        object.__setattr__(self, "amps", _frozen(arr / norm))

    @classmethod
    def normalized(cls, values) -> "StateVector":
        """Build a state from an arbitrary nonzero amplitude vector."""
        arr = _as_complex_vector(values, "state")
        norm = float(np.linalg.norm(arr))
        if norm < 1e-14:
            raise NormalizationError("cannot normalize a (near-)zero vector")
        return cls(arr / norm)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]


@dataclass(frozen=True)
class LinearOperator:
    """A dense square operator; not necessarily Hermitian or unitary."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(_as_complex_matrix(self.matrix, "operator")))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(self.matrix.conj().T)

    def is_hermitian(self, tol: float = VALIDATE_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        if not isinstance(other, LinearOperator):
            return NotImplemented
        if self.dim != other.dim:
            raise DimensionMismatchError(f"operator dims differ: {self.dim} vs {other.dim}")
        return LinearOperator(self.matrix @ other.matrix)

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        if not isinstance(other, LinearOperator):
            return NotImplemented
        if self.dim != other.dim:
            raise DimensionMismatchError(f"operator dims differ: {self.dim} vs {other.dim}")
        return LinearOperator(self.matrix + other.matrix)

    def __mul__(self, scalar) -> "LinearOperator":
        return LinearOperator(self.matrix * complex(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True)
class Unitary(LinearOperator):
    """A linear operator additionally satisfying U†U = 1 within 1e-10."""

    def __post_init__(self):
        super().__post_init__()
        defect = np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(self.dim)))
        if defect > VALIDATE_TOL:
            raise NormalizationError(f"matrix is not unitary: max |U†U - 1| = {defect:.3e}")

    def adjoint(self) -> "Unitary":
        return Unitary(self.matrix.conj().T)


@dataclass(frozen=True)
class SpectralObservable:
    """An observable as (eigenvalue, orthogonal projector) branches resolving identity.

    Degenerate eigenvalues are first-class: a branch projector may have any
    rank, and conditional-probability rules always act on whole eigenspaces.
    """

    eigenvalues: np.ndarray  # (k,) real, distinct
    projectors: np.ndarray  # (k, dim, dim)

    def __post_init__(self):
        eigs = np.asarray(self.eigenvalues, dtype=float)
        projs = np.asarray(self.projectors, dtype=complex)
        if eigs.ndim != 1 or eigs.size == 0:
            raise ObservableError("need at least one (eigenvalue, projector) branch")
        if projs.ndim != 3 or projs.shape[0] != eigs.size or projs.shape[1] != projs.shape[2]:
            raise ObservableError(f"projector stack has shape {projs.shape}, expected (k, d, d)")
        if not np.all(np.isfinite(eigs)) or not np.all(np.isfinite(projs.real)) or not np.all(
            np.isfinite(projs.imag)
        ):
            raise ObservableError("non-finite eigenvalue or projector entry")
        dim = projs.shape[1]
        for j, p in enumerate(projs):
            if np.max(np.abs(p @ p - p)) > VALIDATE_TOL:
                raise ObservableError(f"branch {j}: projector is not idempotent")
            if np.max(np.abs(p - p.conj().T)) > VALIDATE_TOL:
                raise ObservableError(f"branch {j}: projector is not Hermitian")
        for j in range(len(eigs)):
            for k in range(j + 1, len(eigs)):
                if np.max(np.abs(projs[j] @ projs[k])) > VALIDATE_TOL:
                    raise ObservableError(f"branches {j} and {k}: projectors are not orthogonal")
                if abs(eigs[j] - eigs[k]) <= VALIDATE_TOL:
                    raise ObservableError(f"branches {j} and {k}: eigenvalues coincide")
        if np.max(np.abs(projs.sum(axis=0) - np.eye(dim))) > VALIDATE_TOL:
            raise ObservableError("projectors do not resolve the identity")
        object.__setattr__(self, "eigenvalues", _frozen(eigs))
        object.__setattr__(self, "projectors", _frozen(projs))

    @property
    def dim(self) -> int:
        return self.projectors.shape[1]

    @property
    def num_branches(self) -> int:
        return self.eigenvalues.size

    def branches(self) -> Iterator[tuple[float, np.ndarray]]:
        for eig, proj in zip(self.eigenvalues, self.projectors):
            yield float(eig), proj

    @property
    def operator(self) -> LinearOperator:
        """The Hermitian operator Σ a_j P_j."""
        return LinearOperator(np.einsum("j,jkl->kl", self.eigenvalues, self.projectors))

    def branch_index(self, eigenvalue: float, tol: float = 1e-9) -> int:
        hits = np.nonzero(np.abs(self.eigenvalues - eigenvalue) <= tol)[0]
        if hits.size != 1:
            raise ValueError(f"eigenvalue {eigenvalue!r} is not a branch of this observable")
        return int(hits[0])

    @classmethod
    def from_hermitian(cls, matrix, degeneracy_tol: float = DEGENERACY_TOL) -> "SpectralObservable":
        """Eigendecompose a Hermitian matrix, merging near-equal eigenvalues.

        Eigenvalues within ``degeneracy_tol`` of each other are fused into one
        degenerate branch so that conditional rules see whole eigenspaces.
        """
        mat = _as_complex_matrix(matrix, "observable matrix")
        if np.max(np.abs(mat - mat.conj().T)) > VALIDATE_TOL:
            raise ObservableError("matrix is not Hermitian")
        vals, vecs = np.linalg.eigh(mat)
        groups: list[list[int]] = [[0]]
        for i in range(1, vals.size):
            if vals[i] - vals[groups[-1][-1]] <= degeneracy_tol:
                groups[-1].append(i)
            else:
                groups.append([i])
        eigs, projs = [], []
        for grp in groups:
            block = vecs[:, grp]
            eigs.append(float(np.mean(vals[grp])))
            projs.append(block @ block.conj().T)
        return cls(np.array(eigs), np.array(projs))

    @classmethod
    def from_eigenbasis(cls, eigenvalues: Sequence[float], vectors: Sequence[StateVector]) -> "SpectralObservable":
        """Rank-1 branches from an orthonormal basis, one eigenvalue per vector."""
        projs = [np.outer(v.amps, v.amps.conj()) for v in vectors]
        return cls(np.asarray(eigenvalues, dtype=float), np.array(projs))


Tensorable = Union[StateVector, LinearOperator]


def inner_product(bra: StateVector, ket: StateVector) -> complex:
    """⟨bra|ket⟩, conjugate-linear in the first argument."""
    if bra.dim != ket.dim:
        raise DimensionMismatchError(f"state dims differ: {bra.dim} vs {ket.dim}")
    return complex(np.vdot(bra.amps, ket.amps))


def apply(op: LinearOperator, ket: StateVector) -> np.ndarray:
    """Apply an operator to a ket; the result may be unnormalized."""
    if op.dim != ket.dim:
        raise DimensionMismatchError(f"operator dim {op.dim} vs state dim {ket.dim}")
    return op.matrix @ ket.amps


def tensor(a: Tensorable, b: Tensorable) -> Tensorable:
    """Kronecker product with the first factor as the slow index."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(a.amps, b.amps))
    if isinstance(a, Unitary) and isinstance(b, Unitary):
        return Unitary(np.kron(a.matrix, b.matrix))
    if isinstance(a, LinearOperator) and isinstance(b, LinearOperator):
        return LinearOperator(np.kron(a.matrix, b.matrix))
    raise TypeError("tensor expects two StateVectors or two LinearOperators")


def expand_observable(obs: SpectralObservable, before: int = 1, after: int = 1) -> SpectralObservable:
    """Embed an observable into a composite space: 1(before) ⊗ A ⊗ 1(after).

    Eigenvalues are kept; each projector is tensored with identities, so the
    result is generally degenerate.
    """
    eye_b, eye_a = np.eye(before), np.eye(after)
    projs = [np.kron(np.kron(eye_b, p), eye_a) for p in obs.projectors]
    return SpectralObservable(obs.eigenvalues.copy(), np.array(projs))


def identity_operator(dim: int) -> LinearOperator:
    return LinearOperator(np.eye(dim, dtype=complex))


def identity_observable(dim: int) -> SpectralObservable:
    """The trivial observable: one branch, eigenvalue 1, full projector."""
    return SpectralObservable(np.array([1.0]), np.eye(dim, dtype=complex)[None, :, :])


def basis_state(dim: int, index: int) -> StateVector:
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps)


def spin_state(theta: float, phi: float = 0.0) -> StateVector:
    """Spin-1/2 'up' along the axis with polar angle theta and azimuth phi.

    cos(θ/2)|↑z⟩ + e^{iφ} sin(θ/2)|↓z⟩.
    """
    return StateVector(np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)]))


def spin_observable(theta: float, phi: float = 0.0) -> SpectralObservable:
    """Spin component along (theta, phi): eigenvalues +1/-1 with rank-1 projectors."""
    up = spin_state(theta, phi)
    down = spin_state(np.pi - theta, phi + np.pi)
    return SpectralObservable.from_eigenbasis([1.0, -1.0], [up, down])


def pauli(axis: str) -> SpectralObservable:
    """One of the Pauli observables 'x', 'y', 'z' as spectral branches."""
    try:
        mat = _PAULI[axis]
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}; expected one of x, y, z") from None
    return SpectralObservable.from_hermitian(mat)


def pauli_operator(axis: str) -> LinearOperator:
    try:
        return LinearOperator(_PAULI[axis])
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}; expected one of x, y, z") from None


def state_projector_observable(psi: StateVector) -> SpectralObservable:
    """Two-branch observable 'is the system in |psi⟩?': eigenvalue 1 vs 0."""
    p = np.outer(psi.amps, psi.amps.conj())
    return SpectralObservable(np.array([1.0, 0.0]), np.array([p, np.eye(psi.dim) - p]))


def bell_basis() -> SpectralObservable:
    """The four Bell states of two qubits as rank-1 branches, eigenvalues 1..4."""
    s = 1 / np.sqrt(2)
    vectors = [
        StateVector(s * np.array([1, 0, 0, 1], dtype=complex)),
        StateVector(s * np.array([1, 0, 0, -1], dtype=complex)),
        StateVector(s * np.array([0, 1, 1, 0], dtype=complex)),
        StateVector(s * np.array([0, 1, -1, 0], dtype=complex)),
    ]
    return SpectralObservable.from_eigenbasis([1.0, 2.0, 3.0, 4.0], vectors)


def which_path() -> SpectralObservable:
    """Path observable on a 2-mode space: +1 for port u (index 0), -1 for port d."""
    return pauli("z")


def detector_basis(unitary: Unitary) -> SpectralObservable:
    """Computational-basis detectors viewed through a downstream network.

    Branch k (eigenvalue k+1) projects onto U†|k⟩⟨k|U: the states that will
    reach detector k after the network ``unitary`` is applied.
    """
    dim = unitary.dim
    projs = []
    for k in range(dim):
        col = unitary.matrix.conj().T[:, k]
        projs.append(np.outer(col, col.conj()))
    return SpectralObservable(np.arange(1, dim + 1, dtype=float), np.array(projs))


def beamsplitter(angle: float = np.pi / 4) -> Unitary:
    """Two-mode splitter [[cos, i sin], [i sin, cos]]; π/4 gives the 50/50 case."""
    c, s = np.cos(angle), np.sin(angle)
    return Unitary(np.array([[c, 1j * s], [1j * s, c]]))
