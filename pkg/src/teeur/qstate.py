"""Labeled composite quantum states and the dense linear algebra underneath.

Composite indices are row-major over the layout order: for a layout
``[("A", dA), ("B", dB)]`` the basis state ``|a, b>`` sits at index
``a * dB + b``, which is the ordering produced by ``np.kron``. Every reshape
in this package relies on that convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-12
UNITARY_TOL = 1e-10
DEGENERACY_GAP = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class StateError(ValueError):
    """Raised when an input violates a state or layout contract."""


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered list of ``(label, dimension)`` pairs."""

    systems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        systems = tuple((str(label), int(dim)) for label, dim in self.systems)
        labels = [label for label, _ in systems]
        if len(set(labels)) != len(labels):
            raise StateError(f"duplicate subsystem labels in {labels}")
        for label, dim in systems:
            if dim < 1:
                raise StateError(f"subsystem {label!r} has dimension {dim} < 1")
        object.__setattr__(self, "systems", systems)

    @classmethod
    def coerce(cls, layout) -> "SubsystemLayout":
        if isinstance(layout, SubsystemLayout):
            return layout
        if isinstance(layout, (int, np.integer)):
            return cls((("A", int(layout)),))
        return cls(tuple(layout))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.systems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.systems)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.systems else 1

    def __len__(self) -> int:
        return len(self.systems)

    def __contains__(self, label) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise StateError(f"unknown subsystem label {label!r}; have {self.labels}") from None

    def dim(self, label: str) -> int:
        return self.dims[self.index(label)]

    def indices(self, labels: Iterable[str]) -> list[int]:
        """Positions of ``labels`` in layout order (duplicates rejected)."""
        labels = list(labels)
        if len(set(labels)) != len(labels):
            raise StateError(f"repeated labels in {labels}")
        return sorted(self.index(label) for label in labels)

    def subset(self, labels: Iterable[str]) -> "SubsystemLayout":
        return SubsystemLayout(tuple(self.systems[i] for i in self.indices(labels)))

    def dim_of(self, labels: Iterable[str]) -> int:
        return int(np.prod([self.dims[i] for i in self.indices(labels)], dtype=np.int64))

    def __add__(self, other: "SubsystemLayout") -> "SubsystemLayout":
        return SubsystemLayout(self.systems + other.systems)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one positive semidefinite matrix on a labeled layout.

    The matrix is symmetrized once on construction, so downstream code may
    treat it as exactly Hermitian. Pass ``validate=False`` only for
    intermediate results that are known to be states by construction.
    """

    layout: SubsystemLayout
    matrix: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        layout = SubsystemLayout.coerce(self.layout)
        m = np.asarray(self.matrix, dtype=complex)
        d = layout.total_dim
        if m.shape != (d, d):
            raise StateError(f"matrix shape {m.shape} does not match layout dimension {d}")
        if self.validate:
            dev = np.max(np.abs(m - m.conj().T)) if d else 0.0
            if dev > HERMITIAN_TOL:
                raise StateError(f"matrix is not Hermitian (deviation {dev:.3g})")
        m = 0.5 * (m + m.conj().T)
        if self.validate:
            tr = np.trace(m).real
            if abs(tr - 1) > TRACE_TOL:
                raise StateError(f"trace {tr!r} is not 1")
            lmin = np.linalg.eigvalsh(m)[0]
            if lmin < -PSD_TOL:
                raise StateError(f"matrix is not positive semidefinite (min eigenvalue {lmin:.3g})")
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def labels(self) -> tuple[str, ...]:
        return self.layout.labels

    @property
    def dims(self) -> tuple[int, ...]:
        return self.layout.dims

    def eigvals(self) -> np.ndarray:
        return eig_hermitian(self.matrix)[0]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def relabel(self, mapping: dict[str, str]) -> "DensityMatrix":
        layout = SubsystemLayout(tuple((mapping.get(l, l), d) for l, d in self.layout.systems))
        return DensityMatrix(layout, self.matrix, validate=False)

    def insert_trivial(self, label: str, position: int) -> "DensityMatrix":
        """Same state with a dimension-1 subsystem ``label`` inserted."""
        systems = list(self.layout.systems)
        systems.insert(position, (label, 1))
        return DensityMatrix(SubsystemLayout(tuple(systems)), self.matrix, validate=False)

    def allclose(self, other: "DensityMatrix", atol: float = 1e-10) -> bool:
        return self.layout == other.layout and max_abs(self.matrix - other.matrix) <= atol


@dataclass(frozen=True)
class PureState:
    layout: SubsystemLayout
    vector: np.ndarray

    def __post_init__(self):
        layout = SubsystemLayout.coerce(self.layout)
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        if v.shape != (layout.total_dim,):
            raise StateError(f"vector length {v.size} does not match layout dimension {layout.total_dim}")
        norm2 = float(np.vdot(v, v).real)
        if abs(norm2 - 1) > NORM_TOL:
            raise StateError(f"squared norm {norm2!r} is not 1")
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "vector", _frozen(v))

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.layout, np.outer(self.vector, self.vector.conj()), validate=False)


def max_abs(a: np.ndarray) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


# ---------------------------------------------------------------------------
# Raw-matrix primitives (operators need not be states)
# ---------------------------------------------------------------------------


def permute_systems(matrix: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new factor ``i`` is old factor ``perm[i]``.

    Leading axes beyond the last two are treated as a batch.
    """
    n = len(dims)
    d = int(np.prod(dims, dtype=np.int64))
    m = np.asarray(matrix)
    batch = m.shape[:-2]
    b = len(batch)
    t = m.reshape(batch + tuple(dims) * 2)
    axes = list(range(b)) + [b + p for p in perm] + [b + n + p for p in perm]
    return t.transpose(axes).reshape(batch + (d, d))


def trace_out(matrix: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace keeping factor positions ``keep`` (ascending); batched like :func:`permute_systems`."""
    n = len(dims)
    keep = sorted(keep)
    drop = [i for i in range(n) if i not in keep]
    m = np.asarray(matrix)
    batch = m.shape[:-2]
    b = len(batch)
    t = m.reshape(batch + tuple(dims) * 2)
    # move kept factors to the front on both sides, then contract the rest
    order = keep + drop + [n + i for i in keep] + [n + i for i in drop]
    t = t.transpose(list(range(b)) + [b + i for i in order])
    dk = int(np.prod([dims[i] for i in keep], dtype=np.int64))
    dd = int(np.prod([dims[i] for i in drop], dtype=np.int64))
    t = t.reshape(batch + (dk, dd, dk, dd))
    return np.einsum("...ajbj->...ab", t)


def lift_operator(op: np.ndarray, dims: Sequence[int], targets: Sequence[int]) -> np.ndarray:
    """Full-space matrix of ``op`` acting on factor positions ``targets``.

    ``targets`` gives the order in which ``op``'s own tensor factors map to
    the layout; they need not be contiguous or sorted.
    """
    n = len(dims)
    targets = list(targets)
    rest = [i for i in range(n) if i not in targets]
    d_rest = int(np.prod([dims[i] for i in rest], dtype=np.int64))
    full = np.kron(np.asarray(op, dtype=complex), np.eye(d_rest))
    order = targets + rest
    inv = [order.index(i) for i in range(n)]
    return permute_systems(full, [dims[i] for i in order], inv)


def local_sandwich(
    matrix: np.ndarray, dims: Sequence[int], axis: int, left: np.ndarray, right: np.ndarray
) -> np.ndarray:
    """``(I ⊗ left ⊗ I) @ matrix @ (I ⊗ right ⊗ I)`` with the operators on ``axis`` (batched)."""
    pre = int(np.prod(dims[:axis], dtype=np.int64))
    dt = dims[axis]
    post = int(np.prod(dims[axis + 1 :], dtype=np.int64))
    m = np.asarray(matrix)
    batch = m.shape[:-2]
    t = m.reshape(batch + (pre, dt, post, pre, dt, post))
    out = np.einsum("ij,...ajbckd,kl->...aibcld", left, t, right, optimize=True)
    d = pre * dt * post
    return out.reshape(batch + (d, d))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return max_abs(u.conj().T @ u - np.eye(u.shape[0])) <= tol


def eig_hermitian(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    The input is averaged with its conjugate transpose first. Each
    eigenvector's phase is fixed so that its largest-magnitude entry is real
    and positive, making the output a deterministic function of the input.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise StateError(f"expected a square matrix, got shape {h.shape}")
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    if v.size:
        pivots = np.argmax(np.abs(v), axis=0)
        phases = v[pivots, np.arange(v.shape[1])]
        v = v * (np.abs(phases) / phases)[None, :]
    return w, v


# ---------------------------------------------------------------------------
# State-level operations
# ---------------------------------------------------------------------------


def tensor(states: Sequence[DensityMatrix]) -> DensityMatrix:
    """Kronecker product of states, layouts concatenated in order."""
    if not states:
        raise StateError("tensor() needs at least one state")
    layout = states[0].layout
    matrix = states[0].matrix
    for s in states[1:]:
        layout = layout + s.layout  # rejects duplicate labels
        matrix = np.kron(matrix, s.matrix)
    return DensityMatrix(layout, matrix, validate=False)


def partial_trace(state: DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Marginal on ``keep``; kept subsystems stay in their original order."""
    keep = list(keep)
    if not keep:
        raise StateError("partial_trace needs a non-empty set of labels to keep")
    idx = state.layout.indices(keep)
    if len(idx) == len(state.layout):
        return state
    reduced = trace_out(state.matrix, state.dims, idx)
    return DensityMatrix(state.layout.subset(keep), reduced, validate=False)


def apply_unitary(state: DensityMatrix, u: np.ndarray, targets: Sequence[str]) -> DensityMatrix:
    """Conjugate ``state`` by ``u`` acting on ``targets`` (in the given order)."""
    u = np.asarray(u, dtype=complex)
    targets = list(targets)
    idx = [state.layout.index(t) for t in targets]
    if len(set(idx)) != len(idx):
        raise StateError(f"repeated target labels {targets}")
    d_t = int(np.prod([state.dims[i] for i in idx], dtype=np.int64))
    if u.shape != (d_t, d_t):
        raise StateError(f"unitary shape {u.shape} does not match targets dimension {d_t}")
    if not is_unitary(u):
        raise StateError("matrix is not unitary within 1e-10")
    full = lift_operator(u, state.dims, idx)
    return DensityMatrix(state.layout, full @ state.matrix @ full.conj().T, validate=False)


@dataclass(frozen=True)
class Generator:
    """Hermitian observable on one subsystem with a fixed eigenbasis.

    Build with :meth:`from_matrix`. A spectrum with a gap below 1e-10 needs
    an explicit ``basis`` because the measurement depends on the choice of
    eigenvectors inside a degenerate block.
    """

    target: str
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_matrix(cls, target: str, matrix, basis=None) -> "Generator":
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StateError(f"generator must be square, got {m.shape}")
        if max_abs(m - m.conj().T) > HERMITIAN_TOL:
            raise StateError("generator is not Hermitian within 1e-10")
        m = 0.5 * (m + m.conj().T)
        if basis is None:
            w, v = eig_hermitian(m)
            if len(w) > 1 and np.min(np.diff(w)) < DEGENERACY_GAP:
                raise StateError(
                    "generator has a degenerate spectrum; pass an explicit eigenbasis"
                )
        else:
            v = np.asarray(basis, dtype=complex)
            if v.shape != m.shape:
                raise StateError(f"basis shape {v.shape} does not match generator {m.shape}")
            if max_abs(v.conj().T @ v - np.eye(len(v))) > HERMITIAN_TOL:
                raise StateError("basis is not orthonormal within 1e-10")
            d = v.conj().T @ m @ v
            if max_abs(d - np.diag(np.diag(d))) > HERMITIAN_TOL:
                raise StateError("basis does not diagonalize the generator")
            w = np.diag(d).real
            order = np.argsort(w, kind="stable")
            w, v = w[order], v[:, order]
        return cls(target, _frozen(m), np.array(w, dtype=float), _frozen(v))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def evolution(self, r: float) -> np.ndarray:
        """``exp(-i G r)`` from the cached spectral decomposition."""
        v = self.eigenvectors
        return (v * np.exp(-1j * self.eigenvalues * r)[None, :]) @ v.conj().T


# ---------------------------------------------------------------------------
# Small constructors
# ---------------------------------------------------------------------------


def ket(dim: int, k: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[k] = 1
    return v


def projector(vector) -> np.ndarray:
    v = np.asarray(vector, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def basis_state(layout, index: int) -> DensityMatrix:
    layout = SubsystemLayout.coerce(layout)
    return DensityMatrix(layout, projector(ket(layout.total_dim, index)), validate=False)


def maximally_mixed(layout) -> DensityMatrix:
    layout = SubsystemLayout.coerce(layout)
    d = layout.total_dim
    return DensityMatrix(layout, np.eye(d) / d, validate=False)


def bell_state(labels: tuple[str, str] = ("A", "B")) -> DensityMatrix:
    """``(|00> + |11>)/sqrt(2)`` on two qubits."""
    v = (ket(4, 0) + ket(4, 3)) / np.sqrt(2)
    return PureState(((labels[0], 2), (labels[1], 2)), v).density()
