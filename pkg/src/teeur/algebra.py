"""Conditional expectations onto subalgebras and commuting-square machinery.

Three kinds of conditional expectation are supported: :class:`Pinching`
(dephasing a subsystem in a fixed basis or onto orthogonal projectors),
:class:`TraceEmbed` (replacing subsystems by the normalized identity), and
:class:`Compose` (composition of the two). Application uses structured
formulas; the ``d^2 x d^2`` superoperator is materialized only when a
verification routine asks for it.

Superoperators use row-major vectorization, ``vec(X) = X.reshape(-1)``, so
``vec(E(X)) = S @ vec(X)``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import entropy
from .qstate import (
    DensityMatrix,
    StateError,
    SubsystemLayout,
    is_unitary,
    lift_operator,
    local_sandwich,
    max_abs,
    permute_systems,
    trace_out,
)

CONDEXP_TOL = 1e-10
COMMUTE_TOL = 1e-10
STINESPRING_TOL = 1e-12
RECOVERY_TOL = 1e-9
PROP4_TOL = 1e-9
THEOREM3_TOL = 1e-9


def choi_from_superop(superop: np.ndarray, d: int) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| ⊗ E(|i><j|)`` of a row-major superoperator."""
    # superop[k*d + l, i*d + j] = E(|i><j|)[k, l]
    t = superop.reshape(d, d, d, d)
    return t.transpose(2, 0, 3, 1).reshape(d * d, d * d)


BATCH_COLUMNS = 256


def superoperator_of(apply, d: int, batched: bool = False) -> np.ndarray:
    """Columns ``vec(apply(E_n))`` over the matrix units ``E_n``.

    With ``batched`` the map is called on stacks of ``BATCH_COLUMNS`` units at a time.
    """
    s = np.empty((d * d, d * d), dtype=complex)
    if not batched:
        for n in range(d * d):
            unit = np.zeros(d * d, dtype=complex)
            unit[n] = 1
            s[:, n] = np.asarray(apply(unit.reshape(d, d))).reshape(-1)
        return s
    for start in range(0, d * d, BATCH_COLUMNS):
        stop = min(start + BATCH_COLUMNS, d * d)
        units = np.zeros((stop - start, d * d), dtype=complex)
        units[np.arange(stop - start), np.arange(start, stop)] = 1
        s[:, start:stop] = np.asarray(apply(units.reshape(-1, d, d))).reshape(stop - start, -1).T
    return s


class LinearMap:
    """A linear map on the operators of one layout, with memoized superoperator.

    Subclasses whose ``apply_matrix`` accepts stacks ``(..., d, d)`` set
    ``batched = True``.
    """

    batched = False

    def __init__(self, layout):
        self.layout = SubsystemLayout.coerce(layout)
        self._superop = None
        self._lock = threading.Lock()

    def apply_matrix(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        if rho.layout != self.layout:
            raise StateError(f"layout mismatch: map acts on {self.layout.systems}, state has {rho.layout.systems}")
        return DensityMatrix(self.layout, self.apply_matrix(rho.matrix), validate=False)

    __call__ = apply

    @property
    def superoperator(self) -> np.ndarray:
        if self._superop is None:
            with self._lock:
                if self._superop is None:
                    s = superoperator_of(self.apply_matrix, self.layout.total_dim, self.batched)
                    s.setflags(write=False)
                    self._superop = s
        return self._superop

    def choi(self) -> np.ndarray:
        return choi_from_superop(self.superoperator, self.layout.total_dim)

    def cptp_violation(self) -> tuple[float, float]:
        """(negative Choi eigenvalue magnitude, trace-preservation error)."""
        d = self.layout.total_dim
        lmin = float(np.linalg.eigvalsh(self.choi())[0])
        # Tr E(X) = Tr X  <=>  sum_k S[kk, :] = vec(I)
        tr_rows = self.superoperator.reshape(d, d, d * d)[np.arange(d), np.arange(d)].sum(axis=0)
        tp_err = max_abs(tr_rows - np.eye(d).reshape(-1))
        return max(0.0, -lmin), tp_err


class ConditionalExpectation(LinearMap):
    """Base for the unital, trace-preserving projections in this module."""

    def image_element(self, x: np.ndarray) -> np.ndarray:
        """An element of the image subalgebra obtained by projecting ``x``."""
        return self.apply_matrix(x)


class Pinching(ConditionalExpectation):
    """``X -> sum_k P_k X P_k`` on one subsystem, identity elsewhere.

    Either ``basis`` (orthonormal columns, one rank-1 projector each) or
    ``projectors`` (mutually orthogonal, summing to the identity) must be
    given.
    """

    batched = True

    def __init__(self, layout, target: str, basis=None, projectors=None):
        super().__init__(layout)
        self.target = target
        self.axis = self.layout.index(target)
        d = self.layout.dims[self.axis]
        if (basis is None) == (projectors is None):
            raise StateError("give exactly one of basis or projectors")
        if basis is not None:
            v = np.asarray(basis, dtype=complex)
            if v.shape != (d, d):
                raise StateError(f"basis must be {d}x{d} for subsystem {target!r}, got {v.shape}")
            if max_abs(v.conj().T @ v - np.eye(d)) > CONDEXP_TOL:
                raise StateError("pinching basis is not orthonormal within 1e-10")
            self.basis = v
            self.projectors = [np.outer(v[:, k], v[:, k].conj()) for k in range(d)]
        else:
            ps = [np.asarray(p, dtype=complex) for p in projectors]
            for p in ps:
                if p.shape != (d, d):
                    raise StateError(f"projector shape {p.shape} does not match subsystem dimension {d}")
                if max_abs(p @ p - p) > CONDEXP_TOL or max_abs(p - p.conj().T) > CONDEXP_TOL:
                    raise StateError("pinching operators must be orthogonal projectors")
            for i, p in enumerate(ps):
                for q in ps[i + 1 :]:
                    if max_abs(p @ q) > CONDEXP_TOL:
                        raise StateError("pinching projectors are not mutually orthogonal")
            if max_abs(sum(ps) - np.eye(d)) > CONDEXP_TOL:
                raise StateError("pinching projectors do not sum to the identity")
            self.basis = None
            self.projectors = ps

    @property
    def rank_one(self) -> bool:
        return self.basis is not None

    def apply_matrix(self, x):
        dims = self.layout.dims
        if self.basis is not None:
            v = self.basis
            y = local_sandwich(x, dims, self.axis, v.conj().T, v)
            pre = int(np.prod(dims[: self.axis], dtype=np.int64))
            dt = dims[self.axis]
            post = int(np.prod(dims[self.axis + 1 :], dtype=np.int64))
            t = y.reshape(y.shape[:-2] + (pre, dt, post, pre, dt, post))
            mask = np.eye(dt)[:, None, None, :, None]
            y = (t * mask).reshape(y.shape)
            return local_sandwich(y, dims, self.axis, v, v.conj().T)
        return sum(local_sandwich(x, dims, self.axis, p, p) for p in self.projectors)

    def __repr__(self):
        return f"Pinching({self.target!r} on {self.layout.labels})"


class TraceEmbed(ConditionalExpectation):
    """``X -> I_discard/|discard| ⊗ Tr_discard X`` (layout order preserved)."""

    batched = True

    def __init__(self, layout, discard: Sequence[str]):
        super().__init__(layout)
        discard = list(discard)
        idx = self.layout.indices(discard)
        self.discard = [self.layout.labels[i] for i in idx]
        self._drop = idx
        self._keep = [i for i in range(len(self.layout)) if i not in idx]

    def apply_matrix(self, x):
        dims = self.layout.dims
        reduced = trace_out(x, dims, self._keep)
        dd = int(np.prod([dims[i] for i in self._drop], dtype=np.int64))
        dk = reduced.shape[-1]
        full = reduced[..., :, None, :, None] * (np.eye(dd) / dd)[:, None, :]
        full = full.reshape(reduced.shape[:-2] + (dk * dd, dk * dd))
        order = self._keep + self._drop
        return permute_systems(full, [dims[i] for i in order], [order.index(i) for i in range(len(dims))])

    def __repr__(self):
        return f"TraceEmbed({self.discard} on {self.layout.labels})"


class Compose(ConditionalExpectation):
    """``maps[0] ∘ maps[1] ∘ ...``; the last map is applied first. Empty is the identity."""

    def __init__(self, layout, maps: Sequence[ConditionalExpectation] = ()):
        super().__init__(layout)
        for m in maps:
            if m.layout != self.layout:
                raise StateError("all composed maps must act on the same layout")
        self.maps = list(maps)
        self.batched = all(m.batched for m in self.maps)

    def apply_matrix(self, x):
        for m in reversed(self.maps):
            x = m.apply_matrix(x)
        return x

    def __repr__(self):
        return "Compose(" + ", ".join(map(repr, self.maps)) + ")"


def make_pinching(layout, target: str, basis=None, projectors=None) -> Pinching:
    return Pinching(layout, target, basis=basis, projectors=projectors)


def make_trace_embed(layout, discard: Sequence[str]) -> TraceEmbed:
    return TraceEmbed(layout, discard)


def compose(*maps: ConditionalExpectation, layout=None) -> Compose:
    if layout is None:
        if not maps:
            raise StateError("compose() with no maps needs an explicit layout")
        layout = maps[0].layout
    return Compose(layout, maps)


def apply_condexp(expectation: ConditionalExpectation, rho: DensityMatrix) -> DensityMatrix:
    return expectation.apply(rho)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass
class CheckReport:
    """Outcome of a verification routine; failures are listed, not raised."""

    passed: bool
    details: dict = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.passed


def _random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (g + g.conj().T)


def _random_state_matrix(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = g @ g.conj().T
    return m / np.trace(m).real


def verify_condexp(expectation: LinearMap, samples: int = 50, seed: int = 0) -> CheckReport:
    """Check unitality, CPTP, idempotence, and trace duality of a map.

    Duality is sampled: ``Tr(sigma E(rho)) == Tr(sigma rho)`` for random
    states ``rho`` and random Hermitian ``sigma`` drawn from the image of
    ``E``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    d = expectation.layout.total_dim
    details = {}
    failures = []

    details["unital_error"] = err = max_abs(expectation.apply_matrix(np.eye(d)) - np.eye(d))
    if err > CONDEXP_TOL:
        failures.append(f"not unital: |E(I) - I| = {err:.3g}")

    s = expectation.superoperator
    details["idempotence_error"] = err = max_abs(s @ s - s)
    if err > CONDEXP_TOL:
        failures.append(f"not idempotent: |E∘E - E| = {err:.3g}")

    neg, tp = expectation.cptp_violation()
    details["choi_negativity"], details["trace_preservation_error"] = neg, tp
    if neg > CONDEXP_TOL:
        failures.append(f"not completely positive: Choi eigenvalue {-neg:.3g}")
    if tp > CONDEXP_TOL:
        failures.append(f"not trace preserving: error {tp:.3g}")

    worst = 0.0
    for _ in range(samples):
        rho = _random_state_matrix(rng, d)
        sigma = expectation.apply_matrix(_random_hermitian(rng, d))
        lhs = np.trace(sigma @ expectation.apply_matrix(rho))
        rhs = np.trace(sigma @ rho)
        worst = max(worst, abs(lhs - rhs))
    details["duality_error"] = worst
    if worst > CONDEXP_TOL:
        failures.append(f"trace duality fails: error {worst:.3g}")
    return CheckReport(not failures, details, failures)


@dataclass(frozen=True)
class CommutingSquare:
    """Two conditional expectations that commute, with their composition."""

    e_n: ConditionalExpectation
    e_t: ConditionalExpectation
    e_r: ConditionalExpectation

    @property
    def layout(self) -> SubsystemLayout:
        return self.e_n.layout

    @classmethod
    def build(cls, e_n, e_t) -> "CommutingSquare":
        ok, e_r = verify_commuting_square(e_n, e_t)
        if not ok:
            raise StateError(f"{e_n!r} and {e_t!r} do not form a commuting square")
        return cls(e_n, e_t, e_r)


def verify_commuting_square(e_n: ConditionalExpectation, e_t: ConditionalExpectation):
    """``(True, E_N∘E_T)`` if the two superoperators commute within 1e-10, else ``(False, None)``."""
    if e_n.layout != e_t.layout:
        raise StateError("commuting square needs both expectations on one layout")
    if e_n is e_t:
        return True, e_n
    nt, tn = compose(e_n, e_t), compose(e_t, e_n)
    # compares the superoperators of both orders; structured maps build them without d^6 products
    if max_abs(nt.superoperator - tn.superoperator) > COMMUTE_TOL:
        return False, None
    return True, nt


@dataclass(frozen=True)
class Theorem3Report:
    s_n: float
    s_t: float
    s_m: float
    s_r: float

    @property
    def value(self) -> float:
        """``S(E_N rho) + S(E_T rho) - S(rho) - S(E_R rho)``; nonnegative."""
        return self.s_n + self.s_t - self.s_m - self.s_r

    @property
    def holds(self) -> bool:
        return self.value >= -THEOREM3_TOL


def theorem3_report(square: CommutingSquare, rho: DensityMatrix) -> Theorem3Report:
    s = entropy.von_neumann_entropy
    return Theorem3Report(
        s_n=s(square.e_n.apply(rho)),
        s_t=s(square.e_t.apply(rho)),
        s_m=s(rho),
        s_r=s(square.e_r.apply(rho)),
    )


# ---------------------------------------------------------------------------
# Stinespring dilation of a pinching and the asymmetry identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StinespringIsometry:
    """``V = sum_k |b_k>_E ⊗ |b_k><b_k|`` from ``layout`` into ``E ⊗ layout``."""

    matrix: np.ndarray
    layout_in: SubsystemLayout
    env_label: str

    def __post_init__(self):
        v = self.matrix
        if max_abs(v.conj().T @ v - np.eye(v.shape[1])) > STINESPRING_TOL:
            raise StateError("Stinespring map is not an isometry within 1e-12")

    @property
    def layout_out(self) -> SubsystemLayout:
        d_env = self.matrix.shape[0] // self.layout_in.total_dim
        return SubsystemLayout(((self.env_label, d_env),)) + self.layout_in

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        if rho.layout != self.layout_in:
            raise StateError("state layout does not match the isometry input")
        v = self.matrix
        return DensityMatrix(self.layout_out, v @ rho.matrix @ v.conj().T, validate=False)


def pinching_stinespring(pinching: Pinching, env_label: str = "E") -> StinespringIsometry:
    if not pinching.rank_one:
        raise StateError("Stinespring dilation here needs a rank-1 pinching")
    layout = pinching.layout
    if env_label in layout:
        raise StateError(f"environment label {env_label!r} already in layout")
    b = pinching.basis
    dt = b.shape[0]
    dims = layout.dims
    blocks = []
    for k in range(dt):
        local = np.outer(b[:, k], b[:, k].conj())
        blocks.append(lift_operator(local, dims, [pinching.axis]))
    # row block k of V is |b_k>_E component: V = sum_k |b_k>_E ⊗ P_k
    v = sum(np.kron(b[:, k].reshape(-1, 1), blocks[k]) for k in range(dt))
    return StinespringIsometry(np.asarray(v), layout, env_label)


@dataclass(frozen=True)
class Prop4Report:
    asymmetry: float
    neg_conditional_entropy: float

    @property
    def error(self) -> float:
        return abs(self.asymmetry - self.neg_conditional_entropy)

    @property
    def passed(self) -> bool:
        return self.error <= PROP4_TOL


def verify_prop4(rho: DensityMatrix, pinching: Pinching) -> Prop4Report:
    """Asymmetry ``D(rho || P(rho))`` against ``-S(E | M)`` on the dilated state."""
    iso = pinching_stinespring(pinching)
    dilated = iso.apply(rho)
    neg_cond = -entropy.conditional_entropy(dilated, [iso.env_label], list(rho.labels))
    return Prop4Report(entropy.asymmetry_measure(rho, pinching), neg_cond)


# ---------------------------------------------------------------------------
# Recovery maps
# ---------------------------------------------------------------------------


class RecoveryCandidate(LinearMap):
    """``X -> U Q(U^† X U) U^†`` where ``Q`` resets ``reset_labels`` to a fixed state.

    ``Q(X) = tau ⊗ Tr_C X`` with ``C = reset_labels``; with ``unitary=None``
    the conjugations are dropped.
    """

    def __init__(self, layout, reset_labels: Sequence[str], reset_state: DensityMatrix, unitary=None):
        super().__init__(layout)
        idx = self.layout.indices(reset_labels)
        self.reset_labels = [self.layout.labels[i] for i in idx]
        if reset_state.layout != self.layout.subset(self.reset_labels):
            raise StateError(
                f"reset state layout {reset_state.layout.systems} does not match {self.reset_labels}"
            )
        self.reset_state = reset_state
        self._drop = idx
        self._keep = [i for i in range(len(self.layout)) if i not in idx]
        if unitary is not None:
            unitary = np.asarray(unitary, dtype=complex)
            if unitary.shape != (self.layout.total_dim,) * 2 or not is_unitary(unitary):
                raise StateError("recovery unitary must be a full-layout unitary")
        self.unitary = unitary

    def _reset(self, x):
        dims = self.layout.dims
        rest = trace_out(x, dims, self._keep)
        full = np.kron(rest, self.reset_state.matrix)
        order = self._keep + self._drop
        return permute_systems(full, [dims[i] for i in order], [order.index(i) for i in range(len(dims))])

    def apply_matrix(self, x):
        u = self.unitary
        if u is None:
            return self._reset(x)
        return u @ self._reset(u.conj().T @ x @ u) @ u.conj().T


class IdentityRecovery(LinearMap):
    def apply_matrix(self, x):
        return np.array(x, dtype=complex)


def verify_recovery(recovery: LinearMap, square: CommutingSquare, rho: DensityMatrix, recover_from: str = "T") -> CheckReport:
    """Check that ``recovery`` certifies equality in the commuting-square inequality.

    With ``recover_from="N"`` the conditions are ``R(E_N rho) = rho`` and
    ``R(E_R rho) = E_T rho``; with ``"T"`` the roles of ``E_N`` and
    ``E_T`` swap. Raises if ``recovery`` is not CPTP.
    """
    if recover_from not in ("N", "T"):
        raise ValueError("recover_from must be 'N' or 'T'")
    if recovery.layout != square.layout or rho.layout != square.layout:
        raise StateError("recovery map, square and state must share one layout")
    neg, tp = recovery.cptp_violation()
    if neg > CONDEXP_TOL or tp > CONDEXP_TOL:
        raise StateError(f"recovery map is not CPTP (Choi negativity {neg:.3g}, trace error {tp:.3g})")
    big, other = (square.e_n, square.e_t) if recover_from == "N" else (square.e_t, square.e_n)
    r = recovery.apply_matrix
    err_state = max_abs(r(big.apply_matrix(rho.matrix)) - rho.matrix)
    err_other = max_abs(r(square.e_r.apply_matrix(rho.matrix)) - other.apply_matrix(rho.matrix))
    failures = []
    if err_state > RECOVERY_TOL:
        failures.append(f"R(E_{recover_from} rho) != rho (error {err_state:.3g})")
    if err_other > RECOVERY_TOL:
        failures.append(f"R(E_R rho) != other expectation (error {err_other:.3g})")
    return CheckReport(not failures, {"state_error": err_state, "other_error": err_other}, failures)


__all__ = [
    "CheckReport",
    "CommutingSquare",
    "Compose",
    "ConditionalExpectation",
    "IdentityRecovery",
    "LinearMap",
    "Pinching",
    "Prop4Report",
    "RecoveryCandidate",
    "StinespringIsometry",
    "Theorem3Report",
    "TraceEmbed",
    "apply_condexp",
    "compose",
    "make_pinching",
    "make_trace_embed",
    "pinching_stinespring",
    "theorem3_report",
    "verify_commuting_square",
    "verify_condexp",
    "verify_prop4",
    "verify_recovery",
]
