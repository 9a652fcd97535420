"""Rotation/measurement guessing games and their entropic bounds.

A game shares a state on ``(A, B1, B2)`` (tripartite) or ``(A, B)``
(bipartite). Player A either rotates her system by ``exp(-i G r_k)`` with
probability ``p_k``, recording ``k`` in a classical register ``R`` (the
state ``kappa``), or measures ``G`` (the state ``omega``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import Pinching
from .entropy import (
    conditional_entropy,
    marginal_entropy,
    mutual_information,
    relative_entropy,
    shannon_entropy,
)
from .qstate import (
    DensityMatrix,
    Generator,
    PureState,
    StateError,
    SubsystemLayout,
    apply_unitary,
    lift_operator,
    max_abs,
    partial_trace,
    tensor,
)

GAP_TOL = 1e-9
SATURATION_TOL = 1e-8
HYPOTHESIS_TOL = 1e-10

TRIPARTITE_LABELS = ("A", "B1", "B2")
BIPARTITE_LABELS = ("A", "B")


class BoundViolation(AssertionError):
    """A reported gap is below ``-GAP_TOL``."""


@dataclass(frozen=True)
class RotationEnsemble:
    angles: tuple[float, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles)
        probs = tuple(float(p) for p in self.probabilities)
        if not angles or len(angles) != len(probs):
            raise StateError("need at least one angle and one probability per angle")
        if min(probs) < 0:
            raise StateError("probabilities must be nonnegative")
        if abs(math.fsum(probs) - 1) > 1e-12:
            raise StateError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        if len(set(angles)) != len(angles):
            raise StateError("rotation angles must be pairwise distinct")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def uniform(cls, angles: Sequence[float]) -> "RotationEnsemble":
        n = len(angles)
        return cls(tuple(angles), (1 / n,) * n)

    def __len__(self) -> int:
        return len(self.angles)

    @property
    def is_uniform(self) -> bool:
        return max(self.probabilities) - min(self.probabilities) <= 1e-12

    def entropy(self) -> float:
        return shannon_entropy(self.probabilities)


@dataclass(frozen=True)
class GameInstance:
    state: DensityMatrix
    generator: Generator
    ensemble: RotationEnsemble
    register: str = "R"

    def __post_init__(self):
        labels = self.state.labels
        if labels not in (TRIPARTITE_LABELS, BIPARTITE_LABELS):
            raise StateError(f"game state must be on {TRIPARTITE_LABELS} or {BIPARTITE_LABELS}, got {labels}")
        if self.generator.target != "A":
            raise StateError("the generator must act on A")
        if self.generator.dim != self.state.layout.dim("A"):
            raise StateError("generator dimension does not match subsystem A")
        if self.register in labels:
            raise StateError(f"register label {self.register!r} clashes with the state")

    @property
    def kind(self) -> str:
        return "tripartite" if self.state.labels == TRIPARTITE_LABELS else "bipartite"

    @property
    def register_layout(self) -> SubsystemLayout:
        return SubsystemLayout(((self.register, len(self.ensemble)),))

    @property
    def full_layout(self) -> SubsystemLayout:
        return self.register_layout + self.state.layout

    def pinching(self, layout: SubsystemLayout | None = None) -> Pinching:
        """Measurement of G on A as a conditional expectation on ``layout``."""
        return Pinching(layout or self.state.layout, "A", basis=self.generator.eigenvectors)


def control_unitary(ensemble: RotationEnsemble, generator: Generator) -> np.ndarray:
    """``sum_k |k><k|_R ⊗ exp(-i G r_k)`` on ``R ⊗ A``."""
    n, d = len(ensemble), generator.dim
    u = np.zeros((n * d, n * d), dtype=complex)
    for k, r in enumerate(ensemble.angles):
        u[k * d : (k + 1) * d, k * d : (k + 1) * d] = generator.evolution(r)
    return u


def build_kappa(game: GameInstance) -> DensityMatrix:
    """Classical-quantum state after a random rotation, register first."""
    rho = game.state
    a = rho.layout.index("A")
    n, d = len(game.ensemble), rho.layout.total_dim
    kappa = np.zeros((n * d, n * d), dtype=complex)
    for k, (r, p) in enumerate(zip(game.ensemble.angles, game.ensemble.probabilities)):
        u = lift_operator(game.generator.evolution(r), rho.dims, [a])
        kappa[k * d : (k + 1) * d, k * d : (k + 1) * d] = p * (u @ rho.matrix @ u.conj().T)
    return DensityMatrix(game.full_layout, kappa, validate=False)


def build_omega(game: GameInstance) -> DensityMatrix:
    return game.pinching().apply(game.state)


def omega_vector(ensemble: RotationEnsemble) -> np.ndarray:
    return np.sqrt(np.asarray(ensemble.probabilities, dtype=float)).astype(complex)


def build_psi(game: GameInstance) -> DensityMatrix:
    """Coherent version of kappa: the control unitary applied to ``|Omega><Omega| ⊗ rho``."""
    omega = PureState(game.register_layout, omega_vector(game.ensemble)).density()
    phi = tensor([omega, game.state])
    return apply_unitary(phi, control_unitary(game.ensemble, game.generator), [game.register, "A"])


# ---------------------------------------------------------------------------
# Bound reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """Named entropy terms, the uncertainty ``lhs``, and every applicable bound.

    ``rhs`` holds only the bounds whose hypotheses are met; a missing key
    means the bound does not apply, not that it is zero.
    """

    game: str
    terms: dict[str, float]
    lhs: float
    rhs: dict[str, float]
    hypotheses: dict[str, bool] = field(default_factory=dict)
    primary: str = "thm1"

    @property
    def gaps(self) -> dict[str, float]:
        return {name: self.lhs - value for name, value in self.rhs.items()}

    @property
    def gap(self) -> float:
        return self.gaps[self.primary]

    @property
    def saturated(self) -> bool:
        return any(self.hypotheses.values()) and abs(self.gap) <= SATURATION_TOL

    def violations(self, tol: float = GAP_TOL) -> dict[str, float]:
        return {k: g for k, g in self.gaps.items() if not g >= -tol}

    def validate(self, tol: float = GAP_TOL) -> "BoundReport":
        bad = self.violations(tol)
        if bad:
            raise BoundViolation(f"{self.game} bound violated: {bad}")
        return self


def _is_product(state: DensityMatrix, left: Sequence[str], right: Sequence[str]) -> bool:
    if state.layout.dim_of(left) == 1 or state.layout.dim_of(right) == 1:
        return True
    prod = np.kron(partial_trace(state, left).matrix, partial_trace(state, right).matrix)
    return max_abs(prod - state.matrix) <= HYPOTHESIS_TOL


def _is_pure(state: DensityMatrix) -> bool:
    return abs(state.purity() - 1) <= HYPOTHESIS_TOL


def _is_pure_eigenstate(rho_a: DensityMatrix, generator: Generator) -> bool:
    v = generator.eigenvectors
    weights = np.einsum("ji,jk,ki->i", v.conj(), rho_a.matrix, v).real
    return float(np.max(weights)) >= 1 - HYPOTHESIS_TOL


def _require(game: GameInstance, kind: str):
    if game.kind != kind:
        expected = TRIPARTITE_LABELS if kind == "tripartite" else BIPARTITE_LABELS
        raise StateError(f"{kind} report needs a state on {expected}, got {game.state.labels}")


def tripartite_report(game: GameInstance) -> BoundReport:
    """Uncertainty ``S(R|AB1)_kappa + S(A|B2)_omega`` against its lower bounds.

    ``thm1_first`` comes from the pinching commuting square on ``R A B1``,
    ``thm1_second`` from the square that also embeds ``B1`` and ``B2``;
    ``thm1`` is their combination. The Coles et al. baselines are reported
    only under their hypotheses (uniform ``p``; trivial ``B1``).
    """
    _require(game, "tripartite")
    rho = game.state
    kappa = build_kappa(game)
    omega = build_omega(game)
    R = game.register

    s_r_kappa = marginal_entropy(kappa, [R])
    s_ab1_kappa = marginal_entropy(kappa, ["A", "B1"])
    s_rab1_kappa = marginal_entropy(kappa, [R, "A", "B1"])
    s_ab1_omega = marginal_entropy(omega, ["A", "B1"])
    d_ab1 = relative_entropy(partial_trace(kappa, ["A", "B1"]), partial_trace(omega, ["A", "B1"]))

    terms = {
        "S_R_given_AB1_kappa": s_rab1_kappa - s_ab1_kappa,
        "S_A_given_B2_omega": conditional_entropy(omega, ["A"], ["B2"]),
        "S_R_kappa": s_r_kappa,
        "D_kappa_AB1_omega_AB1": d_ab1,
        "I_A_B1_omega": mutual_information(omega, ["A"], ["B1"]),
        "I_B1_B2_rho": mutual_information(rho, ["B1"], ["B2"]),
        "S_A_given_B1B2_rho": conditional_entropy(rho, ["A"], ["B1", "B2"]),
        "S_AB1B2_rho": marginal_entropy(rho, ["A", "B1", "B2"]),
        "S_A_omega": marginal_entropy(omega, ["A"]),
        "S_AB1_kappa": s_ab1_kappa,
        "S_AB1_omega": s_ab1_omega,
        "S_B2_rho": marginal_entropy(rho, ["B2"]),
        "S_RA_kappa": marginal_entropy(kappa, [R, "A"]),
        "S_A_rho": marginal_entropy(rho, ["A"]),
    }
    t = terms
    lhs = t["S_R_given_AB1_kappa"] + t["S_A_given_B2_omega"]
    correlation = t["I_A_B1_omega"] - t["I_B1_B2_rho"] + t["S_A_given_B1B2_rho"]
    terms["max_term"] = max(0.0, correlation)

    first = t["S_R_kappa"] + t["D_kappa_AB1_omega_AB1"]
    rhs = {
        "thm1": first + terms["max_term"],
        "thm1_first": first,
        "thm1_second": t["S_R_kappa"] + t["S_AB1B2_rho"] + t["S_A_omega"] - t["S_AB1_kappa"] - t["S_B2_rho"],
    }
    if game.ensemble.is_uniform:
        rhs["coles_tripartite"] = math.log2(len(game.ensemble))
    if rho.layout.dim("B1") == 1:
        # B1 trivial: D(kappa_AB1 || omega_AB1) is D(kappa_A || omega_A)
        rhs["coles_bipartite_special"] = first

    hypotheses = {
        "pure": _is_pure(rho),
        "product_AB1_B2": _is_product(rho, ["A", "B1"], ["B2"]),
    }
    return BoundReport("tripartite", terms, lhs, rhs, hypotheses, primary="thm1")


def bipartite_report(game: GameInstance) -> BoundReport:
    """Uncertainty ``S(R|AB)_kappa + S(A|B)_omega`` against its lower bound."""
    _require(game, "bipartite")
    rho = game.state
    kappa = build_kappa(game)
    omega = build_omega(game)
    R = game.register
    kappa_a = partial_trace(kappa, ["A"])
    omega_a = partial_trace(omega, ["A"])

    terms = {
        "S_R_given_AB_kappa": conditional_entropy(kappa, [R], ["A", "B"]),
        "S_A_given_B_omega": conditional_entropy(omega, ["A"], ["B"]),
        "S_R_kappa": marginal_entropy(kappa, [R]),
        "D_kappa_A_omega_A": relative_entropy(kappa_a, omega_a),
        "S_A_given_B_rho": conditional_entropy(rho, ["A"], ["B"]),
        "S_A_kappa": marginal_entropy(kappa, ["A"]),
        "S_A_omega": marginal_entropy(omega, ["A"]),
        "S_AB_kappa": marginal_entropy(kappa, ["A", "B"]),
        "S_AB_omega": marginal_entropy(omega, ["A", "B"]),
        "S_RA_kappa": marginal_entropy(kappa, [R, "A"]),
        "S_A_rho": marginal_entropy(rho, ["A"]),
    }
    t = terms
    lhs = t["S_R_given_AB_kappa"] + t["S_A_given_B_omega"]
    rhs = {"thm2": t["S_R_kappa"] + t["D_kappa_A_omega_A"] + t["S_A_given_B_rho"]}
    hypotheses = {
        "product_A_B": _is_product(rho, ["A"], ["B"]),
        "pure_eigenstate_A": _is_pure_eigenstate(partial_trace(rho, ["A"]), game.generator),
    }
    return BoundReport("bipartite", terms, lhs, rhs, hypotheses, primary="thm2")


def report(game: GameInstance) -> BoundReport:
    return tripartite_report(game) if game.kind == "tripartite" else bipartite_report(game)
