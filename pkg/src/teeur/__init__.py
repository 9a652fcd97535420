"""Entropic rotation/measurement uncertainty relations via commuting squares."""

from .qstate import (
    DensityMatrix,
    Generator,
    PureState,
    StateError,
    SubsystemLayout,
    apply_unitary,
    eig_hermitian,
    partial_trace,
    tensor,
)
from .entropy import (
    asymmetry_measure,
    conditional_entropy,
    mutual_information,
    relative_entropy,
    von_neumann_entropy,
)
from .games import (
    BoundReport,
    GameInstance,
    RotationEnsemble,
    bipartite_report,
    build_kappa,
    build_omega,
    build_psi,
    control_unitary,
    tripartite_report,
)

__version__ = "0.1.0"
