"""Entropic functionals in bits.

Values are plain floats. Relative entropy returns ``math.inf`` when the
support of the first argument is not contained in that of the second.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .qstate import DensityMatrix, StateError, eig_hermitian, partial_trace

EIG_CLIP = 1e-12
ASYMMETRY_CROSSCHECK_TOL = 1e-9


class ConsistencyError(ArithmeticError):
    """Two routes to the same quantity disagree beyond tolerance."""


def _spectrum_entropy(w: np.ndarray) -> float:
    w = w[w > EIG_CLIP]
    return float(-np.sum(w * np.log2(w))) if w.size else 0.0


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(state: DensityMatrix | np.ndarray) -> float:
    """``-Tr rho log2 rho``; eigenvalues below 1e-12 count as zero."""
    m = state.matrix if isinstance(state, DensityMatrix) else np.asarray(state)
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return max(_spectrum_entropy(w), 0.0)


def marginal_entropy(state: DensityMatrix, labels: Iterable[str]) -> float:
    """``S(labels)``; the empty set has entropy zero."""
    labels = list(labels)
    if not labels:
        return 0.0
    return von_neumann_entropy(partial_trace(state, labels))


def _disjoint(x: Iterable[str], y: Iterable[str]) -> tuple[list[str], list[str]]:
    x, y = list(x), list(y)
    overlap = set(x) & set(y)
    if overlap:
        raise StateError(f"label sets overlap on {sorted(overlap)}")
    return x, y


def conditional_entropy(state: DensityMatrix, target: Iterable[str], condition: Iterable[str] = ()) -> float:
    """``S(target | condition) = S(target condition) - S(condition)``."""
    target, condition = _disjoint(target, condition)
    return marginal_entropy(state, target + condition) - marginal_entropy(state, condition)


def mutual_information(state: DensityMatrix, x: Iterable[str], y: Iterable[str]) -> float:
    x, y = _disjoint(x, y)
    return marginal_entropy(state, x) + marginal_entropy(state, y) - marginal_entropy(state, x + y)


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``D(rho || sigma)`` in bits, or ``math.inf`` on a support violation.

    ``log sigma`` is never formed directly; ``rho`` is rotated into the
    eigenbasis of ``sigma`` and only its diagonal there is needed.
    """
    if rho.layout != sigma.layout:
        raise StateError(f"layout mismatch: {rho.layout.systems} vs {sigma.layout.systems}")
    ws, vs = eig_hermitian(sigma.matrix)
    rho_diag = np.einsum("ij,jk,ki->i", vs.conj().T, rho.matrix, vs).real
    kernel = ws <= EIG_CLIP
    if np.sum(np.clip(rho_diag[kernel], 0, None)) > EIG_CLIP:
        return math.inf
    cross = -float(np.sum(rho_diag[~kernel] * np.log2(ws[~kernel])))
    return cross - von_neumann_entropy(rho)


def asymmetry_measure(rho: DensityMatrix, expectation) -> float:
    """``D(rho || E(rho))`` for a conditional expectation ``E``.

    Computed both as a relative entropy and as the entropy gain
    ``S(E(rho)) - S(rho)``; the two must agree within 1e-9.
    """
    image = expectation.apply(rho)
    d = relative_entropy(rho, image)
    gain = von_neumann_entropy(image) - von_neumann_entropy(rho)
    if not abs(d - gain) <= ASYMMETRY_CROSSCHECK_TOL:
        raise ConsistencyError(f"D(rho||E rho) = {d!r} but S(E rho) - S(rho) = {gain!r}")
    return d
