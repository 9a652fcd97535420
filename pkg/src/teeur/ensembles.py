"""Seeded random states, angles, and the theta-parameterized product family.

Randomness comes from numpy's PCG64 bit generator seeded through a
``SeedSequence(seed, spawn_key=(stream_key,))``, where ``stream_key`` is the
first 8 bytes (big-endian) of the SHA-256 digest of the stream name.
Complex Gaussian entries are ``(x + i y) / sqrt(2)`` with the real parts
drawn first, then the imaginary parts, each via
``Generator.standard_normal``.
"""

from __future__ import annotations

import bisect
import hashlib
import math

import numpy as np

from .qstate import DensityMatrix, PureState, StateError, SubsystemLayout, tensor

ANGLE_MIN_SEPARATION = 1e-12


def stream_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "big")


class SeededSource:
    """A named, reproducible random stream.

    A source is single-owner: draws advance its state. Use :meth:`child` to
    hand independent substreams to parallel consumers.
    """

    def __init__(self, seed: int, stream: str = "default"):
        if not 0 <= int(seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self.stream = stream
        ss = np.random.SeedSequence(self.seed, spawn_key=(stream_key(stream),))
        self.rng = np.random.Generator(np.random.PCG64(ss))

    def child(self, *index) -> "SeededSource":
        return SeededSource(self.seed, "/".join([self.stream, *map(str, index)]))

    def complex_normal(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        re = self.rng.standard_normal(n)
        im = self.rng.standard_normal(n)
        return ((re + 1j * im) / math.sqrt(2)).reshape(shape)

    def __repr__(self):
        return f"SeededSource(seed={self.seed}, stream={self.stream!r})"


def haar_pure(layout, source: SeededSource) -> PureState:
    """Normalized complex Gaussian vector (unitarily invariant)."""
    layout = SubsystemLayout.coerce(layout)
    d = layout.total_dim
    if d < 1:
        raise StateError("dimension must be >= 1")
    v = source.complex_normal(d)
    if d == 1:
        return PureState(layout, np.ones(1))
    return PureState(layout, v / np.linalg.norm(v))


def ginibre_mixed(layout, rank: int | None, source: SeededSource) -> DensityMatrix:
    """``M M^† / Tr(M M^†)`` with ``M`` a ``dim x rank`` complex Gaussian matrix."""
    layout = SubsystemLayout.coerce(layout)
    d = layout.total_dim
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise StateError(f"rank must be in [1, {d}], got {rank}")
    m = source.complex_normal((d, rank))
    w = m @ m.conj().T
    return DensityMatrix(layout, w / np.trace(w).real)


def mix_noise(rho: DensityMatrix, eps: float, source: SeededSource) -> DensityMatrix:
    """``(1 - eps) rho + eps eta`` with ``eta`` a full-rank Ginibre state."""
    if not 0 <= eps <= 1:
        raise StateError(f"noise weight must be in [0, 1], got {eps}")
    eta = ginibre_mixed(rho.layout, None, source)
    if eps == 0:
        return rho
    return DensityMatrix(rho.layout, (1 - eps) * rho.matrix + eps * eta.matrix)


def random_angles(n: int, source: SeededSource) -> list[float]:
    """``n`` uniform draws on ``[0, 2 pi)``, redrawn until pairwise separated by 1e-12."""
    if n < 1:
        raise ValueError("need at least one angle")
    angles: list[float] = []
    ordered: list[float] = []
    while len(angles) < n:
        a = float(source.rng.uniform(0.0, 2 * math.pi))
        i = bisect.bisect_left(ordered, a)
        if all(abs(a - b) >= ANGLE_MIN_SEPARATION for b in ordered[max(i - 1, 0) : i + 1]):
            angles.append(a)
            ordered.insert(i, a)
    return angles


def theta_qubit(theta: float) -> np.ndarray:
    return np.array([math.cos(theta / 2), math.sin(theta / 2)], dtype=complex)


def theta_family(theta: float, parties: int, labels=None) -> DensityMatrix:
    """``|psi><psi|`` tensored ``parties`` times, ``|psi> = cos(t/2)|0> + sin(t/2)|1>``.

    Default labels are ``A, B1, B2, ...``.
    """
    if not 0 <= theta <= math.pi:
        raise StateError(f"theta must lie in [0, pi], got {theta}")
    if parties < 2:
        raise StateError("need at least two parties")
    if labels is None:
        labels = ["A"] + [f"B{i}" for i in range(1, parties)]
    if len(labels) != parties:
        raise StateError("one label per party")
    psi = theta_qubit(theta)
    return tensor([PureState(((label, 2),), psi).density() for label in labels])
