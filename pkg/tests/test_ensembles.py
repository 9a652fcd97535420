import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from teeur.ensembles import (
    SeededSource,
    ginibre_mixed,
    haar_pure,
    mix_noise,
    random_angles,
    stream_key,
    theta_family,
    theta_qubit,
)
from teeur.qstate import DensityMatrix, StateError, partial_trace

TWO = [("A", 2), ("B", 2)]


def test_same_seed_and_stream_reproduce():
    a = SeededSource(5, "x").complex_normal((3, 3))
    b = SeededSource(5, "x").complex_normal((3, 3))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, SeededSource(5, "y").complex_normal((3, 3)))
    assert not np.array_equal(a, SeededSource(6, "x").complex_normal((3, 3)))
    assert SeededSource(5, "x").child(1, 2).stream == "x/1/2"


def test_stream_key_is_sha256_prefix():
    # sha256("") starts e3b0c44298fc1c14
    assert stream_key("") == 0xE3B0C44298FC1C14


def test_complex_normal_draw_order():
    src = SeededSource(9, "order")
    z = src.complex_normal(4)
    ref = np.random.Generator(np.random.PCG64(np.random.SeedSequence(9, spawn_key=(stream_key("order"),))))
    re, im = ref.standard_normal(4), ref.standard_normal(4)
    np.testing.assert_array_equal(z, (re + 1j * im) / math.sqrt(2))


def test_seed_range():
    with pytest.raises(ValueError):
        SeededSource(-1)
    with pytest.raises(ValueError):
        SeededSource(2**64)


def test_haar_dimension_one_and_norm(source):
    assert np.array_equal(haar_pure([("A", 1)], source).vector, np.ones(1))
    v = haar_pure(TWO, source).vector
    assert np.linalg.norm(v) == pytest.approx(1, abs=1e-14)


def test_haar_reduced_purity_mean():
    # mean purity of the reduced state: (dA + dB) / (dA dB + 1) = 0.8 for two qubits
    src = SeededSource(2024, "lubkin")
    n = 10_000
    v = src.complex_normal((n, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    m = v.reshape(n, 2, 2)
    red = np.einsum("nij,nkj->nik", m, m.conj())
    purity = np.einsum("nij,nji->n", red, red).real
    assert abs(purity.mean() - 0.8) <= 0.01
    # the library sampler agrees on a smaller batch
    lib = [partial_trace(haar_pure(TWO, src.child(i)).density(), ["A"]).purity() for i in range(2000)]
    assert abs(np.mean(lib) - 0.8) <= 0.02


def test_ginibre_rank_and_trace(source):
    pure = ginibre_mixed(TWO, 1, source.child(0))
    assert pure.purity() == pytest.approx(1, abs=1e-12)
    full = ginibre_mixed(TWO, None, source.child(1))
    assert np.trace(full.matrix).real == pytest.approx(1, abs=1e-14)
    assert full.eigvals().min() > 1e-8
    with pytest.raises(StateError):
        ginibre_mixed(TWO, 5, source)
    with pytest.raises(StateError):
        ginibre_mixed(TWO, 0, source)


@given(st.integers(0, 2**32), st.integers(1, 4))
def test_ginibre_rank_property(seed, rank):
    rho = ginibre_mixed(TWO, rank, SeededSource(seed, "gin"))
    assert int(np.sum(rho.eigvals() > 1e-10)) == rank


def test_mix_noise_endpoints(source):
    rho = DensityMatrix(TWO, np.diag([1.0, 0, 0, 0]))
    assert mix_noise(rho, 0.0, source.child(0)) is rho
    eta = ginibre_mixed(TWO, None, source.child(1))
    np.testing.assert_allclose(mix_noise(rho, 1.0, source.child(1)).matrix, eta.matrix, atol=1e-15)
    mixed = mix_noise(rho, 0.1, source.child(1))
    np.testing.assert_allclose(mixed.matrix, 0.9 * rho.matrix + 0.1 * eta.matrix, atol=1e-15)
    assert mixed.eigvals().min() > 0
    with pytest.raises(StateError):
        mix_noise(rho, 1.5, source)


def test_mix_noise_consumes_stream_even_at_zero():
    a, b = SeededSource(3, "n"), SeededSource(3, "n")
    rho = DensityMatrix(TWO, np.eye(4) / 4)
    mix_noise(rho, 0.0, a)
    mix_noise(rho, 0.5, b)
    assert a.rng.random() == b.rng.random()


def test_random_angles_distribution():
    angles = np.array(random_angles(100_000, SeededSource(0, "angles-mean")))
    assert angles.min() >= 0 and angles.max() < 2 * math.pi
    assert abs(angles.mean() - math.pi) <= 0.02
    assert len(set(random_angles(6, SeededSource(0)))) == 6
    with pytest.raises(ValueError):
        random_angles(0, SeededSource(0))


def test_theta_family_endpoints():
    zero = theta_family(0.0, 3)
    assert zero.labels == ("A", "B1", "B2")
    assert zero.matrix[0, 0] == pytest.approx(1)
    one = theta_family(math.pi, 2)
    assert one.matrix[3, 3] == pytest.approx(1, abs=1e-15)
    half = theta_qubit(math.pi / 2)
    np.testing.assert_allclose(half, [1 / math.sqrt(2)] * 2, atol=1e-15)
    assert theta_family(1.0, 2, labels=["A", "B"]).labels == ("A", "B")
    with pytest.raises(StateError):
        theta_family(4.0, 2)
    with pytest.raises(StateError):
        theta_family(1.0, 1)


@given(st.floats(0, math.pi), st.integers(2, 3))
def test_theta_family_is_pure_product(theta, parties):
    rho = theta_family(theta, parties)
    assert rho.purity() == pytest.approx(1, abs=1e-12)
    a = partial_trace(rho, ["A"])
    assert a.purity() == pytest.approx(1, abs=1e-12)
