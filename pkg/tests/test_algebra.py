import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from teeur import algebra, games
from teeur.algebra import (
    CommutingSquare,
    IdentityRecovery,
    LinearMap,
    RecoveryCandidate,
    compose,
    make_pinching,
    make_trace_embed,
    pinching_stinespring,
    theorem3_report,
    verify_commuting_square,
    verify_condexp,
    verify_prop4,
    verify_recovery,
)
from teeur.ensembles import SeededSource, ginibre_mixed, haar_pure
from teeur.entropy import relative_entropy
from teeur.experiments import (
    bipartite_square,
    first_square,
    first_square_recovery,
    psi_on,
    random_game,
    second_square,
)
from teeur.qstate import (
    SIGMA_Z,
    DensityMatrix,
    Generator,
    StateError,
    apply_unitary,
    bell_state,
    partial_trace,
    tensor,
)

QUBIT = [("A", 2)]
TWO = [("A", 2), ("B", 2)]
Z_BASIS = np.eye(2)
C8, S8 = math.cos(math.pi / 8), math.sin(math.pi / 8)
ROTATED = np.array([[C8, -S8], [S8, C8]])


class ResetToZero(LinearMap):
    def apply_matrix(self, x):
        out = np.zeros_like(x, dtype=complex)
        out[0, 0] = np.trace(x)
        return out


def test_pinching_examples():
    z = make_pinching(QUBIT, "A", basis=Z_BASIS)
    diag = DensityMatrix(QUBIT, np.diag([0.2, 0.8]))
    assert z.apply(diag).allclose(diag, 1e-15)
    plus = DensityMatrix(QUBIT, np.full((2, 2), 0.5))
    np.testing.assert_allclose(z.apply(plus).matrix, np.eye(2) / 2, atol=1e-15)
    on_a = make_pinching(TWO, "A", basis=Z_BASIS)
    np.testing.assert_allclose(on_a.apply(bell_state()).matrix, np.diag([0.5, 0, 0, 0.5]), atol=1e-15)
    with pytest.raises(StateError):
        make_pinching(QUBIT, "A", basis=np.array([[1, 1], [0, 1]]))


def test_block_pinching_matches_sum_over_projectors(source):
    p0 = np.diag([1, 1, 0]).astype(complex)
    p1 = np.diag([0, 0, 1]).astype(complex)
    lay = [("A", 2), ("B", 3)]
    pin = make_pinching(lay, "B", projectors=[p0, p1])
    rho = ginibre_mixed(lay, None, source)
    expected = sum(np.kron(np.eye(2), p) @ rho.matrix @ np.kron(np.eye(2), p) for p in (p0, p1))
    np.testing.assert_allclose(pin.apply(rho).matrix, expected, atol=1e-14)
    assert verify_condexp(pin, samples=10).passed
    with pytest.raises(StateError):
        pinching_stinespring(pin)
    with pytest.raises(StateError):
        make_pinching(lay, "B", projectors=[p0, p0])


def test_trace_embed_examples(source):
    ra = ginibre_mixed([("A", 2)], None, source.child(0))
    rb = ginibre_mixed([("B", 3)], None, source.child(1))
    emb = make_trace_embed([("A", 2), ("B", 3)], ["A"])
    out = emb.apply(tensor([ra, rb]))
    np.testing.assert_allclose(out.matrix, np.kron(np.eye(2) / 2, rb.matrix), atol=1e-14)
    assert emb.apply(out).allclose(out, 1e-14)
    with pytest.raises(StateError):
        make_trace_embed(TWO, ["Q"])


@given(st.integers(0, 2**32))
def test_trace_embed_duality(seed):
    src = SeededSource(seed, "embed")
    lay = [("A", 2), ("B", 3)]
    rho = ginibre_mixed(lay, None, src.child(0))
    g = src.child(1).complex_normal((3, 3))
    c = complex(*src.child(2).rng.standard_normal(2))
    sigma = c * np.kron(np.eye(2), g + g.conj().T)
    emb = make_trace_embed(lay, ["A"])
    assert abs(np.trace(sigma @ emb.apply(rho).matrix) - np.trace(sigma @ rho.matrix)) <= 1e-10


def test_apply_condexp_examples(source):
    rho = ginibre_mixed(TWO, None, source.child(0))
    assert compose(layout=rho.layout).apply(rho).allclose(rho, 0)
    z = make_pinching(TWO, "A", basis=Z_BASIS)
    once = algebra.apply_condexp(z, rho)
    assert algebra.apply_condexp(z, once).allclose(once, 1e-10)
    pb = make_pinching(TWO, "B", basis=ROTATED)
    np.testing.assert_allclose(compose(z, pb).superoperator, compose(pb, z).superoperator, atol=1e-12)
    with pytest.raises(StateError):
        z.apply(ginibre_mixed([("A", 2), ("C", 2)], None, source.child(1)))


def test_verify_condexp_pass_and_fail():
    game = random_game(SeededSource(8, "vc"), num_rotations=3)
    lay = game.full_layout
    for e in (
        make_pinching(lay, "R", basis=np.eye(3)),
        game.pinching(lay),
        make_trace_embed(lay, ["B1"]),
        make_trace_embed(lay, ["R", "A", "B1", "B2"]),
        compose(game.pinching(lay), make_trace_embed(lay, ["B2"])),
    ):
        rep = verify_condexp(e, samples=50, seed=1)
        assert rep.passed, (e, rep.failures)
    bad = verify_condexp(ResetToZero(QUBIT), samples=5)
    assert not bad.passed
    assert any("unital" in f for f in bad.failures)


def test_superoperator_convention(source):
    pin = make_pinching(TWO, "B", basis=ROTATED)
    x = source.complex_normal((4, 4))
    np.testing.assert_allclose((pin.superoperator @ x.reshape(-1)).reshape(4, 4), pin.apply_matrix(x), atol=1e-13)
    assert pin.superoperator is pin.superoperator


def test_commuting_square_examples():
    game = random_game(SeededSource(3, "sq"), num_rotations=4)
    assert isinstance(first_square(game), CommutingSquare)
    assert isinstance(second_square(game), CommutingSquare)
    bi = random_game(SeededSource(3, "sqb"), kind="bipartite", dims=(2, 2), num_rotations=2)
    assert isinstance(bipartite_square(bi), CommutingSquare)
    z = make_pinching(QUBIT, "A", basis=Z_BASIS)
    ok, e_r = verify_commuting_square(z, z)
    assert ok and e_r is z
    ok, e_r = verify_commuting_square(z, make_pinching(QUBIT, "A", basis=ROTATED))
    assert not ok and e_r is None
    with pytest.raises(StateError):
        CommutingSquare.build(z, make_pinching(QUBIT, "A", basis=ROTATED))
    with pytest.raises(StateError):
        verify_commuting_square(z, make_pinching(TWO, "A", basis=Z_BASIS))


def test_rotated_pinchings_fail_by_a_wide_margin():
    z = make_pinching(QUBIT, "A", basis=Z_BASIS)
    r = make_pinching(QUBIT, "A", basis=ROTATED)
    diff = np.max(np.abs(z.superoperator @ r.superoperator - r.superoperator @ z.superoperator))
    # the oracle: <0|[P_z P_r - P_r P_z](|0><1|)|...> is O(sin(pi/4)) ~ 0.35
    assert diff > 0.1


def test_theorem3_fixed_point_is_zero():
    lay = TWO
    sq = CommutingSquare.build(make_pinching(lay, "A", basis=Z_BASIS), make_trace_embed(lay, ["B"]))
    rho = DensityMatrix(lay, np.eye(4) / 4)
    assert theorem3_report(sq, rho).value == pytest.approx(0, abs=1e-12)


@given(st.integers(0, 2**32))
def test_theorem3_nonnegative_on_bipartite_square(seed):
    src = SeededSource(seed, "t3b")
    game = random_game(src.child(0), kind="bipartite", dims=(2, 2), num_rotations=3)
    sq = bipartite_square(game)
    assert theorem3_report(sq, ginibre_mixed(sq.layout, None, src.child(1))).value >= -1e-9
    assert theorem3_report(sq, partial_trace(games.build_kappa(game), ["A", "B"])).holds


@given(st.integers(0, 2**32), st.sampled_from(["mixed", "pure"]))
def test_theorem3_equality_on_first_square(seed, kind):
    game = random_game(SeededSource(seed, "t3eq"), num_rotations=3, state=kind)
    assert abs(theorem3_report(first_square(game), psi_on(game, ["R", "A", "B1"])).value) <= 1e-9


def test_stinespring_examples(source):
    z = make_pinching(QUBIT, "A", basis=Z_BASIS)
    iso = pinching_stinespring(z)
    expected = np.zeros((4, 2))
    expected[0, 0] = 1  # |0> -> |0>_E |0>
    expected[3, 1] = 1  # |1> -> |1>_E |1>
    np.testing.assert_allclose(iso.matrix, expected)
    assert iso.layout_out.labels == ("E", "A")


@given(st.integers(0, 2**32))
def test_stinespring_marginals(seed):
    src = SeededSource(seed, "stine")
    lay = [("A", 3), ("B", 2)]
    h = src.child(0).complex_normal((3, 3))
    pin = make_pinching(lay, "A", basis=np.linalg.eigh(h + h.conj().T)[1])
    rho = ginibre_mixed(lay, None, src.child(1))
    out = pinching_stinespring(pin).apply(rho)
    assert np.max(np.abs(partial_trace(out, ["A", "B"]).matrix - pin.apply(rho).matrix)) <= 1e-12
    # complementary channel: E carries the same pinched marginal as A, expressed in E's basis
    omega_a = partial_trace(pin.apply(rho), ["A"]).matrix
    assert np.max(np.abs(partial_trace(out, ["E"]).matrix - omega_a)) <= 1e-12


def test_prop4_examples():
    z = make_pinching(QUBIT, "A", basis=Z_BASIS)
    rep = verify_prop4(DensityMatrix(QUBIT, np.diag([0.4, 0.6])), z)
    assert rep.asymmetry == pytest.approx(0, abs=1e-12) and rep.neg_conditional_entropy == pytest.approx(0, abs=1e-12)
    rep = verify_prop4(DensityMatrix(QUBIT, np.full((2, 2), 0.5)), z)
    assert rep.asymmetry == pytest.approx(1, abs=1e-12) and rep.neg_conditional_entropy == pytest.approx(1, abs=1e-12)


@given(st.integers(0, 2**32), st.sampled_from(["A", "B"]))
def test_prop4_random_two_qubit(seed, target):
    src = SeededSource(seed, "prop4")
    rho = ginibre_mixed(TWO, None, src.child(0))
    h = src.child(1).complex_normal((2, 2))
    assert verify_prop4(rho, make_pinching(TWO, target, basis=np.linalg.eigh(h + h.conj().T)[1])).passed


@given(st.integers(0, 2**32))
def test_pinching_invariant_under_generated_rotation(seed):
    src = SeededSource(seed, "rot")
    h = src.child(0).complex_normal((3, 3))
    g = Generator.from_matrix("A", h + h.conj().T)
    lay = [("A", 3), ("B", 2)]
    rho = ginibre_mixed(lay, None, src.child(1))
    pin = make_pinching(lay, "A", basis=g.eigenvectors)
    r = float(src.rng.uniform(-10, 10))
    rotated = apply_unitary(rho, g.evolution(r), ["A"])
    assert np.max(np.abs(pin.apply(rotated).matrix - pin.apply(rho).matrix)) <= 1e-10
    assert relative_entropy(rho, pin.apply(rho)) < math.inf


@given(st.integers(0, 2**32), st.sampled_from(["mixed", "pure"]))
def test_recovery_first_square(seed, kind):
    game = random_game(SeededSource(seed, "rec1"), num_rotations=3, state=kind)
    sq = first_square(game)
    psi = psi_on(game, ["R", "A", "B1"])
    rep = verify_recovery(first_square_recovery(game), sq, psi, "T")
    assert rep.passed, rep.failures
    assert abs(theorem3_report(sq, psi).value) <= 1e-8


def test_recovery_second_square_on_product_states():
    game = random_game(SeededSource(2, "rec2"), num_rotations=3, state="product")
    sq = second_square(game)
    rho_ab1 = partial_trace(game.state, ["A", "B1"])
    u = np.kron(games.control_unitary(game.ensemble, game.generator), np.eye(4))
    rec = RecoveryCandidate(game.full_layout, ["A", "B1"], rho_ab1, unitary=u)
    psi = games.build_psi(game)
    assert verify_recovery(rec, sq, psi, "T").passed
    assert abs(theorem3_report(sq, psi).value) <= 1e-8


def test_recovery_bipartite_product():
    game = random_game(SeededSource(4, "recb"), kind="bipartite", dims=(2, 2), state="product", num_rotations=3)
    sq = bipartite_square(game)
    for state in (game.state, partial_trace(games.build_kappa(game), ["A", "B"])):
        q = RecoveryCandidate(sq.layout, ["A"], partial_trace(state, ["A"]))
        assert verify_recovery(q, sq, state, "T").passed
        assert abs(theorem3_report(sq, state).value) <= 1e-8


def test_recovery_identity_on_fixed_point():
    lay = TWO
    sq = CommutingSquare.build(make_pinching(lay, "A", basis=Z_BASIS), make_trace_embed(lay, ["B"]))
    rho = DensityMatrix(lay, np.diag([0.1, 0.1, 0.4, 0.4]))
    assert verify_recovery(IdentityRecovery(lay), sq, rho, "N").passed


def test_recovery_fails_for_wrong_map_and_rejects_non_cptp():
    game = random_game(SeededSource(6, "recbad"), state="mixed", num_rotations=3)
    sq = first_square(game)
    psi = psi_on(game, ["R", "A", "B1"])
    assert not verify_recovery(IdentityRecovery(sq.layout), sq, psi, "T").passed

    class Transpose(LinearMap):
        def apply_matrix(self, x):
            return np.asarray(x).T

    with pytest.raises(StateError):
        verify_recovery(Transpose(sq.layout), sq, psi, "T")


def test_verify_recovery_pass_implies_saturation():
    # a generic mixed state on the bipartite square with the reset map: no recovery, positive gap
    rho = ginibre_mixed(TWO, None, SeededSource(11))
    g = Generator.from_matrix("A", SIGMA_Z)
    sq = CommutingSquare.build(make_trace_embed(TWO, ["B"]), make_pinching(TWO, "A", basis=g.eigenvectors))
    q = RecoveryCandidate(TWO, ["A"], partial_trace(rho, ["A"]))
    rep = verify_recovery(q, sq, rho, "T")
    value = theorem3_report(sq, rho).value
    assert (not rep.passed) and value > 1e-8
