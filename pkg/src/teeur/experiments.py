"""Parameter sweeps over the theta family, serialization, and verification suites."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import algebra, entropy, games
from .ensembles import SeededSource, ginibre_mixed, haar_pure, mix_noise, random_angles, theta_qubit
from .qstate import (
    SIGMA_X,
    SIGMA_Z,
    DensityMatrix,
    Generator,
    PureState,
    StateError,
    SubsystemLayout,
    apply_unitary,
    eig_hermitian,
    max_abs,
    partial_trace,
    tensor,
)

DIGITS = 12
COLES_SLACK = 1e-12


class ConfigError(ValueError):
    """Invalid sweep configuration or input file (CLI exit code 2)."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    game: str = "tripartite"
    dims: tuple[int, ...] = (2, 1, 2)
    num_rotations: int = 6
    distribution: str | tuple[float, ...] = "uniform"
    angles: tuple[float, ...] | None = None
    generator: str = "pauli-x"
    theta_start: float = 0.0
    theta_stop: float = math.pi
    theta_steps: int = 50
    noise_eps: float = 0.1
    noise_placement: str = "after"
    trials: int = 1
    seed: int = 0
    out: str | None = None
    format: str = "csv"

    def validate(self) -> "SweepConfig":
        if self.game not in ("tripartite", "bipartite"):
            raise ConfigError(f"game: expected 'tripartite' or 'bipartite', got {self.game!r}")
        labels = games.TRIPARTITE_LABELS if self.game == "tripartite" else games.BIPARTITE_LABELS
        if len(self.dims) != len(labels):
            raise ConfigError(f"dims: {self.game} game needs {len(labels)} dimensions, got {list(self.dims)}")
        if any(d not in (1, 2) for d in self.dims) or self.dims[0] != 2:
            raise ConfigError(f"dims: the theta family needs |A| = 2 and other dimensions in {{1, 2}}, got {list(self.dims)}")
        if self.num_rotations < 1:
            raise ConfigError("num_rotations: must be >= 1")
        if self.angles is not None and len(self.angles) != self.num_rotations:
            raise ConfigError(f"angles: expected {self.num_rotations} angles, got {len(self.angles)}")
        if self.distribution != "uniform":
            p = tuple(self.distribution)
            if len(p) != self.num_rotations or min(p) < 0 or abs(math.fsum(p) - 1) > 1e-12:
                raise ConfigError(f"distribution: need {self.num_rotations} nonnegative weights summing to 1")
        if self.theta_steps < 1:
            raise ConfigError("theta_steps: grid count must be >= 1")
        if not 0 <= self.theta_start <= self.theta_stop <= math.pi:
            raise ConfigError("theta range must satisfy 0 <= start <= stop <= pi")
        if not 0 <= self.noise_eps <= 1:
            raise ConfigError("noise_eps: must lie in [0, 1]")
        if self.noise_placement not in ("before", "after"):
            raise ConfigError("noise_placement: expected 'before' or 'after'")
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed: must be a 64-bit unsigned integer")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: expected 'csv' or 'json', got {self.format!r}")
        return self

    @property
    def labels(self) -> tuple[str, ...]:
        return games.TRIPARTITE_LABELS if self.game == "tripartite" else games.BIPARTITE_LABELS


PRESETS: dict[str, SweepConfig] = {
    # B1 trivial; noise on each qubit keeps the state a product across A|B2
    "fig3a": SweepConfig(game="tripartite", dims=(2, 1, 2), noise_placement="before"),
    "fig3b": SweepConfig(game="tripartite", dims=(2, 1, 2), noise_placement="after"),
    "fig4": SweepConfig(game="tripartite", dims=(2, 2, 2), noise_placement="after"),
    "fig5": SweepConfig(game="bipartite", dims=(2, 2), noise_placement="after"),
}


def preset(name: str, **overrides) -> SweepConfig:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigError(f"preset: unknown {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides)


def load_matrix_json(data) -> np.ndarray:
    try:
        m = np.array([[complex(re, im) for re, im in row] for row in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"matrix must be a list of rows of [re, im] pairs ({exc})") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"matrix must be square, got shape {m.shape}")
    return m


def dump_matrix_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def load_generator(spec: str, dim: int) -> Generator:
    """``pauli-x``, ``pauli-z``, or a path to a JSON Hermitian matrix.

    The file holds either the bare matrix or ``{"matrix": ..., "basis": ...}``
    where the optional basis (columns) resolves degeneracies.
    """
    if spec in ("pauli-x", "pauli-z"):
        if dim != 2:
            raise ConfigError(f"generator: {spec} needs |A| = 2, got {dim}")
        return Generator.from_matrix("A", SIGMA_X if spec == "pauli-x" else SIGMA_Z)
    path = Path(spec)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"generator: unknown preset or missing file {spec!r}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"generator: {spec} is not valid JSON ({exc})") from None
    basis = None
    if isinstance(data, dict):
        basis = load_matrix_json(data["basis"]) if "basis" in data else None
        data = data.get("matrix")
    m = load_matrix_json(data)
    if m.shape != (dim, dim):
        raise ConfigError(f"generator: expected a {dim}x{dim} matrix, got {m.shape}")
    try:
        return Generator.from_matrix("A", m, basis=basis)
    except StateError as exc:
        raise ConfigError(f"generator: {exc}") from None


def load_state_json(path: str) -> DensityMatrix:
    """``{"layout": [[label, dim], ...], "matrix": [[[re, im], ...], ...]}``."""
    try:
        data = json.loads(Path(path).read_text())
        layout = SubsystemLayout(tuple((str(l), int(d)) for l, d in data["layout"]))
        return DensityMatrix(layout, load_matrix_json(data["matrix"]))
    except FileNotFoundError:
        raise ConfigError(f"state: missing file {path!r}") from None
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"state: invalid state file {path!r} ({exc})") from None


def dump_state_json(state: DensityMatrix) -> dict:
    return {"layout": [list(s) for s in state.layout.systems], "matrix": dump_matrix_json(state.matrix)}


def make_ensemble(config: SweepConfig) -> games.RotationEnsemble:
    if config.angles is not None:
        angles = list(config.angles)
    else:
        angles = random_angles(config.num_rotations, SeededSource(config.seed, "angles"))
    if config.distribution == "uniform":
        return games.RotationEnsemble.uniform(angles)
    return games.RotationEnsemble(tuple(angles), tuple(config.distribution))


def build_state(config: SweepConfig, theta: float, source: SeededSource) -> DensityMatrix:
    """Theta product state on the nontrivial subsystems, with noise, trivial ones inserted."""
    labels = config.labels
    live = [label for label, d in zip(labels, config.dims) if d == 2]
    factors = []
    for label in live:
        q = PureState(((label, 2),), theta_qubit(theta)).density()
        if config.noise_placement == "before":
            q = mix_noise(q, config.noise_eps, source.child(label))
        factors.append(q)
    rho = tensor(factors)
    if config.noise_placement == "after":
        rho = mix_noise(rho, config.noise_eps, source)
    for pos, (label, d) in enumerate(zip(labels, config.dims)):
        if d == 1:
            rho = rho.insert_trivial(label, pos)
    return rho


# ---------------------------------------------------------------------------
# Sweeps and rows
# ---------------------------------------------------------------------------

TRIPARTITE_VARIANTS = ("thm1", "thm1_first", "thm1_second", "coles", "coles_tripartite", "coles_bipartite_special")
BIPARTITE_VARIANTS = ("thm2",)
TRIPARTITE_TERMS = (
    "S_R_given_AB1_kappa",
    "S_A_given_B2_omega",
    "S_R_kappa",
    "D_kappa_AB1_omega_AB1",
    "I_A_B1_omega",
    "I_B1_B2_rho",
    "S_A_given_B1B2_rho",
    "max_term",
    "S_AB1B2_rho",
    "S_A_omega",
    "S_AB1_kappa",
    "S_AB1_omega",
    "S_B2_rho",
    "S_RA_kappa",
    "S_A_rho",
)
BIPARTITE_TERMS = (
    "S_R_given_AB_kappa",
    "S_A_given_B_omega",
    "S_R_kappa",
    "D_kappa_A_omega_A",
    "S_A_given_B_rho",
    "S_A_kappa",
    "S_A_omega",
    "S_AB_kappa",
    "S_AB_omega",
    "S_RA_kappa",
    "S_A_rho",
)


def columns_for(game: str) -> list[str]:
    variants, terms = (
        (TRIPARTITE_VARIANTS, TRIPARTITE_TERMS) if game == "tripartite" else (BIPARTITE_VARIANTS, BIPARTITE_TERMS)
    )
    return ["theta", "lhs"] + [f"rhs_{v}" for v in variants] + [f"gap_{v}" for v in variants] + list(terms)


def _rhs_with_alias(rep: games.BoundReport) -> dict[str, float]:
    rhs = dict(rep.rhs)
    coles = [rhs[k] for k in ("coles_tripartite", "coles_bipartite_special") if k in rhs]
    if coles:
        rhs["coles"] = max(coles)
    return rhs


def aggregate_reports(theta: float, reports: Sequence[games.BoundReport]) -> dict:
    """One row: mean of every term and bound over trials, worst-case (minimum) gap."""
    game = reports[0].game
    variants = TRIPARTITE_VARIANTS if game == "tripartite" else BIPARTITE_VARIANTS
    terms = TRIPARTITE_TERMS if game == "tripartite" else BIPARTITE_TERMS
    rhs_all = [_rhs_with_alias(r) for r in reports]
    row: dict = {"theta": float(theta), "lhs": float(np.mean([r.lhs for r in reports]))}
    for v in variants:
        vals = [rhs[v] for rhs in rhs_all if v in rhs]
        row[f"rhs_{v}"] = float(np.mean(vals)) if len(vals) == len(reports) else None
    for v in variants:
        gaps = [r.lhs - rhs[v] for r, rhs in zip(reports, rhs_all) if v in rhs]
        row[f"gap_{v}"] = float(min(gaps)) if len(gaps) == len(reports) else None
    for t in terms:
        row[t] = float(np.mean([r.terms[t] for r in reports]))
    return row


def run_sweep(config: SweepConfig) -> list[dict]:
    """Rows sorted by theta; each grid point draws noise from its own substream."""
    config.validate()
    generator = load_generator(config.generator, config.dims[0])
    ensemble = make_ensemble(config)
    thetas = np.linspace(config.theta_start, config.theta_stop, config.theta_steps)
    noise = SeededSource(config.seed, "noise")
    rows = []
    for i, theta in enumerate(thetas):
        reports = []
        for t in range(config.trials):
            rho = build_state(config, float(theta), noise.child(i, t))
            reports.append(games.report(games.GameInstance(rho, generator, ensemble)))
        rows.append(aggregate_reports(float(theta), reports))
    return rows


def validate_rows(rows: Sequence[dict], tol: float = games.GAP_TOL) -> None:
    for row in rows:
        for key, value in row.items():
            if key.startswith("gap_") and value is not None and not value >= -tol:
                raise games.BoundViolation(f"theta={row['theta']}: {key} = {value!r}")
        if row.get("rhs_coles") is not None and not row["rhs_thm1"] - row["rhs_coles"] >= -COLES_SLACK:
            raise games.BoundViolation(f"theta={row['theta']}: rhs_thm1 below rhs_coles")


def _fmt(value) -> str:
    return "" if value is None else f"{value:.{DIGITS}g}"


def _rounded(value):
    return None if value is None else float(_fmt(value))


def serialize(rows: Sequence[dict], fmt: str = "csv", path: str | None = None, columns: Sequence[str] | None = None) -> str:
    """Render rows as CSV or JSON (12 significant digits); write to ``path`` if given.

    Rows are re-validated first. Returns the rendered text.
    """
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format: expected 'csv' or 'json', got {fmt!r}")
    validate_rows(rows)
    if columns is None:
        if not rows:
            raise ConfigError("columns are required to serialize an empty row list")
        columns = list(rows[0])
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])
        text = buf.getvalue()
    else:
        text = json.dumps([{c: _rounded(row.get(c)) for c in columns} for row in rows], indent=1) + "\n"
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise ConfigError(f"out: cannot write {path!r}: {exc.strerror or exc}") from None
    return text


def parse_csv(text: str) -> list[dict]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append({k: (float(v) if v != "" else None) for k, v in rec.items()})
    return rows


# ---------------------------------------------------------------------------
# Random games for the verification suites
# ---------------------------------------------------------------------------


def random_generator(dim: int, source: SeededSource) -> Generator:
    g = source.complex_normal((dim, dim))
    return Generator.from_matrix("A", g + g.conj().T)


def random_game(
    source: SeededSource,
    kind: str = "tripartite",
    dims: Sequence[int] = (2, 2, 2),
    num_rotations: int = 6,
    state: str = "mixed",
    uniform: bool = True,
) -> games.GameInstance:
    """A random game; ``state`` is ``"mixed"``, ``"pure"``, or ``"product"``.

    ``"product"`` means ``rho_AB1 ⊗ rho_B2`` (tripartite) or ``rho_A ⊗ rho_B``.
    """
    labels = games.TRIPARTITE_LABELS if kind == "tripartite" else games.BIPARTITE_LABELS
    layout = SubsystemLayout(tuple(zip(labels, dims)))
    if state == "pure":
        rho = haar_pure(layout, source.child("state")).density()
    elif state == "mixed":
        rho = ginibre_mixed(layout, None, source.child("state"))
    elif state == "product":
        split = 2 if kind == "tripartite" else 1
        left = ginibre_mixed(layout.subset(labels[:split]), None, source.child("left"))
        right = ginibre_mixed(layout.subset(labels[split:]), None, source.child("right"))
        rho = tensor([left, right])
    else:
        raise ValueError(f"unknown state kind {state!r}")
    angles = random_angles(num_rotations, source.child("angles"))
    if uniform:
        ens = games.RotationEnsemble.uniform(angles)
    else:
        w = source.child("weights").rng.uniform(0.05, 1.0, num_rotations)
        w = w / math.fsum(w)
        w[-1] = 1 - math.fsum(w[:-1])
        ens = games.RotationEnsemble(tuple(angles), tuple(w))
    return games.GameInstance(rho, random_generator(dims[0], source.child("generator")), ens)


def first_square(game: games.GameInstance, with_b2: bool = False) -> algebra.CommutingSquare:
    """Pinch-R / pinch-A square on ``R A B1`` (or the full ``R A B1 B2`` layout)."""
    labels = [game.register, "A", "B1"] + (["B2"] if with_b2 else [])
    layout = game.full_layout.subset(labels)
    e_n = algebra.make_pinching(layout, game.register, basis=np.eye(len(game.ensemble)))
    e_t = game.pinching(layout)
    return algebra.CommutingSquare.build(e_n, e_t)


def second_square(game: games.GameInstance) -> algebra.CommutingSquare:
    """``R~ A B1 I_B2`` against ``R A~ I_B1 B2`` on the full layout."""
    layout = game.full_layout
    pinch_r = algebra.make_pinching(layout, game.register, basis=np.eye(len(game.ensemble)))
    e_n = algebra.compose(pinch_r, algebra.make_trace_embed(layout, ["B2"]))
    e_t = algebra.compose(game.pinching(layout), algebra.make_trace_embed(layout, ["B1"]))
    return algebra.CommutingSquare.build(e_n, e_t)


def bipartite_square(game: games.GameInstance) -> algebra.CommutingSquare:
    """``A I_B`` against ``A~ B`` on the bipartite layout."""
    layout = game.state.layout
    return algebra.CommutingSquare.build(algebra.make_trace_embed(layout, ["B"]), game.pinching(layout))


def first_square_recovery(game: games.GameInstance) -> algebra.RecoveryCandidate:
    layout = game.full_layout.subset([game.register, "A", "B1"])
    rho_ab1 = partial_trace(game.state, ["A", "B1"])
    u = np.kron(games.control_unitary(game.ensemble, game.generator), np.eye(layout.dim("B1")))
    return algebra.RecoveryCandidate(layout, ["A", "B1"], rho_ab1, unitary=u)


def psi_on(game: games.GameInstance, labels: Sequence[str]) -> DensityMatrix:
    return partial_trace(games.build_psi(game), labels)


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------


@dataclass
class VerifyReport:
    suite: str
    checks: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    @property
    def failures(self) -> list[dict]:
        return [c for c in self.checks if not c["passed"]]

    def to_json(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "checks": self.checks}


def _worst(values) -> float:
    return float(max(values, default=0.0))


def _suite_qstate(samples, src):
    roundtrip, spectrum = [], []
    for i in range(samples):
        s = src.child("qstate", i)
        rho = ginibre_mixed([("A", 2), ("B", 3)], None, s.child("rho"))
        sigma = ginibre_mixed([("C", 2)], None, s.child("sigma"))
        roundtrip.append(max_abs(partial_trace(tensor([rho, sigma]), rho.labels).matrix - rho.matrix))
        g = s.complex_normal((6, 6))
        u = np.linalg.qr(g)[0]
        out = apply_unitary(rho, u, ["A", "B"])
        spectrum.append(max_abs(np.sort(out.eigvals()) - np.sort(rho.eigvals())))
    yield "tensor/partial_trace round trip", _worst(roundtrip) <= 1e-12, {"max_error": _worst(roundtrip)}
    yield "unitary preserves spectrum", _worst(spectrum) <= 1e-10, {"max_error": _worst(spectrum)}


def _suite_entropy(samples, src):
    ssa, rel, cross = [], [], []
    for i in range(samples):
        s = src.child("entropy", i)
        rho = ginibre_mixed([("A", 2), ("B", 2), ("C", 2)], None, s.child("rho"))
        ssa.append(entropy.conditional_entropy(rho, ["A"], ["B", "C"]) - entropy.conditional_entropy(rho, ["A"], ["B"]))
        sigma = ginibre_mixed(rho.layout, None, s.child("sigma"))
        rel.append(-entropy.relative_entropy(rho, sigma))
        pin = algebra.make_pinching(rho.layout, "B", basis=eig_hermitian(s.complex_normal((2, 2)) + np.eye(2))[1])
        image = pin.apply(rho)
        cross.append(abs(entropy.relative_entropy(rho, image) - (entropy.von_neumann_entropy(image) - entropy.von_neumann_entropy(rho))))
    yield "strong subadditivity", _worst(ssa) <= 1e-9, {"max_violation": _worst(ssa)}
    yield "relative entropy nonnegative", _worst(rel) <= 1e-10, {"max_violation": _worst(rel)}
    yield "asymmetry dual formula", _worst(cross) <= 1e-9, {"max_error": _worst(cross)}


def _suite_algebra(samples, src):
    game = random_game(src.child("algebra-game"), num_rotations=4)
    lay = game.full_layout
    maps = {
        "pinching R": algebra.make_pinching(lay, "R", basis=np.eye(4)),
        "pinching A": game.pinching(lay),
        "trace embed B1 B2": algebra.make_trace_embed(lay, ["B1", "B2"]),
    }
    for name, m in maps.items():
        rep = algebra.verify_condexp(m, samples=samples, seed=src.seed)
        yield f"conditional expectation: {name}", rep.passed, rep.details

    squares = {"first square": first_square, "second square": second_square}
    for name, build in squares.items():
        try:
            build(game)
            yield f"commuting square: {name}", True, {}
        except StateError as exc:
            yield f"commuting square: {name}", False, {"error": str(exc)}
    bi = random_game(src.child("algebra-bipartite"), kind="bipartite", dims=(2, 2), num_rotations=3)
    try:
        bipartite_square(bi)
        yield "commuting square: bipartite", True, {}
    except StateError as exc:
        yield "commuting square: bipartite", False, {"error": str(exc)}

    qubit = SubsystemLayout((("A", 2),))
    c, s = math.cos(math.pi / 8), math.sin(math.pi / 8)
    rotated = algebra.make_pinching(qubit, "A", basis=np.array([[c, -s], [s, c]]))
    ok, _ = algebra.verify_commuting_square(algebra.make_pinching(qubit, "A", basis=np.eye(2)), rotated)
    yield "rotated pinchings do not commute", not ok, {}

    worst, first_eq = [], []
    for i in range(samples):
        g = random_game(src.child("t3", i), num_rotations=3)
        sq1 = first_square(g)
        rho = ginibre_mixed(sq1.layout, None, src.child("t3-state", i))
        worst.append(-algebra.theorem3_report(sq1, rho).value)
        first_eq.append(abs(algebra.theorem3_report(sq1, psi_on(g, ["R", "A", "B1"])).value))
        b = random_game(src.child("t3-bi", i), kind="bipartite", dims=(2, 2), num_rotations=3)
        sqb = bipartite_square(b)
        worst.append(-algebra.theorem3_report(sqb, partial_trace(games.build_kappa(b), ["A", "B"])).value)
        worst.append(-algebra.theorem3_report(sqb, ginibre_mixed(sqb.layout, None, src.child("t3-bi-state", i))).value)
    yield "theorem 3 inequality", _worst(worst) <= 1e-9, {"max_violation": _worst(worst)}
    yield "theorem 3 equality on psi (first square)", _worst(first_eq) <= 1e-9, {"max_error": _worst(first_eq)}

    rec = []
    for i in range(min(samples, 20)):
        g = random_game(src.child("recovery", i), num_rotations=3)
        r = algebra.verify_recovery(first_square_recovery(g), first_square(g), psi_on(g, ["R", "A", "B1"]), "T")
        rec.append(r.passed)
        b = random_game(src.child("recovery-bi", i), kind="bipartite", dims=(2, 2), state="product", num_rotations=3)
        sqb = bipartite_square(b)
        kappa_ab = partial_trace(games.build_kappa(b), ["A", "B"])
        q = algebra.RecoveryCandidate(sqb.layout, ["A"], partial_trace(kappa_ab, ["A"]))
        rec.append(algebra.verify_recovery(q, sqb, kappa_ab, "T").passed)
    yield "recovery maps certify saturation", all(rec), {"cases": len(rec)}


def _suite_identities(samples, src):
    triv, rel_ae, prop4 = [], [], []
    for i in range(samples):
        g = random_game(src.child("ident", i), num_rotations=1 + i % 6)
        rep = games.tripartite_report(g)
        t = rep.terms
        triv.append(abs(t["S_RA_kappa"] - t["S_R_kappa"] - t["S_A_rho"]))
        rel_ae.append(abs(t["S_AB1_omega"] - t["S_AB1_kappa"] - t["D_kappa_AB1_omega_AB1"]))
        rho = ginibre_mixed([("A", 2), ("B", 2)], None, src.child("prop4", i))
        basis = eig_hermitian(src.child("prop4-basis", i).complex_normal((2, 2)) * (1 + 1j))[1]
        target = "A" if i % 2 == 0 else "B"
        prop4.append(algebra.verify_prop4(rho, algebra.make_pinching(rho.layout, target, basis=basis)).error)
    yield "S(RA)_kappa = S(R)_kappa + S(A)_rho", _worst(triv) <= 1e-9, {"max_error": _worst(triv)}
    yield "S(AB1)_omega - S(AB1)_kappa = D(kappa||omega)", _worst(rel_ae) <= 1e-9, {"max_error": _worst(rel_ae)}
    yield "asymmetry equals -S(E|M) on dilation", _worst(prop4) <= 1e-9, {"max_error": _worst(prop4)}


def _suite_games(samples, src):
    worst = []
    sat = []
    for i in range(samples):
        kind = "tripartite" if i % 2 == 0 else "bipartite"
        dims = ((2, 2, 2), (2, 1, 2))[i % 4 // 2] if kind == "tripartite" else (2, 2)
        g = random_game(src.child("games", i), kind=kind, dims=dims, num_rotations=2 + i % 5, uniform=i % 3 != 0)
        rep = games.report(g)
        worst.append(-min(rep.gaps.values()))
        if rep.game == "tripartite":
            worst.append(rep.rhs["thm1_first"] - rep.rhs["thm1"])
        for state in ("pure", "product"):
            if kind == "bipartite" and state == "pure":
                continue
            s = random_game(src.child("games-sat", state, i), kind=kind, dims=dims, num_rotations=3, state=state)
            sat.append(abs(games.report(s).gap))
    yield "bounds hold on random games", _worst(worst) <= 1e-9, {"max_violation": _worst(worst)}
    yield "saturation clauses", _worst(sat) <= 1e-8, {"max_gap": _worst(sat)}


class _ResetToZero(algebra.LinearMap):
    """Non-unital control map: replace everything by ``|0><0|``."""

    def apply_matrix(self, x):
        d = self.layout.total_dim
        out = np.zeros((d, d), dtype=complex)
        out[0, 0] = np.trace(x)
        return out


def _fault(samples, src):
    rep = algebra.verify_condexp(_ResetToZero([("A", 2)]), samples=samples, seed=src.seed)
    yield "injected fault: non-unital map", rep.passed, {"failures": rep.failures}


SUITES: dict[str, Callable] = {
    "qstate": _suite_qstate,
    "entropy": _suite_entropy,
    "algebra": _suite_algebra,
    "identities": _suite_identities,
    "games": _suite_games,
}


def run_verify(suite: str = "all", samples: int = 20, seed: int = 0, inject_fault: bool = False) -> VerifyReport:
    """Run one named suite (or ``all``); exceptions inside a suite count as failures."""
    if suite != "all" and suite not in SUITES:
        raise ConfigError(f"suite: unknown {suite!r}; choose from {['all', *SUITES]}")
    if samples < 1:
        raise ConfigError("samples: must be >= 1")
    names = list(SUITES) if suite == "all" else [suite]
    src = SeededSource(seed, "verify")
    report = VerifyReport(suite)
    runners = [(n, SUITES[n]) for n in names] + ([("fault", _fault)] if inject_fault else [])
    for name, runner in runners:
        try:
            for check, passed, details in runner(samples, src):
                report.checks.append({"suite": name, "check": check, "passed": bool(passed), "details": details})
        except Exception as exc:  # noqa: BLE001 - reported, not raised
            report.checks.append({"suite": name, "check": "suite raised", "passed": False, "details": {"error": repr(exc)}})
    return report
