"""Exact transition-matrix computation by enumerating the Clifford group.

This is the first-principles closure of the whole reduction: the node
operation is executed on representative stabilizer states for every c-state
pair and every gate in the ensemble, outcomes are tallied as exact rationals,
and the resulting matrix is required to reproduce the (alpha, beta, gamma)
parameterization entrywise.  Outcome-independence of the classification is
asserted for every single case rather than assumed, and the purification
argument behind the mixed-state bookkeeping gets its own exhaustive check.

Representative inputs put subtree root ``a`` on qubit 0 and root ``b`` on
qubit 1, with leaf partners appended after.  Entangled c-states carry a leaf
qubit; a pure or maximally mixed root carries none (its former leaves are
uncorrelated, so they are dropped rather than simulated).
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from treephase.cliffords import (
    GATE_ALPHA0,
    GATE_ALPHA1,
    TwoQubitClifford,
    compose,
    enumerate_symplectic_group,
    pauli_gate,
)
from treephase.markov import CState, GateParams, TransitionMatrix, build_transition_matrix
from treephase.tableau import StabilizerTableau, node_op

_SIGMA_PAULI = {"X": "X", "Y": "Y", "Z": "Z"}

Ensemble = Sequence[tuple[TwoQubitClifford, Fraction]]


def uniform_ensemble() -> list[tuple[TwoQubitClifford, Fraction]]:
    """All 720 symplectic representatives, equally weighted."""
    gates = enumerate_symplectic_group()
    w = Fraction(1, len(gates))
    return [(g, w) for g in gates]


def deterministic_mixture(alpha: Fraction) -> list[tuple[TwoQubitClifford, Fraction]]:
    """Two-gate ensemble realizing any alpha in [0, 1] with beta = gamma = 0.

    Weight ``alpha`` goes on the alpha=1 gate and the rest on the alpha=0
    gate, so the mixture's extracted alpha equals the requested value.
    """
    a = Fraction(alpha)
    if not 0 <= a <= 1:
        raise ValueError(f"alpha={alpha!r} outside [0, 1]")
    return [(GATE_ALPHA0, 1 - a), (GATE_ALPHA1, a)]


def _normalize_ensemble(ensemble) -> list[tuple[TwoQubitClifford, Fraction]]:
    if ensemble is None:
        return uniform_ensemble()
    items = list(ensemble)
    if not items:
        raise ValueError("empty gate ensemble")
    if isinstance(items[0], TwoQubitClifford):
        w = Fraction(1, len(items))
        return [(g, w) for g in items]
    out = [(g, Fraction(w)) for g, w in items]
    total = sum(w for _, w in out)
    if total != 1:
        raise ValueError(f"ensemble weights sum to {total}, not 1")
    if any(w < 0 for _, w in out):
        raise ValueError("negative ensemble weight")
    return out


def representative_pair(ca: CState, cb: CState, sigma_basis: str = "Z") -> StabilizerTableau:
    """Joint input tableau for subtree roots in c-states (ca, cb).

    Qubits: a = 0, b = 1, then a's leaf (if any), then b's leaf (if any).
    A c-state 2 root is Bell-paired with its leaf, c-state 1 shares only the
    ZZ parity, sigma is a pure unentangled root (stabilized along
    ``sigma_basis``), and M is maximally mixed with no generator at all.
    """
    if sigma_basis not in _SIGMA_PAULI:
        raise ValueError(f"sigma_basis must be X, Y, or Z, got {sigma_basis!r}")
    leafed = [c in (CState.TWO, CState.ONE) for c in (ca, cb)]
    n = 2 + sum(leafed)
    leaf_of = {0: 2, 1: 2 + leafed[0]}
    labels = ["ancilla", "ancilla"] + ["leaf"] * (n - 2)

    def pauli(ops: dict[int, str]) -> str:
        return "+" + "".join(ops.get(q, "I") for q in range(n))

    paulis: list[str] = []
    for root, c in ((0, ca), (1, cb)):
        if c is CState.TWO:
            paulis.append(pauli({root: "X", leaf_of[root]: "X"}))
            paulis.append(pauli({root: "Z", leaf_of[root]: "Z"}))
        elif c is CState.ONE:
            paulis.append(pauli({root: "Z", leaf_of[root]: "Z"}))
        elif c is CState.SIGMA:
            paulis.append(pauli({root: _SIGMA_PAULI[sigma_basis]}))
        # MIXED contributes no generator
    return StabilizerTableau.from_paulis(paulis, labels=tuple(labels)) if paulis \
        else StabilizerTableau(n, [], [], [], labels=tuple(labels))


def _classify_both_outcomes(t: StabilizerTableau, g: TwoQubitClifford) -> CState:
    """Run the node on both measurement branches; they must classify alike."""
    c_plus = node_op(t, 0, 1, g, force_outcome=1).cstate
    c_minus = node_op(t, 0, 1, g, force_outcome=-1).cstate
    if c_plus is not c_minus:
        raise RuntimeError(
            f"outcome-dependent classification ({c_plus.label} vs {c_minus.label}) "
            f"for gate word {g.word!r} -- tableau engine bug")
    return c_plus


def compute_w_exact(ensemble: Optional[Ensemble] = None, *,
                    sigma_basis: str = "Z") -> tuple[TransitionMatrix, GateParams]:
    """Exact W over an ensemble, with (alpha, beta, gamma) extracted.

    For every unordered c-state pair and both input orderings, each gate is
    applied to the representative tableaus and the output classified on both
    measurement branches.  The two orderings must give identical rows (the
    pair table is unordered); the tally is exact rationals.  The extracted
    parameters must reproduce the empirical matrix entrywise or the ensemble
    is not describable by this parameterization and a ValueError is raised.

    With alpha = 0 (or 1), beta (or gamma) drops out of every row; the
    unidentifiable parameter is reported as 0 and the entrywise check still
    pins the remaining entries.
    """
    gates = _normalize_ensemble(ensemble)
    w: dict[tuple[CState, CState, CState], Fraction] = {}
    for a in CState:
        for b in CState:
            if a > b:
                continue
            tallies = []
            for ca, cb in {(a, b), (b, a)}:
                t_in = representative_pair(ca, cb, sigma_basis)
                counts: dict[CState, Fraction] = defaultdict(Fraction)
                for g, weight in gates:
                    counts[_classify_both_outcomes(t_in, g)] += weight
                tallies.append(dict(counts))
            if len(tallies) == 2 and tallies[0] != tallies[1]:
                raise ValueError(
                    f"ensemble row for ({a.label},{b.label}) depends on input order: "
                    f"{tallies[0]} vs {tallies[1]}")
            for c, v in tallies[0].items():
                if v:
                    w[(a, b, c)] = v
    matrix = TransitionMatrix(w)
    matrix.validate()

    T, O, M = CState.TWO, CState.ONE, CState.MIXED
    alpha = Fraction(matrix.prob(T, O, T))
    beta = Fraction(matrix.prob(T, M, T)) / alpha if alpha else Fraction(0)
    gamma = Fraction(matrix.prob(T, M, M)) / (1 - alpha) if alpha != 1 else Fraction(0)
    params = GateParams(alpha, beta, gamma)
    predicted = build_transition_matrix(params)
    for a in CState:
        for b in CState:
            for c in CState:
                got, want = matrix.prob(a, b, c), predicted.prob(a, b, c)
                if got != want:
                    raise ValueError(
                        f"ensemble escapes the (alpha,beta,gamma) family: "
                        f"W(({a.label},{b.label})->{c.label}) = {got}, "
                        f"parameterization gives {want}")
    return matrix, params


@dataclass(frozen=True)
class PurificationReport:
    """Outcome of the exhaustive purified-vs-mixed consistency check."""

    gates_checked: int
    cases_checked: int
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_purification_equivalence(ensemble: Optional[Ensemble] = None, *,
                                    sigma_basis: str = "Z") -> PurificationReport:
    """Check that a Bell-purified mixed input tracks its mixed original.

    The (2, sigma) input is exactly the (M, sigma) input with the mixed
    root's environment kept as a leaf, so for every gate, input order, and
    measurement branch, the purified pair must classify as 2 precisely when
    the mixed pair classifies as M.
    """
    gates = _normalize_ensemble(ensemble)
    violations: list[str] = []
    cases = 0
    for order in ((CState.TWO, CState.SIGMA), (CState.SIGMA, CState.TWO)):
        mixed_order = tuple(CState.MIXED if c is CState.TWO else c for c in order)
        t_pure = representative_pair(*order, sigma_basis)
        t_mixed = representative_pair(*mixed_order, sigma_basis)
        for g, _ in gates:
            for f in (1, -1):
                c_pure = node_op(t_pure, 0, 1, g, force_outcome=f).cstate
                c_mixed = node_op(t_mixed, 0, 1, g, force_outcome=f).cstate
                cases += 1
                if (c_pure is CState.TWO) != (c_mixed is CState.MIXED):
                    violations.append(
                        f"gate {g.word!r}, order {order[0].label},{order[1].label}, "
                        f"branch {f:+d}: purified -> {c_pure.label} "
                        f"but mixed -> {c_mixed.label}")
    return PurificationReport(len(gates), cases, tuple(violations))


def verify_pauli_frame_invariance(samples: int = 10_000, seed: int = 20260814) -> int:
    """Spot-check that Pauli dressing never moves the classified c-state.

    Random symplectic representatives are composed with random Pauli gates on
    both sides and run on random c-state pairs and measurement branches; the
    classification must match the undressed gate every time.  Returns the
    number of cases checked; raises on the first violation (which would void
    the 720-element enumeration shortcut).
    """
    rng = np.random.default_rng(seed)
    gates = enumerate_symplectic_group()
    states = list(CState)
    inputs = {(a, b): representative_pair(a, b) for a in states for b in states}
    for i in range(samples):
        g = gates[rng.integers(0, len(gates))]
        pre_bits = [int(v) for v in rng.integers(0, 2, size=4)]
        post_bits = [int(v) for v in rng.integers(0, 2, size=4)]
        dressed = compose(pauli_gate(*post_bits), compose(g, pauli_gate(*pre_bits)))
        pair = (states[rng.integers(0, 4)], states[rng.integers(0, 4)])
        f = 1 if rng.integers(0, 2) else -1
        c_plain = node_op(inputs[pair], 0, 1, g, force_outcome=f).cstate
        c_dressed = node_op(inputs[pair], 0, 1, dressed, force_outcome=f).cstate
        if c_plain is not c_dressed:
            raise RuntimeError(
                f"Pauli dressing changed c-state on sample {i}: gate {g.word!r}, "
                f"pre {pre_bits}, post {post_bits}, pair "
                f"({pair[0].label},{pair[1].label}): {c_plain.label} -> {c_dressed.label}")
    return samples
