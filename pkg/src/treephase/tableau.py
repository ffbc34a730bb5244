"""Mixed-state stabilizer tableaus with bitmask rows.

A state on ``n`` qubits is a list of ``k`` independent, pairwise-commuting
Pauli generators, rho ~ prod_i (1 + g_i) / 2^n, so the entropy is n - k bits
and k < n encodes a genuinely mixed state -- decoherence never needs explicit
environment qubits.  Generators store X- and Z-parts as Python ints (bit q =
qubit q) plus a sign bit; subsystem entropies reduce to GF(2) ranks of the
generator matrix with columns outside the subsystem masked off:

    S_A = |A| - (k - rank(G restricted to the complement of A)).

All operations are functional (they return fresh tableaus).  Measurement
follows the standard three cases -- anticommuting generator, group member,
or commuting non-member; the last *adds* Z_q as a generator, which is how a
maximally mixed qubit purifies under measurement.  Tracing a qubit out first
recombines generators so at most two touch it, then drops those, so k can
fall by 0, 1, or 2 (a Bell pair loses both).

Qubit ``labels`` ride along so tree-level code can ask "classify the root
against everything labeled leaf" without re-deriving index sets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from treephase.cliffords import TwoQubitClifford, canonical_sign, conjugation_table, mul_raw
from treephase.markov import CState

_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

# Fallback stream for bare measure_z calls; everything that cares about
# reproducibility passes rng= or force= explicitly.
_DEFAULT_RNG = np.random.default_rng(20260814)


@dataclass
class StabilizerTableau:
    n: int
    xs: list[int] = field(default_factory=list)
    zs: list[int] = field(default_factory=list)
    signs: list[int] = field(default_factory=list)
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.labels:
            self.labels = ("ancilla",) * self.n
        if len(self.labels) != self.n:
            raise ValueError("labels length must equal n")
        if not (len(self.xs) == len(self.zs) == len(self.signs)):
            raise ValueError("ragged generator arrays")

    @property
    def k(self) -> int:
        return len(self.xs)

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(
            self.n, list(self.xs), list(self.zs), list(self.signs), self.labels
        )

    @classmethod
    def maximally_mixed(cls, n: int, labels: Optional[Sequence[str]] = None) -> "StabilizerTableau":
        return cls(n, [], [], [], tuple(labels) if labels else ())

    @classmethod
    def from_paulis(cls, paulis: Sequence[str],
                    labels: Optional[Sequence[str]] = None) -> "StabilizerTableau":
        """Build from strings like "+XZI" / "-ZZ"; qubit 0 is the leftmost letter."""
        xs, zs, signs = [], [], []
        n = None
        for p in paulis:
            s = 0
            if p and p[0] in "+-":
                s = 1 if p[0] == "-" else 0
                p = p[1:]
            if n is None:
                n = len(p)
            elif len(p) != n:
                raise ValueError("inconsistent Pauli string lengths")
            x = z = 0
            for q, ch in enumerate(p):
                try:
                    bx, bz = _PAULI_BITS[ch]
                except KeyError:
                    raise ValueError(f"bad Pauli letter {ch!r}") from None
                x |= bx << q
                z |= bz << q
            xs.append(x)
            zs.append(z)
            signs.append(s)
        t = cls(n or 0, xs, zs, signs, tuple(labels) if labels else ())
        t.validate()
        return t

    def generator_strings(self) -> list[str]:
        out = []
        for x, z, s in zip(self.xs, self.zs, self.signs):
            # letter index is x + 2z per qubit, so the string is "IXZY"
            letters = "".join(
                "IXZY"[(x >> q & 1) | (z >> q & 1) << 1] for q in range(self.n)
            )
            out.append(("-" if s else "+") + letters)
        return out

    def validate(self) -> None:
        """Raise if any representation invariant is broken."""
        if not 0 <= self.k <= self.n:
            raise ValueError(f"k={self.k} outside [0, n={self.n}]")
        full = (1 << self.n) - 1
        for x, z, s in zip(self.xs, self.zs, self.signs):
            if x & ~full or z & ~full:
                raise ValueError("generator touches an out-of-range qubit")
            if s not in (0, 1):
                raise ValueError("sign bits must be 0 or 1")
        for i in range(self.k):
            for j in range(i + 1, self.k):
                if ((self.xs[i] & self.zs[j]).bit_count()
                        + (self.zs[i] & self.xs[j]).bit_count()) & 1:
                    raise ValueError(f"generators {i} and {j} anticommute")
        rows = [x | z << self.n for x, z in zip(self.xs, self.zs)]
        if _gf2_rank(rows) != self.k:
            raise ValueError("generators are GF(2)-dependent")


@dataclass(frozen=True)
class NodeOutcome:
    cstate: CState
    state: StabilizerTableau
    outcome: int


def _gf2_rank(rows: Iterable[int]) -> int:
    basis: dict[int, int] = {}
    rank = 0
    for row in rows:
        while row:
            b = row.bit_length() - 1
            if b in basis:
                row ^= basis[b]
            else:
                basis[b] = row
                rank += 1
                break
    return rank


def _row_raw(t: StabilizerTableau, i: int):
    x, z = t.xs[i], t.zs[i]
    return ((x & z).bit_count() + 2 * t.signs[i]) & 3, x, z


def _rowmul(t: StabilizerTableau, i: int, j: int) -> None:
    """Generator i <- generator i * generator j (in place)."""
    tt, x, z = mul_raw(*_row_raw(t, i), *_row_raw(t, j))
    t.xs[i], t.zs[i] = x, z
    t.signs[i] = canonical_sign(tt, x, z)


def _check_qubit(t: StabilizerTableau, q: int) -> None:
    if not 0 <= q < t.n:
        raise IndexError(f"qubit {q} outside 0..{t.n - 1}")


def apply_clifford(t: StabilizerTableau, g: TwoQubitClifford,
                   q1: int, q2: int) -> StabilizerTableau:
    """Conjugate every generator by the gate acting on (q1, q2)."""
    _check_qubit(t, q1)
    _check_qubit(t, q2)
    if q1 == q2:
        raise ValueError("gate qubits must differ")
    lut = conjugation_table(g)
    out = t.copy()
    m1, m2 = 1 << q1, 1 << q2
    for i in range(out.k):
        x, z = out.xs[i], out.zs[i]
        idx = ((x >> q1 & 1) | (z >> q1 & 1) << 1
               | (x >> q2 & 1) << 2 | (z >> q2 & 1) << 3)
        if idx == 0:
            continue
        bits, ds = lut[idx]
        x &= ~(m1 | m2)
        z &= ~(m1 | m2)
        if bits & 1:
            x |= m1
        if bits & 2:
            z |= m1
        if bits & 4:
            x |= m2
        if bits & 8:
            z |= m2
        out.xs[i], out.zs[i] = x, z
        out.signs[i] ^= ds
    return out


def _membership_sign(t: StabilizerTableau, x: int, z: int) -> Optional[int]:
    """Sign bit s if (-1)^s * canonical(x, z) is in the stabilizer group, else None."""
    basis: list[tuple[int, int, tuple[int, int, int]]] = []  # (pivot bit, bits, raw)
    for i in range(t.k):
        bits = t.xs[i] | t.zs[i] << t.n
        raw = _row_raw(t, i)
        for pb, pbits, praw in basis:
            if bits >> pb & 1:
                bits ^= pbits
                raw = mul_raw(*raw, *praw)
        if bits:
            basis.append((bits.bit_length() - 1, bits, raw))
    target = x | z << t.n
    acc = (0, 0, 0)
    for pb, pbits, praw in basis:
        if target >> pb & 1:
            target ^= pbits
            acc = mul_raw(*acc, *praw)
    if target:
        return None
    # acc = i^t X^x Z^z equals the queried Pauli up to the residual phase
    return canonical_sign(acc[0], acc[1], acc[2])


def measure_z(t: StabilizerTableau, q: int, *, rng=None,
              force: Optional[int] = None) -> tuple[int, StabilizerTableau]:
    """Projective Z measurement on qubit q; returns (outcome, new tableau).

    ``force`` pins a random outcome to +-1 (deterministic outcomes ignore
    it); useful for outcome-independence checks and replaying noise pools.
    """
    _check_qubit(t, q)
    out = t.copy()
    anti = [i for i in range(out.k) if out.xs[i] >> q & 1]
    if anti:
        piv = anti[0]
        for i in anti[1:]:
            _rowmul(out, i, piv)
        outcome = _draw_outcome(rng, force)
        out.xs[piv] = 0
        out.zs[piv] = 1 << q
        out.signs[piv] = 0 if outcome == 1 else 1
        return outcome, out
    s = _membership_sign(out, 0, 1 << q)
    if s is None:
        # commuting non-member: the mixed direction collapses, k grows
        outcome = _draw_outcome(rng, force)
        out.xs.append(0)
        out.zs.append(1 << q)
        out.signs.append(0 if outcome == 1 else 1)
        return outcome, out
    return (1 if s == 0 else -1), out


def _draw_outcome(rng, force: Optional[int]) -> int:
    if force is not None:
        if force not in (1, -1):
            raise ValueError("force must be +1 or -1")
        return force
    gen = rng if rng is not None else _DEFAULT_RNG
    return 1 if gen.random() < 0.5 else -1


def trace_out(t: StabilizerTableau, q: int) -> StabilizerTableau:
    """Partial trace over qubit q; the qubit is removed from the tableau."""
    _check_qubit(t, q)
    out = t.copy()
    piv_a = None
    for i in range(out.k):
        if out.xs[i] >> q & 1:
            if piv_a is None:
                piv_a = i
            else:
                _rowmul(out, i, piv_a)
    piv_b = None
    for i in range(out.k):
        if i != piv_a and out.zs[i] >> q & 1:
            if piv_b is None:
                piv_b = i
            else:
                _rowmul(out, i, piv_b)
    for i in sorted({piv_a, piv_b} - {None}, reverse=True):
        del out.xs[i], out.zs[i], out.signs[i]
    low = (1 << q) - 1
    for i in range(out.k):
        out.xs[i] = (out.xs[i] & low) | (out.xs[i] >> (q + 1)) << q
        out.zs[i] = (out.zs[i] & low) | (out.zs[i] >> (q + 1)) << q
    return StabilizerTableau(
        out.n - 1, out.xs, out.zs, out.signs,
        out.labels[:q] + out.labels[q + 1:],
    )


def entropy(t: StabilizerTableau, subset: Iterable[int]) -> int:
    """Von Neumann / Renyi entropy of the subset, in bits (exact integer)."""
    qs = set(subset)
    for q in qs:
        _check_qubit(t, q)
    cmask = 0
    for q in range(t.n):
        if q not in qs:
            cmask |= 1 << q
    rows = [(x & cmask) | (z & cmask) << t.n for x, z in zip(t.xs, t.zs)]
    return len(qs) - (t.k - _gf2_rank(rows))


def classify_cstate(t: StabilizerTableau, root: int, leaves: Iterable[int]) -> CState:
    """Map the root's correlations with the leaves to one of the four c-states."""
    leaves = list(leaves)
    if root in leaves:
        raise ValueError("root cannot be one of the leaves")
    s_r = entropy(t, [root])
    info = s_r + entropy(t, leaves) - entropy(t, [root] + leaves)
    if info == 2:
        return CState.TWO
    if info == 1:
        return CState.ONE
    if info == 0:
        return CState.SIGMA if s_r == 0 else CState.MIXED
    raise RuntimeError(f"impossible mutual information {info} for a single root qubit")


def node_op(t: StabilizerTableau, a: int, b: int, g: TwoQubitClifford, *,
            rng=None, force_outcome: Optional[int] = None) -> NodeOutcome:
    """Gate on (a, b), Z-measure a, trace a out; classify b against the leaves."""
    if a == b:
        raise ValueError("node wires must differ")
    staged = apply_clifford(t, g, a, b)
    outcome, staged = measure_z(staged, a, rng=rng, force=force_outcome)
    staged = trace_out(staged, a)
    root = b - 1 if b > a else b
    leaf_qubits = [i for i, lab in enumerate(staged.labels) if lab == "leaf"]
    return NodeOutcome(classify_cstate(staged, root, leaf_qubits), staged, outcome)
