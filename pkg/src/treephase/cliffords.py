"""Two-qubit Clifford gates as binary symplectic data.

A gate is stored by what it does to the four Pauli generators: the
``symplectic`` matrix holds the images of (X1, Z1, X2, Z2) in coordinates
(x1, z1, x2, z2) -- rows are images -- and ``phases`` holds one sign bit per
image.  Composition, inversion, and conjugation of arbitrary Paulis all
reduce to GF(2) linear algebra plus a small amount of phase bookkeeping.

Phase bookkeeping uses the "raw" form i^t X^x Z^z with t mod 4 and x, z
bitmasks; a Hermitian Pauli with sign (-1)^s has t = |x & z| + 2s (one factor
of i per Y).  Products of commuting Hermitian Paulis stay Hermitian, which
``canonical_sign`` asserts rather than assumes.

The symplectic quotient Sp(4,2) has exactly 720 elements; with sign bits the
full group has 11520.  We enumerate the 720 (breadth-first closure from the
standard H/S/CZ generators, then sorted) and rely on Pauli-frame invariance
-- verified elsewhere, never assumed -- for everything classification-related.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

Row = tuple[int, int, int, int]
Matrix = tuple[Row, Row, Row, Row]

# Symplectic form for interleaved (x1, z1, x2, z2) coordinates.
OMEGA: Matrix = ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0))

_IDENTITY: Matrix = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))

# Images of (X1, Z1, X2, Z2) under the generating gates; all signs +1.
_GEN_SYMPLECTIC: dict[str, Matrix] = {
    "h1": ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)),
    "s1": ((1, 1, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)),
    "h2": ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0)),
    "s2": ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 1), (0, 0, 0, 1)),
    "cz": ((1, 0, 0, 1), (0, 1, 0, 0), (0, 1, 1, 0), (0, 0, 0, 1)),
}

GENERATOR_NAMES = ("h1", "s1", "h2", "s2", "cz")


def mul_raw(t1: int, x1: int, z1: int, t2: int, x2: int, z2: int):
    """Product of i^t1 X^x1 Z^z1 and i^t2 X^x2 Z^z2 in the same raw form."""
    t = (t1 + t2 + 2 * (z1 & x2).bit_count()) & 3
    return t, x1 ^ x2, z1 ^ z2


def canonical_sign(t: int, x: int, z: int) -> int:
    """Sign bit s of i^t X^x Z^z = (-1)^s * (Hermitian Pauli); t must be even-compatible."""
    d = (t - (x & z).bit_count()) & 3
    if d & 1:
        raise AssertionError("non-Hermitian phase in Pauli product")
    return d >> 1


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(4)) & 1 for j in range(4))
        for i in range(4)
    )


def mat_vec(m: Matrix, v) -> tuple[int, int, int, int]:
    return tuple(sum(m[i][j] * v[j] for j in range(4)) & 1 for i in range(4))


def is_symplectic(m: Matrix) -> bool:
    return mat_mul(mat_mul(m, OMEGA), _transpose(m)) == OMEGA


def _transpose(m: Matrix) -> Matrix:
    return tuple(tuple(m[j][i] for j in range(4)) for i in range(4))


@dataclass(frozen=True)
class TwoQubitClifford:
    """Conjugation action of a two-qubit Clifford, modulo global phase.

    ``word``, when present, is a generator decomposition (applied left to
    right as a circuit) whose unitary realizes exactly these images and
    signs; it is bookkeeping only and does not participate in equality.
    """

    symplectic: Matrix
    phases: tuple[int, int, int, int] = (0, 0, 0, 0)
    word: Optional[tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if len(self.symplectic) != 4 or any(len(r) != 4 for r in self.symplectic):
            raise ValueError("symplectic must be 4x4")
        if any(b not in (0, 1) for r in self.symplectic for b in r):
            raise ValueError("symplectic entries must be bits")
        if len(self.phases) != 4 or any(b not in (0, 1) for b in self.phases):
            raise ValueError("phases must be 4 bits")
        if not is_symplectic(self.symplectic):
            raise ValueError("matrix does not preserve the symplectic form")


def identity() -> TwoQubitClifford:
    return TwoQubitClifford(_IDENTITY, word=())


def generator(name: str) -> TwoQubitClifford:
    return TwoQubitClifford(_GEN_SYMPLECTIC[name], word=(name,))


@lru_cache(maxsize=None)
def conjugation_table(g: TwoQubitClifford) -> tuple[tuple[int, int], ...]:
    """16-entry lookup: local Pauli index -> (image bits, sign flip).

    Index and image bits are x1 | z1<<1 | x2<<2 | z2<<3.  Entry 0 (identity)
    is always (0, 0).  Built once per gate from the four base images; local
    masks put qubit 1 in bit 0 and qubit 2 in bit 1.
    """
    base = []
    for i in range(4):
        row = g.symplectic[i]
        x = row[0] | row[2] << 1
        z = row[1] | row[3] << 1
        base.append((((x & z).bit_count() + 2 * g.phases[i]) & 3, x, z))
    entries = []
    for idx in range(16):
        a1, b1, a2, b2 = idx & 1, idx >> 1 & 1, idx >> 2 & 1, idx >> 3 & 1
        t, x, z = 0, 0, 0
        # canonical local Pauli = i^(a1 b1 + a2 b2) X1^a1 X2^a2 Z1^b1 Z2^b2
        for use, img in ((a1, base[0]), (a2, base[2]), (b1, base[1]), (b2, base[3])):
            if use:
                t, x, z = mul_raw(t, x, z, *img)
        t = (t + (a1 & b1) + (a2 & b2)) & 3
        s = canonical_sign(t, x, z)
        bits = (x & 1) | (z & 1) << 1 | (x >> 1) << 2 | (z >> 1) << 3
        entries.append((bits, s))
    return tuple(entries)


def compose(h: TwoQubitClifford, g: TwoQubitClifford) -> TwoQubitClifford:
    """The gate "h after g" (circuit order g first)."""
    lut = conjugation_table(h)
    sym = []
    ph = []
    for i in range(4):
        row = g.symplectic[i]
        idx = row[0] | row[1] << 1 | row[2] << 2 | row[3] << 3
        bits, ds = lut[idx]
        sym.append((bits & 1, bits >> 1 & 1, bits >> 2 & 1, bits >> 3 & 1))
        ph.append(g.phases[i] ^ ds)
    word = None
    if g.word is not None and h.word is not None:
        word = g.word + h.word
    return TwoQubitClifford(tuple(sym), tuple(ph), word)


def inverse(g: TwoQubitClifford) -> TwoQubitClifford:
    """Group inverse, with phases chosen so compose(inverse(g), g) is exactly identity."""
    minv = mat_mul(mat_mul(OMEGA, _transpose(g.symplectic)), OMEGA)
    residual = compose(TwoQubitClifford(minv), g).phases
    # Flipping base-image sign j of the candidate inverse toggles composed
    # phase i exactly when M_g[i][j] = 1, so solve M_g p = residual.
    p = mat_vec(minv, residual)
    return TwoQubitClifford(minv, p)


def from_word(word) -> TwoQubitClifford:
    g = identity()
    for name in word:
        g = compose(generator(name), g)
    return g


def pauli_gate(x1: int, z1: int, x2: int, z2: int) -> TwoQubitClifford:
    """Conjugation by the Pauli X1^x1 Z1^z1 X2^x2 Z2^z2 (a phase-only frame change)."""
    phases = (z1, x1, z2, x2)  # sign flips = symplectic products with the basis
    return TwoQubitClifford(_IDENTITY, phases)


@lru_cache(maxsize=None)
def enumerate_symplectic_group() -> tuple[TwoQubitClifford, ...]:
    """All 720 symplectic classes with zero phase bits, in lexicographic order.

    Breadth-first closure from the generators keeps a shortest-ish word for
    each class (used to build dense unitaries in cross-checks); the returned
    order is by matrix content, independent of discovery order.
    """
    seen: dict[Matrix, tuple[str, ...]] = {_IDENTITY: ()}
    queue = deque([_IDENTITY])
    while queue:
        m = queue.popleft()
        for name in GENERATOR_NAMES:
            nm = mat_mul(m, _GEN_SYMPLECTIC[name])  # rows-are-images: right-multiply
            if nm not in seen:
                seen[nm] = seen[m] + (name,)
                queue.append(nm)
    if len(seen) != 720:
        raise AssertionError(f"Sp(4,2) enumeration found {len(seen)} elements")
    return tuple(
        TwoQubitClifford(m, (0, 0, 0, 0), word)
        for m, word in sorted(seen.items())
    )


# Deterministic gates realizing the extreme ensemble parameters: conjugating
# the node's Z-measurement by a final Hadamard on the measured wire turns it
# into an X-measurement, which either teleports classical correlations
# through (alpha = 0) or discards them (alpha = 1).  Both have beta=gamma=0.
GATE_ALPHA0 = from_word(("h1", "cz", "h1"))
GATE_ALPHA1 = from_word(("h2", "cz", "h1"))
