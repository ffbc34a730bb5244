"""Dense density-matrix oracle for desk-scale cross-checks (n <= 4 qubits).

Everything the tableau engine claims -- conjugation, measurement statistics,
partial traces, subsystem entropies -- is recomputed here with explicit
2^n x 2^n matrices and eigenvalues, with no stabilizer shortcuts anywhere.
``run_equivalence_trials`` drives both engines through identical random
operation sequences and is the independent oracle the tableau must pass
before anything downstream trusts it.

Index convention: qubit 0 is the leftmost tensor factor, i.e. the most
significant bit of a basis-state index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from treephase.cliffords import (
    OMEGA,
    TwoQubitClifford,
    _transpose,
    enumerate_symplectic_group,
    from_word,
    mat_mul,
    mat_vec,
)
from treephase.tableau import StabilizerTableau, entropy, measure_z, trace_out, apply_clifford

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j]).astype(complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)

_SINGLE = {(0, 0): _I2, (1, 0): _X, (1, 1): _Y, (0, 1): _Z}

_GEN_UNITARY = {
    "h1": np.kron(_H, _I2),
    "s1": np.kron(_S, _I2),
    "h2": np.kron(_I2, _H),
    "s2": np.kron(_I2, _S),
    "cz": _CZ,
}


def pauli_matrix(n: int, x: int, z: int, sign: int = 0) -> np.ndarray:
    """Dense matrix of the Hermitian Pauli (-1)^sign i^{|x&z|} X^x Z^z."""
    m = np.array([[1.0 + 0j]])
    for q in range(n):
        m = np.kron(m, _SINGLE[(x >> q & 1, z >> q & 1)])
    return -m if sign else m


def to_density_matrix(t: StabilizerTableau) -> np.ndarray:
    dim = 1 << t.n
    rho = np.eye(dim, dtype=complex)
    for x, z, s in zip(t.xs, t.zs, t.signs):
        rho = rho @ (np.eye(dim) + pauli_matrix(t.n, x, z, s))
    return rho / dim


def word_unitary(word: Sequence[str]) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for name in word:
        u = _GEN_UNITARY[name] @ u
    return u


def _word_for_matrix(symplectic) -> tuple:
    global _WORD_LOOKUP
    if _WORD_LOOKUP is None:
        _WORD_LOOKUP = {g.symplectic: g.word for g in enumerate_symplectic_group()}
    return _WORD_LOOKUP[symplectic]


_WORD_LOOKUP = None


def gate_unitary(g: TwoQubitClifford) -> np.ndarray:
    """A 4x4 unitary realizing the gate's images *and* signs.

    A generator word pins the symplectic action (the gate's own word, or one
    looked up from the enumerated group); a Pauli prefactor then fixes the
    four sign bits (flipping image sign i means a Pauli anticommuting with
    image i, solved linearly against the symplectic matrix).
    """
    word = g.word if g.word is not None else _word_for_matrix(g.symplectic)
    c = from_word(word)
    if c.symplectic != g.symplectic:
        raise AssertionError("stored word disagrees with symplectic matrix")
    target = tuple(a ^ b for a, b in zip(c.phases, g.phases))
    minv = mat_mul(mat_mul(OMEGA, _transpose(g.symplectic)), OMEGA)
    a = mat_vec(minv, target)
    q = (a[1], a[0], a[3], a[2])  # anticommutation pattern -> Pauli coords
    x = q[0] | q[2] << 1
    z = q[1] | q[3] << 1
    return pauli_matrix(2, x, z) @ word_unitary(word)


def embed_two_qubit(u4: np.ndarray, n: int, q1: int, q2: int) -> np.ndarray:
    """Lift a 4x4 unitary on (q1, q2) to the full 2^n-dimensional space."""
    dim = 1 << n
    keep = dim - 1
    for q in (q1, q2):
        keep &= ~(1 << (n - 1 - q))
    full = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        i1 = i >> (n - 1 - q1) & 1
        i2 = i >> (n - 1 - q2) & 1
        for j in range(dim):
            if (i ^ j) & keep:
                continue
            j1 = j >> (n - 1 - q1) & 1
            j2 = j >> (n - 1 - q2) & 1
            full[i, j] = u4[i1 << 1 | i2, j1 << 1 | j2]
    return full


def apply_unitary(rho: np.ndarray, u4: np.ndarray, n: int, q1: int, q2: int) -> np.ndarray:
    u = embed_two_qubit(u4, n, q1, q2)
    return u @ rho @ u.conj().T


def measure_z_probs(rho: np.ndarray, n: int, q: int):
    """(p_plus, rho_plus, rho_minus); conditional states are None at zero weight."""
    zq = pauli_matrix(n, 0, 1 << q)
    dim = 1 << n
    p_plus = float(np.real(np.trace((np.eye(dim) + zq) @ rho))) / 2.0
    proj_p = (np.eye(dim) + zq) / 2.0
    proj_m = (np.eye(dim) - zq) / 2.0
    rho_p = proj_p @ rho @ proj_p / p_plus if p_plus > 1e-12 else None
    rho_m = proj_m @ rho @ proj_m / (1 - p_plus) if p_plus < 1 - 1e-12 else None
    return p_plus, rho_p, rho_m


def trace_out_dense(rho: np.ndarray, n: int, q: int) -> np.ndarray:
    tensor = rho.reshape((2,) * (2 * n))
    traced = np.trace(tensor, axis1=q, axis2=n + q)
    dim = 1 << (n - 1)
    return traced.reshape(dim, dim)


def entropy_bits(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-12]
    return float(-np.sum(w * np.log2(w)))


def subsystem_entropy(rho: np.ndarray, n: int, subset) -> float:
    qs = sorted(set(subset))
    reduced, m = rho, n
    for q in [q for q in range(n) if q not in qs][::-1]:
        reduced = trace_out_dense(reduced, m, q)
        m -= 1
    return entropy_bits(reduced)


@dataclass(frozen=True)
class EquivalenceReport:
    sequences: int
    operations: int
    entropy_checks: int
    measurements: int
    random_measurements: int
    plus_fraction: float
    expected_plus: float
    sigma_deviation: float
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures and self.sigma_deviation <= 4.0


def _random_initial(rng, n: int):
    xs, zs, signs = [], [], []
    for q in range(n):
        kind = rng.integers(0, 3)
        if kind == 0:
            xs.append(0), zs.append(1 << q), signs.append(0)  # |0>
        elif kind == 1:
            xs.append(1 << q), zs.append(0), signs.append(0)  # |+>
        # kind 2: maximally mixed, no generator
    t = StabilizerTableau(n, xs, zs, signs)
    return t, to_density_matrix(t)


def run_equivalence_trials(sequences: int = 1000, seed: int = 7,
                           ops_per_sequence: int = 8) -> EquivalenceReport:
    """Drive tableau and dense engines through identical random sequences.

    Entropies must agree exactly (to float round-off), states must match as
    matrices after every operation, and random measurement outcomes are
    accumulated into a binomial z-score against the dense probabilities.
    """
    gates = enumerate_symplectic_group()
    failures: list[str] = []
    n_ops = n_ent = n_meas = n_rand = 0
    plus_hits = 0
    var_sum = 0.0
    exp_sum = 0.0

    for si in range(sequences):
        rng = np.random.default_rng([seed, si])
        n = int(rng.integers(2, 5))
        t, rho = _random_initial(rng, n)
        for _ in range(ops_per_sequence):
            n = t.n
            choices = ["measure"]
            if n >= 2:
                choices += ["apply", "apply", "trace"]
            op = choices[rng.integers(0, len(choices))]
            try:
                if op == "apply":
                    g = gates[rng.integers(0, len(gates))]
                    q1, q2 = rng.permutation(n)[:2]
                    t = apply_clifford(t, g, int(q1), int(q2))
                    rho = apply_unitary(rho, gate_unitary(g), n, int(q1), int(q2))
                elif op == "measure":
                    q = int(rng.integers(0, n))
                    p_plus, rho_p, rho_m = measure_z_probs(rho, n, q)
                    outcome = 1 if rng.random() < p_plus else -1
                    tab_outcome, t = measure_z(t, q, force=outcome)
                    n_meas += 1
                    if abs(p_plus - 0.5) < 1e-9:
                        n_rand += 1
                        plus_hits += tab_outcome == 1
                        exp_sum += p_plus
                        var_sum += p_plus * (1 - p_plus)
                    else:
                        if min(p_plus, 1 - p_plus) > 1e-9:
                            failures.append(
                                f"seq {si}: dense p+={p_plus:.6f} neither 0, 1/2, nor 1")
                        if tab_outcome != (1 if p_plus > 0.5 else -1):
                            failures.append(
                                f"seq {si}: deterministic outcome mismatch (p+={p_plus})")
                    rho = rho_p if tab_outcome == 1 else rho_m
                else:
                    q = int(rng.integers(0, n))
                    t = trace_out(t, q)
                    rho = trace_out_dense(rho, n, q)
                n_ops += 1
                t.validate()
                if not np.allclose(to_density_matrix(t), rho, atol=1e-8):
                    failures.append(f"seq {si}: state mismatch after {op}")
                    break
                subsets = range(1 << t.n) if t.n <= 3 else \
                    rng.integers(0, 1 << t.n, size=6)
                for smask in subsets:
                    sub = [q for q in range(t.n) if int(smask) >> q & 1]
                    s_tab = entropy(t, sub)
                    s_dense = subsystem_entropy(rho, t.n, sub)
                    n_ent += 1
                    if abs(s_tab - s_dense) > 1e-6:
                        failures.append(
                            f"seq {si}: entropy {sub} tableau={s_tab} dense={s_dense:.9f}")
                if t.n == 1:
                    break
            except Exception as exc:  # pragma: no cover - any engine crash is a failure
                failures.append(f"seq {si}: {op} raised {exc!r}")
                break
        if len(failures) > 20:
            break

    sigma = 0.0
    if n_rand:
        sigma = abs(plus_hits - exp_sum) / max(np.sqrt(var_sum), 1e-12)
    return EquivalenceReport(
        sequences=sequences,
        operations=n_ops,
        entropy_checks=n_ent,
        measurements=n_meas,
        random_measurements=n_rand,
        plus_fraction=plus_hits / n_rand if n_rand else 0.0,
        expected_plus=exp_sum / n_rand if n_rand else 0.0,
        sigma_deviation=float(sigma),
        failures=tuple(failures),
    )
