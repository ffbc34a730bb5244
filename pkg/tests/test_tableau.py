"""Tests for the mixed-state stabilizer tableau against the dense oracle."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treephase.cliffords import (
    GATE_ALPHA0,
    GATE_ALPHA1,
    enumerate_symplectic_group,
    generator,
)
from treephase.dense import (
    entropy_bits,
    gate_unitary,
    measure_z_probs,
    run_equivalence_trials,
    subsystem_entropy,
    to_density_matrix,
    trace_out_dense,
    apply_unitary,
)
from treephase.markov import CState
from treephase.tableau import (
    StabilizerTableau,
    apply_clifford,
    classify_cstate,
    entropy,
    measure_z,
    node_op,
    trace_out,
)


def bell(labels=("ancilla", "ancilla")):
    return StabilizerTableau.from_paulis(["+XX", "+ZZ"], labels=labels)


# ---------------------------------------------------------------------------
# Construction and validation
# ---------------------------------------------------------------------------

def test_from_paulis_roundtrip():
    t = StabilizerTableau.from_paulis(["+XXX", "-ZZI", "+IZZ"])
    assert t.n == 3 and t.k == 3
    assert t.generator_strings() == ["+XXX", "-ZZI", "+IZZ"]
    t.validate()


def test_maximally_mixed_has_no_generators():
    t = StabilizerTableau.maximally_mixed(3)
    assert t.k == 0 and entropy(t, [0, 1, 2]) == 3


def test_validate_rejects_anticommuting_generators():
    with pytest.raises(ValueError, match="anticommute"):
        StabilizerTableau(2, [1, 0], [0, 1], [0, 0]).validate()


def test_validate_rejects_dependent_generators():
    with pytest.raises(ValueError, match="dependent"):
        StabilizerTableau(2, [3, 3], [0, 0], [0, 0]).validate()


def test_from_paulis_rejects_bad_characters():
    with pytest.raises(ValueError):
        StabilizerTableau.from_paulis(["+XQ"])


# ---------------------------------------------------------------------------
# Gate application
# ---------------------------------------------------------------------------

def test_identity_gate_is_a_no_op():
    t = bell()
    group = enumerate_symplectic_group()
    e = next(g for g in group if g.word == ())
    t2 = apply_clifford(t, e, 0, 1)
    assert t2.generator_strings() == t.generator_strings()


def test_h_then_cz_builds_cluster_pair():
    t = StabilizerTableau.from_paulis(["+ZI", "+IX"])
    t = apply_clifford(t, generator("h1"), 0, 1)  # {+XI, +IX}
    t = apply_clifford(t, generator("cz"), 0, 1)  # {+XZ, +ZX}
    assert sorted(t.generator_strings()) == ["+XZ", "+ZX"]
    assert entropy(t, [0]) == 1 and entropy(t, [0, 1]) == 0


def test_apply_clifford_index_errors():
    t = bell()
    with pytest.raises((ValueError, IndexError)):
        apply_clifford(t, GATE_ALPHA0, 0, 0)
    with pytest.raises(IndexError):
        apply_clifford(t, GATE_ALPHA0, 0, 5)


# ---------------------------------------------------------------------------
# Measurement: the three stabilizer cases
# ---------------------------------------------------------------------------

def test_measure_deterministic_member():
    out, t2 = measure_z(StabilizerTableau.from_paulis(["+Z"]), 0, force=-1)
    assert out == 1  # force is ignored when the outcome is deterministic
    out, _ = measure_z(StabilizerTableau.from_paulis(["-Z"]), 0, force=1)
    assert out == -1


def test_measure_random_anticommuting_case():
    for f in (1, -1):
        out, t2 = measure_z(bell(), 0, force=f)
        assert out == f
        assert t2.k == 2
        assert entropy(t2, [1]) == 0  # partner collapses to a pure state


def test_measure_mixed_qubit_adds_generator():
    t = StabilizerTableau.maximally_mixed(1)
    out, t2 = measure_z(t, 0, force=-1)
    assert out == -1 and t2.k == 1
    assert t2.generator_strings() == ["-Z"]


def test_measure_statistics_follow_born_rule():
    rng = np.random.default_rng(99)
    outs = [measure_z(bell(), 0, rng=rng)[0] for _ in range(400)]
    plus = sum(o == 1 for o in outs)
    assert abs(plus - 200) < 4 * 10  # 4 sigma, sigma = sqrt(400)/2


def test_measure_force_validation():
    with pytest.raises(ValueError):
        measure_z(bell(), 0, force=0)


# ---------------------------------------------------------------------------
# Partial trace
# ---------------------------------------------------------------------------

def test_trace_bell_gives_maximally_mixed():
    t2 = trace_out(bell(), 0)
    assert t2.n == 1 and t2.k == 0


def test_trace_ghz_environment_leaves_classical_pair():
    ghz = StabilizerTableau.from_paulis(["+XXX", "+ZZI", "+IZZ"])
    t2 = trace_out(ghz, 2)
    assert t2.generator_strings() == ["+ZZ"]
    assert entropy(t2, [0]) == 1 and entropy(t2, [0, 1]) == 1


def test_trace_product_qubit_preserves_rest():
    t = StabilizerTableau.from_paulis(["+XXI", "+ZZI", "+IIZ"])
    t2 = trace_out(t, 2)
    assert sorted(t2.generator_strings()) == ["+XX", "+ZZ"]


def test_trace_keeps_labels_aligned():
    t = StabilizerTableau.from_paulis(["+XX", "+ZZ"], labels=("root", "leaf"))
    t2 = trace_out(t, 0)
    assert t2.labels == ("leaf",)


# ---------------------------------------------------------------------------
# Entropy and classification
# ---------------------------------------------------------------------------

def test_entropy_edge_subsets():
    t = bell()
    assert entropy(t, []) == 0
    assert entropy(t, [0, 1]) == 0
    assert entropy(StabilizerTableau.maximally_mixed(2), [0, 1]) == 2


def test_classify_four_canonical_states():
    lab = ("ancilla", "leaf")
    assert classify_cstate(bell(lab), 0, [1]) is CState.TWO
    one = StabilizerTableau.from_paulis(["+ZZ"], labels=lab)
    assert classify_cstate(one, 0, [1]) is CState.ONE
    sig = StabilizerTableau.from_paulis(["+ZI"], labels=lab)
    assert classify_cstate(sig, 0, [1]) is CState.SIGMA
    mix = StabilizerTableau(2, [], [], [], labels=lab)
    assert classify_cstate(mix, 0, [1]) is CState.MIXED


def test_classify_rejects_root_in_leaves():
    with pytest.raises(ValueError):
        classify_cstate(bell(), 0, [0, 1])


def test_node_op_on_two_bell_pairs_always_gives_two():
    t = StabilizerTableau.from_paulis(
        ["+XIXI", "+ZIZI", "+IXIX", "+IZIZ"],
        labels=("ancilla", "ancilla", "leaf", "leaf"))
    rng = np.random.default_rng(3)
    group = enumerate_symplectic_group()
    for gi in rng.integers(0, 720, size=30):
        res = node_op(t, 0, 1, group[gi], rng=rng)
        assert res.cstate is CState.TWO
        assert res.state.n == 3


def test_node_op_deterministic_gate_examples():
    # (1, M) inputs: the alpha=0 gate keeps classical correlation, alpha=1
    # hands the root the mixedness.
    t = StabilizerTableau.from_paulis(["+ZIZ"], labels=("ancilla", "ancilla", "leaf"))
    assert node_op(t, 0, 1, GATE_ALPHA1, force_outcome=1).cstate is CState.MIXED
    t2 = StabilizerTableau.from_paulis(["+IZZ"], labels=("ancilla", "ancilla", "leaf"))
    assert node_op(t2, 0, 1, GATE_ALPHA0, force_outcome=1).cstate is CState.ONE


# ---------------------------------------------------------------------------
# Dense-oracle equivalence (the load-bearing checks)
# ---------------------------------------------------------------------------

def test_gate_unitary_matches_tableau_on_bell():
    rng = np.random.default_rng(17)
    group = enumerate_symplectic_group()
    t = bell()
    rho = to_density_matrix(t)
    for gi in rng.integers(0, 720, size=20):
        g = group[gi]
        t2 = apply_clifford(t, g, 0, 1)
        rho2 = apply_unitary(rho, gate_unitary(g), 2, 0, 1)
        assert np.allclose(to_density_matrix(t2), rho2, atol=1e-12)


def test_dense_measurement_probabilities():
    p_plus, _, _ = measure_z_probs(to_density_matrix(bell()), 2, 0)
    assert p_plus == pytest.approx(0.5, abs=1e-12)
    det = StabilizerTableau.from_paulis(["+Z"])
    p_plus, _, _ = measure_z_probs(to_density_matrix(det), 1, 0)
    assert p_plus == pytest.approx(1.0, abs=1e-12)


def test_dense_trace_matches_tableau():
    ghz = StabilizerTableau.from_paulis(["+XXX", "+ZZI", "+IZZ"])
    got = trace_out_dense(to_density_matrix(ghz), 3, 2)
    want = to_density_matrix(trace_out(ghz, 2))
    assert np.allclose(got, want, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_random_sequences_match_dense_oracle(idx):
    rep = run_equivalence_trials(sequences=1, seed=idx, ops_per_sequence=6)
    assert rep.failures == ()


def test_equivalence_report_aggregates():
    rep = run_equivalence_trials(sequences=60, seed=123)
    assert rep.failures == ()
    assert rep.operations > 0 and rep.entropy_checks > 0
    assert rep.sigma_deviation <= 4.0
    assert rep.passed
