"""Tests for the four-state recursion core (transition matrix, channel, iterate)."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treephase import _kernels
from treephase.markov import (
    CState,
    CStateDist,
    GateParams,
    NoiseParams,
    Protocol,
    apply_noise_channel,
    build_transition_matrix,
    iterate,
    mean_mutual_information,
    mipt_fixed_point_closed_form,
    recursion_step,
)

T, O, S, M = CState.TWO, CState.ONE, CState.SIGMA, CState.MIXED

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def dists(draw, support=(T, O, S, M)):
    vec = [0.0, 0.0, 0.0, 0.0]
    for c in support:
        vec[int(c)] = draw(st.floats(1e-6, 1.0))
    s = sum(vec)
    return CStateDist(*(v / s for v in vec))


@st.composite
def gates(draw):
    return GateParams(draw(unit), draw(unit), draw(unit))


# ---------------------------------------------------------------------------
# Transition matrix
# ---------------------------------------------------------------------------

def test_transition_matrix_clifford_entries():
    w = build_transition_matrix(GateParams.clifford())
    assert w.prob(T, M, T) == pytest.approx(1 / 5, abs=1e-15)
    assert w.prob(T, M, O) == pytest.approx(3 / 5, abs=1e-15)
    assert w.prob(T, M, M) == pytest.approx(1 / 5, abs=1e-15)
    assert w.prob(S, M, S) == pytest.approx(2 / 5, abs=1e-15)


def test_transition_matrix_exact_rationals():
    g = GateParams(Fraction(3, 5), Fraction(1, 3), Fraction(1, 2))
    w = build_transition_matrix(g)
    assert w.prob(T, M, T) == Fraction(1, 5)
    assert w.prob(T, M, O) == Fraction(3, 5)
    assert w.prob(T, M, M) == Fraction(1, 5)
    assert sum(w.prob(T, M, c) for c in CState) == 1


@given(gates())
def test_transition_matrix_rows_normalized(g):
    w = build_transition_matrix(g)
    w.validate()
    assert w.prob(T, T, T) == 1
    assert w.prob(M, M, M) == 1


@given(gates())
def test_transition_matrix_symmetric(g):
    w = build_transition_matrix(g)
    for a in CState:
        for b in CState:
            for c in CState:
                assert w.prob(a, b, c) == w.prob(b, a, c)


@given(gates())
def test_no_entanglement_from_broken_pairs(g):
    # once both inputs are in {sigma, M}, the output never returns to 2 or 1
    w = build_transition_matrix(g)
    for a in (S, M):
        for b in (S, M):
            assert w.prob(a, b, T) == 0
            assert w.prob(a, b, O) == 0


def test_gate_params_domain():
    with pytest.raises(ValueError):
        GateParams(1.2, 0.0, 0.0)
    with pytest.raises(ValueError):
        GateParams(0.5, -0.1, 0.0)


# ---------------------------------------------------------------------------
# Noise channel
# ---------------------------------------------------------------------------

def test_channel_identity():
    d = CStateDist.pure()
    assert apply_noise_channel(d, NoiseParams.none()) == d


def test_channel_example():
    out = apply_noise_channel(CStateDist.pure(), NoiseParams(p=0.2, r=0.1))
    assert out.as_array() == pytest.approx([0.72, 0.0, 0.18, 0.10], abs=1e-15)


@given(unit, unit)
def test_channel_mixed_is_fixed_up_to_measurement(p, r):
    out = apply_noise_channel(CStateDist(0, 0, 0, 1), NoiseParams(p, r))
    assert out.p2 == 0 and out.p1 == 0
    assert out.pm == pytest.approx(r + (1 - r) * (1 - p), abs=1e-15)
    assert out.psigma == pytest.approx((1 - r) * p, abs=1e-15)


@given(dists(), unit, unit)
def test_channel_normalized(d, p, r):
    out = apply_noise_channel(d, NoiseParams(p, r))
    assert abs(sum(out.as_array()) - 1.0) <= 1e-12


@given(dists(), unit, st.floats(0.0, 0.5), st.floats(0.0, 0.49))
def test_channel_monotone_in_r(d, p, r, dr):
    lo = apply_noise_channel(d, NoiseParams(p, r))
    hi = apply_noise_channel(d, NoiseParams(p, r + dr))
    assert hi.p2 <= lo.p2 + 1e-15
    assert hi.p1 <= lo.p1 + 1e-15


# ---------------------------------------------------------------------------
# Recursion step
# ---------------------------------------------------------------------------

def test_recursion_step_pure_is_fixed():
    d = CStateDist.pure()
    g = GateParams.clifford()
    assert recursion_step(d, g, NoiseParams.none()) == d


def test_recursion_step_two_sigma_example():
    d = CStateDist(0.5, 0.0, 0.5, 0.0)
    out = recursion_step(d, GateParams(0.6, 1 / 3, 0.5), NoiseParams.none())
    assert out.as_array() == pytest.approx([0.55, 0.0, 0.45, 0.0], abs=1e-15)


@given(gates(), dists(support=(S, M)))
def test_recursion_step_no_resurrection(g, d):
    out = recursion_step(d, g, NoiseParams.none())
    assert out.p2 == 0.0
    assert out.p1 == 0.0


@given(gates(), dists(support=(O, S, M)), unit, unit)
def test_recursion_step_p2_stays_zero(g, d, p, r):
    out = recursion_step(d, g, NoiseParams(p, r))
    assert out.p2 == 0.0


@given(dists(), gates(), unit, unit)
def test_recursion_step_normalized(d, g, p, r):
    out = recursion_step(d, g, NoiseParams(p, r))
    assert abs(sum(out.as_array()) - 1.0) <= 1e-12


@given(st.floats(0.0, 1.0), unit, unit)
def test_two_state_reduction(x, alpha, p):
    """On {2, sigma} with r=0 the step is the scalar map P' = P~^2 + 2a P~(1-P~)."""
    d = CStateDist(x, 0.0, 1.0 - x, 0.0)
    out = recursion_step(d, GateParams(alpha, 0.7, 0.3), NoiseParams(p, 0.0))
    pt = (1.0 - p) * x
    expected = pt * pt + 2.0 * alpha * pt * (1.0 - pt)
    assert out.p1 == 0.0 and out.pm == 0.0
    assert abs(out.p2 - expected) <= 1e-15


@given(st.floats(0.0, 1.0), unit, unit, unit, unit)
def test_one_mixed_sector_equivalence(y, alpha, beta, gamma, r):
    """With p=0, the {1, M} sector evolves exactly like the {2, sigma} sector
    does under (alpha -> 1-alpha, p -> r), independent of beta and gamma."""
    d = CStateDist(0.0, y, 0.0, 1.0 - y)
    out = recursion_step(d, GateParams(alpha, beta, gamma), NoiseParams(0.0, r))
    yt = (1.0 - r) * y
    expected = yt * yt + 2.0 * (1.0 - alpha) * yt * (1.0 - yt)
    assert out.p2 == 0.0 and out.psigma == 0.0
    assert abs(out.p1 - expected) <= 1e-15


# ---------------------------------------------------------------------------
# Closed form and iterate
# ---------------------------------------------------------------------------

def test_closed_form_examples():
    assert mipt_fixed_point_closed_form(0.0, 3 / 5) == 1.0
    assert mipt_fixed_point_closed_form(1 / 6, 3 / 5) == pytest.approx(0.0, abs=1e-15)
    assert mipt_fixed_point_closed_form(0.1, 3 / 5) == pytest.approx(
        0.4938271605, abs=1e-10
    )
    assert mipt_fixed_point_closed_form(0.3, 3 / 5) == 0.0
    assert mipt_fixed_point_closed_form(1.0, 3 / 5) == 0.0
    with pytest.raises(ValueError):
        mipt_fixed_point_closed_form(0.1, 0.5)


def test_closed_form_matches_iterate_on_grid():
    for alpha in (0.55, 3 / 5, 0.8, 1.0):
        for p in np.linspace(0.0, 0.45, 10):
            proto = Protocol.single(GateParams(alpha, 0.0, 0.0), NoiseParams(p, 0.0))
            res = iterate(proto)
            assert res.converged
            assert abs(res.dist.p2 - mipt_fixed_point_closed_form(p, alpha)) <= 1e-10


def test_iterate_noiseless_converges_at_depth_one():
    res = iterate(Protocol.single(GateParams.clifford(), NoiseParams.none()))
    assert res.converged and res.iterations == 1
    assert res.dist == CStateDist.pure()


def test_iterate_above_threshold_collapses():
    proto = Protocol.single(GateParams(3 / 5, 1 / 3, 0.5), NoiseParams(0.25, 0.0))
    res = iterate(proto)
    assert res.converged
    assert res.dist.p2 <= 1e-11
    assert res.dist.psigma == pytest.approx(1.0, abs=1e-11)


def test_iterate_unconverged_is_flagged():
    proto = Protocol.single(GateParams(3 / 5, 1 / 3, 0.5), NoiseParams(1 / 6, 0.0))
    res = iterate(proto, max_depth=50)
    assert not res.converged
    assert res.iterations == 50
    assert res.residual > 1e-13


def test_iterate_periodic_schedule_alternates():
    # alternating strong/weak ensembles with decoherence: ends fully mixed
    proto = Protocol(
        initial=CStateDist.pure(),
        schedule=(
            (GateParams(0.8, 0.0, 0.0), NoiseParams(0.0, 0.05)),
            (GateParams(0.2, 0.0, 0.0), NoiseParams(0.0, 0.05)),
        ),
    )
    res = iterate(proto)
    assert res.converged
    assert res.dist.pm == pytest.approx(1.0, abs=1e-11)


def test_protocol_validation():
    with pytest.raises(ValueError):
        Protocol(CStateDist.pure(), ())
    with pytest.raises(TypeError):
        Protocol(CStateDist.pure(), ((GateParams.clifford(), 0.1),))
    proto = Protocol.single(GateParams.clifford(), NoiseParams.none())
    assert proto.period == 1


def test_mean_mutual_information():
    assert mean_mutual_information(CStateDist.pure()) == 2.0
    assert mean_mutual_information(CStateDist(0, 0, 0.5, 0.5)) == 0.0
    assert mean_mutual_information(CStateDist(0.5, 0.2, 0.2, 0.1)) == pytest.approx(1.2)


# ---------------------------------------------------------------------------
# Distribution type
# ---------------------------------------------------------------------------

def test_dist_validation():
    with pytest.raises(ValueError):
        CStateDist(0.5, 0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        CStateDist(-0.1, 0.6, 0.3, 0.2)
    d = CStateDist.leaf_mixture(0.3)
    assert d.as_array() == pytest.approx([0.7, 0.0, 0.0, 0.3])
    assert d[CState.MIXED] == 0.3
    with pytest.raises(ValueError):
        CStateDist.leaf_mixture(1.5)


def test_from_array_clamps_roundoff():
    d = CStateDist.from_array(np.array([0.6, -1e-16, 0.4, 0.0]))
    assert d.p1 == 0.0
    with pytest.raises(ValueError):
        CStateDist.from_array(np.array([0.6, -1e-13, 0.4, 0.0]))


# ---------------------------------------------------------------------------
# Kernel vs pure-python reference
# ---------------------------------------------------------------------------

@settings(deadline=None, max_examples=25)
@given(gates(), st.floats(0.0, 0.4), st.floats(0.0, 0.3), st.booleans())
def test_kernel_matches_reference_steps(g, p, r, post_channel):
    n = NoiseParams(p, r)
    d = CStateDist.leaf_mixture(r) if post_channel else CStateDist.pure()
    steps = 40
    params = np.array([[g.alpha, g.beta, g.gamma, p, r]])
    vec, got_steps, _, status = _kernels.iterate_schedule(
        d.as_array(), params, 0.0, steps, post_channel
    )
    assert got_steps == steps and status in (0, 1)
    ref = d
    for i in range(steps):
        ref = recursion_step(ref, g, n, skip_channel=(post_channel and i == 0))
    assert vec == pytest.approx(ref.as_array(), abs=1e-12)


@settings(deadline=None, max_examples=10)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 0.2))
def test_kernel_matches_reference_period_two(a_even, a_odd, r):
    sched = (
        (GateParams(a_even, 0.0, 0.0), NoiseParams(0.0, r)),
        (GateParams(a_odd, 0.0, 0.0), NoiseParams(0.0, r)),
    )
    proto = Protocol(CStateDist.leaf_mixture(0.1), sched, initial_is_post_channel=True)
    steps = 41  # odd: ends mid-period in the reference, kernel runs 40
    params = np.array([[g.alpha, g.beta, g.gamma, n.p, n.r] for g, n in sched])
    vec, got_steps, _, status = _kernels.iterate_schedule(
        proto.initial.as_array(), params, 0.0, steps, True
    )
    assert got_steps == 41  # transient + 20 full periods
    ref = proto.initial
    for i in range(got_steps):
        g, n = sched[i % 2]
        ref = recursion_step(ref, g, n, skip_channel=(i == 0))
    assert vec == pytest.approx(ref.as_array(), abs=1e-12)


def test_stability_bound_alpha_below_half():
    # for alpha < 1/2 any decoherence kills entanglement: p2 -> 0
    proto = Protocol.single(GateParams(0.4, 1 / 3, 0.5), NoiseParams(0.0, 0.01))
    res = iterate(proto)
    assert res.converged
    assert res.dist.p2 < 1e-9
    # ... but the classical sector survives at small r: (1-6r)/(1-r)^2
    expected_p1 = (1 - 6 * 0.01) / (1 - 0.01) ** 2
    assert res.dist.p1 == pytest.approx(expected_p1, abs=1e-10)
