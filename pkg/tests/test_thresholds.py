"""Tests for phase classification, bisection, and sweeps."""
import numpy as np
import pytest

from treephase.markov import (
    CStateDist,
    FixedPointResult,
    GateParams,
    NoiseParams,
    Protocol,
    iterate,
)
from treephase.thresholds import (
    Order,
    Phase,
    boundary_noise_scan,
    boundary_protocol,
    classify_phase,
    find_threshold,
    multistep_protocol,
    multistep_scan,
    probe_phase,
    sweep_grid,
)


def _fp(p2, p1, ps, pm, converged=True):
    return FixedPointResult(CStateDist(p2, p1, ps, pm), 100, converged, 1e-14)


def test_classify_phase():
    assert classify_phase(_fp(0.49, 0, 0.51, 0)) is Phase.QUANTUM
    assert classify_phase(_fp(0, 0.3, 0, 0.7)) is Phase.CLASSICAL
    assert classify_phase(_fp(0, 0, 0.6, 0.4)) is Phase.NOISY
    with pytest.raises(ValueError):
        classify_phase(_fp(1, 0, 0, 0, converged=False))
    with pytest.raises(ValueError):
        classify_phase(_fp(1, 0, 0, 0), eps=0.0)


def test_classify_phase_eps_insensitive():
    fp = iterate(Protocol.single(GateParams.clifford(), NoiseParams(0.0, 0.05)))
    for eps in (1e-10, 1e-9, 1e-8, 1e-7):
        assert classify_phase(fp, eps) is Phase.NOISY


def test_probe_phase_matches_classify_away_from_thresholds():
    cl = GateParams.clifford()
    for p, r in ((0.05, 0.0), (0.25, 0.0), (0.0, 0.05), (0.0, 0.01)):
        proto = Protocol.single(cl, NoiseParams(p, r))
        assert probe_phase(proto) is classify_phase(iterate(proto))
    proto = Protocol.single(GateParams(0.4, 1 / 3, 0.5), NoiseParams(0.0, 0.05))
    assert probe_phase(proto) is Phase.CLASSICAL


def test_find_threshold_mipt_and_nesting():
    cl = GateParams.clifford()
    fam = lambda p: Protocol.single(cl, NoiseParams(p, 0.0))
    coarse = find_threshold(fam, "p", 0.0, 0.4, tol=1e-3)
    fine = find_threshold(fam, "p", 0.0, 0.4, tol=1e-4)
    assert abs(coarse.value - 1 / 6) <= 1e-3
    assert abs(fine.value - 1 / 6) <= 1e-4
    # order detection samples at +-10*tol, so it needs a reasonably fine tol
    # before the jump estimate stops seeing the continuous slope
    order_run = find_threshold(fam, "p", 0.1, 0.25, tol=3e-5)
    assert order_run.order is Order.CONTINUOUS
    assert order_run.jump < 0.01
    # finer bracket nests within the coarse one
    assert coarse.bracket[0] - 1e-15 <= fine.bracket[0]
    assert fine.bracket[1] <= coarse.bracket[1] + 1e-15
    assert coarse.bracket[0] <= coarse.value <= coarse.bracket[1]


def test_find_threshold_errors():
    cl = GateParams.clifford()
    fam = lambda p: Protocol.single(cl, NoiseParams(p, 0.0))
    with pytest.raises(ValueError):
        find_threshold(fam, "p", 0.3, 0.4, tol=1e-3)  # noisy at both ends
    with pytest.raises(ValueError):
        find_threshold(fam, "p", 0.0, 0.4, tol=-1.0)
    with pytest.raises(ValueError):
        find_threshold(fam, "p", 0.4, 0.0, tol=1e-3)
    with pytest.raises(ValueError):
        find_threshold(fam, "p", 0.0, 0.4, predicate=Phase.NOISY, tol=1e-3)


def test_find_threshold_first_order_multistep_global():
    fam = lambda r: multistep_protocol(0.8, 0.2, r=r)
    res = find_threshold(fam, "r", 0.0, 0.11, tol=1e-4)
    assert res.order is Order.FIRST_ORDER
    assert res.jump > 0.01
    assert abs(res.value - 0.0098) < 1e-3


def test_sweep_grid_corners():
    pd = sweep_grid((0.0, 0.5), (0.0, 0.5), 2)
    assert pd.point(0, 0).phase is Phase.QUANTUM
    assert pd.point(0, 1).phase is Phase.NOISY
    assert pd.point(1, 0).phase is Phase.NOISY
    assert pd.point(1, 1).phase is Phase.NOISY
    assert all(gp.result.converged for gp in pd.points)


def test_sweep_grid_row_crosses_mipt():
    pd = sweep_grid((0.1, 0.25), (0.0, 0.0), (2, 2))
    assert pd.point(0, 0).phase is Phase.QUANTUM
    assert pd.point(1, 0).phase is Phase.NOISY
    with pytest.raises(ValueError):
        sweep_grid((0.0, 0.5), (0.0, 0.5), 1)


def test_boundary_scan_zero_leaves_matches_standard():
    g = GateParams.clifford()
    n = NoiseParams(0.1, 0.0)
    rows = boundary_noise_scan([0.0], g, n)
    std = iterate(Protocol.single(g, n))
    # r_leaves=0 starts from the pure state; only the first layer's channel
    # placement differs, which cannot matter when the initial state is pure
    # and measurement acts identically every layer -- fixed points agree.
    assert rows[0][1].dist.as_array() == pytest.approx(std.dist.as_array(), abs=1e-11)


def test_boundary_scan_self_dual_laws():
    g = GateParams(0.5, 0.0, 0.0)
    rows = boundary_noise_scan([0.1, 0.3, 0.7, 0.99], g)
    by_rl = {rl: fp.dist for rl, fp in rows}
    assert by_rl[0.1].p2 == pytest.approx(0.8, abs=1e-9)
    assert by_rl[0.3].p2 == pytest.approx(0.4, abs=1e-9)
    assert by_rl[0.3].p1 == pytest.approx(0.6, abs=1e-9)
    assert by_rl[0.7].p2 <= 1e-11
    assert by_rl[0.7].p1 == pytest.approx(0.6, abs=1e-9)
    assert by_rl[0.99].p1 == pytest.approx(0.02, abs=1e-9)


def test_boundary_protocol_structure():
    proto = boundary_protocol(0.2, GateParams.clifford(), NoiseParams(0.0, 0.005))
    assert proto.initial_is_post_channel
    assert proto.initial == CStateDist.leaf_mixture(0.2)
    assert proto.period == 1


def test_multistep_equal_ensembles_reduce_to_single_step():
    two = multistep_protocol(0.6, 0.6, 1 / 3, 0.5, p=0.1, r=0.005)
    one = Protocol.single(GateParams(0.6, 1 / 3, 0.5), NoiseParams(0.1, 0.005))
    fp2, fp1 = iterate(two), iterate(one)
    assert fp2.dist.as_array() == pytest.approx(fp1.dist.as_array(), abs=1e-11)


def test_multistep_scan_phases():
    rows = multistep_scan(
        0.8, 0.2, 0.0, 0.0, "r_leaves", [0.05, 0.4, 0.9], r=0.005
    )
    assert [ph for _, _, ph in rows] == [Phase.QUANTUM, Phase.CLASSICAL, Phase.NOISY]
    with pytest.raises(ValueError):
        multistep_scan(0.8, 0.2, 0.0, 0.0, "bogus", [0.1])


def test_multistep_protocol_shapes():
    proto = multistep_protocol(0.8, 0.2, r_leaves=0.1, r=0.005)
    assert proto.period == 2
    assert proto.initial_is_post_channel
    assert proto.schedule[0][0].alpha == 0.8  # even-depth ensemble first
    glob = multistep_protocol(0.8, 0.2, r=0.005)
    assert not glob.initial_is_post_channel
    assert glob.initial == CStateDist.pure()
