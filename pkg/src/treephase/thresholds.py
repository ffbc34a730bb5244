"""Phase classification, threshold bisection, and parameter-space sweeps.

Three phases are distinguished by which information survives to the root of an
infinitely deep tree: quantum (P(2) > 0), classical (P(2) = 0 < P(1)), and
noisy (P(2) = P(1) = 0).  Thresholds along a parameter axis are located by
bisecting on phase membership.

Near a continuous threshold plain fixed-point iteration is unreliable as a
classifier: the absolute per-period residual drops below any tolerance while a
slowly dying component is still far above the membership cutoff.  Bisection
probes therefore use a dedicated kernel with per-component *relative*
convergence plus an absorbing-exit once the watched component decays below
_PROBE_DEAD_EPS (see _kernels.probe_schedule for why that exit is safe).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .markov import (
    CStateDist,
    FixedPointResult,
    GateParams,
    NoiseParams,
    Protocol,
    _schedule_params,
    iterate,
)

__all__ = [
    "EPS_PHASE",
    "JUMP_EPS",
    "Phase",
    "Order",
    "ThresholdResult",
    "GridPoint",
    "PhaseDiagram",
    "classify_phase",
    "probe_phase",
    "find_threshold",
    "sweep_grid",
    "boundary_noise_scan",
    "multistep_protocol",
    "multistep_scan",
]

# Phase membership: a fixed-point component above this is "alive".
EPS_PHASE = 1e-9
# A discontinuity in P(I != 0) larger than this marks a first-order transition.
JUMP_EPS = 0.01

# Probe exits: both sit far below EPS_PHASE (decision margin) yet far above
# float noise; near a continuous threshold at distance d the probe needs
# O(|log dead_eps| / d) layers, so these directly set bisection cost.  The
# step cap covers any probe at distance >= ~1e-7 (the closest a tol >= 1e-6
# bisection places one) even in marginal families whose decay rate is
# 1 - O(d); a probe parked closer exits undecided and find_threshold
# re-splits the bracket instead.
_PROBE_REL_TOL = 1e-12
_PROBE_DEAD_EPS = 1e-16
_PROBE_MAX_STEPS = 200_000_000


class Phase(Enum):
    QUANTUM = "quantum"
    CLASSICAL = "classical"
    NOISY = "noisy"


class Order(Enum):
    CONTINUOUS = "continuous"
    FIRST_ORDER = "first-order"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class ThresholdResult:
    """Located phase boundary: critical value, final bracket, and transition order."""

    axis: str
    value: float
    bracket: tuple
    order: Order
    jump: float


@dataclass(frozen=True)
class GridPoint:
    p: float
    r: float
    result: FixedPointResult
    phase: Phase | None


@dataclass(frozen=True)
class PhaseDiagram:
    p_values: tuple
    r_values: tuple
    points: tuple

    def point(self, i: int, j: int) -> GridPoint:
        """Grid point at (p_values[i], r_values[j])."""
        return self.points[i * len(self.r_values) + j]


def classify_phase(fp: FixedPointResult, eps: float = EPS_PHASE) -> Phase:
    """Classify a converged fixed point by which components exceed eps.

    Near a threshold prefer probe_phase / find_threshold: iterate() can stop
    (absolute residual) while a dying component still sits above eps.
    """
    if not fp.converged:
        raise ValueError("cannot classify an unconverged fixed point")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if fp.dist.p2 > eps:
        return Phase.QUANTUM
    if fp.dist.p1 > eps:
        return Phase.CLASSICAL
    return Phase.NOISY


def _probe(proto: Protocol, watch: int) -> tuple:
    """Run the probe kernel; returns (alive, final vector, layers applied)."""
    vec, steps, status = _kernels.probe_schedule(
        proto.initial.as_array(),
        _schedule_params(proto),
        _PROBE_REL_TOL,
        _PROBE_DEAD_EPS,
        watch,
        _PROBE_MAX_STEPS,
        proto.initial_is_post_channel,
    )
    if status == 3:
        raise ValueError("recursion produced probability below round-off clamp")
    if status == 2:
        raise RuntimeError(
            f"phase probe undecided after {steps} layers; "
            "parameter is indistinguishable from the threshold"
        )
    if status == 1:
        return False, vec, steps
    alive = vec[0] if watch == _kernels.WATCH_P2 else vec[0] + vec[1]
    return alive > EPS_PHASE, vec, steps


def probe_phase(proto: Protocol) -> Phase:
    """Robust phase classification via the probe kernel (threshold-safe)."""
    alive, vec, _ = _probe(proto, _kernels.WATCH_P2P1)
    if not alive:
        return Phase.NOISY
    return Phase.QUANTUM if vec[0] > EPS_PHASE else Phase.CLASSICAL


def _watch_for(predicate: Phase) -> int:
    if predicate is Phase.QUANTUM:
        return _kernels.WATCH_P2
    if predicate is Phase.CLASSICAL:
        return _kernels.WATCH_P2P1
    raise ValueError("predicate must be Phase.QUANTUM or Phase.CLASSICAL")


def find_threshold(
    proto_family: Callable[[float], Protocol],
    axis: str,
    lo: float,
    hi: float,
    predicate: Phase = Phase.QUANTUM,
    tol: float = 1e-6,
) -> ThresholdResult:
    """Bisect [lo, hi] for the boundary of the region where ``predicate`` holds.

    ``proto_family`` maps a value on the scanned axis to a Protocol.  The
    predicate is membership: Phase.QUANTUM means "quantum" (P(2) survives),
    Phase.CLASSICAL means "classical or better" (P(2)+P(1) survives).  The
    endpoints must classify differently.

    Transition order: P(I != 0) = P(2)+P(1) is evaluated at value +- 10*tol; a
    jump above JUMP_EPS marks the transition first-order.
    """
    if not (tol > 0):
        raise ValueError("tol must be positive")
    if not lo < hi:
        raise ValueError("need lo < hi")
    watch = _watch_for(predicate)
    lo0, hi0 = lo, hi
    alive_lo, _, _ = _probe(proto_family(lo), watch)
    alive_hi, _, _ = _probe(proto_family(hi), watch)
    if alive_lo == alive_hi:
        raise ValueError(
            f"no phase change on [{lo}, {hi}] for predicate {predicate.value}"
        )
    while hi - lo > tol:
        # If the midpoint sits so close to the threshold that its probe cannot
        # decide, re-split at an irrational fraction: the threshold cannot be
        # parked on both points at once.
        for frac in (0.5, 0.381966011250105):
            mid = lo + frac * (hi - lo)
            try:
                alive_mid, _, _ = _probe(proto_family(mid), watch)
                break
            except RuntimeError:
                if frac != 0.5:
                    raise
        if alive_mid == alive_lo:
            lo = mid
        else:
            hi = mid
    value = 0.5 * (lo + hi)

    # Order detection: compare P(I != 0) just inside each phase.
    delta = 10.0 * tol
    below = max(lo0, value - delta)
    above = min(hi0, value + delta)
    try:
        _, vec_b, _ = _probe(proto_family(below), watch)
        _, vec_a, _ = _probe(proto_family(above), watch)
    except RuntimeError:
        return ThresholdResult(axis, value, (lo, hi), Order.UNDETERMINED, float("nan"))
    jump = abs((vec_b[0] + vec_b[1]) - (vec_a[0] + vec_a[1]))
    order = Order.FIRST_ORDER if jump > JUMP_EPS else Order.CONTINUOUS
    return ThresholdResult(axis, value, (lo, hi), order, float(jump))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def sweep_grid(
    p_range: tuple,
    r_range: tuple,
    resolution: int | tuple,
    proto_family: Callable[[float, float], Protocol] | None = None,
    g: GateParams | None = None,
    eps: float = EPS_PHASE,
    tol: float = 1e-13,
    max_depth: int = 10_000_000,
) -> PhaseDiagram:
    """Classify every point of a (p, r) grid.

    proto_family maps (p, r) to a Protocol; by default a single-step protocol
    with gate parameters ``g`` (uniform-Clifford values if omitted).
    Unconverged points get phase None and stay in the table.
    """
    if proto_family is None:
        gg = g if g is not None else GateParams.clifford()
        proto_family = lambda p, r: Protocol.single(gg, NoiseParams(p, r))
    n_p, n_r = (resolution, resolution) if isinstance(resolution, int) else resolution
    if n_p < 2 or n_r < 2:
        raise ValueError("resolution must be >= 2 per axis")
    p_values = tuple(np.linspace(p_range[0], p_range[1], n_p))
    r_values = tuple(np.linspace(r_range[0], r_range[1], n_r))
    points = []
    for p in p_values:
        for r in r_values:
            fp = iterate(proto_family(p, r), tol=tol, max_depth=max_depth)
            phase = classify_phase(fp, eps) if fp.converged else None
            points.append(GridPoint(float(p), float(r), fp, phase))
    return PhaseDiagram(p_values, r_values, tuple(points))


def boundary_protocol(
    r_leaves: float,
    g: GateParams,
    n: NoiseParams,
    schedule: tuple | None = None,
) -> Protocol:
    """Protocol with decoherence r_leaves applied to the leaf pairs only.

    The initial distribution (1 - r_leaves, 0, 0, r_leaves) already *is* the
    state of the first layer of wires, so the bulk channel starts one layer
    up: the first recursion step applies the node average without a channel.
    """
    sched = schedule if schedule is not None else ((g, n),)
    return Protocol(
        CStateDist.leaf_mixture(r_leaves), sched, initial_is_post_channel=True
    )


def boundary_noise_scan(
    r_leaves_values: Sequence[float],
    g: GateParams,
    n: NoiseParams = NoiseParams.none(),
    schedule: tuple | None = None,
    tol: float = 1e-13,
    max_depth: int = 10_000_000,
) -> list:
    """Fixed points as a function of boundary decoherence; rows (r_leaves, fp)."""
    return [
        (float(rl), iterate(boundary_protocol(rl, g, n, schedule), tol, max_depth))
        for rl in r_leaves_values
    ]


def multistep_protocol(
    alpha_even: float,
    alpha_odd: float,
    beta: float = 0.0,
    gamma: float = 0.0,
    p: float = 0.0,
    r: float = 0.0,
    r_leaves: float | None = None,
) -> Protocol:
    """Period-2 protocol alternating two gate ensembles.

    The even-depth ensemble sits adjacent to the leaves, so its schedule row
    comes first.  With r_leaves set, noise acts on the leaf pairs only and the
    bulk channel starts at the second wire layer (see boundary_protocol);
    otherwise every wire layer including the first carries (p, r).
    """
    n = NoiseParams(p, r)
    sched = (
        (GateParams(alpha_even, beta, gamma), n),
        (GateParams(alpha_odd, beta, gamma), n),
    )
    if r_leaves is None:
        return Protocol(CStateDist.pure(), sched)
    return boundary_protocol(r_leaves, sched[0][0], n, schedule=sched)


def multistep_scan(
    alpha_even: float,
    alpha_odd: float,
    beta: float,
    gamma: float,
    axis: str,
    values: Sequence[float],
    p: float = 0.0,
    r: float = 0.0,
    eps: float = EPS_PHASE,
    tol: float = 1e-13,
    max_depth: int = 10_000_000,
) -> list:
    """Sweep r or r_leaves for a two-ensemble schedule; rows (value, fp, phase)."""
    if axis == "r":
        family = lambda v: multistep_protocol(alpha_even, alpha_odd, beta, gamma, p=p, r=v)
    elif axis == "r_leaves":
        family = lambda v: multistep_protocol(
            alpha_even, alpha_odd, beta, gamma, p=p, r=r, r_leaves=v
        )
    else:
        raise ValueError(f"axis must be 'r' or 'r_leaves', got {axis!r}")
    rows = []
    for v in values:
        fp = iterate(family(v), tol, max_depth)
        phase = classify_phase(fp, eps) if fp.converged else None
        rows.append((float(v), fp, phase))
    return rows
