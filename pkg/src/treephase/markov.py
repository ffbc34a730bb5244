"""Exact classical Markov process on c-states.

The state of a subtree root relative to its leaves is summarized by one of four
labels (the "c-states"): Bell-entangled (2), classically correlated (1), pure
product (sigma), or maximally mixed (M).  A node combines two independent
subtree states through a gate-ensemble-averaged transition matrix W, after each
input wire has passed through a measurement/decoherence channel.  This module
implements the distribution-level dynamics: the transition matrix, the wire
channel, one recursion step, and fixed-point iteration.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from ._kernels import iterate_schedule

__all__ = [
    "CState",
    "CStateDist",
    "GateParams",
    "NoiseParams",
    "TransitionMatrix",
    "Protocol",
    "FixedPointResult",
    "build_transition_matrix",
    "apply_noise_channel",
    "recursion_step",
    "iterate",
    "mipt_fixed_point_closed_form",
    "mean_mutual_information",
]

# Absolute tolerance on sum(P) == 1 for validating distributions.
NORM_TOL = 1e-12
# Round-off more negative than this is treated as a bug, not noise.
NEG_CLAMP = -1e-15


class CState(IntEnum):
    """The four c-states; integer order gives the canonical pair index (a <= b)."""

    TWO = 0
    ONE = 1
    SIGMA = 2
    MIXED = 3

    @property
    def label(self) -> str:
        return {0: "2", 1: "1", 2: "sigma", 3: "M"}[int(self)]


@dataclass(frozen=True)
class CStateDist:
    """Probability distribution over the four c-states, ordered (2, 1, sigma, M)."""

    p2: float
    p1: float
    psigma: float
    pm: float

    def __post_init__(self) -> None:
        vec = (self.p2, self.p1, self.psigma, self.pm)
        for name, v in zip(("p2", "p1", "psigma", "pm"), vec):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v!r} outside [0, 1]")
        s = sum(vec)
        if abs(s - 1.0) > NORM_TOL:
            raise ValueError(f"distribution sums to {s!r}, not 1 within {NORM_TOL}")

    def __getitem__(self, c: CState) -> float:
        return (self.p2, self.p1, self.psigma, self.pm)[int(c)]

    def as_array(self) -> np.ndarray:
        return np.array([self.p2, self.p1, self.psigma, self.pm], dtype=np.float64)

    @classmethod
    def from_array(cls, vec: np.ndarray) -> "CStateDist":
        vec = _clamp_and_renormalize(np.asarray(vec, dtype=np.float64))
        return cls(vec[0], vec[1], vec[2], vec[3])

    @classmethod
    def pure(cls) -> "CStateDist":
        """All mass on the Bell-entangled state (noiseless leaf boundary)."""
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def leaf_mixture(cls, r_leaves: float) -> "CStateDist":
        """Boundary-noise initial condition: (1 - r_leaves, 0, 0, r_leaves)."""
        if not (0.0 <= r_leaves <= 1.0):
            raise ValueError(f"r_leaves={r_leaves!r} outside [0, 1]")
        return cls(1.0 - r_leaves, 0.0, 0.0, r_leaves)


def _clamp_and_renormalize(vec: np.ndarray) -> np.ndarray:
    """Probability hygiene: clamp tiny negative round-off to 0 and renormalize.

    Anything more negative than NEG_CLAMP indicates a real bug and raises.
    """
    if vec.min() < NEG_CLAMP:
        raise ValueError(f"negative probability beyond round-off: {vec!r}")
    vec = np.where(vec < 0.0, 0.0, vec)
    return vec / vec.sum()


@dataclass(frozen=True)
class GateParams:
    """Ensemble parameters (alpha, beta, gamma); they fully determine W.

    Values may be floats or exact ``fractions.Fraction``s — the transition
    matrix builder only uses ring arithmetic, so exact inputs give exact rows.
    """

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not (0 <= v <= 1):
                raise ValueError(f"{name}={v!r} outside [0, 1]")

    @classmethod
    def clifford(cls) -> "GateParams":
        """Uniform two-qubit Clifford ensemble values."""
        return cls(3 / 5, 1 / 3, 1 / 2)


@dataclass(frozen=True)
class NoiseParams:
    """Per-wire measurement probability p and decoherence probability r."""

    p: float
    r: float

    def __post_init__(self) -> None:
        for name in ("p", "r"):
            v = getattr(self, name)
            if not (0 <= v <= 1):
                raise ValueError(f"{name}={v!r} outside [0, 1]")

    @classmethod
    def none(cls) -> "NoiseParams":
        return cls(0.0, 0.0)


# ---------------------------------------------------------------------------
# Transition matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransitionMatrix:
    """W((a,b) -> c): input-symmetric, row-normalized over c for each pair.

    Entries are stored for canonical pairs a <= b; ``prob`` handles either
    argument order.  Values may be floats or Fractions depending on how the
    matrix was built.
    """

    w: dict

    def prob(self, a: CState, b: CState, c: CState):
        if a > b:
            a, b = b, a
        return self.w.get((a, b, c), 0)

    def as_tensor(self) -> np.ndarray:
        """Dense (4, 4, 4) float tensor with both argument orders filled."""
        t = np.zeros((4, 4, 4), dtype=np.float64)
        for (a, b, c), v in self.w.items():
            t[a, b, c] = float(v)
            t[b, a, c] = float(v)
        return t

    def validate(self, row_tol: float = 1e-15) -> None:
        for a in CState:
            for b in CState:
                if a > b:
                    continue
                row = sum(self.prob(a, b, c) for c in CState)
                if abs(float(row) - 1.0) > row_tol:
                    raise ValueError(f"row ({a.label},{b.label}) sums to {row!r}")
        for g in CState:
            if self.prob(g, g, g) != 1:
                raise ValueError(f"diagonal ({g.label},{g.label}) != 1")


def build_transition_matrix(g: GateParams) -> TransitionMatrix:
    """Construct W from (alpha, beta, gamma).

    The rows, with bars denoting complements (e.g. ab = 1 - alpha):

        (2,2) -> 2                      (1,1) -> 1
        (2,1) -> {2: a, 1: ab}          (1,s) -> {1: a, s: ab}
        (2,s) -> {2: a, s: ab}          (1,M) -> {1: ab, M: a}
        (2,M) -> {2: a*b, 1: a*bb + ab*gb, M: ab*g}
        (s,s) -> s                      (s,M) -> {s: ab, M: a}
        (M,M) -> M

    Once a pair has lost entanglement it cannot regain it: no row maps a
    {sigma, M} pair back to 2 or 1.
    """
    a, b, gm = g.alpha, g.beta, g.gamma
    one = a - a + 1  # 1 in the same ring as the inputs (float or Fraction)
    ab, bb, gb = one - a, one - b, one - gm
    T, O, S, M = CState.TWO, CState.ONE, CState.SIGMA, CState.MIXED
    w = {
        (T, T, T): one,
        (T, O, T): a, (T, O, O): ab,
        (T, S, T): a, (T, S, S): ab,
        (T, M, T): a * b, (T, M, O): a * bb + ab * gb, (T, M, M): ab * gm,
        (O, O, O): one,
        (O, S, O): a, (O, S, S): ab,
        (O, M, O): ab, (O, M, M): a,
        (S, S, S): one,
        (S, M, S): ab, (S, M, M): a,
        (M, M, M): one,
    }
    tm = TransitionMatrix(w)
    tm.validate()
    return tm


# ---------------------------------------------------------------------------
# Channel and recursion step
# ---------------------------------------------------------------------------

def apply_noise_channel(d: CStateDist, n: NoiseParams) -> CStateDist:
    """One wire's worth of noise: measurement (prob p) then decoherence (prob r).

    P~(2) = (1-r)(1-p) P(2)
    P~(1) = (1-r)(1-p) P(1)
    P~(M) = r + (1-r)(1-p) P(M)
    P~(s) = (1-r)(p + (1-p) P(s))

    The ordering (measure first, then decohere) is fixed by the algebra of
    P~(s); it is not configurable.
    """
    p, r = n.p, n.r
    keep = (1.0 - r) * (1.0 - p)
    return CStateDist.from_array(np.array([
        keep * d.p2,
        keep * d.p1,
        (1.0 - r) * (p + (1.0 - p) * d.psigma),
        r + keep * d.pm,
    ]))


def recursion_step(
    d: CStateDist,
    g: GateParams,
    n: NoiseParams,
    *,
    skip_channel: bool = False,
) -> CStateDist:
    """One depth layer: noise channel on each input wire, then the node average.

    P'(c) = sum_{a,b} W((a,b) -> c) P~(a) P~(b)

    with both inputs drawn independently from the same distribution.
    ``skip_channel`` supports boundary-noise protocols whose initial
    distribution is already the post-channel leaf distribution.
    """
    td = d if skip_channel else apply_noise_channel(d, n)
    tv = td.as_array()
    t = build_transition_matrix(g).as_tensor()
    out = np.einsum("abc,a,b->c", t, tv, tv)
    return CStateDist.from_array(out)


# ---------------------------------------------------------------------------
# Protocols and fixed-point iteration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Protocol:
    """Depth-indexed schedule of (gate, noise) parameters plus initial state.

    ``schedule`` is applied cyclically starting from ``initial``; its length is
    the period.  ``initial_is_post_channel`` marks boundary-noise setups where
    ``initial`` is already the post-channel distribution at the leaves, so the
    very first step applies only the node average (the bulk channel starts at
    the second layer of wires).
    """

    initial: CStateDist
    schedule: tuple
    initial_is_post_channel: bool = False

    def __post_init__(self) -> None:
        if len(self.schedule) < 1:
            raise ValueError("schedule must contain at least one entry")
        for gp, np_ in self.schedule:
            if not isinstance(gp, GateParams) or not isinstance(np_, NoiseParams):
                raise TypeError("schedule entries must be (GateParams, NoiseParams)")

    @property
    def period(self) -> int:
        return len(self.schedule)

    @classmethod
    def single(
        cls,
        g: GateParams,
        n: NoiseParams,
        initial: CStateDist | None = None,
    ) -> "Protocol":
        return cls(initial or CStateDist.pure(), ((g, n),))


@dataclass(frozen=True)
class FixedPointResult:
    """Outcome of fixed-point iteration: P at the last depth plus metadata."""

    dist: CStateDist
    iterations: int
    converged: bool
    residual: float


def _schedule_params(proto: Protocol) -> np.ndarray:
    rows = [
        (float(g.alpha), float(g.beta), float(g.gamma), float(n.p), float(n.r))
        for g, n in proto.schedule
    ]
    return np.array(rows, dtype=np.float64)


def iterate(
    proto: Protocol,
    tol: float = 1e-13,
    max_depth: int = 10_000_000,
) -> FixedPointResult:
    """Iterate the recursion to its deep-tree fixed point.

    Convergence means the max-norm change of P over one full schedule period
    is below ``tol``.  Non-convergence within ``max_depth`` layers returns a
    flagged result rather than raising; callers decide what to do.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    params = _schedule_params(proto)
    dist, steps, residual, status = iterate_schedule(
        proto.initial.as_array(),
        params,
        float(tol),
        int(max_depth),
        bool(proto.initial_is_post_channel),
    )
    if status == 2:
        raise ValueError("recursion produced probability below round-off clamp")
    return FixedPointResult(
        dist=CStateDist.from_array(dist),
        iterations=int(steps),
        converged=(status == 0),
        residual=float(residual),
    )


def mipt_fixed_point_closed_form(p: float, alpha: float) -> float:
    """Stable fixed point of the two-state (2 vs sigma) reduction.

    The noiseless measurement-only dynamics restricted to {2, sigma} reads
    P' = P~^2 + 2 a P~ (1 - P~) with P~ = (1-p) P, whose nonzero fixed point is

        P* = (1 - 2 a (1-p)) / ((1-p)^2 (1 - 2 a)),

    clamped to [0, 1] (the zero fixed point takes over below it).  alpha = 1/2
    makes the map linear and the formula degenerate; it is rejected here, while
    ``iterate`` handles it fine.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p={p!r} outside [0, 1]")
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha={alpha!r} outside [0, 1]")
    if alpha == 0.5:
        raise ValueError("alpha=1/2 is degenerate (linear map); use iterate()")
    if p == 1.0:
        return 0.0
    pstar = (1.0 - 2.0 * alpha * (1.0 - p)) / ((1.0 - p) ** 2 * (1.0 - 2.0 * alpha))
    return min(1.0, max(0.0, pstar))


def mean_mutual_information(d: CStateDist) -> float:
    """Ensemble-averaged root-leaf mutual information, 2 P(2) + P(1), in bits."""
    return 2.0 * d.p2 + d.p1
