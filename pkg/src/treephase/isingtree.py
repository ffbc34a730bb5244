"""Effective-field recursion for the ferromagnetic Ising model on a tree.

Integrating out a depth-D subtree below a spin leaves an effective field on
it; with uniform coupling J=1, bulk field h_bulk, and n_br branches per node
the field obeys

    h' = h_bulk + (n_br / beta) * artanh(tanh(beta h) * tanh(beta)).

The root field difference between all-up and all-down leaf boundary
conditions plays the role the root-leaf mutual information plays for the
circuit recursion: it vanishes in the disordered phase, turns on continuously
at tanh(beta_c) = 1/n_br when h_bulk = 0, and jumps first-order when h_bulk
is swept through the spinodal of the field map.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

from ._kernels import ising_fixed_point, ising_iterate_depth, ising_probe_tspace

__all__ = [
    "IsingParams",
    "RootField",
    "ising_step",
    "root_field",
    "delta_h_root",
    "boundary_field_scan",
    "find_beta_c",
    "find_h_c",
]

_ATANH_CLAMP = 1.0 - 1e-15
# Probe exits for the bisections (same reasoning as thresholds._PROBE_*).
_PROBE_REL_TOL = 1e-12
_PROBE_DEAD_EPS = 1e-12
_PROBE_MAX_STEPS = 300_000_000


@dataclass(frozen=True)
class IsingParams:
    """Tree-Ising parameters; h_boundary is the field on every leaf (+-inf ok)."""

    beta: float
    h_bulk: float = 0.0
    n_br: int = 2
    h_boundary: float = math.inf

    def __post_init__(self) -> None:
        if not (self.beta >= 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta={self.beta!r} must be finite and >= 0")
        if not math.isfinite(self.h_bulk):
            raise ValueError("h_bulk must be finite")
        if not (isinstance(self.n_br, int) and self.n_br >= 2):
            raise ValueError(f"n_br={self.n_br!r} must be an integer >= 2")
        if math.isnan(self.h_boundary):
            raise ValueError("h_boundary must not be NaN")


@dataclass(frozen=True)
class RootField:
    """Effective field at the root after ``depth`` recursion steps."""

    h_r: float
    depth: int
    converged: bool = True


def ising_step(h_r: float, p: IsingParams) -> float:
    """One recursion step; finite for any input, including h_r = +-inf."""
    if p.beta == 0.0:
        return p.h_bulk
    arg = math.tanh(p.beta * h_r) * math.tanh(p.beta)
    if abs(arg) > _ATANH_CLAMP:
        # unreachable for beta < ~19 since |tanh beta| < 1 strictly in float
        warnings.warn("artanh argument clamped; beta is extremely large")
        arg = math.copysign(_ATANH_CLAMP, arg)
    return p.h_bulk + (p.n_br / p.beta) * math.atanh(arg)


def _normalize_depth(depth) -> float:
    if depth == "inf" or depth is math.inf:
        return math.inf
    if isinstance(depth, float) and math.isinf(depth) and depth > 0:
        return math.inf
    if not (isinstance(depth, int) and depth >= 0):
        raise ValueError(f"depth must be a non-negative int or 'inf', got {depth!r}")
    return depth


def root_field(p: IsingParams, depth, tol: float = 1e-13,
               max_steps: int = 10**6) -> RootField:
    """Root field of a depth-``depth`` tree; depth may be math.inf or "inf".

    Infinite depth iterates until |dh| < tol, at most max_steps times, and
    flags non-convergence (which occurs only at criticality).
    """
    d = _normalize_depth(depth)
    if d == 0:
        return RootField(p.h_boundary, 0)
    h1 = ising_step(p.h_boundary, p)  # boundary step: handles +-inf
    if p.beta == 0.0:
        return RootField(p.h_bulk, 1 if d is math.inf else int(d))
    if d is not math.inf:
        h = ising_iterate_depth(h1, p.h_bulk, p.beta, p.n_br, int(d) - 1)
        return RootField(h, int(d))
    h, steps, status = ising_fixed_point(
        h1, p.h_bulk, p.beta, p.n_br, tol, 0.0, 0.0, max_steps
    )
    return RootField(h, steps + 1, status == 0)


def delta_h_root(p: IsingParams, depth, tol: float = 1e-13) -> float:
    """Root-field difference between all-up and all-down leaf boundaries.

    At h_bulk = 0 this is 2 * root_field(+inf) by the up/down symmetry of the
    map; the general form is kept so bulk fields break the tie correctly.
    """
    up = root_field(replace(p, h_boundary=math.inf), depth, tol)
    down = root_field(replace(p, h_boundary=-math.inf), depth, tol)
    return up.h_r - down.h_r


def boundary_field_scan(
    beta: float,
    h_bulk: float,
    h_leaf_values: Sequence[float],
    n_br: int = 2,
    depth="inf",
    tol: float = 1e-13,
) -> list:
    """Root response vs leaf field at fixed bulk field.

    Rows are (h_leaf, h_r, response) with response = h_r minus the all-down
    reference root field, so it jumps where the boundary condition stops
    selecting the lower branch.
    """
    ref = root_field(IsingParams(beta, h_bulk, n_br, -math.inf), depth, tol).h_r
    rows = []
    for hl in h_leaf_values:
        h_r = root_field(IsingParams(beta, h_bulk, n_br, hl), depth, tol).h_r
        rows.append((float(hl), h_r, h_r - ref))
    return rows


def _ordered_probe(beta: float, n_br: int) -> bool:
    """Does the h_bulk=0 map keep a positive fixed point from an all-up boundary?"""
    if n_br == 2:
        # fast path: iterate the conjugated rational map in t = tanh(beta h)
        val, steps, status = ising_probe_tspace(
            math.tanh(beta * 2.0), math.tanh(beta),
            _PROBE_REL_TOL, _PROBE_DEAD_EPS, _PROBE_MAX_STEPS,
        )
    else:
        val, steps, status = ising_fixed_point(
            float(n_br), 0.0, beta, n_br,
            0.0, _PROBE_REL_TOL, _PROBE_DEAD_EPS, _PROBE_MAX_STEPS,
        )
    if status == 1:
        return False
    if status == 2:
        raise RuntimeError(
            f"order probe undecided after {steps} steps; beta is "
            "indistinguishable from the critical point"
        )
    return val > 1e-9


def find_beta_c(lo: float = 0.2, hi: float = 1.2, n_br: int = 2,
                tol: float = 1e-6) -> float:
    """Bisect for the ordering transition at h_bulk = 0 (tanh beta_c = 1/n_br)."""
    if not (0 <= lo < hi):
        raise ValueError("need 0 <= lo < hi")
    if _ordered_probe(lo, n_br) or not _ordered_probe(hi, n_br):
        raise ValueError(f"[{lo}, {hi}] does not bracket the ordering transition")
    while hi - lo > tol:
        for frac in (0.5, 0.381966011250105):
            mid = lo + frac * (hi - lo)
            try:
                ordered = _ordered_probe(mid, n_br)
                break
            except RuntimeError:
                if frac != 0.5:
                    raise
        if ordered:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _upper_branch_survives(h: float, beta: float, n_br: int) -> bool:
    """From an all-up boundary with opposing bulk field -h, does the root stay up?

    The positive branch disappears by tangency at h_c; beyond it the iteration
    escapes to the negative fixed point.  Convergence degrades only like
    1/sqrt(distance) at a tangency, so a plain fixed-point run suffices.
    """
    p = IsingParams(beta, -h, n_br, math.inf)
    rf = root_field(p, math.inf, tol=1e-12, max_steps=10**8)
    if not rf.converged:
        raise RuntimeError(f"fixed point unconverged at h={h}")
    return rf.h_r > 0.0


def find_h_c(beta: float, lo: float = 0.0, hi: float = 1.0, n_br: int = 2,
             tol: float = 1e-4) -> float:
    """Bisect for the bulk-field strength where the opposed branch collapses.

    Requires tanh(beta) > 1/n_br (two branches must exist at h=0 to begin
    with).  The transition is first-order: the root field reached from the
    all-up boundary jumps discontinuously at h_c.
    """
    if math.tanh(beta) * n_br <= 1.0:
        raise ValueError("no first-order line below the ordering transition")
    if not _upper_branch_survives(lo, beta, n_br):
        raise ValueError("upper branch already gone at lo")
    if _upper_branch_survives(hi, beta, n_br):
        raise ValueError("upper branch still alive at hi; enlarge the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _upper_branch_survives(mid, beta, n_br):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
