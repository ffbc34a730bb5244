"""Monte Carlo simulation of finite-depth tree circuits.

Validates the c-state recursion from below: build the depth-D binary tree
circuit trajectory by trajectory (Bell-paired leaves, per-wire measurement
and decoherence, a sampled two-qubit Clifford per node, measure-and-trace),
classify the root against the surviving leaf qubits, and compare outcome
frequencies with the exact recursion.

Two engines share one positional random pool per trial (Philox stream keyed
by (seed, trial index), so trials are order-independent):

* ``packed`` -- the jitted sign-free bitset kernel, fast enough for 1e5+
  trials;
* ``reference`` -- the plain StabilizerTableau operations, slow but directly
  the dense-verified code path.

Identical per-trial pools make the engines comparable trial by trial, which
is how the kernel is tested.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from treephase._kernels import _pick, tree_trials_packed
from treephase.cliffords import TwoQubitClifford, conjugation_table
from treephase.markov import (
    CState,
    CStateDist,
    GateParams,
    NoiseParams,
    recursion_step,
)
from treephase.oracle import Ensemble, _normalize_ensemble
from treephase.tableau import StabilizerTableau, apply_clifford, classify_cstate, measure_z, trace_out

_HARD_QUBIT_CAP = 4096


def _pool_length(depth: int) -> int:
    # nw boundary draws; per level 3 per entering wire and 2 per node.
    return 9 * (1 << depth) - 8


def _trial_pool(seed: int, trial: int, length: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=[seed, trial]))
    return gen.random(length)


def _ensemble_tables(gates: list[tuple[TwoQubitClifford, object]]):
    luts = np.empty((len(gates), 16), dtype=np.int64)
    for i, (g, _) in enumerate(gates):
        table = conjugation_table(g)
        for idx in range(16):
            luts[i, idx] = table[idx][0]
    cumw = np.cumsum(np.array([float(w) for _, w in gates]))
    cumw[-1] = 1.0
    return luts, cumw


@dataclass(frozen=True)
class TreeSimResult:
    """Empirical c-state counts at the root of a depth-D tree."""

    depth: int
    trials: int
    seed: int
    counts: tuple[int, int, int, int]
    engine: str

    @property
    def freqs(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.float64) / self.trials

    @property
    def stderrs(self) -> np.ndarray:
        f = self.freqs
        return np.sqrt(f * (1.0 - f) / self.trials)

    def max_sigma(self, predicted: CStateDist) -> float:
        """Largest |empirical - predicted| in predicted-standard-error units.

        Standard errors use the predicted binomial variance, so entries the
        prediction puts at exactly 0 or 1 must match exactly (a single stray
        trajectory returns inf).
        """
        worst = 0.0
        pv = predicted.as_array()
        f = self.freqs
        for c in range(4):
            diff = abs(f[c] - pv[c])
            se = np.sqrt(pv[c] * (1.0 - pv[c]) / self.trials)
            if se == 0.0:
                if diff > 0.0:
                    return float("inf")
            else:
                worst = max(worst, diff / se)
        return worst


def recursion_prediction(depth: int, g: GateParams, n: NoiseParams, *,
                         r_leaves: Optional[float] = None) -> CStateDist:
    """Exact finite-depth c-state distribution the simulation must match."""
    if r_leaves is None:
        dist = CStateDist.pure()
    else:
        dist = CStateDist.leaf_mixture(r_leaves)
    for d in range(depth):
        dist = recursion_step(dist, g, n,
                              skip_channel=(d == 0 and r_leaves is not None))
    return dist


def _simulate_reference(depth, pools, gates, cumw, p, r, r_leaves, skip_first):
    """Plain-tableau twin of the packed kernel, same pool semantics."""
    nw = 1 << depth
    out = np.empty(pools.shape[0], dtype=np.int8)
    gate_list = [g for g, _ in gates]
    for t in range(pools.shape[0]):
        pool = pools[t]
        xs, zs, signs = [], [], []
        for i in range(nw):
            xs.append(1 << i | 1 << (nw + i)), zs.append(0), signs.append(0)
            xs.append(0), zs.append(1 << i | 1 << (nw + i)), signs.append(0)
        tab = StabilizerTableau(2 * nw, xs, zs, signs,
                                labels=("wire",) * nw + ("leaf",) * nw)
        pos = list(range(2 * nw))  # entity id -> tableau index

        def drop(entity):
            nonlocal tab
            q = pos[entity]
            tab = trace_out(tab, q)
            for e in range(2 * nw):
                if pos[e] > q:
                    pos[e] -= 1
            pos[entity] = -1

        def decohere(entity):
            nonlocal tab
            label = tab.labels[pos[entity]]
            drop(entity)
            tab = StabilizerTableau(tab.n + 1, list(tab.xs), list(tab.zs),
                                    list(tab.signs), tab.labels + (label,))
            pos[entity] = tab.n - 1

        def measure(entity, u_out):
            nonlocal tab
            _, tab = measure_z(tab, pos[entity], force=1 if u_out < 0.5 else -1)

        if r_leaves is not None and r_leaves > 0.0:
            for i in range(nw):
                if pool[i] < r_leaves:
                    decohere(nw + i)
        off = nw
        live = list(range(nw))
        for lev in range(1, depth + 1):
            m = len(live)
            if not (skip_first and lev == 1):
                for j, wire in enumerate(live):
                    if pool[off + 3 * j] < p:
                        measure(wire, pool[off + 3 * j + 1])
                    if pool[off + 3 * j + 2] < r:
                        decohere(wire)
            off += 3 * m
            new_live = []
            for jn in range(m // 2):
                a, b = live[2 * jn], live[2 * jn + 1]
                gi = _pick(cumw, pool[off + 2 * jn])
                tab = apply_clifford(tab, gate_list[gi], pos[a], pos[b])
                measure(a, pool[off + 2 * jn + 1])
                drop(a)
                new_live.append(b)
            off += 2 * (m // 2)
            live = new_live
        root_idx = pos[live[0]]
        leaf_idxs = [i for i, lab in enumerate(tab.labels) if lab == "leaf"]
        out[t] = int(classify_cstate(tab, root_idx, leaf_idxs))
    return out


def simulate_tree(depth: int,
                  ensemble: Optional[Ensemble] = None,
                  noise: NoiseParams = NoiseParams(0.0, 0.0), *,
                  r_leaves: Optional[float] = None,
                  trials: int = 10_000,
                  seed: int = 0,
                  engine: str = "packed",
                  max_qubits: Optional[int] = None,
                  chunk: int = 4096) -> TreeSimResult:
    """Sample depth-D tree trajectories and tally root c-states.

    ``r_leaves=None`` is the standard protocol: Bell boundary, bulk channel
    on every level including the first.  A float enables boundary mode: each
    leaf is decohered with that probability and the first level's bulk
    channel is skipped (the boundary mixture is already the post-channel
    distribution there), matching the recursion's boundary convention.
    """
    if not 1 <= depth <= 10:
        raise ValueError(f"depth={depth} outside [1, 10]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if r_leaves is not None and not 0.0 <= r_leaves <= 1.0:
        raise ValueError(f"r_leaves={r_leaves!r} outside [0, 1]")
    needed = 2 * (1 << depth)
    cap = min(_HARD_QUBIT_CAP,
              max_qubits if max_qubits is not None else needed + depth)
    if needed > cap:
        raise ValueError(f"depth {depth} needs {needed} qubits, cap is {cap}")
    if engine not in ("packed", "reference"):
        raise ValueError(f"unknown engine {engine!r}")

    gates = _normalize_ensemble(ensemble)
    luts, cumw = _ensemble_tables(gates)
    rl = -1.0 if r_leaves is None else float(r_leaves)
    skip_first = r_leaves is not None
    length = _pool_length(depth)

    counts = np.zeros(4, dtype=np.int64)
    done = 0
    while done < trials:
        batch = min(chunk, trials - done)
        pools = np.empty((batch, length), dtype=np.float64)
        for i in range(batch):
            pools[i] = _trial_pool(seed, done + i, length)
        if engine == "packed":
            cs = tree_trials_packed(depth, pools, luts, cumw,
                                    noise.p, noise.r, rl, skip_first)
        else:
            cs = _simulate_reference(depth, pools, gates, cumw,
                                     noise.p, noise.r, rl, skip_first)
        if np.any(cs < 0):
            raise RuntimeError("classification produced an impossible c-state")
        counts += np.bincount(cs, minlength=4)
        done += batch
    return TreeSimResult(depth=depth, trials=trials, seed=seed,
                         counts=tuple(int(c) for c in counts), engine=engine)
