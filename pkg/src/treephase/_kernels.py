"""Jitted inner loops for the c-state recursion and the Ising tree recursion.

Near a continuous threshold the recursion converges algebraically (the
contraction rate approaches 1 like 1 - c*dist), so threshold probes can need
1e7-1e9 iterations; these loops run at ~10 ns/iteration once compiled.  The
pure-Python reference implementations in markov.py / isingtree.py stay the
source of truth and the kernels are cross-validated against them in tests.

Status codes:
    iterate_schedule: 0 converged, 1 hit max_steps, 2 negative probability
    probe_schedule:   0 converged, 1 watched component dead, 2 hit max_steps,
                      3 negative probability
    ising_fixed_point: 0 converged, 1 dead (|h| < dead_eps), 2 hit max_steps
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

# Watched-component selectors for probe_schedule.
WATCH_P2 = 0
WATCH_P2P1 = 1

_NEG_CLAMP = -1e-15
_ATANH_CLAMP = 1.0 - 1e-15


@njit(cache=True, inline="always")
def _layer(p2, p1, ps, pm, a, b, g, p, r, use_channel):
    """One depth layer: wire channel (optional) then the node-average update."""
    if use_channel:
        keep = (1.0 - r) * (1.0 - p)
        t2 = keep * p2
        t1 = keep * p1
        ts = (1.0 - r) * (p + (1.0 - p) * ps)
        tm = r + keep * pm
    else:
        t2 = p2
        t1 = p1
        ts = ps
        tm = pm
    ab = 1.0 - a
    n2 = t2 * (t2 + 2.0 * (a * (t1 + ts) + a * b * tm))
    n1 = (
        t1 * (t1 + 2.0 * (ab * t2 + a * ts + ab * tm))
        + 2.0 * (a * (1.0 - b) + ab * (1.0 - g)) * t2 * tm
    )
    ns = ts * (ts + 2.0 * ab * (t2 + t1 + tm))
    nm = tm * (tm + 2.0 * (ab * g * t2 + a * (t1 + ts)))
    return n2, n1, ns, nm


@njit(cache=True, inline="always")
def _clamp_renorm(n2, n1, ns, nm):
    """Clamp tiny negative round-off to 0 and renormalize; flag real negatives."""
    bad = False
    if n2 < 0.0 or n1 < 0.0 or ns < 0.0 or nm < 0.0:
        if n2 < _NEG_CLAMP or n1 < _NEG_CLAMP or ns < _NEG_CLAMP or nm < _NEG_CLAMP:
            bad = True
        n2 = max(n2, 0.0)
        n1 = max(n1, 0.0)
        ns = max(ns, 0.0)
        nm = max(nm, 0.0)
    s = n2 + n1 + ns + nm
    return n2 / s, n1 / s, ns / s, nm / s, bad


@njit(cache=True)
def iterate_schedule(initial, params, tol, max_steps, skip_first_channel):
    """Iterate the periodic schedule from ``initial`` until converged.

    params has one row per schedule entry: (alpha, beta, gamma, p, r).
    Convergence: max-norm change of P over one full period < tol.  Runs whole
    periods only; max_steps caps the number of layers applied.
    """
    nper = params.shape[0]
    p2, p1, ps, pm = initial[0], initial[1], initial[2], initial[3]
    steps = 0
    pos = 0
    if skip_first_channel:
        a, b, g = params[0, 0], params[0, 1], params[0, 2]
        p2, p1, ps, pm = _layer(p2, p1, ps, pm, a, b, g, 0.0, 0.0, False)
        p2, p1, ps, pm, bad = _clamp_renorm(p2, p1, ps, pm)
        if bad:
            return np.array((p2, p1, ps, pm)), 1, math.inf, 2
        steps = 1
        pos = 1
    residual = math.inf
    while steps + nper <= max_steps or steps == (1 if skip_first_channel else 0):
        o2, o1, os_, om = p2, p1, ps, pm
        for j in range(nper):
            row = (pos + j) % nper
            a, b, g = params[row, 0], params[row, 1], params[row, 2]
            p, r = params[row, 3], params[row, 4]
            p2, p1, ps, pm = _layer(p2, p1, ps, pm, a, b, g, p, r, True)
            p2, p1, ps, pm, bad = _clamp_renorm(p2, p1, ps, pm)
            if bad:
                return np.array((p2, p1, ps, pm)), steps + j + 1, math.inf, 2
        steps += nper
        residual = max(
            abs(p2 - o2), abs(p1 - o1), abs(ps - os_), abs(pm - om)
        )
        if residual < tol:
            return np.array((p2, p1, ps, pm)), steps, residual, 0
    return np.array((p2, p1, ps, pm)), steps, residual, 1


@njit(cache=True)
def probe_schedule(initial, params, rel_tol, dead_eps, watch, max_steps,
                   skip_first_channel):
    """Phase-predicate probe: like iterate_schedule but with exits tuned for
    classification near thresholds.

    - converged: every component either changed by <= rel_tol * its magnitude
      over one period (an absolute test would stall on a slowly dying component
      at a value far above the classification eps) or sits below dead_eps
      (components heading to zero otherwise block relative convergence until
      they underflow, ~7e8 layers when the decay rate is within 1e-6 of 1);
    - dead: the watched component (p2, or p2+p1) fell below dead_eps while not
      increasing.  It cannot recover from there: its per-layer multiplier is
      continuous along the slowly-moving trajectory and was already < 1 on the
      way down, and sub-dead_eps components are only ever reseeded by the
      channel at O(p) or O(r), never by round-off.
    """
    nper = params.shape[0]
    p2, p1, ps, pm = initial[0], initial[1], initial[2], initial[3]
    steps = 0
    pos = 0
    if skip_first_channel:
        a, b, g = params[0, 0], params[0, 1], params[0, 2]
        p2, p1, ps, pm = _layer(p2, p1, ps, pm, a, b, g, 0.0, 0.0, False)
        p2, p1, ps, pm, bad = _clamp_renorm(p2, p1, ps, pm)
        if bad:
            return np.array((p2, p1, ps, pm)), 1, 3
        steps = 1
        pos = 1
    w_prev = math.inf
    while steps + nper <= max_steps:
        o2, o1, os_, om = p2, p1, ps, pm
        for j in range(nper):
            row = (pos + j) % nper
            a, b, g = params[row, 0], params[row, 1], params[row, 2]
            p, r = params[row, 3], params[row, 4]
            p2, p1, ps, pm = _layer(p2, p1, ps, pm, a, b, g, p, r, True)
            p2, p1, ps, pm, bad = _clamp_renorm(p2, p1, ps, pm)
            if bad:
                return np.array((p2, p1, ps, pm)), steps + j + 1, 3
        steps += nper
        w = p2 if watch == WATCH_P2 else p2 + p1
        if w < dead_eps and w <= w_prev:
            return np.array((p2, p1, ps, pm)), steps, 1
        w_prev = w
        if (
            (abs(p2 - o2) <= rel_tol * max(p2, o2) or max(p2, o2) < dead_eps)
            and (abs(p1 - o1) <= rel_tol * max(p1, o1) or max(p1, o1) < dead_eps)
            and (abs(ps - os_) <= rel_tol * max(ps, os_) or max(ps, os_) < dead_eps)
            and (abs(pm - om) <= rel_tol * max(pm, om) or max(pm, om) < dead_eps)
        ):
            return np.array((p2, p1, ps, pm)), steps, 0
    return np.array((p2, p1, ps, pm)), steps, 2


@njit(cache=True)
def ising_fixed_point(h1, h_bulk, beta, n_br, abs_tol, rel_tol, dead_eps,
                      max_steps):
    """Iterate h -> h_bulk + (n_br/beta) atanh(tanh(beta h) tanh(beta)).

    h1 is the (finite) field after the boundary step.  Stops on |dh| <= abs_tol
    or |dh| <= rel_tol * |h|, or on |h| < dead_eps (only meaningful when
    h_bulk == 0, where h = 0 is the disordered fixed point).
    """
    tb = math.tanh(beta)
    h = h1
    for i in range(max_steps):
        arg = math.tanh(beta * h) * tb
        if arg > _ATANH_CLAMP:
            arg = _ATANH_CLAMP
        elif arg < -_ATANH_CLAMP:
            arg = -_ATANH_CLAMP
        hn = h_bulk + (n_br / beta) * math.atanh(arg)
        d = abs(hn - h)
        h = hn
        if d <= abs_tol or d <= rel_tol * abs(h):
            return h, i + 1, 0
        if dead_eps > 0.0 and abs(h) < dead_eps:
            return h, i + 1, 1
    return h, max_steps, 2


@njit(cache=True)
def ising_probe_tspace(t1, tb, rel_tol, dead_eps, max_steps):
    """Ordering probe for h_bulk = 0, n_br = 2 in the variable t = tanh(beta h).

    There the recursion h -> (2/beta) atanh(tanh(beta h) tanh(beta)) conjugates
    to the rational map t -> 2u/(1+u^2) with u = tanh(beta) * t, avoiding two
    transcendental calls per layer (the bisection for beta_c spends ~1e8 layers
    on its near-critical probes).  Exits as ising_fixed_point: 0 converged,
    1 dead, 2 maxed.
    """
    t = t1
    for i in range(max_steps):
        u = tb * t
        tn = 2.0 * u / (1.0 + u * u)
        d = abs(tn - t)
        t = tn
        if d <= rel_tol * abs(t):
            return t, i + 1, 0
        if abs(t) < dead_eps:
            return t, i + 1, 1
    return t, max_steps, 2


@njit(cache=True)
def ising_iterate_depth(h1, h_bulk, beta, n_br, depth):
    """Apply exactly ``depth`` recursion steps starting from h1 (post-boundary)."""
    tb = math.tanh(beta)
    h = h1
    for _ in range(depth):
        arg = math.tanh(beta * h) * tb
        if arg > _ATANH_CLAMP:
            arg = _ATANH_CLAMP
        elif arg < -_ATANH_CLAMP:
            arg = -_ATANH_CLAMP
        h = h_bulk + (n_br / beta) * math.atanh(arg)
    return h


# ---------------------------------------------------------------------------
# Packed sign-free tableau kernel for tree Monte Carlo
# ---------------------------------------------------------------------------
# Rows are Pauli generators as multi-word uint64 bitmasks (one x array, one z
# array); signs are dropped because the c-state classification is provably
# outcome-independent (asserted separately by the exact-W machinery).  Qubit
# slots are fixed for the whole trial: tracing a qubit just removes every
# generator's support on its slot, which doubles as "replace by a fresh
# maximally mixed qubit" for decoherence.  The pure-Python reference engine
# consumes the identical positional random pool, so per-trial outcomes of the
# two engines are comparable element by element.

_U0 = np.uint64(0)
_U1 = np.uint64(1)


@njit(cache=True, inline="always")
def _getbit(arr, row, q):
    return (arr[row, q >> 6] >> np.uint64(q & 63)) & _U1


@njit(cache=True, inline="always")
def _setbit(arr, row, q, v):
    m = _U1 << np.uint64(q & 63)
    if v:
        arr[row, q >> 6] |= m
    else:
        arr[row, q >> 6] &= ~m


@njit(cache=True, inline="always")
def _row_xor(xs, zs, dst, src, nwords):
    for w in range(nwords):
        xs[dst, w] ^= xs[src, w]
        zs[dst, w] ^= zs[src, w]


@njit(cache=True, inline="always")
def _row_copy(xs, zs, dst, src, nwords):
    for w in range(nwords):
        xs[dst, w] = xs[src, w]
        zs[dst, w] = zs[src, w]


@njit(cache=True, inline="always")
def _msb(word):
    b = 0
    while word > _U1:
        word >>= _U1
        b += 1
    return b


@njit(cache=True)
def _pick(cumw, u):
    """First index with cumw[idx] > u (np.searchsorted side='right')."""
    lo, hi = 0, cumw.shape[0]
    while lo < hi:
        mid = (lo + hi) >> 1
        if cumw[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    if lo >= cumw.shape[0]:
        lo = cumw.shape[0] - 1
    return lo


@njit(cache=True)
def _rank_masked(xs, zs, k, mask, tx, tz, pivbit):
    """GF(2) rank of the k rows with both halves masked to ``mask`` columns.

    Greedy xor-basis: each accepted row is stored with its leading bit
    (z half counted above the x half); candidates are reduced by every pivot
    whose leading bit they carry.
    """
    nwords = mask.shape[0]
    rank = 0
    for row in range(k):
        for w in range(nwords):
            tx[rank, w] = xs[row, w] & mask[w]
            tz[rank, w] = zs[row, w] & mask[w]
        for t in range(rank):
            b = pivbit[t]
            if b >= 64 * nwords:
                bb = b - 64 * nwords
                hit = (tz[rank, bb >> 6] >> np.uint64(bb & 63)) & _U1
            else:
                hit = (tx[rank, b >> 6] >> np.uint64(b & 63)) & _U1
            if hit:
                _row_xor(tx, tz, rank, t, nwords)
        lead = -1
        for w in range(nwords - 1, -1, -1):
            if tz[rank, w] != _U0:
                lead = 64 * nwords + 64 * w + _msb(tz[rank, w])
                break
        if lead < 0:
            for w in range(nwords - 1, -1, -1):
                if tx[rank, w] != _U0:
                    lead = 64 * w + _msb(tx[rank, w])
                    break
        if lead >= 0:
            pivbit[rank] = lead
            rank += 1
    return rank


@njit(cache=True)
def _member_z(xs, zs, k, q, tx, tz, pivbit):
    """Is Z_q (mod sign) in the row space? (All rows commute with Z_q here.)"""
    nwords = xs.shape[1]
    rank = 0
    for row in range(k):
        for w in range(nwords):
            tx[rank, w] = xs[row, w]
            tz[rank, w] = zs[row, w]
        for t in range(rank):
            b = pivbit[t]
            if b >= 64 * nwords:
                bb = b - 64 * nwords
                hit = (tz[rank, bb >> 6] >> np.uint64(bb & 63)) & _U1
            else:
                hit = (tx[rank, b >> 6] >> np.uint64(b & 63)) & _U1
            if hit:
                _row_xor(tx, tz, rank, t, nwords)
        lead = -1
        for w in range(nwords - 1, -1, -1):
            if tz[rank, w] != _U0:
                lead = 64 * nwords + 64 * w + _msb(tz[rank, w])
                break
        if lead < 0:
            for w in range(nwords - 1, -1, -1):
                if tx[rank, w] != _U0:
                    lead = 64 * w + _msb(tx[rank, w])
                    break
        if lead >= 0:
            pivbit[rank] = lead
            rank += 1
    # reduce the Z_q candidate against the basis
    for w in range(nwords):
        tx[rank, w] = _U0
        tz[rank, w] = _U0
    _setbit(tz, rank, q, 1)
    for t in range(rank):
        b = pivbit[t]
        if b >= 64 * nwords:
            bb = b - 64 * nwords
            hit = (tz[rank, bb >> 6] >> np.uint64(bb & 63)) & _U1
        else:
            hit = (tx[rank, b >> 6] >> np.uint64(b & 63)) & _U1
        if hit:
            _row_xor(tx, tz, rank, t, nwords)
    for w in range(nwords):
        if tx[rank, w] != _U0 or tz[rank, w] != _U0:
            return False
    return True


@njit(cache=True)
def _t_measure(xs, zs, k, q, tx, tz, pivbit):
    """Sign-free Z measurement on slot q; returns the new row count."""
    nwords = xs.shape[1]
    pivot = -1
    for row in range(k):
        if _getbit(xs, row, q):
            pivot = row
            break
    if pivot >= 0:
        for row in range(k):
            if row != pivot and _getbit(xs, row, q):
                _row_xor(xs, zs, row, pivot, nwords)
        for w in range(nwords):
            xs[pivot, w] = _U0
            zs[pivot, w] = _U0
        _setbit(zs, pivot, q, 1)
        return k
    if _member_z(xs, zs, k, q, tx, tz, pivbit):
        return k  # deterministic outcome, state unchanged
    for w in range(nwords):
        xs[k, w] = _U0
        zs[k, w] = _U0
    _setbit(zs, k, q, 1)
    return k + 1


@njit(cache=True)
def _t_trace(xs, zs, k, q):
    """Trace slot q out in place; the slot stays allocated but unconstrained."""
    nwords = xs.shape[1]
    piv_a = -1
    for row in range(k):
        if _getbit(xs, row, q):
            if piv_a < 0:
                piv_a = row
            else:
                _row_xor(xs, zs, row, piv_a, nwords)
    piv_b = -1
    for row in range(k):
        if row != piv_a and _getbit(zs, row, q):
            if piv_b < 0:
                piv_b = row
            else:
                _row_xor(xs, zs, row, piv_b, nwords)
    hi = max(piv_a, piv_b)
    lo = min(piv_a, piv_b)
    if hi >= 0:
        if hi != k - 1:
            _row_copy(xs, zs, hi, k - 1, nwords)
        k -= 1
    if lo >= 0:
        if lo != k - 1:
            _row_copy(xs, zs, lo, k - 1, nwords)
        k -= 1
    return k


@njit(cache=True)
def _t_apply(luts, gi, xs, zs, k, q1, q2):
    """Conjugate every row through gate gi's lookup table on slots (q1, q2)."""
    for row in range(k):
        idx = (int(_getbit(xs, row, q1))
               + 2 * int(_getbit(zs, row, q1))
               + 4 * int(_getbit(xs, row, q2))
               + 8 * int(_getbit(zs, row, q2)))
        if idx == 0:
            continue
        nb = luts[gi, idx]
        _setbit(xs, row, q1, nb & 1)
        _setbit(zs, row, q1, (nb >> 1) & 1)
        _setbit(xs, row, q2, (nb >> 2) & 1)
        _setbit(zs, row, q2, (nb >> 3) & 1)


@njit(cache=True)
def _tree_trial(depth, pool, luts, cumw, p, r, r_leaves, skip_first,
                xs, zs, tx, tz, pivbit, live, m_root, m_leaf, m_both):
    """One tree trajectory; returns the root's c-state index (or -1 on bug).

    Pool layout (positional, identical for both engines): nw boundary draws,
    then per level: 3 draws per entering wire (measure?, outcome, decohere?)
    followed by 2 per node (gate pick, node outcome).  Draws are consumed
    positionally so disabled branches cost nothing and never shift alignment.
    """
    nw = 1 << depth
    nq = 2 * nw
    nwords = xs.shape[1]
    for row in range(nq):
        for w in range(nwords):
            xs[row, w] = _U0
            zs[row, w] = _U0
    k = nq
    for i in range(nw):
        _setbit(xs, 2 * i, i, 1)
        _setbit(xs, 2 * i, nw + i, 1)
        _setbit(zs, 2 * i + 1, i, 1)
        _setbit(zs, 2 * i + 1, nw + i, 1)
    if r_leaves > 0.0:
        for i in range(nw):
            if pool[i] < r_leaves:
                k = _t_trace(xs, zs, k, nw + i)
    off = nw
    for i in range(nw):
        live[i] = i
    m = nw
    for lev in range(1, depth + 1):
        use_ch = not (skip_first and lev == 1)
        if use_ch:
            for j in range(m):
                wq = live[j]
                if pool[off + 3 * j] < p:
                    k = _t_measure(xs, zs, k, wq, tx, tz, pivbit)
                if pool[off + 3 * j + 2] < r:
                    k = _t_trace(xs, zs, k, wq)
        off += 3 * m
        nn = m >> 1
        for jn in range(nn):
            a = live[2 * jn]
            b = live[2 * jn + 1]
            gi = _pick(cumw, pool[off + 2 * jn])
            _t_apply(luts, gi, xs, zs, k, a, b)
            k = _t_measure(xs, zs, k, a, tx, tz, pivbit)
            k = _t_trace(xs, zs, k, a)
            live[jn] = b
        off += 2 * nn
        m = nn
    r_root = _rank_masked(xs, zs, k, m_root, tx, tz, pivbit)
    r_leafc = _rank_masked(xs, zs, k, m_leaf, tx, tz, pivbit)
    r_both = _rank_masked(xs, zs, k, m_both, tx, tz, pivbit)
    info = r_root + r_leafc - r_both - k
    if info == 2:
        return 0
    if info == 1:
        return 1
    if info == 0:
        s_root = 1 - k + r_root
        if s_root == 0:
            return 2
        if s_root == 1:
            return 3
    return -1


@njit(cache=True)
def tree_trials_packed(depth, pools, luts, cumw, p, r, r_leaves, skip_first):
    """Run one packed trial per pool row; returns int8 c-state indices."""
    nw = 1 << depth
    nq = 2 * nw
    nwords = (nq + 63) >> 6
    xs = np.zeros((nq + 1, nwords), dtype=np.uint64)
    zs = np.zeros((nq + 1, nwords), dtype=np.uint64)
    tx = np.zeros((nq + 2, nwords), dtype=np.uint64)
    tz = np.zeros((nq + 2, nwords), dtype=np.uint64)
    pivbit = np.zeros(nq + 2, dtype=np.int64)
    live = np.zeros(nw, dtype=np.int64)
    # The surviving wire is always the last one; masks are complements of the
    # root slot, the leaf slots (upper half), and their union.
    root = nw - 1
    m_root = np.zeros(nwords, dtype=np.uint64)
    m_leaf = np.zeros(nwords, dtype=np.uint64)
    m_both = np.zeros(nwords, dtype=np.uint64)
    for q in range(nq):
        _setbit(m_root.reshape(1, nwords), 0, q, 1)
        if q < nw:
            _setbit(m_leaf.reshape(1, nwords), 0, q, 1)
    _setbit(m_root.reshape(1, nwords), 0, root, 0)
    for w in range(nwords):
        m_both[w] = m_leaf[w]
    _setbit(m_both.reshape(1, nwords), 0, root, 0)
    out = np.empty(pools.shape[0], dtype=np.int8)
    for t in range(pools.shape[0]):
        out[t] = _tree_trial(depth, pools[t], luts, cumw, p, r, r_leaves,
                             skip_first, xs, zs, tx, tz, pivbit, live,
                             m_root, m_leaf, m_both)
    return out
