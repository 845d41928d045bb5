"""Non-backtracking random walk on a PairedGraph.

The walk lives on half-edges: from ``x`` it jumps to a uniformly chosen
half-edge sharing a vertex with ``eta(x)``, other than ``eta(x)`` itself.
Its transition matrix is doubly stochastic, so the uniform law on half-edges
is stationary and distances are measured against it.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import _rng

RENORMALIZE_EVERY = 64
DRIFT_TOL = 1e-9
MONOTONE_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class NbrwOperator:
    """Row-stochastic transition structure of the walk.

    ``P`` is stored in CSR for row access; ``PT`` (its transpose, also CSR)
    is what distribution updates multiply by.
    """

    graph: object
    P: sp.csr_matrix
    PT: sp.csr_matrix

    @property
    def N(self):
        return self.P.shape[0]


def build_operator(graph):
    """Assemble the sparse transition matrix of the walk on ``graph``."""
    if np.any(graph.vertex_degrees < 2):
        raise ValueError("a vertex of degree 1 makes the walk absorbing; degrees must be >= 2")
    N = graph.N
    e = np.asarray(graph.eta)
    v = graph.owner[e]
    d = graph.vertex_degrees[v]
    rows = np.repeat(np.arange(N), d)
    # position of each entry inside its row's vertex block
    within = np.arange(rows.size) - np.repeat(np.cumsum(d) - d, d)
    cols = np.repeat(graph.offsets[v], d) + within
    keep = cols != e[rows]
    rows, cols = rows[keep], cols[keep]
    vals = 1.0 / (d[rows] - 1)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(N, N))
    P.sum_duplicates()
    return NbrwOperator(graph, P, P.T.tocsr())


def _renormalize(V):
    s = V.sum(axis=0)
    drift = np.max(np.abs(s - 1.0))
    if drift > DRIFT_TOL:
        raise FloatingPointError(f"probability mass drifted by {drift:.3e}")
    V /= s
    return V


def evolve(op, v, steps):
    """Return ``v P^steps``.

    ``v`` is a distribution of length N, or an (N, K) array whose columns are
    distributions evolved together.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    V = np.array(v, dtype=float, copy=True)
    if V.shape[0] != op.N:
        raise ValueError(f"distribution has length {V.shape[0]}, operator has {op.N} states")
    for k in range(1, steps + 1):
        V = op.PT @ V
        if k % RENORMALIZE_EVERY == 0:
            V = _renormalize(V)
    return V


def tv_distance(v, w):
    """Total-variation distance ``0.5 * sum |v - w|``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != w.shape:
        raise ValueError(f"length mismatch: {v.shape} vs {w.shape}")
    return 0.5 * float(np.abs(v - w).sum())


def distance_to_uniform(V):
    """``sum_y (1/N - V[y])_+`` for each column of V (or for a single vector)."""
    V = np.asarray(V, dtype=float)
    N = V.shape[0]
    return np.clip(1.0 / N - V, 0.0, None).sum(axis=0)


@dataclass
class DistanceProfile:
    """Distances ``D_x(t)`` for a set of starts over ``t = 0..t_max``.

    ``values[k, t]`` is the distance from start ``starts[k]`` at time ``t``;
    ``mass_0[k, t]`` is the probability of being in community 0.
    The aggregate is the max over the sampled starts, so it bounds the
    worst-case distance from below.
    """

    starts: np.ndarray
    values: np.ndarray
    mass_0: np.ndarray
    N: int
    start_community: np.ndarray = None
    stopped_early: bool = False

    @property
    def t_max(self):
        return self.values.shape[1] - 1

    @property
    def times(self):
        return np.arange(self.values.shape[1])

    @property
    def aggregate(self):
        return self.values.max(axis=0)


@dataclass(frozen=True)
class TmixEstimate:
    """First time the distance is strictly below ``eps``.

    ``value`` is None when the profile never gets there (censored);
    ``per_start`` has one entry per start, None where censored.
    """

    eps: float
    value: Optional[int]
    per_start: tuple = ()
    t_max: int = None

    @property
    def censored(self):
        return self.value is None

    @property
    def n_censored(self):
        return sum(v is None for v in self.per_start)


def first_below(values, eps):
    """Index of the first entry strictly below ``eps``, or None."""
    hits = np.flatnonzero(np.asarray(values) < eps)
    return int(hits[0]) if hits.size else None


def estimate_tmix(profile, eps):
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not isinstance(profile, DistanceProfile):
        values = np.asarray(profile, dtype=float)
        return TmixEstimate(eps, first_below(values, eps), (), len(values) - 1)
    per_start = tuple(first_below(row, eps) for row in profile.values)
    return TmixEstimate(eps, first_below(profile.aggregate, eps), per_start, profile.t_max)


def _check_monotone(values):
    jumps = np.diff(values, axis=1)
    if jumps.size and jumps.max() > MONOTONE_SLACK:
        raise FloatingPointError(f"distance increased by {jumps.max():.3e}")


def profile_from(op, V0, t_max, stop_below=None, starts=None):
    """Distance profile of each column of ``V0`` (an (N, K) array of laws).

    With ``stop_below`` set, evolution ends at the first time every column
    is strictly below that level.
    """
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    V = np.array(V0, dtype=float, copy=True)
    if V.ndim == 1:
        V = V[:, None]
    N0 = op.graph.spec.N0
    buf = np.empty_like(V)

    def dist_of(V):
        np.subtract(1.0 / op.N, V, out=buf)
        np.maximum(buf, 0.0, out=buf)
        return buf.sum(axis=0)

    dist = [dist_of(V)]
    mass = [V[:N0].sum(axis=0)]
    stopped = False
    for t in range(1, t_max + 1):
        V = op.PT @ V
        if t % RENORMALIZE_EVERY == 0:
            V = _renormalize(V)
        dist.append(dist_of(V))
        mass.append(V[:N0].sum(axis=0))
        if stop_below is not None and np.all(dist[-1] < stop_below):
            stopped = t < t_max
            break
    values = np.array(dist).T
    _check_monotone(values)
    if starts is None:
        starts = np.full(V.shape[1], -1)
    starts = np.asarray(starts)
    com = np.where(starts >= 0, np.asarray(op.graph.community)[np.maximum(starts, 0)], -1)
    return DistanceProfile(starts, values, np.array(mass).T, op.N, com, stopped)


def point_masses(N, starts):
    starts = np.asarray(starts, dtype=np.int64)
    V = np.zeros((N, starts.size))
    V[starts, np.arange(starts.size)] = 1.0
    return V


def distance_profile(op, starts, t_max, stop_below=None, batch=64):
    """Per-start distances to uniform for ``t = 0..t_max``.

    Starts are evolved ``batch`` at a time as columns of one dense block.
    """
    starts = np.atleast_1d(np.asarray(starts, dtype=np.int64))
    if starts.size == 0:
        raise ValueError("need at least one start")
    parts = [
        profile_from(op, point_masses(op.N, starts[i:i + batch]), t_max, stop_below, starts[i:i + batch])
        for i in range(0, starts.size, batch)
    ]
    width = max(p.values.shape[1] for p in parts)

    def pad(a):
        # an early-stopped batch holds its last value
        return np.hstack([a, np.repeat(a[:, -1:], width - a.shape[1], axis=1)])

    return DistanceProfile(
        starts,
        np.vstack([pad(p.values) for p in parts]),
        np.vstack([pad(p.mass_0) for p in parts]),
        op.N,
        np.concatenate([p.start_community for p in parts]),
        all(p.stopped_early for p in parts),
    )


def default_starts(graph, k=32, seed=0):
    """Half the starts uniform over all half-edges, a quarter forced into each community."""
    rng = _rng.generator(seed, _rng.WALK, 0)
    N0, N = graph.spec.N0, graph.N
    per_side = k // 4
    forced0 = rng.choice(N0, size=min(per_side, N0), replace=False)
    forced1 = N0 + rng.choice(N - N0, size=min(per_side, N - N0), replace=False)
    taken = np.concatenate([forced0, forced1])
    rest = np.setdiff1d(np.arange(N), taken)
    uniform = rng.choice(rest, size=min(k - taken.size, rest.size), replace=False)
    return np.concatenate([uniform, forced0, forced1]).astype(np.int64)


def _step(graph, x, u):
    """One vectorized move from half-edges ``x`` using uniforms ``u`` in [0, 1)."""
    e = graph.eta[x]
    v = graph.owner[e]
    d = graph.vertex_degrees[v]
    y = graph.offsets[v] + np.floor(u * (d - 1)).astype(np.int64)
    return y + (y >= e)


def sample_trajectory(graph, x0, steps, seed):
    """A walk path of length ``steps + 1`` starting at ``x0``."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    rng = _rng.generator(seed, _rng.WALK, 1)
    u = rng.random(steps)
    path = np.empty(steps + 1, dtype=np.int64)
    path[0] = x0
    x = np.array([x0], dtype=np.int64)
    for k in range(steps):
        x = _step(graph, x, u[k:k + 1])
        path[k + 1] = x[0]
    return path


def sample_positions(graph, x0, steps, n_samples, seed, record=None):
    """Run ``n_samples`` independent walks for ``steps`` steps.

    ``x0`` is an array of starting half-edges (one per walk). ``record`` is
    an optional callback ``record(t, positions)`` called at every time.
    Returns the final positions.
    """
    rng = _rng.generator(seed, _rng.WALK, 2)
    x = np.broadcast_to(np.asarray(x0, dtype=np.int64), (n_samples,)).copy()
    if record is not None:
        record(0, x)
    for t in range(1, steps + 1):
        x = _step(graph, x, rng.random(n_samples))
        if record is not None:
            record(t, x)
    return x


@dataclass(frozen=True)
class OccupancyCurve:
    """Monte Carlo estimate of ``P(X_t in community 0)`` with standard errors."""

    freq: np.ndarray
    stderr: np.ndarray
    n_samples: int

    @property
    def times(self):
        return np.arange(self.freq.size)


def community_occupancy(graph, x0, t_max, n_samples, seed, start_side=None):
    """Empirical ``P(X_t in H_0)`` for ``t = 0..t_max``.

    Every walk starts at half-edge ``x0``; pass ``x0=None`` and
    ``start_side=i`` to start each walk at a uniform half-edge of
    community ``i`` instead.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    N0 = graph.spec.N0
    if x0 is None:
        if start_side not in (0, 1):
            raise ValueError("give a start half-edge or start_side in {0, 1}")
        rng = _rng.generator(seed, _rng.WALK, 3)
        lo, hi = (0, N0) if start_side == 0 else (N0, graph.N)
        starts = rng.integers(lo, hi, size=n_samples)
    else:
        starts = np.full(n_samples, int(x0))
    freq = np.empty(t_max + 1)

    def record(t, x):
        freq[t] = np.count_nonzero(x < N0) / n_samples

    sample_positions(graph, starts, t_max, n_samples, seed, record)
    return OccupancyCurve(freq, np.sqrt(freq * (1 - freq) / n_samples), n_samples)


def conductance(graph, side, op=None):
    """Stationary flow out of community ``side`` divided by its mass."""
    if op is None:
        op = build_operator(graph)
    inside = np.asarray(graph.community) == side
    # uniform stationary law: pi(x) = 1/N cancels between numerator and mass
    flow = op.P[inside][:, ~inside].sum()
    return float(flow / inside.sum())


def root_radius(N, max_degree):
    return math.ceil(math.log(N) / (6 * math.log(max_degree)))


@dataclass(frozen=True)
class RootReport:
    R: int
    fraction: float
    is_root: np.ndarray = field(repr=False, default=None)


def _vertex_ball_is_tree(eta, owner, off, u, R):
    depth = {u: 0}
    frontier = [u]
    edges = set()
    for level in range(R):
        nxt = []
        for w in frontier:
            for h in range(off[w], off[w + 1]):
                g = eta[h]
                edges.add(min(h, g))
                nb = owner[g]
                if nb not in depth:
                    depth[nb] = level + 1
                    nxt.append(nb)
        frontier = nxt
        if len(edges) > len(depth) - 1:
            return False
    return len(edges) == len(depth) - 1


def root_fraction(graph, R=None):
    """Fraction of half-edges whose radius-``R`` ball is a tree.

    The ball around half-edge ``x`` is explored from the vertex owning ``x``:
    every edge at a vertex within distance ``R - 1`` is revealed. Self-loops
    and parallel edges count as cycles. By default
    ``R = ceil(log N / (6 log max_degree))``.
    """
    if R is None:
        R = root_radius(graph.N, int(graph.vertex_degrees.max()))
    eta, owner, off = graph.eta.tolist(), graph.owner.tolist(), graph.offsets.tolist()
    tree_vertex = np.array(
        [_vertex_ball_is_tree(eta, owner, off, u, R) for u in range(len(off) - 1)]
    )
    is_root = tree_vertex[graph.owner]
    return RootReport(R, float(is_root.mean()), is_root)
