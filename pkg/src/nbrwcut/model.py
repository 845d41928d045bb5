"""Two-community configuration model.

Half-edges are numbered with the vertices of community 0 first, each vertex
owning a contiguous block of ``d(v)`` indices, then the vertices of
community 1. ``N0`` half-edges live in community 0 and ``N1`` in community 1.

A graph is drawn in three independent phases: ``p`` outgoing half-edges are
chosen uniformly in each community, the internal half-edges of each community
are paired uniformly, and the two outgoing sets are matched uniformly.
Self-loops and multi-edges are kept.
"""
import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _rng

INTERNAL = "internal"
OUTGOING = "outgoing"

CUTOFF = "cutoff-regime"
CRITICAL = "critical"
NO_CUTOFF = "no-cutoff-regime"


class SpecError(ValueError):
    """A community specification that violates the model constraints."""


@dataclass(frozen=True)
class RegimeThresholds:
    """Finite-N proxy for the asymptotic regimes, on ``c = alpha * log N``."""

    cutoff: float = 10.0
    no_cutoff: float = 0.1

    def classify(self, c):
        if c >= self.cutoff:
            return CUTOFF
        if c <= self.no_cutoff:
            return NO_CUTOFF
        return CRITICAL


@dataclass(frozen=True)
class CommunitySpec:
    degrees_0: tuple
    degrees_1: tuple
    p: int

    def __post_init__(self):
        object.__setattr__(self, "degrees_0", tuple(int(d) for d in self.degrees_0))
        object.__setattr__(self, "degrees_1", tuple(int(d) for d in self.degrees_1))
        object.__setattr__(self, "p", int(self.p))

    @property
    def N0(self):
        return sum(self.degrees_0)

    @property
    def N1(self):
        return sum(self.degrees_1)

    @property
    def N(self):
        return self.N0 + self.N1

    @property
    def n_vertices(self):
        return len(self.degrees_0) + len(self.degrees_1)

    @property
    def alpha0(self):
        return self.p / self.N0

    @property
    def alpha1(self):
        return self.p / self.N1

    @property
    def alpha(self):
        return self.alpha0 + self.alpha1

    @property
    def max_degree(self):
        return max(self.degrees_0 + self.degrees_1)

    @property
    def min_degree(self):
        return min(self.degrees_0 + self.degrees_1)

    def to_dict(self):
        return {"degrees_0": list(self.degrees_0), "degrees_1": list(self.degrees_1), "p": self.p}

    def spec_hash(self):
        """Stable SHA-256 of the canonical JSON form (hex, 16 chars)."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ValidationReport:
    model_valid: bool
    theorem_regime: bool
    alpha: float
    c: float
    regime_hint: str
    problems: tuple = ()


def validate_spec(spec, thresholds=RegimeThresholds()):
    """Check model constraints and report which regime the spec sits in.

    Never raises; every failed constraint is listed in ``problems``.
    """
    problems = []
    degs = list(spec.degrees_0) + list(spec.degrees_1)
    if not spec.degrees_0 or not spec.degrees_1:
        problems.append("both communities must be non-empty")
    if any(d < 2 for d in degs):
        problems.append("every vertex degree must be >= 2")
    N0, N1 = spec.N0, spec.N1
    if N0 % 2:
        problems.append(f"N0 = {N0} is odd")
    if N1 % 2:
        problems.append(f"N1 = {N1} is odd")
    if spec.p % 2:
        problems.append(f"p = {spec.p} is odd")
    if spec.p < 2 or spec.p > min(N0, N1):
        problems.append(f"p = {spec.p} outside [2, min(N0, N1) = {min(N0, N1)}]")
    model_valid = not problems

    if N0 > 0 and N1 > 0:
        alpha = spec.p / N0 + spec.p / N1
        c = alpha * math.log(N0 + N1)
        hint = thresholds.classify(c)
    else:
        alpha, c, hint = float("nan"), float("nan"), CRITICAL

    theorem_regime = model_valid and min(degs) >= 3 and alpha <= 1.0
    if model_valid and not theorem_regime:
        if min(degs) < 3:
            problems.append("theorem regime needs min degree >= 3")
        if alpha > 1.0:
            problems.append("theorem regime needs alpha0 + alpha1 <= 1")
    return ValidationReport(model_valid, theorem_regime, alpha, c, hint, tuple(problems))


def require_valid(spec):
    report = validate_spec(spec)
    if not report.model_valid:
        raise SpecError("; ".join(report.problems))
    return report


def half_edge_layout(spec):
    """Vertex degrees, per-vertex offsets and per-half-edge owner (all read-only)."""
    degrees = np.array(spec.degrees_0 + spec.degrees_1, dtype=np.int64)
    offsets = np.zeros(degrees.size + 1, dtype=np.int64)
    np.cumsum(degrees, out=offsets[1:])
    owner = np.repeat(np.arange(degrees.size), degrees)
    for a in (degrees, offsets, owner):
        a.setflags(write=False)
    return degrees, offsets, owner


@dataclass(frozen=True, eq=False)
class PairedGraph:
    """A realized pairing ``eta`` on the half-edges of ``spec``.

    Arrays are read-only. ``outgoing[x]`` is True when ``x`` is matched
    across communities.
    """

    spec: CommunitySpec
    eta: np.ndarray
    outgoing: np.ndarray
    seed: int = None

    def __post_init__(self):
        for name in ("eta", "outgoing"):
            arr = np.array(getattr(self, name), copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_pairing(cls, spec, eta, seed=None):
        """Build a graph from an explicit involution, inferring types."""
        require_valid(spec)
        eta = np.asarray(eta, dtype=np.int64)
        N0, N = spec.N0, spec.N
        if eta.shape != (N,):
            raise SpecError(f"pairing has length {eta.shape}, expected {N}")
        idx = np.arange(N)
        if eta.min() < 0 or eta.max() >= N or np.any(eta[eta] != idx) or np.any(eta == idx):
            raise SpecError("pairing is not a fixed-point-free involution")
        community = (idx >= N0)
        outgoing = community != community[eta]
        if outgoing[:N0].sum() != spec.p or outgoing[N0:].sum() != spec.p:
            raise SpecError("pairing does not have exactly p crossing half-edges per side")
        return cls(spec, eta, outgoing, seed)

    @property
    def N(self):
        return self.spec.N

    @cached_property
    def _layout(self):
        return half_edge_layout(self.spec)

    @property
    def vertex_degrees(self):
        return self._layout[0]

    @property
    def offsets(self):
        """``offsets[v]:offsets[v+1]`` are the half-edges of vertex ``v``."""
        return self._layout[1]

    @property
    def owner(self):
        return self._layout[2]

    @cached_property
    def community(self):
        com = (np.arange(self.N) >= self.spec.N0).astype(np.int8)
        com.setflags(write=False)
        return com

    @cached_property
    def deg(self):
        """Half-edge degree: number of other half-edges at the same vertex."""
        d = self.vertex_degrees[self.owner] - 1
        d.setflags(write=False)
        return d

    def type_of(self, x):
        return OUTGOING if self.outgoing[x] else INTERNAL

    def to_edge_list(self):
        return [
            {"x": int(x), "eta": int(y), "type": self.type_of(x)}
            for x, y in enumerate(self.eta)
        ]


def _uniform_pairing(ids, rng):
    ids = np.array(ids, dtype=np.int64)
    rng.shuffle(ids)
    return ids[0::2], ids[1::2]


def generate_graph(spec, seed):
    """Sample a PairedGraph from the two-community model.

    Deterministic in ``(spec, seed)``; each phase draws from its own substream.
    """
    require_valid(spec)
    seed = int(seed)
    N0, N1, N, p = spec.N0, spec.N1, spec.N, spec.p
    eta = np.empty(N, dtype=np.int64)
    outgoing = np.zeros(N, dtype=bool)

    out0 = np.sort(_rng.generator(seed, _rng.GRAPH, _rng.OUT_0).choice(N0, size=p, replace=False))
    out1 = N0 + np.sort(_rng.generator(seed, _rng.GRAPH, _rng.OUT_1).choice(N1, size=p, replace=False))
    outgoing[out0] = True
    outgoing[out1] = True

    for phase, lo, hi in ((_rng.PAIR_0, 0, N0), (_rng.PAIR_1, N0, N)):
        internal = lo + np.flatnonzero(~outgoing[lo:hi])
        a, b = _uniform_pairing(internal, _rng.generator(seed, _rng.GRAPH, phase))
        eta[a] = b
        eta[b] = a

    partner = _rng.generator(seed, _rng.GRAPH, _rng.CROSS).permutation(out1)
    eta[out0] = partner
    eta[partner] = out0
    return PairedGraph(spec, eta, outgoing, seed)


@dataclass(frozen=True)
class DegreeLaw:
    """Distribution of vertex degrees over a finite support in ``{3, ..., max}``."""

    support: tuple
    probs: tuple

    def __post_init__(self):
        support = tuple(int(k) for k in self.support)
        probs = tuple(float(q) for q in self.probs)
        if not support:
            raise SpecError("degree law has empty support")
        if len(support) != len(probs):
            raise SpecError("support and probs differ in length")
        if min(support) < 3:
            raise SpecError("degree law support must lie in {3, ..., max degree}")
        if any(q < 0 for q in probs) or not math.isclose(sum(probs), 1.0, abs_tol=1e-9):
            raise SpecError("degree law probabilities must be >= 0 and sum to 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_mapping(cls, mapping):
        items = sorted((int(k), float(v)) for k, v in mapping.items())
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items))

    @classmethod
    def uniform(cls, *support):
        return cls(tuple(support), tuple(1.0 / len(support) for _ in support))

    @property
    def mean(self):
        return sum(k * q for k, q in zip(self.support, self.probs))

    def to_dict(self):
        return {str(k): q for k, q in zip(self.support, self.probs)}


MAX_PARITY_ATTEMPTS = 1000


def sample_degree_sequence(law, n_vertices, seed):
    """Draw ``n_vertices`` i.i.d. degrees from ``law`` with an even sum.

    An odd total is repaired by redrawing the degree of one uniformly chosen
    vertex, up to ``MAX_PARITY_ATTEMPTS`` times.
    """
    if n_vertices <= 0:
        raise SpecError("n_vertices must be positive")
    support = np.array(law.support)
    probs = np.array(law.probs)
    live = support[probs > 0]
    if np.all(live % 2 == live[0] % 2) and (n_vertices * live[0]) % 2:
        raise SpecError(
            f"parity-unreachable: {n_vertices} vertices with degrees of one odd parity "
            "cannot have an even sum"
        )
    rng = _rng.generator(seed, _rng.DEGREES)
    degrees = rng.choice(support, size=n_vertices, p=probs)
    attempts = 0
    while degrees.sum() % 2:
        if attempts == MAX_PARITY_ATTEMPTS:
            raise SpecError("could not reach an even degree sum")
        v = rng.integers(n_vertices)
        degrees[v] = rng.choice(support, p=probs)
        attempts += 1
    return degrees.astype(np.int64)
