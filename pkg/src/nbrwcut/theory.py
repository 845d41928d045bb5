"""Closed-form predictions and the two-state surrogate chain.

Everything here depends on the degree sequence and ``p`` only, never on a
realized pairing. The surrogate chain replaces the walk by: from community
``i``, switch community with probability ``alpha_i``, then land on a uniform
half-edge of the current community. It matches the walk on the random graph
up to the first time the sequential pairing revisits a half-edge.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from . import _rng
from ._alias import AliasTable, StackedAlias
from .model import RegimeThresholds, SpecError, half_edge_layout, require_valid

COUPLING_BUDGET_MAX = 0.1


def phibar(x):
    """Standard normal tail ``P(Z > x)``."""
    return special.ndtr(-np.asarray(x, dtype=float))


def phibar_inv(eps):
    """Inverse of :func:`phibar`: the ``x`` with ``P(Z > x) = eps``."""
    return -special.ndtri(np.asarray(eps, dtype=float))


def _log_degree_law(degrees):
    """Distinct half-edge log-degrees of one community and their half-edge counts."""
    d, counts = np.unique(np.asarray(degrees, dtype=np.int64), return_counts=True)
    return np.log(d - 1.0), (d * counts).astype(float)


def _moments(values, weights):
    total = weights.sum()
    mean = float(np.dot(weights, values) / total)
    var = float(np.dot(weights, (values - mean) ** 2) / total)
    return mean, var


def nu_squared(sigma2, mu0, mu1, N0, N1, alpha):
    """Asymptotic variance rate of the summed log-degrees along the surrogate chain."""
    N = N0 + N1
    return sigma2 + 2.0 * N0 * N1 * (1.0 - alpha) / N**2 * (mu0 - mu1) ** 2 / alpha


@dataclass(frozen=True)
class SummaryStats:
    N: int
    N0: int
    N1: int
    p: int
    alpha0: float
    alpha1: float
    alpha: float
    mu: float
    sigma2: float
    mu0: float
    mu1: float
    sigma2_0: float
    sigma2_1: float
    max_degree: int
    nu2: float

    def to_dict(self):
        return dict(self.__dict__)


def compute_stats(spec):
    """Half-edge-weighted log-degree statistics of ``spec``.

    Only the degree sequences and ``p`` enter, so parity is not required;
    degrees must be >= 2 and ``p`` positive.
    """
    degs = spec.degrees_0 + spec.degrees_1
    if not spec.degrees_0 or not spec.degrees_1 or min(degs) < 2 or spec.p < 1:
        raise SpecError("statistics need non-empty communities, degrees >= 2 and p >= 1")
    v0, w0 = _log_degree_law(spec.degrees_0)
    v1, w1 = _log_degree_law(spec.degrees_1)
    mu0, s0 = _moments(v0, w0)
    mu1, s1 = _moments(v1, w1)
    mu, sigma2 = _moments(np.concatenate([v0, v1]), np.concatenate([w0, w1]))
    N0, N1 = spec.N0, spec.N1
    alpha = spec.alpha
    return SummaryStats(
        N=N0 + N1, N0=N0, N1=N1, p=spec.p,
        alpha0=spec.alpha0, alpha1=spec.alpha1, alpha=alpha,
        mu=mu, sigma2=sigma2, mu0=mu0, mu1=mu1, sigma2_0=s0, sigma2_1=s1,
        max_degree=spec.max_degree,
        nu2=nu_squared(sigma2, mu0, mu1, N0, N1, alpha),
    )


@dataclass(frozen=True)
class ConditionThresholds:
    """Finite-N proxies for the two branches of the community-gap condition.

    Branch ``gap``: ``|mu0 - mu1| >= gap``. Branch ``small``:
    ``|mu0 - mu1|**2 / alpha <= small``.
    """

    gap: float = 0.05
    small: float = 0.1


@dataclass(frozen=True)
class TheoryPrediction:
    stats: SummaryStats
    regime: str
    c: float
    cutoff_time: float
    window: float
    gap_branch: bool
    small_branch: bool
    sigma2_zero: bool

    @property
    def gap_condition(self):
        return self.gap_branch or self.small_branch

    def profile(self, lam):
        """Predicted distance at ``cutoff_time + lam * window``."""
        return phibar(lam)

    def tmix_prediction(self, eps):
        return self.cutoff_time + phibar_inv(eps) * self.window

    def _other_fraction(self, eps, side):
        s = self.stats
        other = (s.N1 if side == 0 else s.N0) / s.N
        if not eps < other:
            raise ValueError(
                f"eps = {eps} must be below the mass of the other community ({other:.4f})"
            )
        return other

    def no_cutoff_lower(self, eps, side):
        """Conductance lower bound on t_mix from a start in community ``side``."""
        other = self._other_fraction(eps, side)
        a_i = self.stats.alpha0 if side == 0 else self.stats.alpha1
        return (other - eps) / a_i

    def no_cutoff_surrogate(self, eps, side):
        """Time at which the surrogate chain's community imbalance drops to ``eps``."""
        other = self._other_fraction(eps, side)
        return math.log(other / eps) / self.stats.alpha

    def to_dict(self, eps=()):
        out = {
            "regime": self.regime,
            "c": self.c,
            "cutoff_time": self.cutoff_time,
            "window": self.window,
            "condition_gap_branch": self.gap_branch,
            "condition_small_branch": self.small_branch,
            "condition_satisfied": self.gap_condition,
            "sigma2_zero": self.sigma2_zero,
            "stats": self.stats.to_dict(),
            "tmix_prediction": {str(e): float(self.tmix_prediction(e)) for e in eps},
        }
        brackets = {}
        for e in eps:
            for side in (0, 1):
                try:
                    brackets[f"{e}/side{side}"] = {
                        "conductance_lower": self.no_cutoff_lower(e, side),
                        "surrogate": self.no_cutoff_surrogate(e, side),
                        "upper": None,
                    }
                except ValueError:
                    continue
        out["no_cutoff_bracket"] = brackets
        return out


def predict(stats, thresholds=RegimeThresholds(), conditions=ConditionThresholds()):
    """Cutoff location, window, regime and condition flags for ``stats``."""
    if stats.mu <= 0:
        raise ValueError("mean log-degree must be positive (need some degree >= 3)")
    logN = math.log(stats.N)
    c = stats.alpha * logN
    diff = abs(stats.mu0 - stats.mu1)
    return TheoryPrediction(
        stats=stats,
        regime=thresholds.classify(c),
        c=c,
        cutoff_time=logN / stats.mu,
        window=math.sqrt(stats.nu2 * logN / stats.mu**3),
        gap_branch=diff >= conditions.gap,
        small_branch=diff**2 / stats.alpha <= conditions.small,
        sigma2_zero=stats.sigma2 <= 1e-15,
    )


@dataclass(eq=False)
class SurrogateChain:
    """Two-community surrogate of the walk.

    ``values[i]`` are the distinct log-degrees of community ``i`` and
    ``weights[i]`` their half-edge counts.
    """

    alpha0: float
    alpha1: float
    N0: int
    N1: int
    values: tuple
    weights: tuple
    _sampler: StackedAlias = field(default=None, repr=False)

    @classmethod
    def from_spec(cls, spec):
        require_valid(spec)
        v0, w0 = _log_degree_law(spec.degrees_0)
        v1, w1 = _log_degree_law(spec.degrees_1)
        return cls(spec.alpha0, spec.alpha1, spec.N0, spec.N1, (v0, v1), (w0, w1))

    @property
    def N(self):
        return self.N0 + self.N1

    @property
    def alpha(self):
        return self.alpha0 + self.alpha1

    @property
    def mu_i(self):
        return tuple(_moments(np.asarray(v), np.asarray(w))[0] for v, w in zip(self.values, self.weights))

    @property
    def mu(self):
        m0, m1 = self.mu_i
        return (self.N0 * m0 + self.N1 * m1) / self.N

    @property
    def sigma2(self):
        return _moments(np.concatenate(self.values), np.concatenate(self.weights))[1]

    @property
    def nu2(self):
        m0, m1 = self.mu_i
        return nu_squared(self.sigma2, m0, m1, self.N0, self.N1, self.alpha)

    def community_matrix(self):
        a0, a1 = self.alpha0, self.alpha1
        return np.array([[1 - a0, a0], [a1, 1 - a1]])

    @property
    def sampler(self):
        if self._sampler is None:
            self._sampler = StackedAlias([AliasTable(w) for w in self.weights])
        return self._sampler


def surrogate_occupancy_closed_form(chain, start_side, s):
    """``P(X*_s in H_i)`` for the surrogate started uniformly in community ``i``."""
    N_own, N_other = (chain.N0, chain.N1) if start_side == 0 else (chain.N1, chain.N0)
    s = np.asarray(s)
    return N_own / chain.N + N_other / chain.N * (1.0 - chain.alpha) ** s


@dataclass(frozen=True)
class SurrogateSample:
    """Outcome of :func:`surrogate_sample`.

    ``S`` holds the summed log-degree after ``t`` steps for every trajectory,
    ``occupancy_0[s]`` the fraction of trajectories in community 0 at step s.
    ``communities`` and ``log_degrees`` are only kept on request.
    """

    S: np.ndarray
    occupancy_0: np.ndarray
    communities: np.ndarray = None
    log_degrees: np.ndarray = None


def surrogate_sample(chain, x0_side, t, n_samples, seed, keep_paths=False):
    if t < 0:
        raise ValueError("t must be >= 0")
    rng = _rng.generator(seed, _rng.SURROGATE)
    alphas = np.array([chain.alpha0, chain.alpha1])
    flat = np.concatenate(chain.values)
    side = np.full(n_samples, x0_side, dtype=np.int64)
    S = np.zeros(n_samples)
    occ = np.empty(t + 1)
    occ[0] = float(x0_side == 0)
    if keep_paths:
        coms = np.empty((n_samples, t + 1), dtype=np.int8)
        logs = np.empty((n_samples, t))
        coms[:, 0] = x0_side
    for k in range(1, t + 1):
        switch = rng.random(n_samples) < alphas[side]
        side = np.where(switch, 1 - side, side)
        ld = flat[chain.sampler.sample(rng, side)]
        S += ld
        occ[k] = np.count_nonzero(side == 0) / n_samples
        if keep_paths:
            coms[:, k] = side
            logs[:, k - 1] = ld
    if keep_paths:
        return SurrogateSample(S, occ, coms, logs)
    return SurrogateSample(S, occ)


def kolmogorov_distance(z):
    """Sup-distance between the empirical CDF of ``z`` and the standard normal CDF."""
    return float(stats.kstest(np.asarray(z, dtype=float), "norm").statistic)


def dkw_band(n, delta=0.05):
    """Half-width of the DKW band: sampling error alone exceeds it w.p. <= delta."""
    return math.sqrt(math.log(2 / delta) / (2 * n))


@dataclass(frozen=True)
class CltCheck:
    distance: float
    band: float
    t: int
    n_samples: int
    mu: float
    nu2: float


def clt_check(chain, x0_side, t, n_samples, seed):
    """Kolmogorov distance of ``(S_t - t mu) / (nu sqrt t)`` to N(0, 1)."""
    if t <= 0:
        raise ValueError("t must be positive")
    nu2 = chain.nu2
    if nu2 <= 0:
        raise ValueError("nu^2 = 0: the normalization is degenerate")
    if t * chain.alpha < 10:
        warnings.warn(f"t * alpha = {t * chain.alpha:.2f} is not large; CLT may not apply")
    mu = chain.mu
    z = (surrogate_sample(chain, x0_side, t, n_samples, seed).S - t * mu) / math.sqrt(nu2 * t)
    return CltCheck(kolmogorov_distance(z), dkw_band(n_samples), t, n_samples, mu, nu2)


@dataclass(frozen=True)
class SpectralGap:
    gap: float
    eigenvalues: np.ndarray


def spectral_gap(chain):
    """Gap ``alpha`` of the surrogate, with the 2x2 community chain's eigenvalues."""
    eig = np.sort(np.linalg.eigvals(chain.community_matrix()).real)[::-1]
    return SpectralGap(chain.alpha, eig)


def coupling_budget(N, t):
    """Heuristic size ``t^2 / N`` of the probability that walk and surrogate decouple."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return t * t / N


def coupling_failure_times(spec, x0_side, t_max, n_samples, seed):
    """First disagreement times of the sequentially generated walk and the surrogate.

    The graph is revealed along the walk: an unpaired half-edge in community
    ``i`` turns outgoing with the conditional probability (remaining outgoing
    slots)/(unpaired half-edges), and is paired with a uniform unpaired
    half-edge on the chosen side. The surrogate flips a ``Bernoulli(alpha_i)``
    coin (maximally coupled to the walk's) and lands on a uniform half-edge
    of the chosen side. The run fails at step ``k`` when the current half-edge
    is already paired, the coins disagree, or the landing half-edge is
    already paired. Runs that survive ``t_max`` steps report ``t_max + 1``.
    """
    require_valid(spec)
    degrees, offsets, owner = (a.tolist() for a in half_edge_layout(spec))
    N0, N1, p = spec.N0, spec.N1, spec.p
    sizes = (N0, N1)
    lo = (0, N0)
    alphas = (spec.alpha0, spec.alpha1)
    rng = _rng.generator(seed, _rng.COUPLING)
    out = np.empty(n_samples, dtype=np.int64)
    for r in range(n_samples):
        paired = set()
        unpaired = [N0, N1]
        remaining = [p, p]
        x = lo[x0_side] + int(rng.integers(sizes[x0_side]))
        T = t_max + 1
        for k in range(t_max + 1):
            if x in paired:
                T = k
                break
            i = 0 if x < N0 else 1
            u = rng.random()
            crosses = u < alphas[i]
            if crosses != (u < remaining[i] / unpaired[i]):
                T = k
                break
            j = 1 - i if crosses else i
            y = lo[j] + int(rng.integers(sizes[j]))
            if y == x or y in paired:
                T = k
                break
            paired.add(x)
            paired.add(y)
            unpaired[i] -= 1
            unpaired[j] -= 1
            if crosses:
                remaining[0] -= 1
                remaining[1] -= 1
            v = owner[y]
            pick = offsets[v] + int(rng.integers(degrees[v] - 1))
            x = pick + (pick >= y)
        out[r] = T
    return out
