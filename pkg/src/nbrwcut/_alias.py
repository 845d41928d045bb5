"""Walker/Vose alias tables for O(1) discrete sampling."""
import numpy as np


class AliasTable:
    """Alias table for a discrete law with weights ``weights`` over ``0..K-1``."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d array")
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be non-negative with a positive sum")
        K = w.size
        scaled = w * (K / w.sum())
        prob = np.ones(K)
        alias = np.arange(K)
        small = [i for i in range(K) if scaled[i] < 1.0]
        large = [i for i in range(K) if scaled[i] >= 1.0]
        while small and large:
            s, g = small.pop(), large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = scaled[g] + scaled[s] - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1 up to rounding
        self.prob = prob
        self.alias = alias

    def __len__(self):
        return self.prob.size

    def probabilities(self):
        """The law encoded by the table, reconstructed from prob/alias."""
        K = len(self)
        out = self.prob / K
        np.add.at(out, self.alias, (1.0 - self.prob) / K)
        return out

    def sample(self, rng, size):
        i = rng.integers(len(self), size=size)
        keep = rng.random(size) < self.prob[i]
        return np.where(keep, i, self.alias[i])


class StackedAlias:
    """Several alias tables sampled together, one table index per draw."""

    def __init__(self, tables):
        self.sizes = np.array([len(t) for t in tables])
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)[:-1]])
        self.prob = np.concatenate([t.prob for t in tables])
        self.alias = np.concatenate([t.alias + o for t, o in zip(tables, self.offsets)])

    def sample(self, rng, which):
        """Global outcome indices, drawing from table ``which[j]`` for draw j."""
        which = np.asarray(which)
        n = which.size
        i = self.offsets[which] + np.floor(rng.random(n) * self.sizes[which]).astype(np.int64)
        keep = rng.random(n) < self.prob[i]
        return np.where(keep, i, self.alias[i])
