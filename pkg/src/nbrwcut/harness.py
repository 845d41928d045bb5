"""Experiment plans, per-cell runners and plan-level summaries.

A plan is a list of cells (a degree-law template plus target N, community
split and alpha or p) of one experiment kind, replicated over seeds. Each
cell produces exactly one ResultRecord, whose status is ``ok``,
``incomplete`` (a censored measurement), ``rejected`` (the cell violates the
kind's preconditions) or ``failed`` (an unexpected error).

Plan JSON::

    {
      "kind": "cutoff-profile",
      "template": {"degree_law_0": {"3": 0.5, "4": 0.5},
                   "degree_law_1": {"3": 0.5, "4": 0.5}, "split": 0.5},
      "grid": {"N": [30000, 100000], "alpha": [0.3]},
      "cells": [],
      "seeds_per_cell": 20,
      "eps": [0.25, 0.5, 0.75],
      "t_max": null,
      "starts": 32,
      "lambdas": [-2, -1, 0, 1, 2],
      "thresholds": {"cutoff": 10.0, "no_cutoff": 0.1},
      "options": {}
    }

Grid cells are the product over the grid keys, in the order N, split,
alpha, p; explicit ``cells`` are appended after them.
"""
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .model import (
    NO_CUTOFF,
    CommunitySpec,
    DegreeLaw,
    RegimeThresholds,
    SpecError,
    generate_graph,
    sample_degree_sequence,
    validate_spec,
)
from .store import ResultRecord, cell_hash, jsonable
from .theory import (
    COUPLING_BUDGET_MAX,
    SurrogateChain,
    clt_check,
    compute_stats,
    coupling_budget,
    phibar,
    phibar_inv,
    predict,
    surrogate_occupancy_closed_form,
)
from .walk import (
    DistanceProfile,
    build_operator,
    default_starts,
    distance_profile,
    estimate_tmix,
    evolve,
    point_masses,
    profile_from,
    root_fraction,
    community_occupancy,
)

KINDS = (
    "cutoff-profile",
    "no-cutoff-scaling",
    "surrogate-match",
    "clt",
    "root-fraction",
    "window-scaling",
)
GRID_ORDER = ("N", "split", "alpha", "p")


class CellRejected(Exception):
    """The realized cell violates a precondition of the experiment kind."""


@dataclass
class ExperimentPlan:
    kind: str
    cells: list
    seeds_per_cell: int = 10
    eps: tuple = (0.25, 0.5, 0.75)
    t_max: int = None
    starts: int = 32
    lambdas: tuple = (-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0)
    thresholds: RegimeThresholds = field(default_factory=RegimeThresholds)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.seeds_per_cell < 1:
            raise ValueError("seeds_per_cell must be >= 1")
        for i, cell in enumerate(self.cells):
            if "N" not in cell or ("alpha" not in cell and "p" not in cell):
                raise ValueError(f"cell {i} needs N and one of alpha or p")
            if "degree_law_0" not in cell or "degree_law_1" not in cell:
                raise ValueError(f"cell {i} needs degree_law_0 and degree_law_1")

    @classmethod
    def from_dict(cls, d):
        template = d.get("template", {})
        grid = d.get("grid", {})
        cells = []
        if grid:
            keys = [k for k in GRID_ORDER if k in grid]
            unknown = set(grid) - set(GRID_ORDER)
            if unknown:
                raise ValueError(f"unknown grid keys {sorted(unknown)}")
            for combo in itertools.product(*(grid[k] for k in keys)):
                cells.append({**template, **dict(zip(keys, combo))})
        cells.extend({**template, **c} for c in d.get("cells", []))
        thresholds = RegimeThresholds(**d.get("thresholds", {}))
        kwargs = {k: d[k] for k in ("seeds_per_cell", "t_max", "starts", "options") if k in d}
        for k in ("eps", "lambdas"):
            if k in d:
                kwargs[k] = tuple(float(x) for x in d[k])
        return cls(kind=d["kind"], cells=[_normalize_cell(c) for c in cells],
                   thresholds=thresholds, **kwargs)

    def to_dict(self):
        return jsonable({
            "kind": self.kind,
            "cells": self.cells,
            "seeds_per_cell": self.seeds_per_cell,
            "eps": list(self.eps),
            "t_max": self.t_max,
            "starts": self.starts,
            "lambdas": list(self.lambdas),
            "thresholds": {"cutoff": self.thresholds.cutoff, "no_cutoff": self.thresholds.no_cutoff},
            "options": self.options,
        })

    def shared_options(self):
        """Plan-level settings that affect every cell's results."""
        return {k: v for k, v in self.to_dict().items() if k not in ("cells", "kind")}


def _normalize_cell(cell):
    out = dict(cell)
    for side in (0, 1):
        key = f"degree_law_{side}"
        if key in out:
            out[key] = DegreeLaw.from_mapping(out[key]).to_dict()
    out.setdefault("split", 0.5)
    return out


def cell_seeds(master_seed, index, n):
    """Replicate seeds of cell ``index``: hashes of (master, cell, replicate)."""
    return [_rng.derive_seed(master_seed, _rng.CELL, index, r) for r in range(n)]


def _even(x):
    return 2 * max(1, int(round(x / 2)))


def realize_spec(cell, seed):
    """Sample the degree sequences of ``cell`` and fix ``p``."""
    N, split = float(cell["N"]), float(cell["split"])
    degrees = []
    for side, share in ((0, split), (1, 1.0 - split)):
        law = DegreeLaw.from_mapping(cell[f"degree_law_{side}"])
        n = max(1, int(round(share * N / law.mean)))
        live = [k for k, q in zip(law.support, law.probs) if q > 0]
        if all(k % 2 for k in live) and n % 2:
            n += 1
        degrees.append(sample_degree_sequence(law, n, _rng.derive_seed(seed, _rng.DEGREES, side)))
    N0, N1 = int(degrees[0].sum()), int(degrees[1].sum())
    if "p" in cell and cell["p"] is not None:
        p = int(cell["p"])
    else:
        p = _even(float(cell["alpha"]) / (1.0 / N0 + 1.0 / N1))
    cap = min(N0, N1) - min(N0, N1) % 2
    return CommunitySpec(degrees[0], degrees[1], min(max(p, 2), cap))


def mixture_law(target_mu, degrees=(3, 4, 5, 6)):
    """Two-point degree law whose half-edge mean log-degree equals ``target_mu``.

    Mixes the two consecutive degrees of ``degrees`` whose log-degrees
    bracket the target.
    """
    logs = [math.log(d - 1) for d in degrees]
    for (a, la), (b, lb) in zip(zip(degrees, logs), zip(degrees[1:], logs[1:])):
        if la <= target_mu <= lb:
            q = (target_mu - la) / (lb - la)  # half-edge share of degree b
            wa, wb = (1 - q) / a, q / b
            return DegreeLaw((a, b), (wa / (wa + wb), wb / (wa + wb)))
    raise ValueError(f"target {target_mu} outside [{logs[0]:.3f}, {logs[-1]:.3f}]")


def split_cells(N, alpha, mu, gap, splits, degrees=(3, 4, 5, 6)):
    """Cells that vary the community split at fixed alpha, mu and mu0 - mu1 = gap."""
    cells = []
    for f in splits:
        cells.append({
            "N": N, "alpha": alpha, "split": f,
            "degree_law_0": mixture_law(mu + (1 - f) * gap, degrees).to_dict(),
            "degree_law_1": mixture_law(mu - f * gap, degrees).to_dict(),
        })
    return cells


# --- per-kind runners ------------------------------------------------------
# Each takes (plan, cell, seed) for one replicate and returns a dict.


def _prediction(plan, spec):
    stats = compute_stats(spec)
    return stats, predict(stats, plan.thresholds)


def _cutoff_t_max(plan, pred):
    if plan.t_max is not None:
        return int(plan.t_max)
    return int(math.ceil(4 * (pred.cutoff_time + 2 * pred.window)))


def _base(spec, pred, seed):
    return {
        "seed": seed, "spec_hash": spec.spec_hash(), "N": spec.N, "N0": spec.N0, "N1": spec.N1,
        "p": spec.p, "alpha": spec.alpha, "c": pred.c, "regime": pred.regime,
        "cutoff_time": pred.cutoff_time, "window": pred.window, "nu2": pred.stats.nu2,
        "sigma2": pred.stats.sigma2, "mu": pred.stats.mu, "mu0": pred.stats.mu0, "mu1": pred.stats.mu1,
    }


def _tmix_map(profile, eps):
    out, censored = {}, {}
    for e in eps:
        est = estimate_tmix(profile, e)
        out[str(e)] = est.value
        censored[str(e)] = est.censored
    return out, censored


def _by_community(profile, eps):
    """Median per-start t_mix for starts in each community."""
    out = {}
    for side in (0, 1):
        rows = profile.values[profile.start_community == side]
        if not len(rows):
            continue
        out[str(side)] = {}
        for e in eps:
            ts = [estimate_tmix(r, e).value for r in rows]
            done = [t for t in ts if t is not None]
            out[str(side)][str(e)] = float(np.median(done)) if len(done) == len(ts) else None
    return out


def _replicate_cutoff_profile(plan, cell, seed):
    spec = realize_spec(cell, seed)
    report = validate_spec(spec, plan.thresholds)
    if not report.theorem_regime:
        raise CellRejected("not in theorem regime: " + "; ".join(report.problems))
    stats, pred = _prediction(plan, spec)
    if pred.sigma2_zero:
        raise CellRejected("sigma^2 = 0: log-degree variance must not vanish")
    if pred.regime == NO_CUTOFF:
        raise CellRejected(f"c = {pred.c:.3g} is in the no-cutoff regime")
    if not pred.gap_condition:
        raise CellRejected("neither branch of the |mu0 - mu1| condition holds")
    graph = generate_graph(spec, seed)
    op = build_operator(graph)
    t_max = _cutoff_t_max(plan, pred)
    profile = distance_profile(op, default_starts(graph, plan.starts, seed), t_max)
    D = profile.aggregate
    points = []
    for lam in plan.lambdas:
        t = pred.cutoff_time + lam * pred.window
        tr = int(round(t))
        f = int(math.floor(t))
        points.append({
            "lambda": lam,
            "t": tr,
            "D": float(D[tr]) if 0 <= tr <= t_max else None,
            "D_interp": float(D[f] + (t - f) * (D[f + 1] - D[f])) if 0 <= f < t_max else None,
        })
    tmix, censored = _tmix_map(profile, plan.eps)
    return {
        **_base(spec, pred, seed), "t_max": t_max, "points": points, "tmix": tmix,
        "censored": censored, "tmix_by_start_community": _by_community(profile, plan.eps),
    }


def _summarize_cutoff_profile(plan, reps):
    rows = []
    for k, lam in enumerate(plan.lambdas):
        vals = [r["points"][k]["D"] for r in reps]
        interp = [r["points"][k]["D_interp"] for r in reps]
        ok = all(v is not None for v in vals)
        mean = float(np.mean(vals)) if ok else None
        rows.append({
            "lambda": lam,
            "mean_tv": mean,
            "std_tv": float(np.std(vals, ddof=1)) if ok and len(vals) > 1 else 0.0 if ok else None,
            "phibar": float(phibar(lam)),
            "deviation": None if mean is None else mean - float(phibar(lam)),
            "mean_tv_interp": float(np.mean(interp)) if all(v is not None for v in interp) else None,
        })
    return {"profile": rows}


def _replicate_window_scaling(plan, cell, seed):
    spec = realize_spec(cell, seed)
    stats, pred = _prediction(plan, spec)
    if pred.regime == NO_CUTOFF:
        raise CellRejected(f"c = {pred.c:.3g} is in the no-cutoff regime")
    if stats.mu0 == stats.mu1:
        raise CellRejected("window scaling needs mu0 != mu1")
    graph = generate_graph(spec, seed)
    op = build_operator(graph)
    t_max = _cutoff_t_max(plan, pred)
    profile = distance_profile(op, default_starts(graph, plan.starts, seed), t_max,
                               stop_below=min(plan.eps))
    tmix, censored = _tmix_map(profile, plan.eps)
    lo, hi = str(min(plan.eps)), str(max(plan.eps))
    spread = None if tmix[lo] is None or tmix[hi] is None else tmix[lo] - tmix[hi]
    # the window describes each D_x; the aggregate also carries start-to-start offsets
    t_lo = estimate_tmix(profile, min(plan.eps)).per_start
    t_hi = estimate_tmix(profile, max(plan.eps)).per_start
    per_start = None if None in t_lo or None in t_hi else float(np.mean(np.subtract(t_lo, t_hi)))
    return {**_base(spec, pred, seed), "t_max": t_max, "tmix": tmix, "censored": censored,
            "spread": spread, "spread_per_start": per_start,
            "tmix_by_start_community": _by_community(profile, plan.eps)}


def _summarize_window_scaling(plan, reps):
    spreads = [r["spread"] for r in reps]
    if any(s is None for s in spreads):
        return {"mean_spread": None}
    gap = float(phibar_inv(min(plan.eps)) - phibar_inv(max(plan.eps)))
    windows = [r["window"] for r in reps]
    per_start = [r["spread_per_start"] for r in reps]
    return {
        "mean_spread": float(np.mean(spreads)),
        "std_spread": float(np.std(spreads, ddof=1)) if len(spreads) > 1 else 0.0,
        "mean_spread_per_start": None if None in per_start else float(np.mean(per_start)),
        "mean_window": float(np.mean(windows)),
        "predicted_spread": gap * float(np.mean(windows)),
    }


def _replicate_no_cutoff(plan, cell, seed):
    spec = realize_spec(cell, seed)
    stats, pred = _prediction(plan, spec)
    if pred.regime != NO_CUTOFF:
        raise CellRejected(f"c = {pred.c:.3g} is not in the no-cutoff regime")
    N = spec.N
    for side, other in ((0, spec.N1 / N), (1, spec.N0 / N)):
        bad = [e for e in plan.eps if e >= other]
        if bad:
            raise CellRejected(
                f"eps {bad} >= N_{1 - side}/N = {other:.4f}: t_mix from community {side} "
                "needs eps below the other community's mass"
            )
    graph = generate_graph(spec, seed)
    op = build_operator(graph)
    rng = _rng.generator(seed, _rng.WALK, 4)
    per_side = max(1, plan.starts // 2)
    starts = np.concatenate([
        rng.choice(spec.N0, size=min(per_side, spec.N0), replace=False),
        spec.N0 + rng.choice(spec.N1, size=min(per_side, spec.N1), replace=False),
    ])
    eps_lo, eps_hi = min(plan.eps), max(plan.eps)
    t_max = plan.t_max or int(math.ceil(8 / spec.alpha * math.log(1 / eps_lo)))
    V0 = point_masses(N, starts)
    pi = np.zeros((N, 2))
    pi[:spec.N0, 0] = 1.0 / spec.N0
    pi[spec.N0:, 1] = 1.0 / spec.N1
    full = profile_from(op, np.hstack([V0, pi]), t_max, stop_below=eps_lo,
                        starts=np.concatenate([starts, [-1, -1]]))
    k = starts.size
    profile = DistanceProfile(starts, full.values[:k], full.mass_0[:k], N, full.start_community[:k])
    delta = float(plan.options.get("lower_bound_slack", 0.05))
    t = np.arange(full.values.shape[1])
    # P_{pi_i}(X_t in other community) <= t * alpha_i holds for every graph
    leak0 = 1.0 - full.mass_0[k]
    leak1 = full.mass_0[k + 1]
    # the bound is tight for small t, so allow the round-off of an N-term column sum
    tol = 4 * N * np.finfo(float).eps
    pi_bound = bool(np.all(leak0 <= t * spec.alpha0 + tol) and np.all(leak1 <= t * spec.alpha1 + tol))
    # For t >= s, D_x(t) >= N_{1-i}/N - t alpha_i - e_x with e_x = TV(P_x^s, P_{pi_i}^s):
    # the triangle inequality, contraction of TV, and the pi_i leak bound above.
    s_couple = int(math.ceil(2 * math.log(N)))
    Vs = evolve(op, np.hstack([V0, pi]), s_couple)
    starts_out = []
    bound_holds = True
    for j, x in enumerate(starts):
        side = int(graph.community[x])
        a_i = spec.alpha0 if side == 0 else spec.alpha1
        other = (spec.N1 if side == 0 else spec.N0) / N
        ts = {str(e): estimate_tmix(profile.values[j], e).value for e in plan.eps}
        t_lo = ts[str(eps_lo)]
        e_x = 0.5 * float(np.abs(Vs[:, j] - Vs[:, k + side]).sum())
        exact = (other - eps_lo - e_x) / a_i
        applies = exact >= s_couple
        holds = not applies or t_lo is None or t_lo >= exact
        bound_holds &= holds
        typical = (other - eps_lo - delta) / a_i
        starts_out.append({
            "start": int(x), "community": side, "tmix": ts,
            "coupling_term": e_x, "lower_bound": exact, "bound_applies": applies, "bound_holds": holds,
            "typical_lower_bound": typical, "typical_bound_holds": t_lo is None or t_lo >= typical,
            "scaled": None if t_lo is None else t_lo * spec.alpha,
        })
    tmix, censored = _tmix_map(profile, plan.eps)
    ratio = None
    if tmix[str(eps_lo)] is not None and tmix[str(eps_hi)]:
        ratio = tmix[str(eps_lo)] / tmix[str(eps_hi)]
    scaled = [s["scaled"] for s in starts_out]
    return {
        **_base(spec, pred, seed), "t_max": t_max, "tmix": tmix, "censored": censored,
        "starts": starts_out, "cutoff_ratio": ratio,
        "median_scaled": float(np.median(scaled)) if None not in scaled else None,
        "conductance_bound_holds": bool(bound_holds), "pi_start_bound_holds": pi_bound,
        "typical_bound_violations": sum(not s["typical_bound_holds"] for s in starts_out),
        "coupling_time": s_couple,
        "tmix_by_start_community": _by_community(profile, plan.eps),
    }


def _summarize_no_cutoff(plan, reps):
    med = [r["median_scaled"] for r in reps]
    ratios = [r["cutoff_ratio"] for r in reps]
    return {
        "median_scaled_tmix": float(np.median(med)) if None not in med else None,
        "median_cutoff_ratio": float(np.median(ratios)) if None not in ratios else None,
        "min_cutoff_ratio": float(np.min(ratios)) if None not in ratios else None,
        "conductance_bound_holds": all(r["conductance_bound_holds"] for r in reps),
        "pi_start_bound_holds": all(r["pi_start_bound_holds"] for r in reps),
        "typical_bound_violations": sum(r["typical_bound_violations"] for r in reps),
    }


def _replicate_surrogate_match(plan, cell, seed):
    spec = realize_spec(cell, seed)
    stats, pred = _prediction(plan, spec)
    t = int(plan.options.get("t", 50))
    n = int(plan.options.get("n_trajectories", 10_000))
    side = int(plan.options.get("start_side", 0))
    budget = coupling_budget(spec.N, t)
    graph = generate_graph(spec, seed)
    curve = community_occupancy(graph, None, t, n, seed, start_side=side)
    chain = SurrogateChain.from_spec(spec)
    own = surrogate_occupancy_closed_form(chain, side, np.arange(t + 1))
    q = own if side == 0 else 1.0 - own
    band = 3 * np.sqrt(q * (1 - q) / n)
    dev = np.abs(curve.freq - q)
    within = dev <= band + 1e-12
    return {
        **_base(spec, pred, seed), "t": t, "n_trajectories": n, "start_side": side,
        "coupling_budget": budget, "budget_ok": budget <= COUPLING_BUDGET_MAX,
        "empirical": curve.freq, "closed_form": q, "band": band,
        "fraction_within": float(within.mean()), "max_deviation": float(dev.max()),
    }


def _summarize_surrogate_match(plan, reps):
    return {
        "mean_fraction_within": float(np.mean([r["fraction_within"] for r in reps])),
        "min_fraction_within": float(np.min([r["fraction_within"] for r in reps])),
        "max_deviation": float(np.max([r["max_deviation"] for r in reps])),
        "budget_ok": all(r["budget_ok"] for r in reps),
    }


def _replicate_clt(plan, cell, seed):
    spec = realize_spec(cell, seed)
    stats, pred = _prediction(plan, spec)
    t = int(plan.options.get("t", 2000))
    n = int(plan.options.get("n_samples", 100_000))
    side = int(plan.options.get("start_side", 0))
    chain = SurrogateChain.from_spec(spec)
    first = clt_check(chain, side, t, n, seed)
    out = {**_base(spec, pred, seed), "t": t, "n_samples": n, "start_side": side,
           "distance": first.distance, "dkw_band": first.band}
    if plan.options.get("doubling", True):
        second = clt_check(chain, side, 2 * t, n, _rng.derive_seed(seed, _rng.SURROGATE, 1))
        out["distance_2t"] = second.distance
    return out


def _summarize_clt(plan, reps):
    out = {"max_distance": float(max(r["distance"] for r in reps))}
    if all("distance_2t" in r for r in reps):
        out["max_distance_2t"] = float(max(r["distance_2t"] for r in reps))
        out["decreasing"] = all(r["distance_2t"] < r["distance"] for r in reps)
    return out


def _replicate_root_fraction(plan, cell, seed):
    spec = realize_spec(cell, seed)
    stats, pred = _prediction(plan, spec)
    rep = root_fraction(generate_graph(spec, seed))
    return {**_base(spec, pred, seed), "R": rep.R, "fraction": rep.fraction}


def _summarize_root_fraction(plan, reps):
    fr = [r["fraction"] for r in reps]
    return {"mean_fraction": float(np.mean(fr)), "min_fraction": float(np.min(fr))}


RUNNERS = {
    "cutoff-profile": (_replicate_cutoff_profile, _summarize_cutoff_profile),
    "no-cutoff-scaling": (_replicate_no_cutoff, _summarize_no_cutoff),
    "surrogate-match": (_replicate_surrogate_match, _summarize_surrogate_match),
    "clt": (_replicate_clt, _summarize_clt),
    "root-fraction": (_replicate_root_fraction, _summarize_root_fraction),
    "window-scaling": (_replicate_window_scaling, _summarize_window_scaling),
}


def run_cell(plan, index, master_seed):
    """Run every replicate of cell ``index``; always returns one record."""
    cell = plan.cells[index]
    seeds = cell_seeds(master_seed, index, plan.seeds_per_cell)
    options = plan.shared_options()
    rec = ResultRecord(
        cell_id=f"{plan.kind}:{index}", kind=plan.kind, cell=jsonable(cell), seeds=seeds,
        options=options, spec_hash=cell_hash(plan.kind, jsonable(cell), seeds, options),
        status="ok",
    )
    replicate, summarize = RUNNERS[plan.kind]
    start = time.perf_counter()
    try:
        reps = [replicate(plan, cell, s) for s in seeds]
        rec.replicates = jsonable(reps)
        rec.summary = jsonable(summarize(plan, reps))
        rec.regime = reps[0]["regime"]
        rec.c = reps[0]["c"]
        spec = realize_spec(cell, seeds[0])
        rec.theory = jsonable(predict(compute_stats(spec), plan.thresholds).to_dict(plan.eps))
        if any(any(r.get("censored", {}).values()) for r in reps):
            rec.status = "incomplete"
            rec.notes.append("censored: some t_mix not reached by t_max")
        if plan.kind == "surrogate-match" and not rec.summary["budget_ok"]:
            rec.notes.append(f"t^2/N exceeds {COUPLING_BUDGET_MAX}: surrogate comparison beyond coupling budget")
    except CellRejected as exc:
        rec.status = "rejected"
        rec.notes.append(str(exc))
    except (SpecError, ValueError, FloatingPointError) as exc:
        rec.status = "failed"
        rec.notes.append(f"{exc.__class__.__name__}: {exc}")
    rec.runtime = time.perf_counter() - start
    return rec


def run_plan(plan, master_seed=0, threads=1):
    """Run all cells; records come back in cell order whatever ``threads`` is."""
    indices = range(len(plan.cells))
    if threads <= 1:
        return [run_cell(plan, i, master_seed) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda i: run_cell(plan, i, master_seed), indices))


def _run_kind(kind, plan, master_seed, threads):
    if plan.kind != kind:
        raise ValueError(f"plan kind is {plan.kind!r}, expected {kind!r}")
    return run_plan(plan, master_seed, threads)


def run_cutoff_profile(plan, master_seed=0, threads=1):
    return _run_kind("cutoff-profile", plan, master_seed, threads)


def run_no_cutoff_scaling(plan, master_seed=0, threads=1):
    return _run_kind("no-cutoff-scaling", plan, master_seed, threads)


def run_surrogate_match(plan, master_seed=0, threads=1):
    return _run_kind("surrogate-match", plan, master_seed, threads)


def run_window_scaling(plan, master_seed=0, threads=1):
    return _run_kind("window-scaling", plan, master_seed, threads)


# --- plan-level analyses ---------------------------------------------------


def window_regression(records, field="mean_spread"):
    """Least-squares slope of log(mean spread) on log(mean predicted window).

    ``field`` picks the summary spread: ``mean_spread`` (aggregate profile) or
    ``mean_spread_per_start``.
    """
    pts = [(r.summary["mean_window"], r.summary[field]) for r in records
           if r.status == "ok" and r.summary.get(field)]
    if len(pts) < 2:
        raise ValueError("need at least two completed cells")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return {"slope": float(slope), "intercept": float(intercept), "points": pts}


def split_comparison(records, field="mean_spread"):
    """Mean spread and mean predicted window per split, for cells sharing N and alpha."""
    groups = {}
    for r in records:
        if r.status != "ok":
            continue
        key = (r.cell["N"], r.cell.get("alpha"), r.cell.get("p"))
        groups.setdefault(key, []).append(r)
    out = []
    for key, recs in groups.items():
        if len(recs) < 2:
            continue
        rows = sorted(
            ({"split": r.cell["split"], "mean_spread": r.summary[field],
              "mean_window": r.summary["mean_window"]} for r in recs),
            key=lambda row: row["split"],
        )
        best_measured = max(rows, key=lambda row: row["mean_spread"])["split"]
        best_predicted = max(rows, key=lambda row: row["mean_window"])["split"]
        out.append({"N": key[0], "alpha": key[1], "rows": rows,
                    "argmax_measured": best_measured, "argmax_predicted": best_predicted})
    return out


def scaling_summary(records):
    """Spread of the cell medians of t_mix * alpha and the cutoff ratios."""
    med = [r.summary["median_scaled_tmix"] for r in records if r.status == "ok"]
    ratios = [r.summary["min_cutoff_ratio"] for r in records if r.status == "ok"]
    return {
        "medians": med,
        "max_over_min": float(max(med) / min(med)) if med else None,
        "min_cutoff_ratio": float(min(ratios)) if ratios else None,
        "conductance_bound_holds": all(r.summary["conductance_bound_holds"] for r in records if r.status == "ok"),
    }


def no_cutoff_trend(records, threshold=0.1):
    """Whether the cutoff ratio drifts towards 1 as N grows.

    Fits ``log(ratio - 1)`` against ``log N`` over completed cells; a
    strongly negative slope together with a smallest ratio within
    ``threshold`` of 1 flags a cutoff-like trend.
    """
    pts = sorted((np.mean([rep["N"] for rep in r.replicates]), r.summary["median_cutoff_ratio"])
                 for r in records if r.status == "ok")
    Ns = np.array([p[0] for p in pts])
    rs = np.array([p[1] for p in pts])
    slope = float(np.polyfit(np.log(Ns), np.log(rs - 1), 1)[0]) if len(pts) > 1 and np.ptp(Ns) > 0 else 0.0
    return {"N": Ns.tolist(), "ratio": rs.tolist(), "slope": slope,
            "trending_to_one": bool(rs.min() - 1 < threshold and slope < 0)}
