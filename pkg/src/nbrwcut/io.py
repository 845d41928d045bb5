"""Spec files and graph dumps.

A spec file is a JSON object with ``p``, an optional ``seed``, and for each
community either an explicit degree list (``degrees_0``) or a degree law with
a vertex count (``degree_law_0`` and ``n_0``). A degree law maps degree to
probability, e.g. ``{"3": 0.5, "4": 0.5}``.
"""
import json
from pathlib import Path

import numpy as np

from . import _rng
from .model import CommunitySpec, DegreeLaw, PairedGraph, SpecError, sample_degree_sequence


def _degrees(data, side, seed):
    key = f"degrees_{side}"
    if key in data:
        return [int(d) for d in data[key]]
    law_key, n_key = f"degree_law_{side}", f"n_{side}"
    if law_key not in data or n_key not in data:
        raise SpecError(f"spec needs {key} or {law_key} with {n_key}")
    law = DegreeLaw.from_mapping(data[law_key])
    return sample_degree_sequence(law, int(data[n_key]), _rng.derive_seed(seed, _rng.DEGREES, side)).tolist()


def spec_from_dict(data, seed=None):
    """Build a CommunitySpec; degree laws are sampled with ``seed`` (or ``data["seed"]``)."""
    if seed is None:
        seed = int(data.get("seed", 0))
    return CommunitySpec(_degrees(data, 0, seed), _degrees(data, 1, seed), int(data["p"]))


def load_spec_file(path, seed=None):
    """Return ``(spec, seed)`` from a JSON spec file; an explicit ``seed`` wins."""
    data = json.loads(Path(path).read_text())
    if seed is None:
        seed = int(data.get("seed", 0))
    return spec_from_dict(data, seed), seed


def dump_graph(graph, path):
    payload = {
        "spec": graph.spec.to_dict(),
        "seed": graph.seed,
        "edges": graph.to_edge_list(),
    }
    Path(path).write_text(json.dumps(payload))


def load_graph(path):
    payload = json.loads(Path(path).read_text())
    d = payload["spec"]
    spec = CommunitySpec(d["degrees_0"], d["degrees_1"], d["p"])
    eta = np.empty(spec.N, dtype=np.int64)
    for row in payload["edges"]:
        eta[row["x"]] = row["eta"]
    graph = PairedGraph.from_pairing(spec, eta, payload.get("seed"))
    stored = np.array([row["type"] == "outgoing" for row in payload["edges"]])
    if np.any(stored != graph.outgoing):
        raise SpecError("stored half-edge types disagree with the pairing")
    return graph
