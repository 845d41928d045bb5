"""Command line: ``nbrwcut simulate|predict|experiment|report``."""
import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .harness import ExperimentPlan, run_plan
from .io import load_spec_file
from .model import RegimeThresholds, generate_graph, validate_spec
from .store import append_records, export_csv, jsonable, load_records
from .theory import compute_stats, predict
from .walk import build_operator, default_starts, distance_profile, estimate_tmix

RESULTS_FILE = "results.jsonl"


def _eps_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_simulate(args):
    spec, seed = load_spec_file(args.spec, args.seed)
    report = validate_spec(spec)
    if not report.model_valid:
        raise SystemExit("invalid spec: " + "; ".join(report.problems))
    graph = generate_graph(spec, seed)
    op = build_operator(graph)
    starts = default_starts(graph, args.starts, seed)
    profile = distance_profile(op, starts, args.t_max)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "profile.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["start", "t", "tv"])
        for x, row in zip(profile.starts, profile.values):
            for t, d in enumerate(row):
                w.writerow([int(x), t, repr(float(d))])
    tmix, censored = {}, {}
    for e in args.eps:
        est = estimate_tmix(profile, e)
        tmix[str(e)] = est.value
        censored[str(e)] = {"aggregate": est.censored, "starts": est.n_censored}
    sidecar = {"spec_hash": spec.spec_hash(), "seed": seed, "t_max": args.t_max,
               "tmix": tmix, "censored": censored}
    (out / "profile.json").write_text(json.dumps(sidecar, indent=2))
    print(json.dumps(sidecar))


def cmd_predict(args):
    spec, _ = load_spec_file(args.spec)
    thresholds = RegimeThresholds(args.cutoff_threshold, args.no_cutoff_threshold)
    pred = predict(compute_stats(spec), thresholds)
    print(json.dumps(jsonable(pred.to_dict(args.eps)), indent=2))


def cmd_experiment(args):
    plan = ExperimentPlan.from_dict(json.loads(Path(args.plan).read_text()))
    records = run_plan(plan, args.master_seed, args.threads)
    out = Path(args.out)
    append_records(out / RESULTS_FILE, records)
    for rec in records:
        note = f" ({'; '.join(rec.notes)})" if rec.notes else ""
        print(f"{rec.cell_id}: {rec.status}{note}")


def cmd_report(args):
    src = Path(args.inp)
    path = src / RESULTS_FILE if src.is_dir() else src
    loaded = load_records(path)
    for msg in loaded.diagnostics:
        print(msg, file=sys.stderr)
    if args.format == "csv":
        out = Path(args.out) if args.out else path.parent
        export_csv(loaded.records, out)
        print(f"wrote {out / 'profile.csv'} and {out / 'tmix.csv'}")
    else:
        print(json.dumps([
            {"cell_id": r.cell_id, "kind": r.kind, "status": r.status, "regime": r.regime,
             "c": r.c, "summary": r.summary, "notes": r.notes}
            for r in loaded.records
        ], indent=2))


def build_parser():
    ap = argparse.ArgumentParser(prog="nbrwcut", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="exact distance profiles on one sampled graph")
    s.add_argument("--spec", required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--t-max", type=int, default=100)
    s.add_argument("--starts", type=int, default=32)
    s.add_argument("--eps", type=_eps_list, default=[0.25, 0.5, 0.75])
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    p = sub.add_parser("predict", help="theory prediction for a spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--eps", type=_eps_list, default=[0.25, 0.5, 0.75])
    p.add_argument("--cutoff-threshold", type=float, default=10.0)
    p.add_argument("--no-cutoff-threshold", type=float, default=0.1)
    p.set_defaults(func=cmd_predict)

    e = sub.add_parser("experiment", help="run an experiment plan")
    e.add_argument("--plan", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--threads", type=int, default=1)
    e.add_argument("--master-seed", type=int, default=0)
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("report", help="summarize or export a result store")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--format", choices=("csv", "json"), default="json")
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_report)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    args.func(args)
    return 0
