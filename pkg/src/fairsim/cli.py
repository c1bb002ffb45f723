"""Command-line pipeline: batch subcommands accumulating one JSON report.

Each subcommand reads its inputs, writes its artifact next to the report and
merges a section into the report file. ``report`` additionally emits
plot-ready CSVs. Exit codes: 0 success, 1 usage error, 2 data/validation
error, 3 certification not achieved.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .complexity import complexity_report
from .dataset import (BinaryTargetRule, GroupSpec, assign_groups, binarize_target,
                      load_dataset, save_dataset, ColumnSchema)
from .errors import FairsimError
from .fairness import (FairnessReport, certify, representation_features, REPRESENTATIONS)
from .kernels import KernelParams, exponential_kernel, random_walk_kernel, write_kernel
from .models import ClassifierSpec, cross_validate, encode_features
from .network import ThresholdPolicy, build_network, network_measures, write_network
from .resample import (AugmentationPlan, graph_augment, group_balance_oversample,
                       impute, smote_oversample)
from .similarity import (mapped_features, read_embeddings, similarity_matrix,
                         write_similarity)

log = logging.getLogger("fairsim")

REPORT_VERSION = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _load_report(path: Path) -> dict:
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    return {"fairsim_report": REPORT_VERSION, "version": __version__, "sections": {}}


def _write_report(path: Path, report: dict) -> None:
    path.resolve().parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _config_echo(args) -> dict:
    keys = ("data", "schema", "groups", "target", "binarize", "method", "mu", "k",
            "m", "p", "policy", "model", "folds", "delta", "repr", "seed", "threads")
    return {k: getattr(args, k, None) for k in keys}


def _load_schema_file(path):
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return [ColumnSchema(name=c["name"], kind=c["kind"],
                         sensitive=bool(c.get("sensitive", False))) for c in raw]


def _load_groups(path) -> GroupSpec:
    if not path:
        raise _UsageError("--groups is required for this subcommand")
    with open(path, encoding="utf-8") as fh:
        return GroupSpec.from_json(json.load(fh))


def _parse_binarize(text) -> BinaryTargetRule:
    parts = text.split(":")
    if parts[0] == "median" and len(parts) == 2:
        return BinaryTargetRule.median_split(parts[1])
    if parts[0] == "threshold" and len(parts) == 3:
        return BinaryTargetRule.explicit_threshold(parts[1], float(parts[2]))
    if parts[0] == "categories" and len(parts) == 3:
        return BinaryTargetRule.category_partition(parts[1], parts[2].split("|"))
    raise FairsimError(
        f"cannot parse binarize rule {text!r} "
        "(use median:<col> | threshold:<col>:<v> | categories:<col>:<a|b>)")


class _UsageError(Exception):
    pass


def _dataset(args):
    if not args.data:
        raise _UsageError("--data is required for this subcommand")
    return load_dataset(args.data, schema=_load_schema_file(args.schema),
                        target=args.target)


def _kernel_params(args) -> KernelParams:
    return KernelParams(mu=args.mu, k=args.k, m=args.m, p=args.p)


def _classifier(args) -> ClassifierSpec:
    return ClassifierSpec(kind=args.model, seed=args.seed)


def _binary_dataset(args):
    ds = _dataset(args)
    if args.binarize:
        ds = binarize_target(ds, _parse_binarize(args.binarize))
    return ds


def _repr_weights(dataset, name, params):
    """Weight matrix used for network construction under a representation."""
    sim = similarity_matrix(dataset, method="gower")
    if name in ("original", "SGD"):
        return sim
    ek = exponential_kernel(sim, params)
    if name == "SGD+Ek":
        return ek
    return random_walk_kernel(ek, params)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--data", help="input dataset (delimited text with header)")
    p.add_argument("--schema", help="JSON column schema file")
    p.add_argument("--groups", help="JSON group predicate file")
    p.add_argument("--target", help="target column (default: last column)")
    p.add_argument("--binarize", help="median:<col> | threshold:<col>:<v> | categories:<col>:<a|b>")
    p.add_argument("--method", default="gower", choices=["gower", "cosine"])
    p.add_argument("--embeddings", help="N x dim embedding grid (cosine method)")
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--m", type=float, default=2.5)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--policy", default="quantile:0.9")
    p.add_argument("--model", default="random_forest", choices=["random_forest", "knn"])
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--repr", default="SGD+Ek", choices=list(REPRESENTATIONS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for interface compatibility; results are "
                        "identical for any value")
    p.add_argument("--out", default="fairsim_report.json", help="JSON report path")


def build_parser() -> _Parser:
    parser = _Parser(prog="fairsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("similarity", "kernel", "network", "complexity", "classify",
                 "fairness", "certify", "impute", "augment", "report"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "augment":
            p.add_argument("--augment-method", default="graph",
                           choices=["graph", "smote", "group"])
            p.add_argument("--group-column", help="column for group balancing")
    return parser


def _out_dir(args) -> Path:
    d = Path(args.out).resolve().parent
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_similarity(args, report):
    ds = _dataset(args)
    if args.method == "cosine":
        sim = similarity_matrix(ds, method="cosine",
                                embeddings=read_embeddings(args.embeddings))
    else:
        sim = similarity_matrix(ds, method="gower")
    path = _out_dir(args) / "similarity.csv"
    write_similarity(sim, path)
    off = sim.values[~np.eye(sim.n, dtype=bool)]
    report["sections"]["similarity"] = {
        "artifact": path.name, "n": sim.n, "method": args.method,
        "offdiag_mean": float(off.mean()), "offdiag_min": float(off.min()),
        "config": _config_echo(args),
    }
    return 0


def cmd_kernel(args, report):
    ds = _dataset(args)
    params = _kernel_params(args)
    sim = similarity_matrix(ds, method="gower")
    ek = exponential_kernel(sim, params)
    kernel = ek if args.repr != "SGD+RWk" else random_walk_kernel(ek, params)
    path = _out_dir(args) / f"kernel_{kernel.kind}.csv"
    write_kernel(kernel, path)
    report["sections"]["kernel"] = {
        "artifact": path.name, "n": kernel.n, "kind": kernel.kind,
        "config": _config_echo(args),
    }
    return 0


def cmd_network(args, report):
    ds = _dataset(args)
    weights = _repr_weights(ds, args.repr, _kernel_params(args))
    net = build_network(weights, ThresholdPolicy.parse(args.policy))
    path = _out_dir(args) / "network.txt"
    write_network(net, path)
    nm = network_measures(net)
    report["sections"]["network"] = {
        "artifact": path.name, "n_nodes": net.n_nodes, "n_edges": len(net.edges),
        "n_components": len(net.components), "policy": net.policy,
        "density": nm["density"],
        "clustering_coefficient": nm["clustering_coefficient"],
        "config": _config_echo(args),
    }
    return 0


def cmd_complexity(args, report):
    ds = _binary_dataset(args)
    params = _kernel_params(args)
    x = representation_features(ds, args.repr, params)
    y = ds.target_values
    weights = _repr_weights(ds, args.repr, params)
    net = build_network(weights, ThresholdPolicy.parse(args.policy))
    rep = complexity_report(x, y, network=net)
    section = report["sections"].setdefault("complexity", {})
    section[args.repr] = {"report": rep.to_dict(), "config": _config_echo(args)}
    return 0


def cmd_classify(args, report):
    ds = _binary_dataset(args)
    x = representation_features(ds, args.repr, _kernel_params(args))
    result = cross_validate(_classifier(args), x, ds.target_values,
                            folds=args.folds, seed=args.seed)
    section = report["sections"].setdefault("classification", {})
    section[args.repr] = {"result": result.to_dict(), "config": _config_echo(args)}
    return 0


def cmd_fairness(args, report):
    ds = _binary_dataset(args)
    y = np.asarray(ds.target_values)
    s = assign_groups(ds, _load_groups(args.groups))
    x = representation_features(ds, args.repr, _kernel_params(args))
    result = cross_validate(_classifier(args), x, y, folds=args.folds, seed=args.seed)
    rep = FairnessReport.from_predictions(y, result.oof_predictions, s, args.repr)
    section = report["sections"].setdefault("fairness", {})
    section[args.repr] = {"report": rep.to_dict(), "weighted_f1": result.mean,
                          "config": _config_echo(args)}
    return 0


def cmd_certify(args, report):
    ds = _dataset(args)
    rule = _parse_binarize(args.binarize) if args.binarize else None
    outcome = certify(ds, _load_groups(args.groups), rule, _classifier(args),
                      delta=args.delta, kernel_params=_kernel_params(args),
                      folds=args.folds, seed=args.seed)
    report["sections"]["certification"] = {
        "outcome": outcome.to_dict(), "config": _config_echo(args),
    }
    return 0 if outcome.certified else 3


def cmd_impute(args, report):
    ds = _dataset(args)
    weights = _repr_weights(ds, args.repr, _kernel_params(args))
    net = build_network(weights, ThresholdPolicy.parse(args.policy))
    imputed, provenance = impute(ds, net)
    path = _out_dir(args) / "imputed.csv"
    save_dataset(imputed, path)
    sources: dict[str, int] = {}
    for src in provenance.values():
        sources[src] = sources.get(src, 0) + 1
    report["sections"]["imputation"] = {
        "artifact": path.name, "n_filled": len(provenance),
        "fill_sources": sources, "config": _config_echo(args),
    }
    return 0


def cmd_augment(args, report):
    ds = _binary_dataset(args)
    method = args.augment_method
    plan = AugmentationPlan(method=method, seed=args.seed)
    if method == "smote":
        out, provenance = smote_oversample(ds, plan)
    elif method == "group":
        if not args.group_column:
            raise FairsimError("--group-column is required for group balancing")
        out, provenance = group_balance_oversample(ds, args.group_column, plan)
    else:
        weights = _repr_weights(ds, args.repr, _kernel_params(args))
        net = build_network(weights, ThresholdPolicy.parse(args.policy))
        out, provenance = graph_augment(ds, net, _kernel_params(args), plan)
    path = _out_dir(args) / "augmented.csv"
    save_dataset(out, path, provenance=provenance)
    origins: dict[str, int] = {}
    for src in provenance:
        origins[src] = origins.get(src, 0) + 1
    report["sections"]["augmentation"] = {
        "artifact": path.name, "method": method, "n_rows": out.n_rows,
        "origins": origins, "config": _config_echo(args),
    }
    return 0


def cmd_report(args, report):
    out_dir = _out_dir(args)
    sections = report["sections"]
    if "complexity" in sections:
        rows = []
        names = sorted({m for sec in sections["complexity"].values()
                        for m in sec["report"]["measures"]})
        for rep in REPRESENTATIONS:
            if rep in sections["complexity"]:
                ms = sections["complexity"][rep]["report"]["measures"]
                rows.append([rep] + [repr(ms.get(m, "")) for m in names])
        with open(out_dir / "complexity_by_representation.csv", "w", encoding="utf-8") as fh:
            fh.write(",".join(["representation"] + names) + "\n")
            for row in rows:
                fh.write(",".join(str(v) for v in row) + "\n")
    if "fairness" in sections:
        with open(out_dir / "fairness_by_representation.csv", "w", encoding="utf-8") as fh:
            fh.write("representation,equal_opportunity,equal_misopportunity,weighted_f1\n")
            for rep in REPRESENTATIONS:
                if rep in sections["fairness"]:
                    r = sections["fairness"][rep]
                    fh.write(f"{rep},{r['report']['equal_opportunity']!r},"
                             f"{r['report']['equal_misopportunity']!r},"
                             f"{r['weighted_f1']!r}\n")
    report["sections"]["report"] = {"emitted": True, "config": _config_echo(args)}
    return 0


_COMMANDS = {
    "similarity": cmd_similarity, "kernel": cmd_kernel, "network": cmd_network,
    "complexity": cmd_complexity, "classify": cmd_classify,
    "fairness": cmd_fairness, "certify": cmd_certify, "impute": cmd_impute,
    "augment": cmd_augment, "report": cmd_report,
}


def run(argv=None) -> int:
    level = os.environ.get("FAIRSIM_LOG", "warn").upper()
    logging.basicConfig(level={"WARN": "WARNING"}.get(level, level))
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    report_path = Path(args.out)
    try:
        report = _load_report(report_path)
        code = _COMMANDS[args.command](args, report)
        _write_report(report_path, report)
        return code
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except FairsimError as exc:
        log.error("%s", exc)
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
