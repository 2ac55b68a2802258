"""Batch command line: ingest, cluster, synth, run, serve.

`run` writes a manifest.json capturing everything a rerun needs (corpus
hash, resolved config, per-run seeds and seed documents), and `run
--manifest` replays it; trajectory, curve and report bytes are identical
across replays. Timestamps live only in the manifest itself.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import backend
from .cluster import import_memberships, soft_cluster, write_memberships
from .corpus import (build_vocabulary, labels_for_topic, load_corpus, load_matrix,
                     save_corpus, save_matrix, stratum_weights, topics_in, vectorize)
from .bandit import posterior_snapshot_lines
from .errors import ActiveSearchError, NoSeeds
from .evaluation import RunResult, build_report, effort_to_recall, recall_curve
from .search import DatasetOracle, SearchConfig, run_search
from .synthetic import generate_synthetic

DEFAULT_TARGETS = (0.5, 0.85, 0.9, 0.95, 0.975, 0.99)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-." else "_" for c in name)


def parse_config_file(path: Path) -> dict:
    """Flat `key = value` lines; '#' starts a comment. Keys are SearchConfig
    field names; values are coerced to the field's type."""
    fields = {f.name: f for f in dataclasses.fields(SearchConfig)}
    out: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected `key = value`")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in fields:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            if value.lower() in {"none", ""}:
                out[key] = None
            elif key in {"strategy", "membership_source"}:
                out[key] = value
            elif key in {"n_pseudo", "initial_batch", "epochs", "seed", "window", "k_clusters"}:
                out[key] = int(value)
            else:
                out[key] = float(value)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    docs = load_corpus(args.corpus)
    vocab = build_vocabulary(docs, min_df=args.min_df)
    cm = vectorize(docs, vocab)
    cm.validate()
    save_matrix(cm, args.out)
    print(f"ingested {cm.n_docs} documents, vocabulary size {vocab.size} -> {args.out}")
    return 0


def cmd_cluster(args) -> int:
    cm = load_matrix(args.features)
    if args.import_path:
        mm = import_memberships(args.import_path, cm.doc_ids)
        print(f"validated {args.import_path}: {mm.n_docs} rows, k={mm.k}")
    else:
        if args.k is None:
            raise ValueError("either --k or --import is required")
        mm = soft_cluster(cm, args.k, temperature=args.temperature, rng_seed=args.seed)
        print(f"clustered {cm.n_docs} documents into k={args.k}")
    write_memberships(mm, cm.doc_ids, args.out)
    print(f"memberships -> {args.out}")
    return 0


def cmd_synth(args) -> int:
    docs, truth = generate_synthetic(args.modes, args.n, args.prevalence, args.seed)
    save_corpus(docs, args.out)
    print(f"wrote {len(docs)} documents ({sum(truth.values())} relevant) -> {args.out}")
    return 0


def _resolve_manifest(args) -> dict:
    """Build a manifest from CLI flags (fresh run)."""
    config_kwargs: dict = {}
    if args.config:
        config_kwargs.update(parse_config_file(Path(args.config)))
    if args.gamma is not None:
        config_kwargs["gamma"] = args.gamma
        config_kwargs["window"] = None
    if args.window is not None:
        config_kwargs["window"] = args.window
        config_kwargs["gamma"] = None
    if args.pseudo_negatives is not None:
        config_kwargs["n_pseudo"] = args.pseudo_negatives
    if args.budget is not None:
        config_kwargs["budget"] = args.budget
    if args.l2_lambda is not None:
        config_kwargs["l2_lambda"] = args.l2_lambda
    if args.epochs is not None:
        config_kwargs["epochs"] = args.epochs

    corpus_path = Path(args.corpus)
    docs = load_corpus(corpus_path)
    topics = args.topic or topics_in(docs)
    if not topics:
        raise ValueError("corpus has no labeled topics; pass --topic")

    if args.memberships:
        membership_spec = {"source": "file", "path": str(args.memberships),
                           "sha256": _sha256(Path(args.memberships))}
        config_kwargs.setdefault("membership_source", str(args.memberships))
    else:
        if args.cluster_k is None:
            raise ValueError("either --memberships or --cluster-k is required")
        membership_spec = {"source": "kmeans", "k": args.cluster_k,
                           "temperature": args.temperature, "seed": args.cluster_seed}
        config_kwargs.setdefault("k_clusters", args.cluster_k)
        config_kwargs.setdefault("temperature", args.temperature)
        config_kwargs.setdefault("membership_source", "kmeans")

    strategies = [s.strip() for s in args.strategy.split(",") if s.strip()]
    base_config = SearchConfig(**config_kwargs).as_dict()

    run_seeds = [int(s) for s in np.random.SeedSequence(args.seed).generate_state(args.runs)]
    runs = []
    for index, run_seed in enumerate(run_seeds):
        seed_ids: dict[str, list[str]] = {}
        for topic in topics:
            truth = labels_for_topic(docs, topic)
            relevant = sorted(d for d, y in truth.items() if y == 1)
            if len(relevant) < 3:
                raise NoSeeds(f"topic {topic!r} has only {len(relevant)} relevant documents")
            rng = np.random.default_rng(run_seed)
            seed_ids[topic] = [str(x) for x in rng.choice(relevant, size=3, replace=False)]
        runs.append({"index": index, "seed": run_seed, "seed_ids": seed_ids})

    return {
        "version": 1,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "backend": backend.BACKEND,
        "corpus": {"path": str(corpus_path), "sha256": _sha256(corpus_path)},
        "min_df": args.min_df,
        "memberships": membership_spec,
        "base_config": base_config,
        "strategies": strategies,
        "topics": topics,
        "recall_targets": [float(t) for t in args.recall_targets.split(",")],
        "master_seed": args.seed,
        "runs": runs,
    }


def execute_manifest(manifest: dict, out_dir: Path) -> None:
    """Run every (topic, strategy, run) cell a manifest describes."""
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = Path(manifest["corpus"]["path"])
    actual = _sha256(corpus_path)
    if actual != manifest["corpus"]["sha256"]:
        raise ValueError(f"corpus {corpus_path} hash mismatch: manifest says "
                         f"{manifest['corpus']['sha256']}, file is {actual}")
    docs = load_corpus(corpus_path)
    vocab = build_vocabulary(docs, min_df=manifest["min_df"])
    cm = vectorize(docs, vocab)
    ms = manifest["memberships"]
    if ms["source"] == "file":
        mm = import_memberships(ms["path"], cm.doc_ids)
    else:
        mm = soft_cluster(cm, ms["k"], temperature=ms["temperature"], rng_seed=ms["seed"])
    weights = stratum_weights(docs)
    targets = manifest["recall_targets"]
    budget = manifest["base_config"]["budget"]

    results: list[RunResult] = []
    for topic in manifest["topics"]:
        truth = labels_for_topic(docs, topic)
        oracle = DatasetOracle(truth)
        for strategy in manifest["strategies"]:
            for run in manifest["runs"]:
                config = SearchConfig.from_dict(
                    {**manifest["base_config"], "strategy": strategy, "seed": run["seed"]})
                seed_ids = run["seed_ids"][topic]
                trajectory, _ = run_search(cm, mm, oracle, config, seed_ids=seed_ids)
                stem = f"{_safe(topic)}_{strategy}_run{run['index']:02d}"
                trajectory.write(out_dir / f"trajectory_{stem}.tsv")
                with open(out_dir / f"posteriors_{stem}.tsv", "w", encoding="utf-8") as fh:
                    for line in posterior_snapshot_lines(trajectory.snapshots):
                        fh.write(line + "\n")
                curve = recall_curve(trajectory, truth, weights, cm.n_docs)
                curve.write(out_dir / f"curve_{stem}.tsv")
                results.append(RunResult(
                    topic=topic, strategy=strategy, seed=run["seed"],
                    efforts={t: effort_to_recall(curve, t) for t in targets}))
    report = build_report(results, budget=budget, targets=targets)
    report.write(out_dir / "report.tsv")


def cmd_run(args) -> int:
    if args.manifest:
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    else:
        manifest = _resolve_manifest(args)
    out_dir = Path(args.out)
    execute_manifest(manifest, out_dir)
    if not args.manifest:
        with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    cells = len(manifest["topics"]) * len(manifest["strategies"]) * len(manifest["runs"])
    print(f"completed {cells} runs -> {out_dir}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_corpus_registry, create_app

    registry = build_corpus_registry(
        corpus_path=Path(args.corpus), name=args.name, min_df=args.min_df,
        memberships_path=Path(args.memberships) if args.memberships else None,
        cluster_k=args.cluster_k, cluster_seed=args.cluster_seed,
        temperature=args.temperature)
    app = create_app(registry,
                     sessions_dir=Path(args.sessions_dir) if args.sessions_dir else None,
                     static_dir=Path(args.ui) if args.ui else None)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="activesearch",
        description="Cluster-bandit active search: simulate, evaluate, review.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build TF-IDF features from a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--min-df", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cluster", help="soft-cluster ingested features, or validate an import")
    p.add_argument("--features", required=True, help="directory written by ingest")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--temperature", type=float, default=0.1)
    p.add_argument("--import", dest="import_path", default=None,
                   help="validate an existing membership file instead of clustering")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("synth", help="generate the multi-modal synthetic benchmark corpus")
    p.add_argument("--modes", type=int, default=5)
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--prevalence", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="simulate seeded runs and write the effort-to-recall report")
    p.add_argument("--corpus")
    p.add_argument("--topic", action="append", default=None,
                   help="topic to search (repeatable; default: every labeled topic)")
    p.add_argument("--memberships", default=None, help="membership triplet file")
    p.add_argument("--cluster-k", type=int, default=None, help="cluster in-process with this k")
    p.add_argument("--cluster-seed", type=int, default=0)
    p.add_argument("--temperature", type=float, default=0.1)
    p.add_argument("--min-df", type=int, default=3)
    p.add_argument("--strategy", default="mab,greedy",
                   help="comma-separated subset of mab,greedy,random")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--pseudo-negatives", type=int, default=None, help="default 100")
    p.add_argument("--budget", type=float, default=None, help="default 0.40")
    p.add_argument("--l2-lambda", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--recall-targets", default=",".join(str(t) for t in DEFAULT_TARGETS))
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="master seed for the whole table")
    p.add_argument("--config", default=None, help="flat key=value SearchConfig file")
    p.add_argument("--manifest", default=None, help="replay a previously written manifest")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="start the live review service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--name", default=None, help="corpus name (default: file stem)")
    p.add_argument("--memberships", default=None)
    p.add_argument("--cluster-k", type=int, default=None)
    p.add_argument("--cluster-seed", type=int, default=0)
    p.add_argument("--temperature", type=float, default=0.1)
    p.add_argument("--min-df", type=int, default=3)
    p.add_argument("--sessions-dir", default=None, help="append-only session logs live here")
    p.add_argument("--ui", default=None, help="serve the built review console from this directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 2
    except (ActiveSearchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
