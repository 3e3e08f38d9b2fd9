"""Command-line pipeline: corpus build -> index -> scan -> label -> features ->
train -> report, plus a synthetic fixture generator.

Exit codes: 0 ok, 2 missing input file, 3 artifact version/hash mismatch,
4 contract violation (bad data or parameters). Stage artifacts embed content
hashes so a scan cannot silently run against the wrong index, nor a report
against the wrong feature space. ``QUOTEMATCH_THREADS`` caps scan parallelism.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import behavior, corpus as corpus_mod, features as features_mod, matcher, model as model_mod, synth
from .behavior import BehaviorLabel, DEFAULT_THRESHOLDS, LabelThresholds
from .matcher import MinHashParams
from .model import LogitHyperparams
from .textnorm import PrefixLexicon


class MissingInputError(Exception):
    pass


class VersionMismatchError(Exception):
    pass


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _require(path: str | Path) -> Path:
    p = Path(path)
    if not p.exists():
        raise MissingInputError(str(p))
    return p


def _prefix_lexicon(args) -> PrefixLexicon | None:
    if getattr(args, "prefixes", None):
        return PrefixLexicon.from_file(_require(args.prefixes))
    return None


def _refute_lexicon(args) -> matcher.RefuteLexicon:
    if getattr(args, "refutes", None):
        return matcher.RefuteLexicon.from_file(_require(args.refutes))
    return matcher.DEFAULT_REFUTES


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


# ---------------------------------------------------------------------------
# corpus build | merge | filter


def cmd_corpus_build(args) -> None:
    lexicon = _prefix_lexicon(args)
    built, report = corpus_mod.load_corpus(_require(args.input), lexicon)
    corpus_mod.save_corpus(built, args.out)
    _write_json(
        {"rows": report.rows, "collapsed": report.collapsed, "quotes": len(built)},
        Path(args.report or str(args.out) + ".report.json"),
    )
    print(f"built corpus: {len(built)} quotes, {report.collapsed} duplicates collapsed")


def cmd_corpus_merge(args) -> None:
    lexicon = _prefix_lexicon(args)
    a, _ = corpus_mod.load_corpus(_require(args.a), lexicon)
    b, _ = corpus_mod.load_corpus(_require(args.b), lexicon)
    merged, report = corpus_mod.merge_corpora(a, b)
    corpus_mod.save_corpus(merged, args.out)
    _write_json(
        {
            "collisions": report.collisions,
            "renamespaced_ids": list(report.renamespaced_ids),
            "quotes": len(merged),
        },
        Path(args.report or str(args.out) + ".report.json"),
    )
    print(f"merged corpus: {len(merged)} quotes, {report.collisions} collisions")


def cmd_corpus_filter(args) -> None:
    lexicon = _prefix_lexicon(args)
    base, _ = corpus_mod.load_corpus(_require(args.corpus), lexicon)
    exclude = corpus_mod.load_exclusion_list(_require(args.exclude))
    filtered, report = corpus_mod.filter_corpus(base, exclude)
    corpus_mod.save_corpus(filtered, args.out)
    _write_json(
        {
            "removed": report.removed,
            "unknown_ids": list(report.unknown_ids),
            "quotes": len(filtered),
        },
        Path(args.report or str(args.out) + ".report.json"),
    )
    print(f"filtered corpus: {len(filtered)} quotes, {report.removed} removed")
    if report.unknown_ids:
        print(f"warning: {len(report.unknown_ids)} unknown exclusion ids", file=sys.stderr)


# ---------------------------------------------------------------------------
# index


def cmd_index(args) -> None:
    corpus_path = _require(args.corpus)
    lexicon = _prefix_lexicon(args)
    built, _ = corpus_mod.load_corpus(corpus_path, lexicon)
    params = MinHashParams(k=args.minhash_k, seed=args.seed, bands=args.bands, rows=args.rows)
    index = matcher.build_index(
        built, params, shingle_n=args.shingle_n, corpus_hash=_sha256(corpus_path)
    )
    matcher.save_index(index, args.out)
    print(f"indexed {len(index)} quotes into {params.bands} bands of {params.rows} rows")


# ---------------------------------------------------------------------------
# scan


def _scan_one(
    path: Path,
    index,
    ref_corpus,
    refutes,
    threshold: float,
    prefixes,
    max_posts: int,
    mode: str,
):
    posts = behavior.read_timeline(path)[:max_posts]
    return behavior.scan_timeline(
        posts,
        index,
        ref_corpus,
        refutes,
        threshold,
        user_id=path.stem,
        prefix_lexicon=prefixes,
        mode=mode,
    )


def cmd_scan(args) -> None:
    corpus_path = _require(args.corpus)
    index_path = _require(args.index)
    timelines_dir = _require(args.timelines)
    lexicon = _prefix_lexicon(args)
    ref_corpus, _ = corpus_mod.load_corpus(corpus_path, lexicon)
    index = matcher.load_index(index_path, ref_corpus)
    if index.corpus_hash and index.corpus_hash != _sha256(corpus_path):
        raise VersionMismatchError(
            f"index {index_path} was built from a different corpus file than {corpus_path}"
        )
    refutes = _refute_lexicon(args)

    files = sorted(Path(timelines_dir).glob("*.jsonl"))
    threads = int(os.environ.get("QUOTEMATCH_THREADS", os.cpu_count() or 1))
    threads = max(1, min(threads, len(files) or 1))

    def work(path: Path):
        return _scan_one(
            path, index, ref_corpus, refutes, args.threshold, lexicon, args.max_posts, args.mode
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scanned = list(pool.map(work, files))
    else:
        scanned = [work(path) for path in files]

    rows = sorted(
        ((stats, None) for stats, _ in scanned), key=lambda pair: pair[0].user_id
    )
    behavior.write_stats_csv(rows, args.out_stats)
    all_matches = sorted(
        (
            (stats.user_id, match)
            for (stats, matches) in scanned
            for match in matches
        ),
        key=lambda pair: (pair[0], pair[1].post_id),
    )
    with open(args.out_matches, "w", encoding="utf-8") as fh:
        for user_id, m in all_matches:
            fh.write(
                json.dumps(
                    {
                        "user_id": user_id,
                        "post_id": m.post_id,
                        "quote_id": m.quote_id,
                        "similarity": m.similarity,
                        "authenticity": m.authenticity.value,
                        "kind": m.kind.value,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    print(f"scanned {len(files)} timelines, {len(all_matches)} matches")


# ---------------------------------------------------------------------------
# label


def cmd_label(args) -> None:
    rows = behavior.read_stats_csv(_require(args.stats))
    thresholds = LabelThresholds(
        min_fabricated=args.min_fabricated,
        min_fabricated_fraction=args.min_fraction,
        min_refutes_strict=args.min_refutes,
        min_refutes_balance=args.min_refutes_balance,
    )
    all_stats = [stats for stats, _ in rows]
    labeled, report = behavior.build_labeled_dataset(
        all_stats, thresholds, balance=args.balance
    )
    label_of = {stats.user_id: label for stats, label in labeled}
    out_rows = [
        (stats, label_of.get(stats.user_id, BehaviorLabel.NEITHER)) for stats in all_stats
    ]
    out_rows.sort(key=lambda pair: pair[0].user_id)
    behavior.write_stats_csv(out_rows, args.out)
    print(
        f"labeled dataset: {report.n_circulators} circulators, "
        f"{report.n_debunkers} debunkers "
        f"({report.n_balance_added} added by balancing)"
    )


# ---------------------------------------------------------------------------
# features


def cmd_features(args) -> None:
    ties_path = _require(args.ties)
    ties = features_mod.read_ties_csv(ties_path)
    if args.labeled:
        rows = behavior.read_stats_csv(_require(args.labeled))
        dataset_users = {
            stats.user_id
            for stats, label in rows
            if label in (BehaviorLabel.CIRCULATOR, BehaviorLabel.DEBUNKER)
        }
        ties = [t for t in ties if t.user_id in dataset_users]
    space = features_mod.build_feature_space(ties)
    vectors, dropped = features_mod.encode_users(ties, space)
    if args.min_support > 0:
        space, vectors = features_mod.prune_features(space, vectors, args.min_support)
    features_mod.save_space(space, args.out_space, ties_hash=_sha256(ties_path))
    features_mod.save_vectors(vectors, args.out_vectors, space.manifest_hash)
    print(
        f"feature space: {space.n_columns} columns, {len(vectors)} users encoded"
        + (f", {dropped} out-of-space ties dropped" if dropped else "")
    )


# ---------------------------------------------------------------------------
# train


def _load_xy(args) -> tuple:
    space = features_mod.load_space(_require(args.space))
    vectors, space_hash = features_mod.load_vectors(_require(args.vectors))
    if space_hash and space_hash != space.manifest_hash:
        raise VersionMismatchError(
            f"vectors {args.vectors} were encoded against a different feature space"
        )
    labels = {
        stats.user_id: label for stats, label in behavior.read_stats_csv(_require(args.labeled))
    }
    keep = [
        v
        for v in vectors
        if labels.get(v.user_id) in (BehaviorLabel.CIRCULATOR, BehaviorLabel.DEBUNKER)
    ]
    y = np.array(
        [1.0 if labels[v.user_id] is BehaviorLabel.CIRCULATOR else -1.0 for v in keep]
    )
    X = features_mod.to_csr(keep, space.n_columns)
    return space, keep, X, y


_METRICS_HEADER = "group,accuracy,precision,recall,f1"


def _metrics_csv(metrics) -> str:
    lines = [_METRICS_HEADER]
    for name, cls in (("Circulators", 1), ("Debunkers", -1)):
        m = metrics.per_class[cls]
        lines.append(f"{name},,{m.precision:.6f},{m.recall:.6f},{m.f1:.6f}")
    lines.append(
        f"Macro,{metrics.accuracy:.6f},{metrics.macro_precision:.6f},"
        f"{metrics.macro_recall:.6f},{metrics.macro_f1:.6f}"
    )
    return "\n".join(lines) + "\n"


def cmd_train(args) -> None:
    space, _vectors, X, y = _load_xy(args)
    hp = LogitHyperparams(
        l2_strength=args.l2, max_iters=args.max_iters, tolerance=args.tol, seed=args.seed
    )
    metrics = model_mod.cross_validate(X, y, hp, test_fraction=0.1, repeats=args.repeats)
    final = model_mod.train_logit(X, y, hp)
    model_mod.save_model(final, args.out_model, space.manifest_hash)
    Path(args.out_metrics).write_text(_metrics_csv(metrics), encoding="utf-8")
    print(
        f"trained on {X.shape[0]} users x {X.shape[1]} features; "
        f"cv accuracy {metrics.accuracy:.3f}"
    )


# ---------------------------------------------------------------------------
# report


def _read_category_map(path: Path) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for line_no, line in enumerate(path.read_text(encoding="utf-8-sig").splitlines(), start=1):
        if not line.strip() or (line_no == 1 and line == "target_id,category"):
            continue
        parts = line.split(",", 1)
        if len(parts) != 2:
            raise ValueError(f"{path}: line {line_no}: expected target_id,category")
        mapping[parts[0]] = parts[1]
    return mapping


def cmd_report(args) -> None:
    space = features_mod.load_space(_require(args.space))
    fitted, space_hash = model_mod.load_model(_require(args.model))
    if space_hash and space_hash != space.manifest_hash:
        raise VersionMismatchError(
            f"model {args.model} was trained against a different feature space"
        )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    k = min(args.top_k, space.n_columns)
    report = model_mod.top_coefficients(fitted, space, k)
    coef_lines = ["side,rank,target_id,kind,weight"]
    for side, entries in (("positive", report.top_positive), ("negative", report.top_negative)):
        for rank, ((target, kind), weight) in enumerate(entries, start=1):
            coef_lines.append(f"{side},{rank},{target},{kind.value},{weight:.8f}")
    (out_dir / "top_coefficients.csv").write_text("\n".join(coef_lines) + "\n", encoding="utf-8")

    category_map = _read_category_map(_require(args.category_map)) if args.category_map else {}
    counts = model_mod.categorize_report(report, category_map)
    cat_lines = ["side,category,count"]
    for side in ("positive", "negative"):
        for category in sorted(counts[side]):
            cat_lines.append(f"{side},{category},{counts[side][category]}")
    (out_dir / "category_counts.csv").write_text("\n".join(cat_lines) + "\n", encoding="utf-8")

    if args.labeled and args.ties:
        rows = behavior.read_stats_csv(_require(args.labeled))
        ties = features_mod.read_ties_csv(_require(args.ties))
        per_user: dict[str, dict[str, int]] = {}
        for t in ties:
            bucket = per_user.setdefault(t.user_id, {"follow": 0, "retweet": 0, "like": 0})
            bucket[t.kind.value] += 1
        counts_map = {}
        labels_map = {}
        for stats, label in rows:
            if label is None:
                continue
            bucket = per_user.get(stats.user_id, {"follow": 0, "retweet": 0, "like": 0})
            counts_map[stats.user_id] = behavior.InteractionCounts(
                follows=bucket["follow"],
                retweets=bucket["retweet"],
                likes=bucket["like"],
                retweet_fraction=stats.retweet_fraction,
            )
            labels_map[stats.user_id] = label
        summary = behavior.interaction_summary(counts_map, labels_map)
        sum_lines = ["label,metric,mean,median,q1,q3"]
        for label in sorted(summary, key=lambda l: l.value):
            for metric in ("follows", "retweets", "likes", "retweet_fraction"):
                stats_row = summary[label][metric]
                sum_lines.append(
                    f"{label.value},{metric},{stats_row['mean']:.6f},"
                    f"{stats_row['median']:.6f},{stats_row['q1']:.6f},{stats_row['q3']:.6f}"
                )
        (out_dir / "class_summary.csv").write_text("\n".join(sum_lines) + "\n", encoding="utf-8")
    print(f"report written to {out_dir}")


# ---------------------------------------------------------------------------
# synth


def cmd_synth(args) -> None:
    spec = synth.SyntheticSpec(
        n_per_class=args.n_per_class,
        planted_per_class=args.planted,
        timeline_len=args.timeline_len,
        label_noise=args.noise,
        seed=args.seed,
        two_refute_debunkers=min(args.two_refute, args.n_per_class),
    )
    paths = synth.generate(spec, args.out_dir)
    print(
        f"synthetic fixture: {2 * spec.n_per_class} users under {args.out_dir} "
        f"(corpus={paths.corpus.name}, ties={paths.ties.name})"
    )


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quotematch",
        description="Detect near-duplicate canonical quotes and model sharer behavior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    corpus_p = sub.add_parser("corpus", help="build, merge, or filter reference corpora")
    corpus_sub = corpus_p.add_subparsers(dest="subcommand", required=True)

    build_p = corpus_sub.add_parser("build", help="normalize and deduplicate a corpus TSV")
    build_p.add_argument("--input", required=True)
    build_p.add_argument("--out", required=True)
    build_p.add_argument("--report")
    build_p.add_argument("--prefixes", help="prefix lexicon file, one pattern per line")
    build_p.set_defaults(func=cmd_corpus_build)

    merge_p = corpus_sub.add_parser("merge", help="union two corpora by normalized text")
    merge_p.add_argument("--a", required=True)
    merge_p.add_argument("--b", required=True)
    merge_p.add_argument("--out", required=True)
    merge_p.add_argument("--report")
    merge_p.add_argument("--prefixes")
    merge_p.set_defaults(func=cmd_corpus_merge)

    filter_p = corpus_sub.add_parser("filter", help="drop quotes listed in an exclusion file")
    filter_p.add_argument("--corpus", required=True)
    filter_p.add_argument("--exclude", required=True)
    filter_p.add_argument("--out", required=True)
    filter_p.add_argument("--report")
    filter_p.add_argument("--prefixes")
    filter_p.set_defaults(func=cmd_corpus_filter)

    index_p = sub.add_parser("index", help="build the LSH index over a corpus")
    index_p.add_argument("--corpus", required=True)
    index_p.add_argument("--out", required=True)
    index_p.add_argument("--minhash-k", type=int, default=256)
    index_p.add_argument("--bands", type=int, default=128)
    index_p.add_argument("--rows", type=int, default=2)
    index_p.add_argument("--seed", type=int, default=0)
    index_p.add_argument("--shingle-n", type=int, default=1)
    index_p.add_argument("--prefixes")
    index_p.set_defaults(func=cmd_index)

    scan_p = sub.add_parser("scan", help="scan timeline files against the index")
    scan_p.add_argument("--index", required=True)
    scan_p.add_argument("--corpus", required=True)
    scan_p.add_argument("--timelines", required=True, help="directory of <user_id>.jsonl files")
    scan_p.add_argument("--out-stats", required=True)
    scan_p.add_argument("--out-matches", required=True)
    scan_p.add_argument("--threshold", type=float, default=0.35)
    scan_p.add_argument("--max-posts", type=int, default=3200)
    scan_p.add_argument(
        "--mode", choices=("exact", "exhaustive", "signatures"), default="exact"
    )
    scan_p.add_argument("--refutes", help="refute lexicon file, one phrase per line")
    scan_p.add_argument("--prefixes")
    scan_p.set_defaults(func=cmd_scan)

    label_p = sub.add_parser("label", help="label users and balance the dataset")
    label_p.add_argument("--stats", required=True)
    label_p.add_argument("--out", required=True)
    label_p.add_argument("--min-fabricated", type=int, default=DEFAULT_THRESHOLDS.min_fabricated)
    label_p.add_argument(
        "--min-fraction", type=float, default=DEFAULT_THRESHOLDS.min_fabricated_fraction
    )
    label_p.add_argument("--min-refutes", type=int, default=DEFAULT_THRESHOLDS.min_refutes_strict)
    label_p.add_argument(
        "--min-refutes-balance", type=int, default=DEFAULT_THRESHOLDS.min_refutes_balance
    )
    label_p.add_argument(
        "--balance", action=argparse.BooleanOptionalAction, default=True,
        help="top up the debunker side with balance-level refuters",
    )
    label_p.set_defaults(func=cmd_label)

    features_p = sub.add_parser("features", help="build the tie feature space and encodings")
    features_p.add_argument("--ties", required=True)
    features_p.add_argument("--out-space", required=True)
    features_p.add_argument("--out-vectors", required=True)
    features_p.add_argument("--labeled", help="restrict to circulator/debunker users")
    features_p.add_argument("--min-support", type=int, default=0)
    features_p.set_defaults(func=cmd_features)

    train_p = sub.add_parser("train", help="cross-validate and fit the tie classifier")
    train_p.add_argument("--space", required=True)
    train_p.add_argument("--vectors", required=True)
    train_p.add_argument("--labeled", required=True)
    train_p.add_argument("--out-model", required=True)
    train_p.add_argument("--out-metrics", required=True)
    train_p.add_argument("--l2", type=float, default=1.0)
    train_p.add_argument("--max-iters", type=int, default=5000)
    train_p.add_argument("--tol", type=float, default=1e-6)
    train_p.add_argument("--seed", type=int, default=0)
    train_p.add_argument("--repeats", type=int, default=10)
    train_p.set_defaults(func=cmd_train)

    report_p = sub.add_parser("report", help="coefficient, category, and class reports")
    report_p.add_argument("--model", required=True)
    report_p.add_argument("--space", required=True)
    report_p.add_argument("--out-dir", required=True)
    report_p.add_argument("--category-map", help="CSV target_id,category")
    report_p.add_argument("--top-k", type=int, default=100)
    report_p.add_argument("--labeled", help="labeled stats CSV for class summaries")
    report_p.add_argument("--ties", help="ties CSV for class summaries")
    report_p.set_defaults(func=cmd_report)

    synth_p = sub.add_parser("synth", help="generate a deterministic synthetic fixture")
    synth_p.add_argument("--out-dir", required=True)
    synth_p.add_argument("--n-per-class", type=int, default=559)
    synth_p.add_argument("--planted", type=int, default=20)
    synth_p.add_argument("--timeline-len", type=int, default=40)
    synth_p.add_argument("--noise", type=float, default=0.05)
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.add_argument("--two-refute", type=int, default=216)
    synth_p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except MissingInputError as exc:
        print(f"error: missing input: {exc}", file=sys.stderr)
        return 2
    except VersionMismatchError as exc:
        print(f"error: version mismatch: {exc}", file=sys.stderr)
        return 3
    except (ValueError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
