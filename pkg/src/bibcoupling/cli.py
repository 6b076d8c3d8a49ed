"""Command-line pipeline: ingest -> link -> networks -> analyses.

Every subcommand reads its inputs from the output directory (or explicit
paths), writes its artifacts there and records content hashes in
manifest.json. All randomness flows from the configured seed; reruns with an
identical configuration reproduce byte-identical artifacts (the manifest
carries timestamps and is the one file excluded from that guarantee).

Exit codes: 0 success, 1 runtime failure (partial outputs are removed),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from . import __version__
from .connectivity import (
    TOPIC_REPORT_THRESHOLDS,
    connectivity_curve,
    extract_topics,
    quantile_threshold_grid,
    reference_threshold_grid,
    topic_report,
    write_curve_csv,
    write_topic_report_csv,
)
from .linkage import (
    CalibrationError,
    calibrate_threshold,
    jaro_winkler,
    merge_references,
    parse_corpus_references,
    read_clusters_jsonl,
    reference_sets,
    write_clusters_jsonl,
)
from .networks import (
    build_network,
    network_stats,
    read_network,
    write_network,
)
from .records import CorpusError, export_corpus, ingest_corpus, summarize, authorship_map
from .removal import (
    build_citation_network,
    default_fractions,
    removal_experiment,
    write_removal_csv,
)
from .synthesis import GeneratorSpec, GeneratorError, generate, presets

DEFAULT_REST_THRESHOLD = 0.85
OUT_DIR_ENV = "BIBCOUPLING_OUT_DIR"


class ConfigError(ValueError):
    """Bad configuration or missing prerequisite artifact (exit code 2)."""


class StageError(RuntimeError):
    """Stage failed at runtime (exit code 1)."""


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_config_file(path: Path) -> dict:
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_bytes()
    if path.suffix.lower() == ".json":
        return json.loads(text)
    if path.suffix.lower() == ".toml":
        return tomllib.loads(text.decode("utf-8"))
    raise ConfigError(f"config file must be .json or .toml: {path}")


def _parse_years(text: str) -> tuple[int, int]:
    try:
        start, end = text.split(":")
        return int(start), int(end)
    except ValueError:
        raise ConfigError(f"bad year window {text!r}, expected START:END") from None


def _parse_fractions(text: str) -> tuple[float, ...]:
    try:
        start, top, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise ConfigError(f"bad fractions {text!r}, expected START:TOP:STEP") from None
    if step <= 0:
        raise ConfigError("fraction step must be positive")
    values = []
    current = start
    while current <= top + 1e-9:
        values.append(round(current, 10))
        current += step
    return tuple(values)


def _parse_thresholds(text: str):
    if text.startswith("auto-quantile:"):
        try:
            return ("quantile", int(text.split(":", 1)[1]))
        except ValueError:
            raise ConfigError(f"bad quantile grid spec {text!r}") from None
    try:
        return ("explicit", tuple(float(part) for part in text.split(",") if part))
    except ValueError:
        raise ConfigError(f"bad threshold list {text!r}") from None


class Workspace:
    """Output directory plus the run manifest."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.manifest_path = out_dir / "manifest.json"
        self._written: list[Path] = []

    def prepare(self) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        if not os.access(self.out_dir, os.W_OK):
            raise ConfigError(f"output directory not writable: {self.out_dir}")

    def path(self, name: str) -> Path:
        path = self.out_dir / name
        self._written.append(path)
        return path

    def existing(self, name: str, what: str) -> Path:
        path = self.out_dir / name
        if not path.is_file():
            raise ConfigError(f"missing {what}: {path} (run the producing stage first)")
        return path

    def discard_written(self) -> None:
        for path in self._written:
            try:
                path.unlink(missing_ok=True)
            except OSError:
                pass

    def record_stage(self, stage: str, config: dict,
                     inputs: list[Path], outputs: list[Path]) -> None:
        manifest = {"tool_version": __version__, "stages": {}}
        if self.manifest_path.is_file():
            try:
                manifest = json.loads(self.manifest_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError:
                pass
        manifest["tool_version"] = __version__
        manifest.setdefault("stages", {})
        manifest["stages"][stage] = {
            "config": config,
            "inputs": {str(p): _sha256(p) for p in inputs if p.is_file()},
            "outputs": {str(p): _sha256(p) for p in outputs if p.is_file()},
            "completed_at": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        }
        self.manifest_path.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def stage_cache_key(self, stage: str) -> str | None:
        if not self.manifest_path.is_file():
            return None
        try:
            manifest = json.loads(self.manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            return None
        return manifest.get("stages", {}).get(stage, {}).get("cache_key")

    def set_stage_cache_key(self, stage: str, key: str) -> None:
        manifest = json.loads(self.manifest_path.read_text(encoding="utf-8"))
        manifest["stages"][stage]["cache_key"] = key
        self.manifest_path.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_corpus(args, ws: Workspace):
    if getattr(args, "corpus", None):
        corpus_path = Path(args.corpus)
        if not corpus_path.is_file():
            raise ConfigError(f"corpus file not found: {corpus_path}")
        fmt = "csv" if corpus_path.suffix.lower() == ".csv" else "jsonl"
    else:
        corpus_path = ws.existing("corpus.jsonl", "corpus artifact")
        fmt = "jsonl"
    result = ingest_corpus(corpus_path, fmt)
    records = result.records
    if getattr(args, "venue", None):
        records = [rec for rec in records if rec.venue == args.venue]
        if not records:
            raise ConfigError(f"no publications with venue {args.venue!r}")
    if not records:
        raise ConfigError(f"corpus is empty: {corpus_path}")
    return records, corpus_path


def _kind_name(flag: str) -> str:
    if flag in ("ref", "reference"):
        return "reference"
    if flag == "text":
        return "text"
    raise ConfigError(f"unknown network kind {flag!r} (expected ref or text)")


def _network_artifacts(kind: str) -> tuple[str, str]:
    return f"network_{kind}.csv", f"network_{kind}.json"


def _default_window(records) -> tuple[int, int]:
    years = [rec.year for rec in records]
    return min(years), max(years)


def cmd_synth(args, ws: Workspace) -> None:
    if args.spec:
        data = _load_config_file(Path(args.spec))
        try:
            spec = GeneratorSpec.from_dict({**data, "seed": args.seed})
        except TypeError as exc:
            raise ConfigError(f"bad generator spec: {exc}") from None
    elif args.preset:
        spec = presets(args.preset, seed=args.seed)
    else:
        raise ConfigError("synth needs --preset or --spec")
    try:
        corpus = generate(spec)
    except GeneratorError as exc:
        raise ConfigError(str(exc)) from None
    corpus_path = ws.path("corpus.jsonl")
    export_corpus(corpus.records, corpus_path, "jsonl")
    labels_path = ws.path("labels.csv")
    with labels_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["pub_id", "topic_id"])
        for pub_id in sorted(corpus.topic_labels):
            writer.writerow([pub_id, corpus.topic_labels[pub_id]])
    spec_path = ws.path("generator_spec.json")
    spec_path.write_text(
        json.dumps(spec.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    ws.record_stage("synth", {"preset": args.preset, "spec": args.spec, "seed": args.seed},
                    inputs=[], outputs=[corpus_path, labels_path, spec_path])
    print(f"synth: {len(corpus.records)} publications -> {corpus_path}")


def cmd_ingest(args, ws: Workspace) -> None:
    if not args.corpus:
        raise ConfigError("ingest needs --corpus FILE")
    source = Path(args.corpus)
    if not source.is_file():
        raise ConfigError(f"corpus file not found: {source}")
    fmt = args.format or ("csv" if source.suffix.lower() == ".csv" else "jsonl")
    try:
        result = ingest_corpus(source, fmt)
    except CorpusError as exc:
        raise StageError(str(exc)) from None
    for diag in result.diagnostics:
        print(f"ingest: line {diag.line}: {diag.message}", file=sys.stderr)
    if not result.records:
        raise StageError(f"no usable records in {source}")
    corpus_path = ws.path("corpus.jsonl")
    export_corpus(result.records, corpus_path, "jsonl")
    ws.record_stage("ingest", {"corpus": str(source), "format": fmt},
                    inputs=[source], outputs=[corpus_path])
    print(f"ingest: {len(result.records)} records, "
          f"{len(result.diagnostics)} rows skipped -> {corpus_path}")


def cmd_summarize(args, ws: Workspace) -> None:
    records, corpus_path = _load_corpus(args, ws)
    summary = summarize(records)
    json_path = ws.path("summary.json")
    json_path.write_text(
        json.dumps(summary.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    csv_path = ws.path("summary.csv")
    with csv_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["statistic", "value"])
        writer.writerows(summary.to_table_rows())
    ws.record_stage("summarize", {"venue": args.venue},
                    inputs=[corpus_path], outputs=[json_path, csv_path])
    print(f"summarize: {summary.n_articles} articles -> {json_path}")


def cmd_link(args, ws: Workspace) -> None:
    records, corpus_path = _load_corpus(args, ws)
    refs, discarded = parse_corpus_references(records)
    if not refs:
        raise StageError("no parseable references in the corpus")
    threshold = args.rest_threshold
    if threshold is None:
        calibration_path = ws.out_dir / "calibration.json"
        if calibration_path.is_file():
            threshold = json.loads(
                calibration_path.read_text(encoding="utf-8"))["threshold"]
            print(f"link: using calibrated rest threshold {threshold:.4f}")
        else:
            threshold = DEFAULT_REST_THRESHOLD
    clusters = merge_references(refs, rest_threshold=threshold)
    clusters_path = ws.path("clusters.jsonl")
    write_clusters_jsonl(clusters, clusters_path)
    refsets_path = ws.path("refsets.json")
    sets = reference_sets(refs, clusters)
    refsets_path.write_text(
        json.dumps({pub: sorted(ids) for pub, ids in sorted(sets.items())},
                   indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    report_path = ws.path("linkage_report.json")
    report_path.write_text(json.dumps({
        "n_references": sum(len(r.raw_references) for r in records),
        "n_parsed": len(refs),
        "n_discarded": discarded,
        "n_clusters": len(clusters),
        "rest_threshold": threshold,
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    ws.record_stage("link", {"rest_threshold": threshold, "venue": args.venue},
                    inputs=[corpus_path],
                    outputs=[clusters_path, refsets_path, report_path])
    print(f"link: {len(refs)} references ({discarded} discarded) -> "
          f"{len(clusters)} clusters")


def cmd_calibrate(args, ws: Workspace) -> None:
    if not args.labels:
        raise ConfigError("calibrate needs --labels FILE")
    labels_path = Path(args.labels)
    if not labels_path.is_file():
        raise ConfigError(f"labels file not found: {labels_path}")
    records, corpus_path = _load_corpus(args, ws)
    refs, _ = parse_corpus_references(records)
    by_id = {ref.ref_id: ref for ref in refs}
    labels: dict[tuple[str, str], bool] = {}
    with labels_path.open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            pair = (row["ref_id_a"], row["ref_id_b"])
            labels[pair] = row["is_match"].strip().lower() in ("1", "true", "yes")
    pairs = []
    for (ref_a, ref_b) in labels:
        if ref_a not in by_id or ref_b not in by_id:
            raise ConfigError(f"labeled pair references unknown ref_id: {ref_a}, {ref_b}")
        score = jaro_winkler(by_id[ref_a].rest.casefold(), by_id[ref_b].rest.casefold())
        pairs.append(((ref_a, ref_b), score))
    pairs.sort(key=lambda item: (-item[1], item[0]))
    try:
        report = calibrate_threshold(pairs, labels)
    except (CalibrationError, ValueError) as exc:
        raise StageError(f"calibration failed: {exc}") from None
    out_path = ws.path("calibration.json")
    out_path.write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    ws.record_stage("calibrate", {"labels": str(labels_path), "venue": args.venue},
                    inputs=[corpus_path, labels_path], outputs=[out_path])
    print(f"calibrate: threshold {report.threshold:.4f} "
          f"(above {report.accuracy_above:.2f}, below {report.accuracy_below:.2f})")


def cmd_net(args, ws: Workspace) -> None:
    kind = _kind_name(args.kind)
    records, corpus_path = _load_corpus(args, ws)
    window = _parse_years(args.years) if args.years else _default_window(records)
    inputs = [corpus_path]
    sets = None
    if kind == "reference":
        refsets_path = ws.existing("refsets.json", "linkage artifact refsets.json")
        inputs.append(refsets_path)
        raw = json.loads(refsets_path.read_text(encoding="utf-8"))
        sets = {pub: frozenset(ids) for pub, ids in raw.items()}
    csv_name, sidecar_name = _network_artifacts(kind)
    cache_key = hashlib.sha256(json.dumps({
        "kind": kind,
        "window": list(window),
        "venue": args.venue,
        "inputs": [_sha256(p) for p in inputs],
    }, sort_keys=True).encode()).hexdigest()
    stage = f"net_{kind}"
    if (ws.stage_cache_key(stage) == cache_key
            and (ws.out_dir / csv_name).is_file()
            and (ws.out_dir / sidecar_name).is_file()):
        print(f"net: {kind} network up to date (cached)")
        return
    try:
        net = build_network(records, kind, window, reference_sets=sets)
    except ValueError as exc:
        raise StageError(str(exc)) from None
    csv_path = ws.path(csv_name)
    sidecar_path = ws.path(sidecar_name)
    write_network(net, csv_path, sidecar_path)
    ws.record_stage(stage, {"kind": kind, "years": list(window), "venue": args.venue},
                    inputs=inputs, outputs=[csv_path, sidecar_path])
    ws.set_stage_cache_key(stage, cache_key)
    print(f"net: {kind} network with {net.n_nodes} nodes, {net.n_edges} edges")


def _load_network(args, ws: Workspace):
    kind = _kind_name(args.kind)
    csv_name, sidecar_name = _network_artifacts(kind)
    csv_path = ws.existing(csv_name, "network artifact")
    sidecar_path = ws.existing(sidecar_name, "network artifact")
    return read_network(csv_path, sidecar_path), [csv_path, sidecar_path], kind


def _resolve_thresholds(args, net, kind: str):
    if args.thresholds:
        mode, value = _parse_thresholds(args.thresholds)
        if mode == "quantile":
            return quantile_threshold_grid(net, value)
        return tuple(sorted(value))
    if kind == "reference":
        return reference_threshold_grid()
    return quantile_threshold_grid(net)


def cmd_curve(args, ws: Workspace) -> None:
    net, inputs, kind = _load_network(args, ws)
    thresholds = _resolve_thresholds(args, net, kind)
    curve = connectivity_curve(net, thresholds)
    out_path = ws.path(f"curve_{kind}.csv")
    write_curve_csv(curve, out_path)
    ws.record_stage(f"curve_{kind}", {"kind": kind, "thresholds": list(thresholds)},
                    inputs=inputs, outputs=[out_path])
    print(f"curve: {len(thresholds)} thresholds -> {out_path}")


def cmd_topics(args, ws: Workspace) -> None:
    net, inputs, kind = _load_network(args, ws)
    records, corpus_path = _load_corpus(args, ws)
    inputs.append(corpus_path)
    if args.thresholds:
        mode, value = _parse_thresholds(args.thresholds)
        if mode == "quantile":
            thresholds = tuple(t for t in quantile_threshold_grid(net, value) if t > 0)
        else:
            thresholds = tuple(sorted(value))
    else:
        thresholds = TOPIC_REPORT_THRESHOLDS
    authorship = authorship_map(records)
    by_threshold = {t: extract_topics(net, t, authorship) for t in thresholds}
    report = topic_report(by_threshold)
    out_path = ws.path(f"topics_{kind}.csv")
    write_topic_report_csv(report, out_path)
    ws.record_stage(f"topics_{kind}", {"kind": kind, "thresholds": list(thresholds)},
                    inputs=inputs, outputs=[out_path])
    print(f"topics: {len(thresholds)} thresholds -> {out_path}")


def cmd_stats(args, ws: Workspace) -> None:
    net, inputs, kind = _load_network(args, ws)
    stats = network_stats(net)
    out_path = ws.path(f"stats_{kind}.json")
    out_path.write_text(
        json.dumps(stats.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    ws.record_stage(f"stats_{kind}", {"kind": kind}, inputs=inputs, outputs=[out_path])
    print(f"stats: {kind} -> {out_path}")


def cmd_removal(args, ws: Workspace) -> None:
    records, corpus_path = _load_corpus(args, ws)
    clusters_path = ws.existing("clusters.jsonl", "linkage artifact clusters.jsonl")
    clusters = read_clusters_jsonl(clusters_path)
    refs, _ = parse_corpus_references(records)
    citation = build_citation_network(refs, clusters)
    fractions = _parse_fractions(args.fractions) if args.fractions else default_fractions()
    try:
        curve = removal_experiment(records, citation, args.strategy, fractions,
                                   trials=args.trials, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out_path = ws.path(f"removal_{args.strategy}.csv")
    write_removal_csv(curve, out_path)
    ws.record_stage(f"removal_{args.strategy}",
                    {"strategy": args.strategy, "fractions": list(fractions),
                     "trials": args.trials, "seed": args.seed, "venue": args.venue},
                    inputs=[corpus_path, clusters_path], outputs=[out_path])
    print(f"removal: {args.strategy} over {len(fractions)} fractions -> {out_path}")


_HANDLERS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "summarize": cmd_summarize,
    "link": cmd_link,
    "calibrate": cmd_calibrate,
    "net": cmd_net,
    "curve": cmd_curve,
    "topics": cmd_topics,
    "stats": cmd_stats,
    "removal": cmd_removal,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bibcoupling",
        description="Bibliographic coupling networks and topic-granularity analysis.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="TOML or JSON config file; flags override it")
        p.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or ./out)")
        p.add_argument("--venue", help="restrict the analysis to one venue")
        p.add_argument("--seed", type=int, default=0, help="seed for random stages")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker cap (stages currently run single-worker)")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    common(p)
    p.add_argument("--preset", choices=("rural", "urban"))
    p.add_argument("--spec", help="generator spec file (TOML/JSON)")

    p = sub.add_parser("ingest", help="validate and normalize a corpus file")
    common(p)
    p.add_argument("--corpus", help="input corpus (JSONL or CSV)")
    p.add_argument("--format", choices=("jsonl", "csv"))

    p = sub.add_parser("summarize", help="corpus summary statistics")
    common(p)
    p.add_argument("--corpus")

    p = sub.add_parser("link", help="deduplicate references into source clusters")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--rest-threshold", type=float, default=None,
                   dest="rest_threshold",
                   help="threshold on the reference-text similarity (condition 3); "
                        "defaults to the calibrated value when calibration.json "
                        f"exists, else {DEFAULT_REST_THRESHOLD}")

    p = sub.add_parser("calibrate", help="calibrate the rest-text threshold from labels")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--labels", help="CSV: ref_id_a,ref_id_b,is_match")

    p = sub.add_parser("net", help="build a coupling network")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--kind", choices=("ref", "text"), default="ref")
    p.add_argument("--years", help="year window START:END (default: corpus span)")

    p = sub.add_parser("curve", help="connectivity curve c(t)/g(t)")
    common(p)
    p.add_argument("--kind", choices=("ref", "text"), default="ref")
    p.add_argument("--thresholds",
                   help="comma list (0.1,0.2) or auto-quantile:K (default per kind)")

    p = sub.add_parser("topics", help="topic sizes and people-to-problem ratios")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--kind", choices=("ref", "text"), default="ref")
    p.add_argument("--thresholds")

    p = sub.add_parser("stats", help="whole-network statistics")
    common(p)
    p.add_argument("--kind", choices=("ref", "text"), default="ref")

    p = sub.add_parser("removal", help="core-source removal experiment")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--strategy", choices=("targeted", "random"), default="targeted")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--fractions", help="START:TOP:STEP (default 0:0.95:0.05)")

    return parser


def _apply_config(args: argparse.Namespace, argv: list[str]) -> None:
    """Fill unset args from the config file; explicit flags win."""
    if not args.config:
        return
    config = _load_config_file(Path(args.config))
    if not isinstance(config, dict):
        raise ConfigError("config file must hold a table of options")
    explicit = {token.split("=", 1)[0].lstrip("-").replace("-", "_")
                for token in argv if token.startswith("--")}
    for key, value in config.items():
        attr = key.replace("-", "_")
        if attr in ("command", "config"):
            continue
        if hasattr(args, attr) and attr not in explicit:
            setattr(args, attr, value)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _apply_config(args, argv)
        out_dir = Path(args.out or os.environ.get(OUT_DIR_ENV) or "out")
        ws = Workspace(out_dir)
        ws.prepare()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    handler = _HANDLERS[args.command]
    try:
        handler(args, ws)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (StageError, CorpusError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        ws.discard_written()
        return 1
    return 0


def entrypoint() -> None:  # console-script shim
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
