from __future__ import annotations

import csv
import hashlib
import itertools
import json
import random
from pathlib import Path

from bibcoupling import export_corpus, star_core_corpus
from bibcoupling.cli import main

DATA = Path(__file__).parent / "data"


def run(*argv) -> int:
    return main([str(a) for a in argv])


def digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def pipeline(out: Path, seed=7, preset="rural") -> None:
    assert run("synth", "--preset", preset, "--seed", seed, "--out", out) == 0
    assert run("link", "--out", out) == 0
    assert run("net", "--kind", "ref", "--years", "2011:2015", "--out", out) == 0
    assert run("curve", "--kind", "ref", "--thresholds", "0.05,0.1,0.2,0.3",
               "--out", out) == 0


# --- determinism ------------------------------------------------------------

def test_pipeline_reruns_are_byte_identical(tmp_path):
    one, two = tmp_path / "one", tmp_path / "two"
    pipeline(one)
    pipeline(two)
    for name in ("corpus.jsonl", "labels.csv", "clusters.jsonl", "refsets.json",
                 "network_reference.csv", "network_reference.json",
                 "curve_reference.csv"):
        assert digest(one / name) == digest(two / name), name


def test_manifest_records_stages_and_stable_hashes(tmp_path):
    out = tmp_path / "run"
    pipeline(out)
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert {"synth", "link", "net_reference", "curve_reference"} <= set(manifest["stages"])
    first_hashes = manifest["stages"]["net_reference"]["outputs"]
    pipeline(out)  # rerun in place
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["stages"]["net_reference"]["outputs"] == first_hashes


def test_net_stage_is_cached_on_rerun(tmp_path, capsys):
    out = tmp_path / "run"
    pipeline(out)
    capsys.readouterr()
    assert run("net", "--kind", "ref", "--years", "2011:2015", "--out", out) == 0
    assert "cached" in capsys.readouterr().out


# --- failure modes ------------------------------------------------------------

def test_curve_without_network_artifact_exits_2(tmp_path, capsys):
    out = tmp_path / "empty"
    assert run("curve", "--kind", "ref", "--out", out) == 2
    assert "missing network artifact" in capsys.readouterr().err


def test_removal_without_linkage_exits_2(tmp_path):
    out = tmp_path / "r"
    assert run("synth", "--preset", "rural", "--seed", 1, "--out", out) == 0
    assert run("removal", "--strategy", "targeted", "--out", out) == 2


def test_unknown_venue_exits_2(tmp_path):
    out = tmp_path / "v"
    assert run("synth", "--preset", "rural", "--seed", 1, "--out", out) == 0
    assert run("summarize", "--venue", "nonexistent", "--out", out) == 2


def test_synth_requires_preset_or_spec(tmp_path):
    assert run("synth", "--out", tmp_path / "x") == 2


def test_link_failure_leaves_no_partial_outputs(tmp_path):
    out = tmp_path / "f"
    corpus = out / "given.jsonl"
    out.mkdir()
    corpus.write_text(
        '{"pub_id": "a", "venue": "V", "year": 2011, "title": "T", '
        '"references": ["no parseable author here at all"]}\n', encoding="utf-8")
    code = run("link", "--corpus", corpus, "--out", out)
    assert code == 1
    assert not (out / "clusters.jsonl").exists()


def test_bad_year_window_exits_2(tmp_path):
    out = tmp_path / "y"
    assert run("synth", "--preset", "rural", "--seed", 1, "--out", out) == 0
    assert run("link", "--out", out) == 0
    assert run("net", "--kind", "ref", "--years", "oops", "--out", out) == 2


# --- ingest and summarize -------------------------------------------------------

def test_ingest_reports_diagnostics_and_normalizes(tmp_path, capsys):
    out = tmp_path / "i"
    source = tmp_path / "src.jsonl"
    source.write_text(
        '{"pub_id": "a", "venue": "V", "year": 2011, "title": "T"}\n'
        '{"pub_id": "", "venue": "V", "year": 2011, "title": "T"}\n',
        encoding="utf-8")
    assert run("ingest", "--corpus", source, "--out", out) == 0
    captured = capsys.readouterr()
    assert "line 2" in captured.err
    assert (out / "corpus.jsonl").is_file()


def test_summarize_fixture_outputs(tmp_path):
    out = tmp_path / "s"
    assert run("summarize", "--corpus", DATA / "corpus50.jsonl", "--out", out) == 0
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["n_articles"] == 50
    assert summary["n_unique_authors"] == 20
    with (out / "summary.csv").open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["statistic", "value"]
    assert ["Number of articles", "50"] in rows


def test_venue_filter_restricts_analysis(tmp_path):
    out = tmp_path / "v2"
    assert run("summarize", "--corpus", DATA / "corpus50.jsonl",
               "--venue", "Journal of Field Studies", "--out", out) == 0
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["n_articles"] == 17


# --- full stage coverage ------------------------------------------------------------

def test_topics_stats_removal_stages(tmp_path):
    out = tmp_path / "full"
    pipeline(out)
    assert run("topics", "--kind", "ref", "--out", out) == 0
    assert run("stats", "--kind", "ref", "--out", out) == 0
    assert run("removal", "--strategy", "targeted",
               "--fractions", "0:1.0:0.25", "--out", out) == 0
    assert run("removal", "--strategy", "random", "--trials", 5, "--seed", 1,
               "--fractions", "0:1.0:0.25", "--out", out) == 0

    with (out / "topics_reference.csv").open(encoding="utf-8", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["threshold", "n_topics", "size_mean", "size_median",
                      "people_mean", "people_median"]
    stats = json.loads((out / "stats_reference.json").read_text(encoding="utf-8"))
    assert {"n_nodes", "n_isolated", "n_edges", "density", "diameter",
            "global_clustering", "modularity"} == set(stats)
    with (out / "removal_random.csv").open(encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["strategy"] == "random"
    assert float(rows[0]["fraction"]) == 0.0
    assert int(rows[0]["trials"]) == 5


def test_text_network_and_quantile_curve(tmp_path):
    out = tmp_path / "txt"
    assert run("synth", "--preset", "urban", "--seed", 3, "--out", out) == 0
    assert run("net", "--kind", "text", "--out", out) == 0
    assert run("curve", "--kind", "text", "--thresholds", "auto-quantile:10",
               "--out", out) == 0
    with (out / "curve_text.csv").open(encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) >= 2
    assert all(0.0 <= float(r["c"]) <= 1.0 for r in rows)


def test_calibrate_stage_with_labels(tmp_path):
    out = tmp_path / "cal"
    out.mkdir()
    # stage the variants corpus, then label pairs from the ground truth
    records = [json.loads(line) for line in
               (DATA / "variants_corpus.jsonl").read_text(encoding="utf-8").splitlines()]
    (out / "corpus.jsonl").write_text(
        "\n".join(json.dumps(r, ensure_ascii=False) for r in records) + "\n",
        encoding="utf-8")
    groups = json.loads((DATA / "variants_groups.json").read_text(encoding="utf-8"))
    ref_ids = {}
    for rec in records:
        for i, raw in enumerate(rec["references"]):
            ref_ids[f"{rec['pub_id']}:r{i}"] = groups[raw]
    ids = sorted(ref_ids)
    rng = random.Random(0)
    labeled = []
    for a, b in itertools.combinations(ids, 2):
        if ref_ids[a] == ref_ids[b]:
            labeled.append((a, b, True))
    negatives = [(a, b) for a, b in itertools.combinations(ids, 2)
                 if ref_ids[a] != ref_ids[b]]
    labeled += [(a, b, False) for a, b in rng.sample(negatives, 400)]
    labels_path = out / "labels_pairs.csv"
    with labels_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ref_id_a", "ref_id_b", "is_match"])
        for a, b, flag in labeled:
            writer.writerow([a, b, "true" if flag else "false"])
    assert run("calibrate", "--labels", labels_path, "--out", out) == 0
    report = json.loads((out / "calibration.json").read_text(encoding="utf-8"))
    assert 0.0 <= report["threshold"] <= 1.0
    assert report["accuracy_above"] > 0.5
    assert report["accuracy_below"] < 0.5
    # link without an explicit flag picks the calibrated threshold up
    assert run("link", "--out", out) == 0
    linkage = json.loads((out / "linkage_report.json").read_text(encoding="utf-8"))
    assert linkage["rest_threshold"] == report["threshold"]


def test_config_file_supplies_defaults_and_flags_override(tmp_path):
    out_a = tmp_path / "from_config"
    config = tmp_path / "run.toml"
    config.write_text(f'preset = "rural"\nseed = 11\nout = "{out_a}"\n', encoding="utf-8")
    assert run("synth", "--config", config) == 0
    assert (out_a / "corpus.jsonl").is_file()
    out_b = tmp_path / "override"
    assert run("synth", "--config", config, "--out", out_b, "--seed", 12) == 0
    assert (out_b / "corpus.jsonl").is_file()
    assert digest(out_a / "corpus.jsonl") != digest(out_b / "corpus.jsonl")


def test_out_dir_env_variable(tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv("BIBCOUPLING_OUT_DIR", str(target))
    assert run("synth", "--preset", "rural", "--seed", 2) == 0
    assert (target / "corpus.jsonl").is_file()


def test_star_corpus_removal_through_cli(tmp_path):
    out = tmp_path / "star"
    out.mkdir()
    corpus = star_core_corpus(60, 6)
    export_corpus(corpus.records, out / "corpus.jsonl", "jsonl")
    assert run("link", "--out", out) == 0
    assert run("removal", "--strategy", "targeted",
               "--fractions", "0:1.0:0.5", "--out", out) == 0
    with (out / "removal_targeted.csv").open(encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["g_mean"]) == 1.0          # baseline: complete graph
    assert float(rows[-1]["g_mean"]) == 1 / 60       # everything removed
