import csv
import json

import pytest
from click.testing import CliRunner

from corpus_fixtures import build_manifest, build_model
from phonaudit.cli import main
from phonaudit.pipeline import write_jsonl

ERRORS = {"aa": 0, "bb": 2, "cc": 3}


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture()
def corpus(tmp_path):
    manifest = build_manifest(ERRORS)
    manifest_path = tmp_path / "manifest.jsonl"
    manifest.save(manifest_path)

    preds_path = tmp_path / "preds.jsonl"
    rows = []
    for model_id, errors in (("m1", ERRORS), ("m2", {"aa": 1, "bb": 2, "cc": 2})):
        model = build_model(model_id, manifest, errors)
        rows += [
            {"utterance_id": uid, "model_id": model_id, "transcript": text}
            for uid, text in sorted(model.entries.items())
        ]
    write_jsonl(preds_path, rows)
    return {"manifest": manifest_path, "preds": preds_path, "dir": tmp_path}


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


def test_census_command(runner, tmp_path) -> None:
    manifest = build_manifest({"aa": 0}, utterances_per_language=2)
    manifest.entries[0] = manifest.entries[0].__class__(
        utterance_id="aa-000", language_code="aa", audio_path="a.wav",
        gold_transcript="ga tˤˤa", duration_s=1.0,
    )
    path = tmp_path / "manifest.jsonl"
    build_manifest({"aa": 0})  # unrelated; keeps helper import honest
    from phonaudit.pipeline import DatasetManifest
    DatasetManifest(entries=manifest.entries).save(path)

    result = runner.invoke(main, ["census", str(path), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    rows = read_csv(tmp_path / "census_categories.csv")
    assert rows[0] == ["category", "type_count", "token_count"]
    by_cat = {r[0]: (int(r[1]), int(r[2])) for r in rows[1:]}
    assert by_cat["invalid"] == (2, 2)  # g and t'' once each
    phone_rows = read_csv(tmp_path / "census_phones.csv")
    assert phone_rows[0] == ["phone", "category", "token_count"]
    assert "invalid" in result.output


def test_normalize_command(runner, corpus, tmp_path) -> None:
    manifest_path = tmp_path / "dirty.jsonl"
    from phonaudit.pipeline import DatasetManifest, ManifestEntry
    DatasetManifest(entries=[
        ManifestEntry("u1", "aa", "a.wav", "ga pa", 1.0),
        ManifestEntry("u2", "aa", "b.wav", "oᵑ ta", 1.0),
    ]).save(manifest_path)
    map_path = tmp_path / "map.json"
    map_path.write_text(json.dumps({"g": "ɡ", "oᵑ": "oŋ"},
                                   ensure_ascii=False), encoding="utf-8")

    out = tmp_path / "normalized"
    result = runner.invoke(main, [
        "normalize", str(manifest_path), "--map", str(map_path),
        "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    from phonaudit.pipeline import DatasetManifest as DM
    cleaned = DM.load(out / "manifest.jsonl")
    assert cleaned.by_id["u1"].gold_transcript == "ɡa pa"
    assert cleaned.by_id["u2"].gold_transcript == "oŋ ta"
    summary = json.loads((out / "normalize_summary.json").read_text())
    assert summary["applied"] == {"g": 1, "oᵑ": 1}
    assert summary["unmapped"] == {}


def test_benchmark_command(runner, corpus, tmp_path) -> None:
    out = tmp_path / "metrics"
    result = runner.invoke(main, [
        "benchmark", str(corpus["manifest"]), "--pred", str(corpus["preds"]),
        "--out", str(out),
    ])
    assert result.exit_code == 0, result.output

    langs = read_csv(out / "m1" / "languages.csv")
    assert langs[0] == ["language", "median", "iqr", "n"]
    by_lang = {r[0]: r for r in langs[1:]}
    assert float(by_lang["aa"][1]) == pytest.approx(0.0)
    assert float(by_lang["cc"][1]) == pytest.approx(3 / 144, abs=1e-6)

    utts = read_csv(out / "m1" / "utterances.csv")
    assert utts[0] == ["language", "utterance_id", "pfer_raw", "pfer_normalized"]
    assert len(utts) == 1 + 18

    phones = read_csv(out / "m1" / "phones.csv")
    assert phones[0] == ["phone", "freq", "epr", "recall", "majority_label"]
    by_phone = {r[0]: r for r in phones[1:]}
    assert by_phone["a"][3] == "1.000000"  # vowels always survive the swaps
    assert "correlation m1 vs m2" in result.output


def test_benchmark_phone_filter(runner, corpus, tmp_path) -> None:
    out = tmp_path / "metrics"
    result = runner.invoke(main, [
        "benchmark", str(corpus["manifest"]), "--pred", str(corpus["preds"]),
        "--out", str(out), "--phones", "p,t",
    ])
    assert result.exit_code == 0, result.output
    phones = read_csv(out / "m2" / "phones.csv")
    assert [r[0] for r in phones[1:]] == ["p", "t"]


def test_power_command(runner) -> None:
    result = runner.invoke(main, ["power"])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().split("\n")
    assert lines[0] == "n\tk\tpower\ttype1"
    assert len(lines) == 1 + 19  # n = 5, 10, ..., 95
    row20 = next(l for l in lines if l.startswith("20\t"))
    assert row20 == "20\t5\t0.804208\t0.020695"


def test_power_command_to_file(runner, tmp_path) -> None:
    out = tmp_path / "power.tsv"
    result = runner.invoke(main, [
        "power", "--n-min", "10", "--n-max", "30", "--n-step", "10",
        "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 4


def test_audit_chain(runner, corpus, tmp_path) -> None:
    scores_path = tmp_path / "scores.json"
    result = runner.invoke(main, [
        "audit", "score", str(corpus["manifest"]),
        "--pred", str(corpus["preds"]), "--out", str(scores_path),
    ])
    assert result.exit_code == 0, result.output
    payload = json.loads(scores_path.read_text())
    assert payload["models"] == ["m1", "m2"]
    assert payload["languages"]["cc"]["m1"]["median"] == pytest.approx(3 / 144)
    assert "m1|m2" in payload["correlations"]

    result = runner.invoke(main, [
        "audit", "select", str(scores_path), "--quantile", "0.6667",
    ])
    assert result.exit_code == 0, result.output
    # Thresholds go to stderr; the selection itself is the stdout payload.
    assert result.stdout.split() == ["cc"]

    sample_dir = tmp_path / "sample"
    args = [
        "audit", "sample", str(corpus["manifest"]),
        "--pred", str(corpus["preds"]), "--out", str(sample_dir),
        "--quantile", "0.6667", "--n", "5", "--seed", "3",
    ]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    tasks = (sample_dir / "tasks.jsonl").read_text().splitlines()
    assert len(tasks) == 5
    assert all("a_is_gold" not in line for line in tasks)
    keys = (sample_dir / "keys.jsonl").read_text().splitlines()
    assert len(keys) == 5

    # Byte-identical on a rerun with the same seed and config.
    rerun_dir = tmp_path / "sample2"
    rerun = [a if a != str(sample_dir) else str(rerun_dir) for a in args]
    assert runner.invoke(main, rerun).exit_code == 0
    for name in ("tasks.jsonl", "keys.jsonl", "selection.json"):
        assert (sample_dir / name).read_bytes() == (rerun_dir / name).read_bytes()

    # Hand-build records preferring the model side, then compile a verdict.
    key_rows = [json.loads(line) for line in keys]
    records_path = tmp_path / "records.jsonl"
    write_jsonl(records_path, [
        {"task_id": row["task_id"], "annotator_id": "ann1",
         "choice": "prefer_b" if row["a_is_gold"] else "prefer_a",
         "influential_words": [], "timestamp": "t", "playback_speeds": [1.0]}
        for row in key_rows
    ])
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"min_decided": 1}), encoding="utf-8")
    report_path = tmp_path / "report.json"
    result = runner.invoke(main, [
        "audit", "verdict", str(sample_dir / "tasks.jsonl"),
        "--keys", str(sample_dir / "keys.jsonl"),
        "--records", str(records_path),
        "--config", str(config_path), "--out", str(report_path),
    ])
    assert result.exit_code == 0, result.output
    report = json.loads(report_path.read_text())
    assert report["flagged_languages"] == ["cc"]
    assert "cc: flag" in result.output

    filtered_path = tmp_path / "filtered.jsonl"
    result = runner.invoke(main, [
        "audit", "filter", str(corpus["manifest"]),
        "--report", str(report_path), "--out", str(filtered_path),
    ])
    assert result.exit_code == 0, result.output
    from phonaudit.pipeline import DatasetManifest
    filtered = DatasetManifest.load(filtered_path)
    assert filtered.languages() == ["aa", "bb"]
    assert "dropped: cc" in result.output


def test_audit_sample_language_override(runner, corpus, tmp_path) -> None:
    sample_dir = tmp_path / "sample"
    result = runner.invoke(main, [
        "audit", "sample", str(corpus["manifest"]),
        "--pred", str(corpus["preds"]), "--out", str(sample_dir),
        "--languages", "aa", "--n", "3", "--seed", "1",
    ])
    assert result.exit_code == 0, result.output
    rows = [json.loads(line) for line in
            (sample_dir / "tasks.jsonl").read_text().splitlines()]
    assert len(rows) == 3
    assert all(r["language"] == "aa" for r in rows)


def test_audit_sample_too_many_tasks_fails(runner, corpus, tmp_path) -> None:
    result = runner.invoke(main, [
        "audit", "sample", str(corpus["manifest"]),
        "--pred", str(corpus["preds"]), "--out", str(tmp_path / "s"),
        "--languages", "aa", "--n", "99", "--seed", "1",
    ])
    assert result.exit_code != 0


def test_missing_manifest_is_usage_error(runner, tmp_path) -> None:
    result = runner.invoke(main, ["census", str(tmp_path / "missing.jsonl")])
    assert result.exit_code == 2


def test_help_lists_commands(runner) -> None:
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for command in ("census", "normalize", "benchmark", "power", "audit",
                    "serve"):
        assert command in result.output
