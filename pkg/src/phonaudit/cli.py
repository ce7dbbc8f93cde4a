"""Command-line interface for corpus auditing.

Subcommands cover the full workflow: census and normalization of phone
inventories, alignment benchmarking against model transcripts, power
tables for the preference test, the audit pipeline (score, select,
sample, verdict, filter), and the annotation HTTP service.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import sys
from pathlib import Path

import click

from phonaudit.alignment import CostModel
from phonaudit.errors import PhonauditError
from phonaudit.features import default_table
from phonaudit.metrics import phone_recall
from phonaudit.pipeline import (
    DatasetManifest,
    choose_model_for_language,
    compile_report,
    filter_manifest,
    load_model_transcripts,
    load_records,
    load_tasks,
    sample_tasks,
    save_tasks,
    score_languages,
    select_audit_languages,
    write_json,
)
from phonaudit.preference_test import PreferenceTestConfig, sample_size_table
from phonaudit.transcripts import (
    Category,
    ReplacementMap,
    census,
    normalize_transcript,
    tokenize,
)

_CATEGORY_ORDER = (
    Category.VALID_PRIMARY,
    Category.VALID_ONE_DIACRITIC,
    Category.VALID_TWO_DIACRITICS,
    Category.INVALID,
)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _gold_corpus(manifest: DatasetManifest) -> list:
    return [
        tokenize(e.gold_transcript, e.language_code, e.utterance_id)
        for e in manifest.entries
    ]


def _load_config(path: str | None) -> PreferenceTestConfig:
    if path is None:
        return PreferenceTestConfig()
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return PreferenceTestConfig(
        alpha=raw.get("alpha", 0.05),
        theta_null=raw.get("theta_null", 0.5),
        theta_alt=raw.get("theta_alt", 0.2),
        min_decided=raw.get("min_decided", 15),
    )


@click.group()
@click.version_option(package_name="phonaudit")
def main() -> None:
    """Audit per-language quality of phonetically transcribed corpora."""


@main.command("census")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), default=".",
              show_default=True, help="Directory for the census CSVs.")
def census_cmd(manifest: str, out: str) -> None:
    """Census the phone inventory of a manifest's gold transcripts."""
    table = default_table()
    result = census(_gold_corpus(DatasetManifest.load(manifest)), table)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)

    _write_csv(
        out_dir / "census_categories.csv",
        ["category", "type_count", "token_count"],
        [
            [cat.value,
             result.per_category[cat]["type_count"],
             result.per_category[cat]["token_count"]]
            for cat in _CATEGORY_ORDER
        ],
    )
    _write_csv(
        out_dir / "census_phones.csv",
        ["phone", "category", "token_count"],
        [
            [phone, result.category_of[phone].value, count]
            for phone, count in sorted(
                result.per_phone.items(), key=lambda kv: (-kv[1], kv[0])
            )
        ],
    )
    total = result.total_tokens()
    for cat in _CATEGORY_ORDER:
        click.echo(
            f"{cat.value}: {result.per_category[cat]['token_count']}/{total} tokens"
        )
    if result.overflow_diacritics:
        click.echo(
            f"note: {result.overflow_diacritics} valid tokens carry "
            "more than two diacritics"
        )


@main.command("normalize")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--map", "map_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON replacement map for invalid phones.")
@click.option("--out", required=True, type=click.Path(file_okay=False),
              help="Directory for the normalized manifest and summary.")
def normalize_cmd(manifest: str, map_path: str, out: str) -> None:
    """Rewrite invalid phones in gold transcripts via a replacement map."""
    table = default_table()
    rmap = ReplacementMap.load(map_path)
    rmap.validate(table)
    source = DatasetManifest.load(manifest)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)

    applied: dict[str, int] = {}
    unmapped: dict[str, int] = {}
    entries = []
    for e in source.entries:
        result = normalize_transcript(
            tokenize(e.gold_transcript, e.language_code, e.utterance_id),
            rmap, table,
        )
        for phone, n in result.applied.items():
            applied[phone] = applied.get(phone, 0) + n
        for phone, n in result.unmapped.items():
            unmapped[phone] = unmapped.get(phone, 0) + n
        entries.append(
            dataclasses.replace(e, gold_transcript=result.transcript.render())
        )
    DatasetManifest(entries=entries).save(out_dir / "manifest.jsonl")
    write_json(
        out_dir / "normalize_summary.json",
        {"applied": dict(sorted(applied.items())),
         "unmapped": dict(sorted(unmapped.items()))},
    )
    click.echo(
        f"rewrote {sum(applied.values())} tokens "
        f"({len(applied)} types); {sum(unmapped.values())} tokens left unmapped"
    )


@main.command("benchmark")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Model transcripts JSONL.")
@click.option("--out", required=True, type=click.Path(file_okay=False),
              help="Directory for the metric CSVs (one subdir per model).")
@click.option("--phones", default=None,
              help="Comma-separated phones to profile (default: all gold phones).")
def benchmark_cmd(manifest: str, pred: str, out: str, phones: str | None) -> None:
    """Score model transcripts against gold with alignment-based metrics."""
    table = default_table()
    cost = CostModel.from_table(table)
    source = DatasetManifest.load(manifest)
    model_sets = load_model_transcripts(pred)
    scores = score_languages(source, model_sets, cost)

    gold_by_id = {
        e.utterance_id: tokenize(e.gold_transcript, e.language_code, e.utterance_id)
        for e in source.entries
    }
    if phones is not None:
        targets = [p.strip() for p in phones.split(",") if p.strip()]
    else:
        targets = sorted(
            {p.surface for t in gold_by_id.values() for p in t.phones()}
        )

    for mset in model_sets:
        model_dir = Path(out) / mset.model_id
        model_dir.mkdir(parents=True, exist_ok=True)

        utt_rows = []
        for language in source.languages():
            for s in scores.per_utterance[(language, mset.model_id)]:
                utt_rows.append(
                    [language, s.utterance_id,
                     f"{s.pfer_raw:.6f}", f"{s.pfer_normalized:.6f}"]
                )
        _write_csv(model_dir / "utterances.csv",
                   ["language", "utterance_id", "pfer_raw", "pfer_normalized"],
                   utt_rows)

        _write_csv(
            model_dir / "languages.csv",
            ["language", "median", "iqr", "n"],
            [
                [lang,
                 f"{scores.aggregates[(lang, mset.model_id)].median_pfer:.6f}",
                 f"{scores.aggregates[(lang, mset.model_id)].iqr_pfer:.6f}",
                 scores.aggregates[(lang, mset.model_id)].n_utterances]
                for lang in source.languages()
            ],
        )

        pairs = []
        for e in source.entries:
            raw = mset.entries.get(e.utterance_id)
            if raw is None:
                continue
            pred_t = (tokenize(raw, e.language_code, e.utterance_id)
                      if raw.strip() else None)
            pairs.append((gold_by_id[e.utterance_id], pred_t))
        pairs = [(g, p) for g, p in pairs if p is not None]
        freq: dict[str, int] = {}
        for g, _ in pairs:
            for p in g.phones():
                freq[p.surface] = freq.get(p.surface, 0) + 1
        present = [t for t in targets if freq.get(t, 0) > 0]
        profiles = phone_recall(pairs, present, cost) if present else {}
        _write_csv(
            model_dir / "phones.csv",
            ["phone", "freq", "epr", "recall", "majority_label"],
            [
                [t, profiles[t].occurrence_count,
                 f"{profiles[t].expected_error:.6f}",
                 f"{profiles[t].recall:.6f}",
                 profiles[t].majority_label
                 if profiles[t].majority_label is not None else "<gap>"]
                for t in sorted(present)
            ],
        )
        click.echo(f"{mset.model_id}: wrote metrics for "
                   f"{len(utt_rows)} utterances to {model_dir}")

    for (m1, m2), r in sorted(scores.correlations.items()):
        click.echo(f"correlation {m1} vs {m2}: r={r:.3f}")


@main.command("power")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--theta-null", type=float, default=0.5, show_default=True)
@click.option("--theta-alt", type=float, default=0.2, show_default=True)
@click.option("--n-min", type=int, default=5, show_default=True)
@click.option("--n-max", type=int, default=95, show_default=True)
@click.option("--n-step", type=int, default=5, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the TSV here instead of stdout.")
def power_cmd(alpha: float, theta_null: float, theta_alt: float,
              n_min: int, n_max: int, n_step: int, out: str | None) -> None:
    """Tabulate critical values, power, and type-I error per sample size."""
    config = PreferenceTestConfig(alpha=alpha, theta_null=theta_null,
                                  theta_alt=theta_alt)
    rows = sample_size_table(config, list(range(n_min, n_max + 1, n_step)))
    lines = ["n\tk\tpower\ttype1"]
    lines += [f"{r.n}\t{r.k}\t{r.power:.6f}\t{r.type1:.6f}" for r in rows]
    text = "\n".join(lines) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {len(rows)} rows to {out}")


@main.group("audit")
def audit_group() -> None:
    """Human-preference audit pipeline."""


@audit_group.command("score")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Output JSON with per-language aggregates and correlations.")
def audit_score_cmd(manifest: str, pred: str, out: str) -> None:
    """Score every (language, model) pair with normalized PFER."""
    table = default_table()
    cost = CostModel.from_table(table)
    source = DatasetManifest.load(manifest)
    scores = score_languages(source, load_model_transcripts(pred), cost)
    write_json(
        out,
        {
            "models": scores.models(),
            "languages": {
                lang: {
                    m: {
                        "median": scores.aggregates[(lang, m)].median_pfer,
                        "iqr": scores.aggregates[(lang, m)].iqr_pfer,
                        "n": scores.aggregates[(lang, m)].n_utterances,
                    }
                    for m in scores.models()
                }
                for lang in scores.languages()
            },
            "correlations": {
                f"{m1}|{m2}": r for (m1, m2), r in scores.correlations.items()
            },
        },
    )
    click.echo(f"scored {len(scores.languages())} languages x "
               f"{len(scores.models())} models -> {out}")


@audit_group.command("select")
@click.argument("scores_json", type=click.Path(exists=True, dir_okay=False))
@click.option("--quantile", type=float, default=2 / 3, show_default="0.667")
def audit_select_cmd(scores_json: str, quantile: float) -> None:
    """List languages whose error exceeds the per-model quantile threshold."""
    with open(scores_json, encoding="utf-8") as fh:
        payload = json.load(fh)
    from phonaudit.metrics import LanguageAggregate
    from phonaudit.pipeline import ScoreTable

    aggregates = {
        (lang, m): LanguageAggregate(
            language_code=lang,
            median_pfer=stats["median"],
            iqr_pfer=stats["iqr"],
            n_utterances=stats["n"],
        )
        for lang, per_model in payload["languages"].items()
        for m, stats in per_model.items()
    }
    scores = ScoreTable(aggregates=aggregates, per_utterance={}, correlations={})
    selection = select_audit_languages(scores, quantile)
    for m in sorted(selection.thresholds):
        click.echo(f"# threshold[{m}] = {selection.thresholds[m]:.6f}",
                   err=True)
    for lang in selection.selected:
        click.echo(lang)


@audit_group.command("sample")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--quantile", type=float, default=2 / 3, show_default="0.667")
@click.option("--n", type=int, default=20, show_default=True,
              help="Tasks per selected language.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--languages", default=None,
              help="Comma-separated override of the selection step.")
def audit_sample_cmd(manifest: str, pred: str, out: str, quantile: float,
                     n: int, seed: int, languages: str | None) -> None:
    """Sample blind annotation tasks for the high-error languages."""
    table = default_table()
    cost = CostModel.from_table(table)
    source = DatasetManifest.load(manifest)
    model_sets = load_model_transcripts(pred)
    scores = score_languages(source, model_sets, cost)
    if languages is not None:
        selected = [s.strip() for s in languages.split(",") if s.strip()]
    else:
        selected = list(select_audit_languages(scores, quantile).selected)
    by_model = {m.model_id: m for m in model_sets}

    tasks = []
    for lang in selected:
        model_id = choose_model_for_language(scores, lang)
        tasks.extend(
            sample_tasks(source, lang, by_model[model_id], n, seed, cost)
        )
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_tasks(tasks, out_dir / "tasks.jsonl", out_dir / "keys.jsonl")
    write_json(
        out_dir / "selection.json",
        {"quantile": quantile, "seed": seed, "n_per_language": n,
         "languages": selected},
    )
    click.echo(f"sampled {len(tasks)} tasks over {len(selected)} languages "
               f"-> {out_dir}")


@audit_group.command("verdict")
@click.argument("tasks", type=click.Path(exists=True, dir_okay=False))
@click.option("--keys", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Resolution key JSONL written alongside the tasks.")
@click.option("--records", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Preference records JSONL from the annotation service.")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Preference test config JSON (alpha, theta_null, ...).")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def audit_verdict_cmd(tasks: str, keys: str, records: str,
                      config_path: str | None, out: str) -> None:
    """Run the preference test per language and write the audit report."""
    report = compile_report(
        load_tasks(tasks, keys), load_records(records), _load_config(config_path)
    )
    write_json(out, report.to_dict())
    for lang in report.audited_languages:
        a = report.per_language[lang]
        click.echo(
            f"{lang}: {a.status} "
            f"(gold={a.gold_preferred}, model={a.model_preferred}, "
            f"ties={a.abstain_good}+{a.abstain_poor}, n={a.n_annotated})"
        )
    click.echo(f"flagged: {', '.join(report.flagged_languages) or '(none)'}")


@audit_group.command("filter")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--report", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Audit report JSON from `audit verdict`.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def audit_filter_cmd(manifest: str, report: str, out: str) -> None:
    """Write a manifest without the flagged languages."""
    source = DatasetManifest.load(manifest)
    with open(report, encoding="utf-8") as fh:
        payload = json.load(fh)
    flagged = set(payload["flagged_languages"])
    kept = [e for e in source.entries if e.language_code not in flagged]
    DatasetManifest(entries=kept).save(out)
    click.echo(
        f"kept {len(kept)}/{len(source.entries)} utterances "
        f"({len(source.languages()) - len(flagged)} languages); "
        f"dropped: {', '.join(sorted(flagged)) or '(none)'}"
    )


@main.command("serve")
@click.option("--campaign-dir", required=True, type=click.Path(file_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8400, show_default=True)
def serve_cmd(campaign_dir: str, host: str, port: int) -> None:
    """Run the annotation HTTP service."""
    import uvicorn

    from phonaudit.service import create_app

    uvicorn.run(create_app(campaign_dir), host=host, port=port)


def run() -> None:
    try:
        main(standalone_mode=True)
    except PhonauditError as exc:  # uniform nonzero exit for domain errors
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    run()
