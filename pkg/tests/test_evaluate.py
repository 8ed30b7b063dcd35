from __future__ import annotations

import json

import pytest

from nl2sql.dataset import SpiderExample
from nl2sql.errors import DatasetError
from nl2sql.evaluate import (
    render_report_markdown,
    score,
    weighted_execution_accuracy,
)
from nl2sql.hardness import Hardness
from nl2sql.pipeline import PipelineTranscript, Verdict

GOLD = "SELECT name FROM ship WHERE disposition_of_ship = 'sank'"
WRONG = "SELECT name FROM ship WHERE disposition_of_ship = 'captured'"


def transcript(example_id, final_sql, verdict=Verdict.CORRECT_FIRST_SHOT):
    return PipelineTranscript(
        example_id=example_id,
        db_id="battle_death",
        question=f"q{example_id}",
        gold_sql=GOLD,
        stages=[],
        final_sql=final_sql,
        final_verdict=verdict,
    )


def ship_example(example_id, hardness=Hardness.EASY):
    return SpiderExample(
        id=example_id, question=f"q{example_id}", db_id="battle_death",
        gold_sql=GOLD, hardness=hardness,
    )


def test_published_bucket_arithmetic_reproduces_overall():
    buckets = {
        Hardness.EASY: (248, 0.940),
        Hardness.MEDIUM: (446, 0.857),
        Hardness.HARD: (174, 0.805),
        Hardness.EXTRA: (166, 0.566),
    }
    overall = weighted_execution_accuracy(buckets)
    assert round(overall, 3) == 0.821


def test_all_correct_fixture_scores_one():
    buckets = {Hardness.EASY: (5, 1.0), Hardness.MEDIUM: (3, 1.0)}
    assert weighted_execution_accuracy(buckets) == 1.0


def test_empty_buckets_score_zero():
    assert weighted_execution_accuracy({}) == 0.0


def test_seven_of_ten_scores_point_seven(schemas):
    examples = [ship_example(i) for i in range(10)]
    transcripts = [transcript(i, GOLD if i < 7 else WRONG) for i in range(10)]
    report = score(transcripts, examples, schemas, with_triage=False)
    assert report.overall == pytest.approx(0.7)
    assert report.buckets[Hardness.EASY].count == 10
    assert report.buckets[Hardness.EASY].correct == 7


def test_weighted_average_identity_holds(schemas):
    examples = [ship_example(i, Hardness.EASY if i % 2 else Hardness.HARD) for i in range(8)]
    transcripts = [transcript(i, GOLD if i % 3 else WRONG) for i in range(8)]
    report = score(transcripts, examples, schemas, with_triage=False)
    recomputed = weighted_execution_accuracy(
        {h: (b.count, b.accuracy) for h, b in report.buckets.items()}
    )
    assert report.overall == recomputed  # exact, same formula


def test_missing_transcripts_fatal_with_ids(schemas):
    examples = [ship_example(0), ship_example(1)]
    with pytest.raises(DatasetError, match=r"\[1\]"):
        score([transcript(0, GOLD)], examples, schemas)


def test_scoring_ignores_stage_history(schemas):
    examples = [ship_example(0)]
    plain = transcript(0, GOLD)
    with_history = transcript(0, GOLD, verdict=Verdict.CORRECTED_BY_ERROR)
    with_history.stages = []  # stage records do not matter either way
    a = score([plain], examples, schemas, with_triage=False)
    b = score([with_history], examples, schemas, with_triage=False)
    assert a.overall == b.overall == 1.0


def test_unparseable_final_sql_counts_wrong_and_unclassifiable(schemas):
    examples = [ship_example(0)]
    bad = transcript(0, "SELECT bogus FROM nowhere")
    report = score([bad], examples, schemas)
    assert report.overall == 0.0
    assert report.triage_distribution["categories"]["Unclassifiable"]["count"] == 1


def test_none_final_sql_counts_wrong(schemas):
    examples = [ship_example(0)]
    report = score([transcript(0, None, verdict=Verdict.FAILED)], examples, schemas)
    assert report.overall == 0.0


def test_triage_distribution_present_for_failures(schemas):
    examples = [ship_example(0)]
    report = score([transcript(0, WRONG)], examples, schemas)
    assert report.triage_distribution["total"] == 1
    assert "PredictedValues" in report.triage_distribution["categories"]


def test_results_payload_deterministic(schemas):
    examples = [ship_example(i) for i in range(4)]
    transcripts = [transcript(i, GOLD if i % 2 else WRONG) for i in range(4)]
    a = score(transcripts, examples, schemas, metadata={"generated_at": "now"})
    b = score(transcripts, examples, schemas, metadata={"generated_at": "later"})
    assert json.dumps(a.results_payload()) == json.dumps(b.results_payload())
    assert a.metadata != b.metadata


def test_markdown_report_has_difficulty_table(schemas):
    examples = [ship_example(0)]
    report = score([transcript(0, GOLD)], examples, schemas, with_triage=False)
    text = render_report_markdown(report)
    assert "| Easy | Medium | Hard | Extra | All |" in text.replace("|  |", "|").replace("| |", "|")
    assert "Exec Accuracy" in text
    assert "1.000" in text


def test_fault_transcripts_counted_separately(schemas):
    examples = [ship_example(0), ship_example(1)]
    faulted = transcript(0, None, verdict=Verdict.FAULT)
    faulted.fault = "gold execution unusable"
    fine = transcript(1, GOLD)
    report = score([faulted, fine], examples, schemas, with_triage=False)
    assert report.faults == 1
    assert report.overall == pytest.approx(0.5)
    assert report.verdict_distribution["fault"] == 1


def test_accuracy_printed_to_three_decimals(schemas):
    examples = [ship_example(i) for i in range(3)]
    transcripts = [transcript(i, GOLD if i < 2 else WRONG) for i in range(3)]
    report = score(transcripts, examples, schemas, with_triage=False)
    payload = report.results_payload()
    assert payload["buckets"]["easy"]["accuracy"] == 0.667
