from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from graphdx import fixtures
from graphdx.cli import main
from graphdx.graph import save_graph


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def graph_path(tmp_path):
    path = tmp_path / "graph.json"
    save_graph(fixtures.toy_graph(), path)
    return path


class TestValidateGraph:
    def test_valid_document(self, runner, graph_path):
        result = runner.invoke(main, ["validate-graph", str(graph_path)])
        assert result.exit_code == 0
        assert "valid graph" in result.output
        assert "disease: 8" in result.output
        assert "caused_by: 23" in result.output

    def test_invalid_document_nonzero_exit(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "nodes": [
                {"id": "d1", "name": "flu", "kind": "disease"},
                {"id": "s1", "name": "cough", "kind": "symptom"},
            ],
            "edges": [{"source": "d1", "target": "s1", "relation": "caused_by"}],
        }))
        result = runner.invoke(main, ["validate-graph", str(bad)])
        assert result.exit_code == 1
        assert "INVALID" in result.output
        assert "caused_by" in result.output


class TestRunAndEvaluate:
    def test_run_writes_transcripts_and_report(self, runner, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(
            main,
            ["run", "--n", "1", "--tau", "0.005", "--seed", "7", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert (out / "transcripts.jsonl").exists()
        assert (out / "report.json").exists()
        assert "recall@4" in result.output

        evaluated = runner.invoke(
            main,
            ["evaluate", "--in", str(out / "transcripts.jsonl"),
             "--out", str(tmp_path / "rep.json"), "--slice", "persona"],
        )
        assert evaluated.exit_code == 0, evaluated.output
        assert "slice by specificity" in evaluated.output
        doc = json.loads((tmp_path / "rep.json").read_text())
        assert doc["recall_at_k"]["4"] == 1.0

    def test_evaluate_schema_error_exit_2(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"schema_version": 99}\n')
        result = runner.invoke(main, ["evaluate", "--in", str(bad)])
        assert result.exit_code == 2
        assert "schema error" in result.output


class TestGenerateAndAugment:
    def test_gen_dialogues_scripted(self, runner, tmp_path):
        out = tmp_path / "gen"
        result = runner.invoke(
            main, ["gen-dialogues", "--clinician", "scripted", "--seed", "3",
                   "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        dialogues = (out / "dialogues.jsonl").read_text().splitlines()
        examples = (out / "sft_examples.jsonl").read_text().splitlines()
        assert len(dialogues) == 32
        assert len(examples) >= len(dialogues)  # at least the final diagnosis each
        from graphdx.verifier import parse_action

        for line in examples:
            doc = json.loads(line)
            parse_action(doc["target"])  # every target must parse

    def test_augment_counts(self, runner, tmp_path):
        out = tmp_path / "gen"
        runner.invoke(main, ["gen-dialogues", "--out", str(out), "--seed", "3"])
        result = runner.invoke(
            main,
            ["augment", "--in", str(out / "dialogues.jsonl"), "--fraction", "0.5",
             "--seed", "1", "--out", str(tmp_path / "variants.jsonl")],
        )
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "variants.jsonl").read_text().splitlines()
        assert lines
        for line in lines:
            doc = json.loads(line)
            assert doc["history"][-1][0] == "patient"
