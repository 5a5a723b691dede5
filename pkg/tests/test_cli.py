"""Command-line driver: walkthrough replay, exit codes, golden grids."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from msync.cli import EXIT_NOT_SYNCHRONIZED, EXIT_PARSE, EXIT_PENDING_DECISIONS, cli, main

from conftest import ALPHA_TEXTS, BETA_TEXTS, ELABORATION_PAIRS, ENGINE_SPEED_CHANGESET


def write_inputs(root: Path) -> dict[str, Path]:
    files = {}
    files["alpha"] = root / "reqs_alpha.json"
    files["alpha"].write_text(
        json.dumps(
            {
                "id": "w_alpha",
                "system": "ECG",
                "requirements": [{"id": i, "text": t} for i, t in ALPHA_TEXTS],
            }
        ),
        encoding="utf-8",
    )
    files["beta"] = root / "reqs_beta.json"
    files["beta"].write_text(
        json.dumps(
            {
                "id": "w_beta",
                "system": "ECG",
                "requirements": [{"id": i, "text": t} for i, t in BETA_TEXTS],
            }
        ),
        encoding="utf-8",
    )
    files["links"] = root / "links.json"
    files["links"].write_text(
        json.dumps([{"source": a, "target": b} for a, b in ELABORATION_PAIRS]),
        encoding="utf-8",
    )
    files["changeset"] = root / "changeset.json"
    files["changeset"].write_text(json.dumps(ENGINE_SPEED_CHANGESET), encoding="utf-8")
    files["decisions"] = root / "decisions.json"
    files["decisions"].write_text(
        json.dumps(
            [
                {
                    "request_kind": "map_or_create",
                    "subject_tag": "a5",
                    "choose": "create_new",
                    "label": "Determine Engine Speed",
                }
            ]
        ),
        encoding="utf-8",
    )
    return files


def run_walkthrough(root: Path, with_change: bool = False) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    files = write_inputs(root)
    project = root / "project.msync.json"
    runner = CliRunner()

    def invoke(*args, code=0):
        result = runner.invoke(cli, ["-p", str(project), *args])
        assert result.exit_code == code, (args, result.output, result.exception)
        return result

    invoke("init", "ecg-governor", "--system", "ECG")
    invoke("req", "add", "--set", "alpha", "--file", str(files["alpha"]))
    invoke("req", "add", "--set", "beta", "--file", str(files["beta"]))
    invoke("interpret", "alpha")
    invoke("transform")
    invoke("interpret", "beta")
    invoke("dependency", "--links", str(files["links"]))
    invoke("verify")
    if with_change:
        invoke("change", "apply", "--file", str(files["changeset"]))
        invoke("verify", code=EXIT_NOT_SYNCHRONIZED)
        invoke("decisions", "resolve", "--script", str(files["decisions"]))
        invoke("verify")
    return project


class TestWalkthrough:
    def test_full_pipeline_exits_zero(self, tmp_path):
        run_walkthrough(tmp_path)

    def test_replay_is_byte_identical(self, tmp_path):
        one = run_walkthrough(tmp_path / "one", with_change=True)
        two = run_walkthrough(tmp_path / "two", with_change=True)
        assert one.read_bytes() == two.read_bytes()

    def test_change_and_scripted_resolution(self, tmp_path):
        project_file = run_walkthrough(tmp_path, with_change=True)
        doc = json.loads(project_file.read_text(encoding="utf-8"))
        entities = {e["id"]: e for e in doc["model_alpha"]["entities"]}
        assert entities["U3"]["label"] == "Determine Engine Speed"
        relations = {
            (r["source"], r["target"]): r for r in doc["model_alpha"]["relations"]
        }
        assert relations[("A2", "U3")]["semantics"] == "functional flow"
        assert relations[("U3", "S")]["kind"] == "allocation"
        assert doc["decisions_pending"] == []

    def test_verify_pending_decisions_exit_code(self, tmp_path):
        files = write_inputs(tmp_path)
        project = tmp_path / "project.msync.json"
        runner = CliRunner()

        def invoke(*args, code=0):
            result = runner.invoke(cli, ["-p", str(project), *args])
            assert result.exit_code == code, (args, result.output)
            return result

        invoke("init", "ecg-governor", "--system", "ECG")
        invoke("req", "add", "--set", "alpha", "--file", str(files["alpha"]))
        invoke("interpret", "alpha")
        invoke("transform")
        # no target knowledge: skeleton verifies synchronized but the open
        # flow directions queue decisions
        empty = tmp_path / "empty_beta.json"
        empty.write_text(
            json.dumps({"id": "w_beta", "system": "ECG", "requirements": []}),
            encoding="utf-8",
        )
        invoke("req", "add", "--set", "beta", "--file", str(empty))
        invoke("interpret", "beta")
        invoke("verify", code=EXIT_PENDING_DECISIONS)


class TestExitCodes:
    def test_parse_error_exit_two(self, tmp_path):
        project = tmp_path / "p.json"
        runner = CliRunner()
        runner.invoke(cli, ["-p", str(project), "init", "x", "--system", "ECG"])
        bad = tmp_path / "bad.json"
        bad.write_text(
            json.dumps(
                {
                    "id": "w",
                    "system": "ECG",
                    "requirements": [{"id": "R1", "text": "Torque shall be governed"}],
                }
            ),
            encoding="utf-8",
        )
        result = runner.invoke(
            cli, ["-p", str(project), "req", "add", "--set", "alpha", "--file", str(bad)]
        )
        assert result.exit_code == EXIT_PARSE

    def test_conformance_error_exit_three(self, tmp_path):
        from conftest import build_project
        from msync.project import save_project

        project_file = tmp_path / "p.json"
        save_project(build_project(), project_file)
        bad = tmp_path / "cs.json"
        bad.write_text(
            json.dumps(
                [
                    {
                        "op": "create_relation",
                        "model": "alpha",
                        "kind": "precedence",
                        "source": "U1",
                        "target": "U2",
                    }
                ]
            ),
            encoding="utf-8",
        )
        runner = CliRunner()
        result = runner.invoke(
            cli, ["-p", str(project_file), "change", "apply", "--file", str(bad)]
        )
        assert result.exit_code == 3

    def test_usage_error_exit_one(self):
        with pytest.raises(SystemExit) as exc:
            main(["definitely-not-a-command"])
        assert exc.value.code == 1


class TestMatrixShow:
    @pytest.fixture
    def project_file(self, tmp_path):
        from conftest import build_project
        from msync.project import save_project

        path = tmp_path / "p.json"
        save_project(build_project(), path)
        return path

    def test_n_grid_golden(self, project_file):
        runner = CliRunner()
        result = runner.invoke(cli, ["-p", str(project_file), "matrix", "show", "n"])
        assert result.exit_code == 0
        assert result.output == (
            "    S             A1  U1               A2  U2\n"
            "S   ·             ·   ·                ·   ·\n"
            "A1  ·             ·   associated with  ·   ·\n"
            "U1  allocated to  ·   ·                ·   ·\n"
            "A2  ·             ·   ·                ·   associated with\n"
            "U2  allocated to  ·   ·                ·   ·\n"
        )

    def test_m_grid_golden(self, project_file):
        runner = CliRunner()
        result = runner.invoke(cli, ["-p", str(project_file), "matrix", "show", "m"])
        assert result.exit_code == 0
        assert result.output == (
            "     LS            LA1           LA2           a1  a2        a3        a4\n"
            "LS   ·             ·             ·             ·   ·         ·         ·\n"
            "LA1  ·             ·             ·             ·   ·         ·         ·\n"
            "LA2  ·             ·             ·             ·   ·         ·         ·\n"
            "a1   ·             allocated to  ·             ·   precedes  ·         ·\n"
            "a2   allocated to  ·             ·             ·   ·         precedes  ·\n"
            "a3   allocated to  ·             ·             ·   ·         ·         precedes\n"
            "a4   ·             ·             allocated to  ·   ·         ·         ·\n"
        )

    def test_q_grid_lists_all_links(self, project_file):
        runner = CliRunner()
        result = runner.invoke(cli, ["-p", str(project_file), "matrix", "show", "q"])
        assert result.exit_code == 0
        assert result.output.count("maps to") == 7


class TestRenderCommand:
    def test_render_to_file(self, tmp_path):
        from conftest import build_project
        from msync.project import save_project

        project_file = tmp_path / "p.json"
        save_project(build_project(), project_file)
        out = tmp_path / "alpha.puml"
        runner = CliRunner()
        result = runner.invoke(
            cli,
            [
                "-p",
                str(project_file),
                "render",
                "alpha",
                "--format",
                "plantuml",
                "-o",
                str(out),
            ],
        )
        assert result.exit_code == 0
        assert out.read_text(encoding="utf-8").startswith("@startuml")
