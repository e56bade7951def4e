from __future__ import annotations

import json

from expertagent.cli import main
from expertagent.corpus import Topic
from expertagent.persistence import DataDir, load_course
from expertagent.student_model import BktParams, init_student


def test_ingest_creates_course(tmp_path, capsys) -> None:
    doc = tmp_path / "physics.md"
    doc.write_text("# Gravity\nMass attracts mass.\n## Orbits\nPlanets follow ellipses.")
    data_dir = tmp_path / "data"
    exit_code = main(["--data-dir", str(data_dir), "ingest", str(doc)])
    assert exit_code == 0
    course = load_course(data_dir / "course.json")
    assert {t.topic_id for t in course.topics} == {"gravity", "orbits"}
    assert course.document_paths == [str(doc.resolve())]
    out = capsys.readouterr().out
    assert "ingested physics.md" in out


def test_ingest_is_additive(tmp_path) -> None:
    first = tmp_path / "one.txt"
    first.write_text("alpha alpha beta")
    second = tmp_path / "two.txt"
    second.write_text("gamma gamma delta")
    data_dir = tmp_path / "data"
    assert main(["--data-dir", str(data_dir), "ingest", str(first)]) == 0
    assert main(["--data-dir", str(data_dir), "ingest", str(second)]) == 0
    course = load_course(data_dir / "course.json")
    assert len(course.document_paths) == 2
    assert {"alpha", "gamma"} <= {t.topic_id for t in course.topics}


def test_ingest_rejects_unsupported_extension(tmp_path, capsys) -> None:
    doc = tmp_path / "scan.pdf"
    doc.write_bytes(b"%PDF")
    assert main(["--data-dir", str(tmp_path / "data"), "ingest", str(doc)]) == 1
    assert "error" in capsys.readouterr().err


def test_export_prints_student_json(tmp_path, capsys) -> None:
    data_dir = tmp_path / "data"
    store = DataDir(data_dir)
    model = init_student("s9", [Topic(topic_id="a", label="A")], BktParams())
    store.save_student(model)
    assert main(["--data-dir", str(data_dir), "export", "--student", "s9"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["student_id"] == "s9"
    assert payload["topic_states"][0]["topic_id"] == "a"


def test_export_unknown_student(tmp_path, capsys) -> None:
    assert main(["--data-dir", str(tmp_path / "data"), "export", "--student", "ghost"]) == 2
    assert "error" in capsys.readouterr().err
