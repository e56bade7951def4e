"""Command-line entry points: ingest, serve, export."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .corpus import extract_topics, ingest_document
from .errors import ExpertAgentError, NotFound
from .persistence import CourseConfig, DataDir, load_course, save_course
from .service import ExpertAgentService
from .tutor import client_from_env

DEFAULT_DATA_DIR = "./data"


def _data_dir(args: argparse.Namespace) -> Path:
    return Path(args.data_dir or os.environ.get("EXPERTAGENT_DATA_DIR", DEFAULT_DATA_DIR))


def cmd_ingest(args: argparse.Namespace) -> int:
    """Validate documents and register them (plus their topics) in course.json."""
    store = DataDir(_data_dir(args))
    course_path = store.course_path
    if course_path.exists():
        course = load_course(course_path)
    else:
        course = CourseConfig(
            course_id="default-course",
            topics=[],
            prerequisite_edges=[],
            question_bank=[],
            document_paths=[],
        )

    topics = {t.topic_id: t for t in course.topics}
    paths = list(course.document_paths)
    for raw_path in args.paths:
        path = Path(raw_path).resolve()
        doc = ingest_document(path.read_bytes(), path.name)
        for topic in extract_topics(doc):
            topics.setdefault(topic.topic_id, topic)
        if str(path) not in paths:
            paths.append(str(path))
        print(f"ingested {path.name}: doc_id={doc.doc_id}")

    if not topics:
        print("error: no topics could be extracted and course.json has none", file=sys.stderr)
        return 1
    updated = CourseConfig(
        course_id=course.course_id,
        topics=sorted(topics.values(), key=lambda t: t.topic_id),
        prerequisite_edges=course.prerequisite_edges,
        question_bank=course.question_bank,
        document_paths=paths,
    )
    save_course(updated, course_path)
    print(f"course.json updated: {len(updated.topics)} topics, {len(paths)} documents")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    store = DataDir(_data_dir(args))
    course_path = Path(args.course) if args.course else store.course_path
    course = load_course(course_path)
    service = ExpertAgentService(
        store, course, client_from_env(), course_base=course_path.parent
    )
    app = create_app(service)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    store = DataDir(_data_dir(args))
    model = store.load_student(args.student)  # validates before export
    payload = json.loads(store.student_path(model.student_id).read_text(encoding="utf-8"))
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="expertagent")
    parser.add_argument("--data-dir", help="data root (default $EXPERTAGENT_DATA_DIR or ./data)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="load .txt/.md files into the corpus store")
    p_ingest.add_argument("paths", nargs="+", help="document files to ingest")
    p_ingest.set_defaults(func=cmd_ingest)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--course", help="course.json path (default <data-dir>/course.json)")
    p_serve.set_defaults(func=cmd_serve)

    p_export = sub.add_parser("export", help="print a student's stored model JSON")
    p_export.add_argument("--student", required=True)
    p_export.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ExpertAgentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
