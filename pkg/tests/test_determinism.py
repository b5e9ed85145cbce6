import asyncio

from svistab.config import resolve_tolerances
from svistab.exporters import dumps_report
from svistab.runner import build_report, run_analyses, select_analyses
from svistab.spec import build_instances, load_spec

from .conftest import FIXTURES


def report_text(name: str, jobs: int, seed: int | None = None) -> str:
    spec, raw = load_spec(FIXTURES / name)
    instances = build_instances(spec, seed)
    analyses = select_analyses(spec)
    results = asyncio.run(run_analyses(analyses, instances, jobs, quiet=True))
    tolerances = resolve_tolerances(spec.tolerances)
    return dumps_report(build_report(results, raw, spec.seed if seed is None else seed, tolerances))


def test_same_input_same_bytes():
    assert report_text("cubic.json", 1) == report_text("cubic.json", 1)


def test_jobs_do_not_change_the_report():
    assert report_text("fan.json", 1) == report_text("fan.json", 4)


def test_seed_is_recorded():
    assert '"seed": 7' in report_text("cubic.json", 1, seed=7)


def test_report_has_no_timings_by_default():
    assert '"seconds"' not in report_text("cubic.json", 2)
