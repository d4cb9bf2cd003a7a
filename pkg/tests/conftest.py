from __future__ import annotations

import pytest

from previewgen import build_scored_schema, derive_schema_graph, load_fixture

from tests.report import ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}  {detail}".rstrip())


@pytest.fixture(scope="session")
def film_graph():
    return load_fixture()


@pytest.fixture(scope="session")
def film_schema(film_graph):
    return derive_schema_graph(film_graph)


@pytest.fixture(scope="session")
def film_cov(film_graph, film_schema):
    return build_scored_schema(film_graph, film_schema, "coverage", "coverage")
