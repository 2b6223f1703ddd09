import pytest

CRITERIA = {
    1: "conversion fidelity",
    2: "normalization suites",
    3: "unitary factorization",
    4: "table 2 desk analogue",
    5: "table 3 desk analogue",
    6: "table 4 desk analogue",
    7: "table 5 direction check",
    8: "metric correctness",
    9: "EM monotone",
    10: "determinism",
}

_results: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def criterion():
    """``criterion(k, ok, detail)`` records one check towards acceptance criterion ``k``."""

    def record(number: int, ok, detail: str = "") -> bool:
        _results.setdefault(number, []).append((bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k, name in CRITERIA.items():
        checks = _results.get(k)
        if not checks:
            terminalreporter.write_line(f"[FAIL] {k:2d} {name}: not run")
            continue
        ok = all(c[0] for c in checks)
        detail = "; ".join(d for _, d in checks if d)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {k:2d} {name}: {detail}")
