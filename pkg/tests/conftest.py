"""Collects one pass/fail line per acceptance criterion and prints them at the end of the run."""
import pytest

ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


class CriterionReport:
    def __init__(self, cid, title):
        self.cid, self.title = cid, title
        self.checks = []

    def check(self, label, ok, detail=""):
        self.checks.append((label, bool(ok), detail))

    @property
    def passed(self):
        return bool(self.checks) and all(ok for _, ok, _ in self.checks)

    def failures(self):
        return [f"{label}: {detail}" for label, ok, detail in self.checks if not ok]

    def lines(self):
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.cid} {self.title}"
        if not self.checks:
            return [head + " (no checks ran)"]
        return [head] + [f"    {'ok  ' if ok else 'FAIL'} {label}  {detail}".rstrip()
                         for label, ok, detail in self.checks]


@pytest.fixture
def criterion(request):
    reports = request.config.stash[ACCEPTANCE]

    def make(cid, title):
        reports[cid] = CriterionReport(cid, title)
        return reports[cid]
    return make


def pytest_terminal_summary(terminalreporter, config):
    reports = config.stash.get(ACCEPTANCE, {})
    if not reports:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(reports, key=lambda c: int(c[1:])):
        for line in reports[cid].lines():
            terminalreporter.write_line(line)
