import pytest

_CRITERIA = {}


class CriterionLog:
    """Collects one verdict line per acceptance criterion."""

    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.details = []

    def note(self, text):
        self.details.append(text)

    def verdict(self, passed):
        line = f"{'PASS' if passed else 'FAIL'} criterion {self.number}: {self.title}"
        if self.details:
            line += " | " + "; ".join(self.details)
        _CRITERIA[self.number] = line
        print(line)
        return passed


@pytest.fixture
def criterion():
    return CriterionLog


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
