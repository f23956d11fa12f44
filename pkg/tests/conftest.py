import pytest

_RESULTS = []


class _Recorder:
    """Collects one line per acceptance check for the terminal summary."""

    def __init__(self, criterion):
        self.criterion = criterion

    def __call__(self, label, passed, detail=''):
        _RESULTS.append((self.criterion, label, bool(passed), detail))
        return bool(passed)


@pytest.fixture
def record(request):
    marker = request.node.get_closest_marker('criterion')
    return _Recorder(marker.args[0] if marker else '?')


def pytest_configure(config):
    config.addinivalue_line('markers', 'criterion(n): acceptance criterion number')


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section('acceptance criteria')
    for crit, label, ok, detail in sorted(_RESULTS, key=lambda r: str(r[0])):
        line = f'[{"PASS" if ok else "FAIL"}] criterion {crit}: {label}'
        if detail:
            line += f'  ({detail})'
        tr.write_line(line)
