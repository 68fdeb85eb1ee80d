import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.fixture
def record(request):
    """Attach a one-line measurement to the current acceptance test."""

    def _record(text):
        request.node.user_properties.append(("measured", str(text)))

    return _record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = mark.args
        ok = rep.passed
        measured = "; ".join(v for k, v in item.user_properties if k == "measured")
        prev = _RESULTS.get(number)
        if prev is not None:
            ok = ok and prev[1]
            measured = "; ".join(x for x in (prev[2], measured) if x)
        _RESULTS[number] = (title, ok, measured)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, ok, measured = _RESULTS[number]
        line = f"{'PASS' if ok else 'FAIL'}  {number:>2}. {title}"
        if measured:
            line += f"  [{measured}]"
        tr.write_line(line)
