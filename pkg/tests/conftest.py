import pytest

from posetrack import synth

from acceptance_report import RESULTS


@pytest.fixture(scope="session")
def bundles():
    cache = {}

    def get(name, **kw):
        key = (name, tuple(sorted(kw.items())))
        if key not in cache:
            cache[key] = synth.generate(synth.PRESETS[name](**kw))
        return cache[key]

    return get


def pytest_terminal_summary(terminalreporter):
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
