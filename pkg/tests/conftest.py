import pytest

from hybridlink.scenario import load_bundled


@pytest.fixture(scope="session")
def fig2_file():
    return load_bundled("fig2.scn")


@pytest.fixture(scope="session")
def fig3_file():
    return load_bundled("fig3.scn")


@pytest.fixture(scope="session")
def fig2(fig2_file):
    return fig2_file.scenario


@pytest.fixture(scope="session")
def fig3_variants(fig3_file):
    return list(fig3_file.variants())


@pytest.fixture
def criterion(request):
    """Record one acceptance line, then assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, title, ok, detail):
        lines.append(f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
        print(lines[-1])
        assert ok, detail

    return record


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
