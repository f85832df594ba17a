import pytest

from ljensen import PrecisionContext, make_family
from ljensen.lfunction import GammaCache
from ljensen.theta import eta_product

ACCEPTANCE_LINES: list[str] = []


def pytest_addoption(parser):
    parser.addoption("--run-long", action="store_true", help="include n >= 10000 rows")


def pytest_configure(config):
    config.addinivalue_line("markers", "long: needs --run-long")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-long"):
        return
    skip = pytest.mark.skip(reason="needs --run-long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def run_long(request):
    return request.config.getoption("--run-long")


@pytest.fixture(scope="session")
def ctx():
    return PrecisionContext.from_digits(60)


@pytest.fixture(scope="session")
def fast_ctx():
    return PrecisionContext.from_digits(20)


@pytest.fixture(scope="session")
def gamma_cache(request, tmp_path_factory):
    # persistent across runs (via pytest's cache dir) so acceptance scans hit a warm cache
    cache = getattr(request.config, "cache", None)
    root = cache.mkdir("ljensen-gamma") if cache is not None else tmp_path_factory.mktemp("gamma")
    return GammaCache(root)


@pytest.fixture(scope="session")
def coeffs_11a():
    return eta_product([(1, 2), (11, 2)], 400)


@pytest.fixture(scope="session")
def zeta():
    return make_family("zeta")


@pytest.fixture(scope="session")
def chi4():
    return make_family("dirichlet", D=-4)


@pytest.fixture(scope="session")
def modular11(coeffs_11a):
    return make_family("modular", N=11, w=2, coeffs=coeffs_11a, eps_f=-1)


@pytest.fixture(scope="session")
def dedekind_i():
    return make_family("dedekind", D=-4)


@pytest.fixture(scope="session")
def all_families(zeta, chi4, modular11, dedekind_i):
    return [zeta, chi4, modular11, dedekind_i]


@pytest.fixture(scope="session")
def record():
    """Append one PASS/FAIL line for an acceptance criterion and echo it."""

    def _record(number: int, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record
