import numpy as np
import pytest

from inhomtq.lattice import BoundaryParams, ChainSpec
from inhomtq.records import table1_config, table2_config
from inhomtq.spectrum import diagonalize_h
from inhomtq.tq import completeness_scan


def generic_spec(rng: np.random.Generator, n_sites: int) -> ChainSpec:
    """Boundary parameters drawn from the generic ranges with random signs."""
    p, q = rng.uniform(0.2, 2.0, 2) * rng.choice([-1, 1], 2)
    xi = rng.uniform(0.5, 2.0) * rng.choice([-1, 1])
    return ChainSpec(n_sites, BoundaryParams(float(p), float(q), float(xi)))


@pytest.fixture(scope="session")
def table1_spec():
    return table1_config().chain_spec()


@pytest.fixture(scope="session")
def table2_spec():
    return table2_config().chain_spec()


@pytest.fixture(scope="session")
def table1_eigen(table1_spec):
    return diagonalize_h(table1_spec)


@pytest.fixture(scope="session")
def table1_report(table1_spec):
    return completeness_scan(table1_spec)


@pytest.fixture(scope="session")
def table2_report(table2_spec):
    return completeness_scan(table2_spec)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance summary ------------------------------------------------------------

_ACCEPTANCE: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then return ok."""

    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
