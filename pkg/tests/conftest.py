"""Shared fixtures: the expensive fine-scale transition run is computed once
per session and reused by several acceptance checks; every solver trace
produced along the way is collected so the monotone-descent property can be
asserted over the whole suite at the end."""

import time

import numpy as np
import pytest

from pfhom import (
    Homogeneous,
    PsiFunction,
    SurfaceIntegrand,
    surface_cell_value,
)

# energy traces collected across the suite, checked by the descent test
TRACE_REGISTRY: list[tuple[str, list[float]]] = []

# one human-readable pass/fail line per acceptance criterion
CRITERION_RESULTS: list[str] = []


def record_trace(name: str, trace) -> None:
    TRACE_REGISTRY.append((name, [float(e) for e in trace]))


def report_criterion(num: int, description: str, passed: bool, detail: str = "") -> None:
    line = f"criterion {num:02d} {'PASS' if passed else 'FAIL'} - {description}"
    if detail:
        line += f" ({detail})"
    CRITERION_RESULTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fine_surface_run():
    """Homogeneous p=2 surface cell at rho=1, eps=2^-8, h=eps/4 (dirichlet).

    Returns (CellResult, wall time in seconds)."""
    g = SurfaceIntegrand(Homogeneous(1.0))
    psi = PsiFunction(q=2.0)
    eps = 2.0**-8
    t0 = time.perf_counter()
    result = surface_cell_value(g, None, psi, (0, 1), (0, 0), 1.0, eps, eps / 4.0)
    elapsed = time.perf_counter() - t0
    record_trace("fine-surface-dirichlet", result.diagnostics.energy_trace)
    return result, elapsed
