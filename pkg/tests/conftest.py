import os

# BLAS threading can reorder floating-point sums; keep runs single-threaded
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

from pinnfem.elasticity import Material
from pinnfem.mesh import DirichletSpec, NeumannSpec, decompose, structured_unit_square


def central_diff(f, theta, h=1e-6):
    g = np.zeros_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (f(theta + e) - f(theta - e)) / (2 * h)
    return g


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


@pytest.fixture
def plate():
    return Material(70.0, 0.3)


@pytest.fixture
def square_half():
    return structured_unit_square(0.5)


@pytest.fixture
def exp1_dec():
    mesh = structured_unit_square(0.5)
    dirichlet = [DirichletSpec("left", components=(True, False)),
                 DirichletSpec("bottom", components=(False, True))]
    return decompose(mesh, dirichlet, [NeumannSpec("right", (1.0, 0.0))])


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance verdict and print it."""
    def record(n, ok, detail):
        line = "criterion %d: %s  %s" % (n, "PASS" if ok else "FAIL", detail)
        _CRITERIA[n] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
