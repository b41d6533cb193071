from fractions import Fraction

import pytest
from hypothesis import strategies as st

from geodex.io import load_system
from geodex.iteration import GeodesicModel
from geodex.normal_form import N1, N2, Hyperbolic, NormalFormDecomposition, Rotation
from geodex.scalar import Surd

SQRT2 = Surd.sqrt(2)


def model(index, *blocks, label=""):
    d = NormalFormDecomposition(sum(b.dim for b in blocks), tuple(blocks))
    return GeodesicModel(index, d, label=label)


@pytest.fixture(scope="session")
def katok_s3():
    return load_system("katok_s3.json")


@pytest.fixture(scope="session")
def katok_s5():
    return load_system("katok_s5.json")


@pytest.fixture(scope="session")
def uniform4():
    return load_system("uniform4.json")


@pytest.fixture(scope="session")
def hyperbolic_s3():
    return load_system("hyperbolic_s3.json")


@pytest.fixture(scope="session")
def deficient_s3():
    return load_system("deficient_s3.json")


# -- hypothesis strategies -------------------------------------------------

def _angle_ok(x):
    return Fraction(0) < x < 1 and x != Fraction(1, 2)


rational_angles = st.fractions(min_value=0, max_value=1, max_denominator=60).filter(_angle_ok)


@st.composite
def quadratic_angles(draw):
    d = draw(st.sampled_from([2, 3, 5, 7]))
    b = Fraction(draw(st.integers(1, 5)), draw(st.integers(1, 7))) * draw(st.sampled_from([1, -1]))
    x = Surd.quadratic(0, b, d)
    return x.frac()


angles = st.one_of(rational_angles.map(Surd), quadratic_angles())


@st.composite
def blocks(draw):
    kind = draw(st.sampled_from(["n1", "rot", "n2", "hyp"]))
    if kind == "n1":
        return N1(draw(st.sampled_from([1, -1])), draw(st.sampled_from([-1, 0, 1])))
    if kind == "rot":
        return Rotation(draw(angles))
    if kind == "n2":
        return N2(draw(angles), draw(st.booleans()))
    return Hyperbolic(draw(st.sampled_from([1, -1])))


@st.composite
def models(draw, max_blocks=5, positive=False):
    bs = draw(st.lists(blocks(), min_size=1, max_size=max_blocks))
    g = model(draw(st.integers(0, 12)), *bs)
    if positive:
        from geodex.iteration import mean_index

        from hypothesis import assume

        assume(mean_index(g) > 0)
    return g


# -- acceptance summary ----------------------------------------------------

_criteria = {}


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _criteria.get(crit[0])
        if prev is None or prev[1] == "PASS":
            _criteria[crit[0]] = (crit[1], "PASS" if report.passed else "FAIL")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result().criterion = mark.args


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        name, verdict = _criteria[num]
        terminalreporter.write_line(f"criterion {num} ({name}): {verdict}")
