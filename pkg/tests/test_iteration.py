from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from geodex.iteration import (
    AnalyticalPeriodError,
    GeodesicModel,
    analytical_period,
    epsilon,
    growth_bound_check,
    index_of_iterate,
    index_parity,
    mean_index,
    type_numbers,
    validate_model,
)
from geodex.normal_form import N1, N2, Hyperbolic, NormalFormDecomposition, Rotation, nullity_at
from geodex.scalar import Surd, ceil_mul, floor_mul, varphi_mul

from conftest import SQRT2, angles, model, models

RHO1 = SQRT2 - 1
RHO2 = 2 - SQRT2
KATOK_TYPE = model(2, Rotation(RHO1), Rotation(RHO2))
SINGLE = model(4, Rotation(RHO1))


def brute_index(g, m):
    """The iteration formula written out term by term, independent of the cached coefficients."""
    d = g.decomp
    pm = sum(1 for b in d.blocks if isinstance(b, N1) and b.lam == 1 and b.b == 1)
    p0 = sum(1 for b in d.blocks if isinstance(b, N1) and b.lam == 1 and b.b == 0)
    q0 = sum(1 for b in d.blocks if isinstance(b, N1) and b.lam == -1 and b.b == 0)
    qp = sum(1 for b in d.blocks if isinstance(b, N1) and b.lam == -1 and b.b == -1)
    rots = [b.rho for b in d.blocks if isinstance(b, Rotation)]
    nt = [b.rho for b in d.blocks if isinstance(b, N2) and b.nontrivial]
    r, rstar = len(rots), len(nt)
    out = m * (g.initial_index + pm + p0 - r)
    out += 2 * sum(ceil_mul(x, m) for x in rots)
    out -= r + pm + p0
    out -= (q0 + qp) if m % 2 == 0 else 0
    out += 2 * sum(varphi_mul(x, m) for x in nt)
    out -= 2 * rstar
    return out


def test_katok_type_example():
    for m in range(1, 1001):
        assert index_of_iterate(KATOK_TYPE, m) == 2 * m


def test_hyperbolic_example():
    g = model(2, Hyperbolic(1), Hyperbolic(-1))
    assert [index_of_iterate(g, m) for m in range(1, 8)] == [2 * m for m in range(1, 8)]


@given(models())
def test_first_iterate_is_initial_index(g):
    assert index_of_iterate(g, 1) == g.initial_index


@given(models(), st.integers(1, 400))
def test_matches_term_by_term_formula(g, m):
    assert index_of_iterate(g, m) == brute_index(g, m)


def test_mean_index_examples():
    assert mean_index(KATOK_TYPE) == 2
    assert mean_index(model(2, Hyperbolic(1), Hyperbolic(1))) == 2
    assert mean_index(SINGLE) == 1 + 2 * SQRT2


@given(models())
@settings(max_examples=60)
def test_mean_index_is_the_limit(g):
    mu = mean_index(g)
    m = 10**6
    assert abs(Surd(index_of_iterate(g, m)) / m - mu) <= Fraction(2 * g.half_dim + 2, m)


def test_parity_examples():
    for m in range(1, 50):
        assert index_parity(KATOK_TYPE, m) == ("even", 1)
    g3 = model(3, Hyperbolic(1))
    assert epsilon(g3, 2) == -1
    assert index_parity(g3, 2) == ("even", -1)


@given(models())
def test_epsilon_at_one(g):
    assert epsilon(g, 1) == 1


@given(models(), st.integers(1, 200))
def test_parity_periodicity(g, m):
    assert (index_of_iterate(g, m + 2) - index_of_iterate(g, m)) % 2 == 0


@given(st.integers(0, 12), st.lists(st.sampled_from([1, -1]), min_size=1, max_size=4), st.integers(1, 300))
def test_hyperbolic_homogeneity(i, signs, m):
    g = model(i, *(Hyperbolic(s) for s in signs))
    assert index_of_iterate(g, m) == m * i


def brute_period(g, horizon=130):
    nus = [nullity_at(g.decomp, m) for m in range(1, horizon + 1)]
    top = max(nus)
    idx = [index_of_iterate(g, m) for m in range(1, 2 * horizon + 1)]
    for j in range(1, horizon + 1):
        if nus[j - 1] != top:
            continue
        if all((idx[m - 1 + j] - idx[m - 1]) % 2 == 0 for m in range(1, horizon + 1)):
            return j
    raise AssertionError("no period within horizon")


def test_analytical_period_examples():
    assert analytical_period(KATOK_TYPE) == 1
    assert analytical_period(model(3, Hyperbolic(1))) == 2
    # an I2 block has i(c^m) = m*(i+1) - 1: parity is constant only for odd i
    assert analytical_period(model(3, N1(1, 0))) == 1
    assert analytical_period(model(2, N1(1, 0))) == 2
    assert brute_period(model(2, N1(1, 0))) == 2


small_angles = st.one_of(
    st.fractions(min_value=0, max_value=1, max_denominator=6)
    .filter(lambda x: 0 < x < 1 and x != Fraction(1, 2))
    .map(Surd),
    st.just(RHO1),
)


@st.composite
def small_models(draw):
    kinds = draw(st.lists(st.sampled_from(["n1", "rot", "n2", "hyp"]), min_size=1, max_size=3))
    bs = []
    for k in kinds:
        if k == "n1":
            bs.append(N1(draw(st.sampled_from([1, -1])), draw(st.sampled_from([-1, 0, 1]))))
        elif k == "rot":
            bs.append(Rotation(draw(small_angles)))
        elif k == "n2":
            bs.append(N2(draw(small_angles), draw(st.booleans())))
        else:
            bs.append(Hyperbolic(draw(st.sampled_from([1, -1]))))
    return model(draw(st.integers(0, 7)), *bs)


@given(small_models())
@settings(max_examples=80)
def test_analytical_period_matches_definition_scan(g):
    assert analytical_period(g) == brute_period(g)


def test_analytical_period_cap():
    g = model(2, Rotation(Fraction(1, 991)), Rotation(Fraction(1, 997)))
    assert analytical_period(g) in (991 * 997, 2 * 991 * 997)
    with pytest.raises(AnalyticalPeriodError, match="unbounded search"):
        analytical_period(g, cap=10**5)


def test_growth_bound_examples():
    assert growth_bound_check(KATOK_TYPE, 1000) == (True, 0)
    assert growth_bound_check(model(2, Hyperbolic(1), Hyperbolic(1)), 100) == (True, 0)
    ok, worst = growth_bound_check(SINGLE, 10_000)
    assert ok and worst < 2


@given(models())
@settings(max_examples=60)
def test_growth_bound_property(g):
    ok, worst = growth_bound_check(g, 300)
    assert ok, worst


@given(st.lists(angles, min_size=1, max_size=4), st.integers(0, 6))
def test_monotone_above_initial_index(rhos, half):
    i = 2 * half
    assume(i >= len(rhos))
    g = model(i, *(Rotation(r) for r in rhos))
    assume(mean_index(g) > 0)
    assert all(index_of_iterate(g, m) >= i for m in range(1, 150))


def test_validate_model_flags():
    assert validate_model(KATOK_TYPE, bumpy=True) == []
    msgs = validate_model(model(2, Rotation(Fraction(1, 3)), Rotation(RHO1), label="c"), bumpy=True)
    assert msgs and msgs[0].startswith("c:")
    assert validate_model(model(1, Rotation(RHO1), Rotation(RHO2)), curvature_pinched=True)
    assert validate_model(model(-1, Rotation(RHO1)))


def test_type_tables():
    d = NormalFormDecomposition(1, (N1(1, 1),))
    g = GeodesicModel(2, d, type_tables={1: (0, 1, 0)})
    assert type_numbers(g, 1) == (0, 1, 0)
    assert type_numbers(g, 5) == (0, 1, 0)  # analytical period 1
    bad = GeodesicModel(2, d, type_tables={1: (0, -1)})
    assert any("non-negative" in m for m in validate_model(bad))
    rot = NormalFormDecomposition(1, (Rotation(Fraction(1, 3)),))
    g3 = GeodesicModel(3, rot, type_tables={1: (1,), 2: (1,), 3: (0, 1), 4: (0,)})
    assert any("periodicity" in m for m in validate_model(g3))
    assert type_numbers(KATOK_TYPE, 7) == (1,)
