from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geodex.iteration import index_of_iterate, mean_index
from geodex.jump import (
    BudgetExhausted,
    JumpCertificate,
    SearchError,
    delta_counts,
    default_delta,
    dual_certificate,
    find_certificates,
    mbar_of,
    scan_budget,
    verify_certificate,
)
from geodex.normal_form import Hyperbolic, Rotation, total_negative_splitting

from conftest import SQRT2, model, quadratic_angles

EPS = Fraction(1, 100)
HYP = model(2, Hyperbolic(1), Hyperbolic(1))
KATOK_TYPE = model(2, Rotation(SQRT2 - 1), Rotation(2 - SQRT2))
SINGLE = model(4, Rotation(SQRT2 - 1))


def test_hyperbolic_certificates_are_even_N():
    certs = find_certificates([HYP], mbar_of([HYP]), 1, EPS, 6)
    assert [c.N for c in certs] == [4, 6, 8, 10, 12, 14]
    assert all(c.m == (c.N // 2,) and c.chi == (0,) for c in certs)
    for c in certs:
        rep = verify_certificate([HYP], c)
        assert rep.ok
        assert rep.records[0]["index_2mk"] == 2 * c.N
        assert rep.records[0]["C"] == 0 and rep.records[0]["Delta"] == 0


def test_katok_type_single_model():
    certs = find_certificates([KATOK_TYPE], 10, 1, EPS, 5, budget=10**4)
    assert [c.N for c in certs] == [12, 24, 46, 58, 70]
    assert all(verify_certificate([KATOK_TYPE], c).ok for c in certs)


def test_two_model_regression():
    models = [KATOK_TYPE, SINGLE]
    certs = find_certificates(models, mbar_of(models), 1, EPS, 3)
    # frozen after the first verified run
    assert [(c.N, c.m, c.chi) for c in certs] == [(268, (134, 70), (0, 0)), (536, (268, 140), (0, 0)), (758, (379, 198), (0, 1))]
    assert all(verify_certificate(models, c).ok for c in certs)


def test_mbar_examples():
    assert mbar_of([HYP]) == 1
    assert mbar_of([KATOK_TYPE]) == 1
    assert mbar_of([SINGLE]) == 1  # recorded
    # degenerate rotations: check the returned threshold against the definition
    g = model(2, Rotation(Fraction(1, 3)), Rotation(Fraction(1, 5)))
    mb = mbar_of([g])
    for m in range(mb, mb + 30):
        for l in range(1, 60):
            assert index_of_iterate(g, m + l) >= index_of_iterate(g, l)


@given(st.integers(0, 6), st.lists(quadratic_angles(), min_size=1, max_size=3))
@settings(max_examples=40, deadline=None)
def test_mbar_is_a_valid_threshold(i, rhos):
    g = model(i, *(Rotation(r) for r in rhos))
    if mean_index(g) <= 0:
        return
    mb = mbar_of([g])
    for m in range(mb, mb + 20):
        for l in range(1, 80):
            assert index_of_iterate(g, m + l) >= index_of_iterate(g, l)


def test_katok_fixture_certificates(katok_s3):
    models = list(katok_s3.geodesics)
    certs = find_certificates(models, mbar_of(models), 1, EPS, 5)
    assert [c.N for c in certs] == [396, 792, 1516, 1912, 2308]
    for c in certs:
        rep = verify_certificate(models, c)
        assert rep.ok, rep.failures
        for g, mk in zip(models, c.m):
            for m in range(1, c.mbar + 1):
                # bumpy simple forms: the two sides sum to 4N
                assert index_of_iterate(g, 2 * mk + m) + index_of_iterate(g, 2 * mk - m) == 4 * c.N
            assert (2 * c.N - index_of_iterate(g, 2 * mk)) % 2 == total_negative_splitting(g.decomp) % 2


def test_corrupted_certificate_fails(katok_s3):
    models = list(katok_s3.geodesics)
    cert = find_certificates(models, mbar_of(models), 1, EPS, 1)[0]
    bad = replace(cert, m=(cert.m[0] + 1,) + cert.m[1:])
    rep = verify_certificate(models, bad)
    assert not rep.ok
    assert any(k == 1 and check == "index_after" and m is not None and m <= cert.mbar for k, m, check, _ in rep.failures)


def test_structural_failures(katok_s3):
    models = list(katok_s3.geodesics)
    cert = find_certificates(models, 1, 1, EPS, 1)[0]
    assert verify_certificate(models[:2], cert).failures[0][2] == "shape"
    assert any(f[2] == "divisibility" for f in verify_certificate(models, replace(cert, M0=7)).failures)


def test_dual_examples(katok_s3):
    c = find_certificates([HYP], 1, 1, EPS, 1)[0]
    assert dual_certificate([HYP], c) == c

    models = list(katok_s3.geodesics)
    cert = find_certificates(models, mbar_of(models), 1, EPS, 1)[0]
    dual = dual_certificate(models, cert)
    assert dual.N == 1516
    assert verify_certificate(models, dual).ok
    for g, a, b in zip(models, cert.m, dual.m):
        assert delta_counts(g, a, cert.delta) + delta_counts(g, b, dual.delta) == 2

    g = model(3, Rotation(SQRT2 - 1))
    c1 = find_certificates([g], mbar_of([g]), 1, EPS, 1)[0]
    d1 = dual_certificate([g], c1)
    assert {delta_counts(g, c1.m[0], c1.delta), delta_counts(g, d1.m[0], d1.delta)} == {0, 1}


def test_rejects_nonpositive_mean_index():
    g = model(2, Rotation(Fraction(1, 3)), Rotation(Fraction(1, 5)))
    bad = model(0, Hyperbolic(1))
    with pytest.raises(SearchError, match="not positive"):
        find_certificates([bad], 1)
    with pytest.raises(SearchError):
        find_certificates([], 1)
    assert find_certificates([g], mbar_of([g]), 1, EPS, 1)


def test_budget_exhausted():
    with pytest.raises(BudgetExhausted, match="budget exhausted"):
        find_certificates([KATOK_TYPE], 10, 1, EPS, 1, budget=10)


def test_scan_budget_env(monkeypatch):
    monkeypatch.setenv("GEODEX_SCAN_BUDGET", "10")
    assert scan_budget() == 10
    with pytest.raises(BudgetExhausted):
        find_certificates([KATOK_TYPE], 10, 1, EPS, 1)
    monkeypatch.delenv("GEODEX_SCAN_BUDGET")
    assert scan_budget() == 10**7


def test_default_delta_keeps_window_below_one(katok_s3):
    models = list(katok_s3.geodesics)
    d = default_delta(models, EPS, 1)
    assert 0 < d < Fraction(1, 2)
    with pytest.raises(SearchError, match="too large"):
        default_delta(models, Fraction(1, 2), 1)


def test_certificates_increase_and_divisible(katok_s5):
    models = list(katok_s5.geodesics)
    certs = find_certificates(models, mbar_of(models), 2, EPS, 3)
    Ns = [c.N for c in certs]
    assert Ns == sorted(set(Ns)) and all(N % 2 == 0 for N in Ns)
    assert Ns[0] == 4616
    assert all(verify_certificate(models, c).ok for c in certs)


def test_parallel_matches_serial(katok_s3):
    models = list(katok_s3.geodesics)
    serial = find_certificates(models, 1, 1, EPS, 20, budget=300_000)
    parallel = find_certificates(models, 1, 1, EPS, 20, budget=300_000, workers=3)
    assert serial == parallel


def test_certificate_equality_ignores_verification():
    a = JumpCertificate(4, (2,), (0,), 1, 1, EPS, Fraction(1, 2), 1)
    assert replace(a, verification=({"x": 1},)) == a
