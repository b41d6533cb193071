import random
from dataclasses import replace
from fractions import Fraction

import pytest

from geodex.iteration import index_of_iterate, mean_index
from geodex.jump import JumpCertificate, dual_certificate, find_certificates, mbar_of
from geodex.loop_homology import GeodesicSystem, betti
from geodex.multiplicity import (
    NotDual,
    classify_2mk,
    claim1_check,
    multiplicity_verdict,
    step2_audit,
)
from geodex.normal_form import Hyperbolic
from geodex.scalar import Surd

from conftest import model

EPS = Fraction(1, 100)


def pair(s, M0=None):
    models = list(s.geodesics)
    a = find_certificates(models, mbar_of(models), M0 or s.n, EPS, 1)[0]
    return a, dual_certificate(models, a)


@pytest.fixture(scope="module")
def s3_pair(katok_s3):
    return pair(katok_s3)


def test_all_hyperbolic_counts(hyperbolic_s3):
    a, b = pair(hyperbolic_s3)
    assert a == b
    rep = classify_2mk(hyperbolic_s3, a, b)
    assert all(v == 0 for v in rep.counts.values())
    assert all(r["index_2mk"] == 2 * a.N for r in rep.rows)


def test_katok_s3_buckets(katok_s3, s3_pair):
    a, b = s3_pair
    assert (a.N, b.N) == (396, 1516)
    rep = classify_2mk(katok_s3, a, b)
    assert rep.N_plus_e + rep.N_minus_e == 2
    assert rep.duality_ok
    assert rep.nonhyperbolic_labels == ["plane1+", "plane1-"]
    assert rep.at_2N_labels == ["plane2+", "plane2-"]


def test_duality_swap(katok_s3, s3_pair):
    a, b = s3_pair
    ab = classify_2mk(katok_s3, a, b)
    ba = classify_2mk(katok_s3, b, a)
    assert (ab.N_plus_e, ab.N_minus_e, ab.N_plus_o, ab.N_minus_o) == (ba.N_minus_e, ba.N_plus_e, ba.N_minus_o, ba.N_plus_o)


def test_not_dual_is_rejected(katok_s3, s3_pair):
    a, _ = s3_pair
    with pytest.raises(NotDual):
        classify_2mk(katok_s3, a, a)


def test_relabel_invariance(katok_s3, s3_pair):
    a, b = s3_pair
    base = classify_2mk(katok_s3, a, b)
    rng = random.Random(7)
    for _ in range(5):
        perm = list(range(len(katok_s3.geodesics)))
        rng.shuffle(perm)
        s = GeodesicSystem(1, tuple(katok_s3.geodesics[i] for i in perm))
        pa = replace(a, m=tuple(a.m[i] for i in perm), chi=tuple(a.chi[i] for i in perm))
        pb = replace(b, m=tuple(b.m[i] for i in perm), chi=tuple(b.chi[i] for i in perm))
        rep = classify_2mk(s, pa, pb)
        assert rep.counts == base.counts
        assert sorted(rep.nonhyperbolic_labels) == sorted(base.nonhyperbolic_labels)


def test_mixed_system_excludes_hyperbolic(katok_s3):
    h = model(2, Hyperbolic(1), Hyperbolic(-1), label="hyp")
    s = GeodesicSystem(1, katok_s3.geodesics + (h,))
    a, b = pair(s, M0=1)
    rep = classify_2mk(s, a, b)
    row = next(r for r in rep.rows if r["label"] == "hyp")
    assert row["index_2mk"] == 2 * a.N and row["bucket"] is None
    assert "hyp" not in rep.nonhyperbolic_labels


def test_counted_geodesics_have_even_iterates(katok_s5):
    a, b = pair(katok_s5)
    rep = classify_2mk(katok_s5, a, b)
    by_label = dict(zip(katok_s5.labels(), katok_s5.geodesics))
    for label in rep.nonhyperbolic_labels:
        g = by_label[label]
        assert all(index_of_iterate(g, m) % 2 == 0 for m in range(1, 100))
    for r in rep.rows:
        if r["index_2mk"] == 2 * a.N:
            assert r["label"] not in rep.nonhyperbolic_labels


def test_claim1_on_verified_certificates(katok_s3):
    models = list(katok_s3.geodesics)
    for c in find_certificates(models, mbar_of(models), 1, EPS, 3):
        res = claim1_check(katok_s3, c)
        assert res.holds and res.lhs == res.rhs == 2 * c.N


def test_claim1_precondition(katok_s5):
    c = JumpCertificate(7, (1,) * 6, (0,) * 6, 1, 1, EPS, EPS, 1)
    res = claim1_check(katok_s5, c)
    assert not res.holds and res.message.startswith("precondition")


def _nearest_certificate(s, N, eps):
    ms, chis = [], []
    for g in s.geodesics:
        x = Surd(N) / mean_index(g)
        f = x - x.floor()
        if f < eps:
            ms.append(x.floor())
            chis.append(0)
        elif f > 1 - eps:
            ms.append(x.floor() + 1)
            chis.append(1)
        else:
            return None
    return JumpCertificate(N, ms, chis, 1, 1, eps, eps, 1)


def test_claim1_with_large_epsilon(katok_s3):
    # the per-geodesic errors add up to an integer, so q*eps <= 1 cannot break it
    for N in range(2, 600):
        c = _nearest_certificate(katok_s3, N, Fraction(1, 10))
        if c:
            assert claim1_check(katok_s3, c).holds
    c = _nearest_certificate(katok_s3, 11, Fraction(2, 5))
    res = claim1_check(katok_s3, c)
    assert not res.holds
    assert (res.lhs, res.rhs) == (24, 22)
    assert "plane1+" in res.message and [o[0] for o in res.offenders][:1] == ["plane1+"]


def test_step2_on_katok(katok_s3, s3_pair):
    a, b = s3_pair
    rep = classify_2mk(katok_s3, a, b)
    st2 = step2_audit(katok_s3, a, rep.nonhyperbolic_labels)
    assert st2.ok and len(st2.witnesses) == 2
    assert st2.M_2N >= st2.beta_2N == 2


@pytest.mark.parametrize("n", [1, 2, 3])
def test_beta_2N_precondition(n):
    for N in range(2 * n, 40 * n, n):
        assert betti(n, 2 * N) == 2


def test_step2_deficit(deficient_s3):
    a, b = pair(deficient_s3)
    rep = classify_2mk(deficient_s3, a, b)
    st2 = step2_audit(deficient_s3, a, rep.nonhyperbolic_labels)
    assert not st2.ok and st2.message.startswith("deficit")
    assert a.N == 164 and "at degree 328" in st2.message


def test_verdict_katok(katok_s3, katok_s5):
    v = multiplicity_verdict(katok_s3)
    assert v.consistent and v.summary == "consistent [complete]: 2 non-hyperbolic + 2 = 4 even-index geodesics (bound 4)"
    assert v.morse_sum["identity_ok"]
    v5 = multiplicity_verdict(katok_s5)
    assert v5.consistent and "4 non-hyperbolic + 2 = 6" in v5.summary


def test_verdict_negative_controls(uniform4, hyperbolic_s3, deficient_s3):
    for s in (uniform4, hyperbolic_s3):
        v = multiplicity_verdict(s)
        assert not v.consistent and v.stage == "step1"
    assert multiplicity_verdict(deficient_s3).stage == "resonance"


def test_verdict_input_gate(katok_s3):
    s = replace(katok_s3, bumpy=False)
    assert multiplicity_verdict(s).stage == "input"
