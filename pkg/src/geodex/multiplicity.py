"""Replay of the counting argument for closed geodesics on bumpy S^{2n+1}/G.

Given a system and a pair of dual jump certificates, the iterates
``c_k^{2m_k}`` are sorted into buckets above, at, or below degree ``2N``.
The Morse inequalities then force at least ``n`` even-index geodesics above
and ``n`` below (so ``2n`` non-hyperbolic ones), and the Betti number
``beta_{2N} = 2`` forces two more geodesics contributing exactly at ``2N``.
Everything here checks finite data; nothing is proved.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .iteration import epsilon, index_of_iterate, mean_index
from .jump import (
    BudgetExhausted,
    JumpCertificate,
    SearchError,
    delta_counts,
    dual_certificate,
    find_certificates,
    mbar_of,
    verify_certificate,
)
from .loop_homology import (
    GeodesicSystem,
    alternating_sum,
    average_betti,
    betti,
    betti_table,
    mean_euler,
    morse_type_numbers,
    resonance_check,
)
from .normal_form import total_negative_splitting
from .scalar import Surd

__all__ = [
    "MultiplicityReport",
    "Claim1Result",
    "Step2Report",
    "Verdict",
    "NotDual",
    "classify_2mk",
    "claim1_check",
    "step2_audit",
    "multiplicity_verdict",
]


class NotDual(ValueError):
    """The two certificates do not satisfy Delta + Delta' = C."""


@dataclass
class MultiplicityReport:
    N_plus_e: int
    N_plus_o: int
    N_minus_e: int
    N_minus_o: int
    nonhyperbolic_labels: list
    at_2N_labels: list
    dual_counts: dict  # the four counts for the second certificate
    duality_ok: bool
    rows: list = field(default_factory=list)

    @property
    def counts(self) -> dict:
        return {
            "N_plus_e": self.N_plus_e,
            "N_plus_o": self.N_plus_o,
            "N_minus_e": self.N_minus_e,
            "N_minus_o": self.N_minus_o,
        }


def _buckets(s: GeodesicSystem, cert: JumpCertificate):
    counts = {"N_plus_e": 0, "N_plus_o": 0, "N_minus_e": 0, "N_minus_o": 0}
    rows = []
    for label, g, mk in zip(s.labels(), s.geodesics, cert.m):
        i2 = index_of_iterate(g, 2 * mk)
        even_gap = (i2 - g.initial_index) % 2 == 0
        tail = "e" if g.initial_index % 2 == 0 else "o"
        if i2 >= 2 * cert.N + 2:
            where = "above"
        elif i2 <= 2 * cert.N - 2:
            where = "below"
        elif i2 == 2 * cert.N:
            where = "at"
        else:
            where = "adjacent"
        bucket = None
        if even_gap and where in ("above", "below"):
            bucket = ("N_plus_" if where == "above" else "N_minus_") + tail
            counts[bucket] += 1
        rows.append({"label": label, "index_2mk": i2, "position": where, "bucket": bucket})
    return counts, rows


def classify_2mk(s: GeodesicSystem, certA: JumpCertificate, certB: JumpCertificate) -> MultiplicityReport:
    models = list(s.geodesics)
    for name, cert in (("first", certA), ("second", certB)):
        rep = verify_certificate(models, cert)
        if not rep.ok:
            raise NotDual(f"{name} certificate N={cert.N} does not verify: {rep.failures[0]}")
    for label, g, ma, mb in zip(s.labels(), models, certA.m, certB.m):
        c = total_negative_splitting(g.decomp)
        da = delta_counts(g, ma, certA.delta)
        db = delta_counts(g, mb, certB.delta)
        if da + db != c:
            raise NotDual(f"{label}: Delta={da} and Delta'={db} do not add up to C={c}")
    a, rows = _buckets(s, certA)
    b, _ = _buckets(s, certB)
    duality_ok = (
        a["N_plus_e"] == b["N_minus_e"]
        and a["N_minus_e"] == b["N_plus_e"]
        and a["N_plus_o"] == b["N_minus_o"]
        and a["N_minus_o"] == b["N_plus_o"]
    )
    nonhyp = [r["label"] for r in rows if r["bucket"] in ("N_plus_e", "N_minus_e")]
    at = [r["label"] for r in rows if r["position"] == "at"]
    return MultiplicityReport(
        a["N_plus_e"], a["N_plus_o"], a["N_minus_e"], a["N_minus_o"], nonhyp, at, b, duality_ok, rows
    )


@dataclass
class Claim1Result:
    holds: bool
    lhs: Optional[Fraction]
    rhs: Optional[Fraction]
    message: str = ""
    offenders: list = field(default_factory=list)


def claim1_check(s: GeodesicSystem, cert: JumpCertificate) -> Claim1Result:
    """``sum_k 2*m_k*chi_hat(c_k) == 2N * (n+1)/(2n)``, exactly."""
    n = s.n
    if cert.N % n:
        return Claim1Result(False, None, None, f"precondition: n={n} does not divide N={cert.N}")
    lhs = Fraction(0)
    offenders = []
    q = len(s.geodesics)
    for label, g, mk in zip(s.labels(), s.geodesics, cert.m):
        chi = mean_euler(g)
        lhs += 2 * mk * chi
        gap = abs(Surd(2 * cert.N * chi) / mean_index(g) - 2 * mk * chi)
        if gap >= Fraction(1, q):
            offenders.append((label, gap))
    rhs = 2 * cert.N * average_betti(n)
    ok = lhs == rhs
    msg = "" if ok else "sum 2*m_k*chi_hat differs from 2N*B; offending: " + ", ".join(l for l, _ in offenders)
    return Claim1Result(ok, lhs, rhs, msg, offenders if not ok else [])


@dataclass
class Step2Report:
    ok: bool
    witnesses: list  # (label, m)
    M_2N: int
    beta_2N: int
    message: str = ""


def step2_audit(s: GeodesicSystem, cert: JumpCertificate, exclude: Sequence[str] = ()) -> Step2Report:
    """Geodesics outside ``exclude`` contributing at degree ``2N``; at least two are needed."""
    n = s.n
    deg = 2 * cert.N
    beta = betti(n, deg)
    if cert.N % n:
        return Step2Report(False, [], 0, beta, f"precondition: n={n} does not divide N={cert.N}")
    if beta != 2:
        return Step2Report(False, [], 0, beta, f"precondition: beta_{deg}={beta}, need N >= 2n")
    skip = set(exclude)
    witnesses = []
    total = 0
    for label, g in zip(s.labels(), s.geodesics):
        mu = mean_index(g)
        top = int((Surd(deg + g.half_dim) / mu).floor()) + 1
        for m in range(1, top + 1):
            if index_of_iterate(g, m) == deg and epsilon(g, m) == 1:
                total += 1
                if label not in skip and g.initial_index % 2 == 0:
                    witnesses.append((label, m))
    ok = len(witnesses) >= 2
    msg = "" if ok else f"deficit: {len(witnesses)} contribution(s) at degree {deg}, need 2"
    return Step2Report(ok, witnesses, total, beta, msg)


@dataclass
class Verdict:
    consistent: bool
    stage: str
    message: str
    certificates: tuple = ()
    report: Optional[MultiplicityReport] = None
    claim1: Optional[Claim1Result] = None
    step2: Optional[Step2Report] = None
    morse_sum: Optional[dict] = None

    @property
    def summary(self) -> str:
        head = "consistent" if self.consistent else "violation"
        return f"{head} [{self.stage}]: {self.message}"


def _morse_bound(s: GeodesicSystem, cert: JumpCertificate, rep: MultiplicityReport) -> dict:
    cap = 2 * cert.N + 1
    M = morse_type_numbers(s, cap).values
    B = betti_table(s.n, cap)
    lhs = alternating_sum(M)
    predicted = Fraction(cert.N * (s.n + 1), s.n) + rep.N_plus_o - rep.N_plus_e
    return {
        "morse_alternating": lhs,
        "betti_alternating": alternating_sum(B),
        "predicted": predicted,
        "identity_ok": lhs == predicted,
        "inequality_ok": lhs <= alternating_sum(B),
    }


def multiplicity_verdict(
    s: GeodesicSystem,
    eps=Fraction(1, 100),
    *,
    budget: Optional[int] = None,
    workers: Optional[int] = None,
) -> Verdict:
    """Run every gate in order and stop at the first certified violation."""
    n = s.n
    if not s.bumpy:
        return Verdict(False, "input", "the system must be flagged bumpy")
    bad = s.problems()
    if not bad:
        low = [lab for lab, g in zip(s.labels(), s.geodesics) if g.initial_index < 2 * n]
        if low:
            bad = [f"{lab}: initial index below {2 * n}" for lab in low]
    if bad:
        return Verdict(False, "input", "; ".join(bad))
    res = resonance_check(s)
    if not res.holds:
        return Verdict(False, "resonance", f"sum chi_hat/i_hat = {res.lhs} != {res.rhs}")
    models = list(s.geodesics)
    mbar = mbar_of(models)
    try:
        certA = find_certificates(models, mbar, M0=n, eps=eps, limit=1, budget=budget, workers=workers)[0]
        certB = dual_certificate(models, certA, budget=budget, workers=workers)
    except (BudgetExhausted, SearchError) as exc:
        raise BudgetExhausted(str(exc)) from exc
    rep = classify_2mk(s, certA, certB)
    certs = (certA, certB)
    c1 = claim1_check(s, certA)
    bound = _morse_bound(s, certA, rep)
    step1 = rep.N_plus_e + rep.N_minus_e
    if not rep.duality_ok:
        return Verdict(False, "duality", "bucket counts are not exchanged by the dual certificate", certs, rep, c1)
    if not c1.holds:
        return Verdict(False, "claim1", c1.message, certs, rep, c1, morse_sum=bound)
    if rep.N_plus_e < n or rep.N_minus_e < n:
        return Verdict(
            False,
            "step1",
            f"only {step1} even-index geodesics leave degree 2N (N_+^e={rep.N_plus_e}, N_-^e={rep.N_minus_e}), "
            f"need at least {n} on each side",
            certs,
            rep,
            c1,
            morse_sum=bound,
        )
    if not bound["inequality_ok"]:
        return Verdict(
            False,
            "step1",
            f"alternating Morse sum {bound['morse_alternating']} exceeds Betti sum {bound['betti_alternating']} "
            f"up to degree {2 * certA.N + 1}",
            certs,
            rep,
            c1,
            morse_sum=bound,
        )
    st2 = step2_audit(s, certA, rep.nonhyperbolic_labels)
    if not st2.ok:
        return Verdict(False, "step2", st2.message, certs, rep, c1, st2, bound)
    msg = f"{step1} non-hyperbolic + {len(st2.witnesses)} = {step1 + len(st2.witnesses)} even-index geodesics (bound {2 * n + 2})"
    return Verdict(True, "complete", msg, certs, rep, c1, st2, bound)
