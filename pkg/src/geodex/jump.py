"""Common index jump certificates: search, verification and dual search.

A certificate for models ``c_1..c_q`` is an integer ``N`` with iterates

    m_k = ([N/(Mbar*i_hat_k)] + chi_k) * Mbar,   |{N/(Mbar*i_hat_k)} - chi_k| < eps,

such that every irrational spectral angle ``theta`` of every ``c_k`` also
satisfies ``||2*m_k*theta/(2*pi)|| < delta`` (distance to the nearest
integer).  Under these conditions the iterates ``2*m_k +- m`` sit exactly
``2N`` above or below ``c_k^m`` for ``m <= mbar``, which :func:`verify_certificate`
checks by direct evaluation of the iteration formula.

The scan tests every multiple of ``M0`` in order.  A float prefilter over
numpy chunks discards hopeless ``N`` with a safety margin far larger than the
rounding error; every surviving candidate is decided with exact arithmetic,
so results never depend on floating point.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

import numpy as np

from .iteration import GeodesicModel, index_of_iterate, mean_index
from .normal_form import (
    nullity_at,
    positive_splitting_at_one,
    rational_period,
    total_negative_splitting,
)
from .scalar import Surd

__all__ = [
    "JumpCertificate",
    "CertificateReport",
    "BudgetExhausted",
    "SearchError",
    "mbar_of",
    "Mbar_of",
    "default_delta",
    "find_certificates",
    "verify_certificate",
    "dual_certificate",
    "delta_counts",
    "scan_budget",
    "DEFAULT_EPSILON",
    "DEFAULT_BUDGET",
]

DEFAULT_EPSILON = Fraction(1, 100)
DEFAULT_BUDGET = 10**7
CHUNK = 1 << 16
_MARGIN = 1e-6


class SearchError(ValueError):
    """Invalid search input."""


class BudgetExhausted(RuntimeError):
    """No certificate was found below the scan budget."""


def scan_budget(default: int = DEFAULT_BUDGET) -> int:
    """The N scan cap, overridable through ``GEODEX_SCAN_BUDGET``."""
    raw = os.environ.get("GEODEX_SCAN_BUDGET")
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise SearchError(f"GEODEX_SCAN_BUDGET must be an integer, got {raw!r}") from None
    if value < 1:
        raise SearchError("GEODEX_SCAN_BUDGET must be positive")
    return value


@dataclass(frozen=True)
class JumpCertificate:
    N: int
    m: tuple
    chi: tuple
    Mbar: int
    M0: int
    epsilon: Fraction
    delta: Fraction
    mbar: int
    verification: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(self.m))
        object.__setattr__(self, "chi", tuple(self.chi))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        object.__setattr__(self, "delta", Fraction(self.delta))


# -- preparation ---------------------------------------------------------

def Mbar_of(models: Sequence[GeodesicModel]) -> int:
    """Least ``M`` with ``M*theta/pi`` integral for every rational spectral angle."""
    out = 1
    for g in models:
        out = lcm(out, rational_period(g.decomp))
    return out


def _check_positive(models: Sequence[GeodesicModel]) -> list[Surd]:
    if not models:
        raise SearchError("at least one model is required")
    mus = []
    for k, g in enumerate(models):
        mu = mean_index(g)
        if mu <= 0:
            raise SearchError(f"model {k + 1} ({g.label or 'unnamed'}): mean index {mu} is not positive")
        mus.append(mu)
    return mus


def _lower_jump(g: GeodesicModel, m: int) -> int:
    """A lower bound for ``i(c^{m+l}) - i(c^l)`` valid for every ``l``."""
    d = g.decomp
    slope = g.initial_index + d.p_minus + d.p_zero - d.r
    out = m * slope - (d.q_zero + d.q_plus) - 2 * d.r_star
    for rho in d.rotation_angles:
        out += 2 * rho.floor_times(m)
    return out


def _mbar_single(g: GeodesicModel) -> int:
    mu = mean_index(g)
    # |i(c^j) - j*mu| <= half_dim gives i(c^{m+l}) - i(c^l) >= m*mu - 2*half_dim
    safe = max(int((Surd(2 * g.half_dim) / mu).ceil()), 1)
    for m in range(safe - 1, 0, -1):
        if _lower_jump(g, m) < 0:
            return m + 1
    return 1


def mbar_of(models: Sequence[GeodesicModel]) -> int:
    """``max_k min{m0 : i(c_k^{m+l}) >= i(c_k^l) for all l >= 1, m >= m0}``.

    Iterates with ``m*i_hat >= 2*half_dim`` are monotone by the growth bound.
    Below that, ``m`` is accepted when an exact lower bound on the jump, valid
    for every ``l``, is non-negative; otherwise it is treated as failing.  This
    can only overestimate the true value, and a larger ``mbar`` makes
    certificates check more iterates, never fewer.
    """
    _check_positive(models)
    return max(_mbar_single(g) for g in models)


def _irrational_rotations(g: GeodesicModel) -> list[Surd]:
    return [rho for rho in g.decomp.rotation_angles if not rho.is_rational()]


def _dist_to_int(x: Surd) -> Surd:
    f = x.frac()
    return f if f <= Fraction(1, 2) else 1 - f


def _round_down(x: Surd, max_den: int = 10**6) -> Fraction:
    q = Fraction(float(x)).limit_denominator(max_den)
    while q >= x:
        q -= Fraction(1, max_den)
    return q


def default_delta(models: Sequence[GeodesicModel], eps=DEFAULT_EPSILON, mbar: int = 1) -> Fraction:
    """A window ``delta`` under which the jump identities are exact.

    With ``2*m_k*rho_j = K_j + eta_j`` and ``|eta_j| < delta``:
    ``2*m_k*i_hat - 2N`` has modulus below ``2*Mbar*i_hat*eps`` and equals
    ``2*sum eta_j`` modulo even integers, so ``2*r*delta + 2*Mbar*i_hat*eps < 1``
    forces it to vanish; and ``delta <= ||m*rho_j||`` for ``m <= mbar`` keeps
    ``E((2m_k +- m)*rho_j)`` aligned with ``E(+-m*rho_j)``.
    """
    eps = Fraction(eps)
    mus = _check_positive(models)
    Mbar = Mbar_of(models)
    bound: Optional[Surd] = None
    for k, (g, mu) in enumerate(zip(models, mus)):
        slack = 1 - 2 * Mbar * mu * eps
        if slack <= 0:
            raise SearchError(f"model {k + 1}: epsilon {eps} too large for mean index {mu}")
        angles = [rho for rho in g.decomp.spectral_angles() if not rho.is_rational()]
        rot = _irrational_rotations(g)
        cands = []
        if rot:
            cands.append(slack / (2 * len(rot)))
        for rho in angles:
            for m in range(1, mbar + 1):
                cands.append(_dist_to_int(rho * m))
        for c in cands:
            if bound is None or c < bound:
                bound = c
    if bound is None:
        return Fraction(1, 2)
    if bound <= 0:
        raise SearchError("no admissible delta")
    return _round_down(bound)


# -- exact candidate test ------------------------------------------------

def _window(x: Surd, M: int, w: Fraction) -> Optional[int]:
    """0 if ``{M*x} < w``, 1 if ``{M*x} > 1 - w``, else None (``w < 1/2``)."""
    if x.is_rational():
        f = (x.rational_part * M) % 1
        return 0 if f < w else 1 if f > 1 - w else None
    # M*x is irrational, so floor(q*{M*x}) = [q*M*x] - q*[M*x] decides both sides
    p, q = w.numerator, w.denominator
    k = x.floor_times(q * M) - q * x.floor_times(M)
    if k < p:
        return 0
    if k >= q - p:
        return 1
    return None


@dataclass(frozen=True)
class _Plan:
    invs: tuple  # 1/(Mbar*i_hat_k) as Surd
    angles: tuple  # per model: irrational spectral angles
    Mbar: int
    M0: int
    eps: Fraction
    delta: Fraction
    mbar: int
    min_2m: int

    def exact(self, N: int):
        ms, chis = [], []
        for inv, angles in zip(self.invs, self.angles):
            chi = _window(inv, N, self.eps)
            if chi is None:
                return None
            mk = (inv.floor_times(N) + chi) * self.Mbar
            if 2 * mk < self.min_2m:
                return None
            for rho in angles:
                if _window(rho, 2 * mk, self.delta) is None:
                    return None
            ms.append(mk)
            chis.append(chi)
        return tuple(ms), tuple(chis)

    def scan(self, lo: int, hi: int, want=None) -> list:
        """Exact hits for multiples ``N = M0*j`` with ``lo <= j < hi``."""
        js = np.arange(lo, hi, dtype=np.int64)
        Ns = js * self.M0
        keep = np.ones(len(js), dtype=bool)
        eps = float(self.eps) + _MARGIN
        delta = float(self.delta) + _MARGIN
        for inv, angles in zip(self.invs, self.angles):
            x = Ns.astype(np.float64) * float(inv)
            fl = np.floor(x)
            f = x - fl
            lo_ok = f < eps
            hi_ok = f > 1 - eps
            keep &= lo_ok | hi_ok
            if not keep.any():
                return []
            mk = (fl + np.where(lo_ok, 0.0, 1.0)) * self.Mbar
            for rho in angles:
                y = 2.0 * mk * float(rho)
                dist = np.abs(y - np.rint(y))
                keep &= dist < delta
        out = []
        for N in Ns[keep].tolist():
            hit = self.exact(int(N))
            if hit is not None:
                out.append((int(N), hit[0], hit[1]))
                if want is not None and len(out) >= want:
                    break
        return out


def _make_plan(models, mbar, M0, eps, delta) -> _Plan:
    mus = _check_positive(models)
    if mbar < 1:
        raise SearchError("mbar must be a positive integer")
    if M0 < 1:
        raise SearchError("M0 must be a positive integer")
    eps = Fraction(eps)
    if not (0 < eps < Fraction(1, 2)):
        raise SearchError(f"epsilon must lie in (0, 1/2), got {eps}")
    if delta is None:
        delta = default_delta(models, eps, mbar)
    delta = Fraction(delta)
    if not (0 < delta <= Fraction(1, 2)):
        raise SearchError(f"delta must lie in (0, 1/2], got {delta}")
    Mbar = Mbar_of(models)
    invs = tuple(1 / (mu * Mbar) for mu in mus)
    angles = tuple(tuple(rho for rho in g.decomp.spectral_angles() if not rho.is_rational()) for g in models)
    return _Plan(invs, angles, Mbar, M0, eps, delta, mbar, mbar + 2)


def _scan_chunk(args):
    plan, lo, hi = args
    return plan.scan(lo, hi)


def _to_cert(plan: _Plan, hit) -> JumpCertificate:
    N, ms, chis = hit
    return JumpCertificate(N, ms, chis, plan.Mbar, plan.M0, plan.eps, plan.delta, plan.mbar)


def _run_scan(plan: _Plan, start_j: int, end_j: int, limit: int, workers: Optional[int], accept=None):
    found = []
    # chunks grow to CHUNK so early hits stay cheap; the output does not depend on it
    bounds, a, size = [], start_j, 1024
    while a <= end_j:
        bounds.append((a, min(a + size, end_j + 1)))
        a += size
        size = min(2 * size, CHUNK)
    if workers and workers > 1:
        batch = workers * 2
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for b in range(0, len(bounds), batch):
                part = bounds[b : b + batch]
                results = pool.map(_scan_chunk, [(plan, lo, hi) for lo, hi in part])
                for hits in results:
                    found.extend(h for h in hits if accept is None or accept(h))
                if len(found) >= limit:
                    break
    else:
        for lo, hi in bounds:
            hits = plan.scan(lo, hi)
            found.extend(h for h in hits if accept is None or accept(h))
            if len(found) >= limit:
                break
    found.sort(key=lambda h: h[0])
    return found[:limit]


def find_certificates(
    models: Sequence[GeodesicModel],
    mbar: int,
    M0: int = 1,
    eps=DEFAULT_EPSILON,
    limit: int = 1,
    *,
    delta=None,
    budget: Optional[int] = None,
    start: int = 1,
    workers: Optional[int] = None,
) -> list[JumpCertificate]:
    """Up to ``limit`` certificates with ``start <= N <= budget``, in increasing ``N``.

    Output is independent of ``workers``: chunks are merged by ``N`` and
    truncated to ``limit``.
    """
    plan = _make_plan(models, mbar, M0, eps, delta)
    budget = scan_budget() if budget is None else budget
    start_j = max(1, -(-start // M0))
    end_j = budget // M0
    hits = _run_scan(plan, start_j, end_j, limit, workers)
    if not hits:
        raise BudgetExhausted(f"budget exhausted: no certificate with N <= {budget}")
    return [_to_cert(plan, h) for h in hits]


# -- verification --------------------------------------------------------

def delta_counts(g: GeodesicModel, mk: int, delta) -> int:
    """``Delta_k``: S- summed over turns ``t`` with ``0 < {2*m_k*t} < delta``."""
    total = 0
    for turn, _, sm in g.decomp.unit_eigenvalues():
        if not sm:
            continue
        f = (turn * (2 * mk)).frac()
        if 0 < f < delta:
            total += sm
    return total


def q_counts(g: GeodesicModel, mk: int, m: int) -> int:
    """``Q_k(m)``: S- over turns ``t`` in (0, 1) with ``{2*m_k*t} = {m*t} = 0``."""
    total = 0
    for turn, _, sm in g.decomp.unit_eigenvalues():
        if sm and turn != 0 and (turn * (2 * mk)).is_integer() and (turn * m).is_integer():
            total += sm
    return total


@dataclass
class CertificateReport:
    ok: bool
    failures: list  # (k, m, check, detail), k is 1-based, m is None for structural checks
    records: list  # per model summary dicts

    def __bool__(self):
        return self.ok


def verify_certificate(models: Sequence[GeodesicModel], cert: JumpCertificate) -> CertificateReport:
    """Check every jump identity by direct evaluation for ``1 <= m <= mbar``."""
    fails = []
    records = []
    if len(cert.m) != len(models) or len(cert.chi) != len(models):
        return CertificateReport(False, [(0, None, "shape", "certificate length differs from model count")], [])
    mus = _check_positive(models)
    if cert.N % cert.M0:
        fails.append((0, None, "divisibility", f"M0={cert.M0} does not divide N={cert.N}"))
    if cert.Mbar % Mbar_of(models):
        fails.append((0, None, "Mbar", f"Mbar={cert.Mbar} misses a rational angle period"))
    two_n = 2 * cert.N
    for k, (g, mu, mk, chi) in enumerate(zip(models, mus, cert.m, cert.chi), start=1):
        x = Surd(cert.N) / (mu * cert.Mbar)
        fl = x.floor()
        if chi not in (0, 1) or mk != (fl + chi) * cert.Mbar:
            fails.append((k, None, "iterate_formula", f"m_{k}={mk} != ([N/(Mbar*i_hat)] + chi)*Mbar"))
        if not abs(x - fl - chi) < cert.epsilon:
            fails.append((k, None, "fraction_window", f"|{{N/(Mbar*i_hat)}} - chi| >= {cert.epsilon}"))
        if 2 * mk < cert.mbar + 2:
            fails.append((k, None, "iterate_margin", f"2*m_{k}={2 * mk} < mbar + 2"))
        for rho in g.decomp.spectral_angles():
            if rho.is_rational():
                continue
            f = (rho * (2 * mk)).frac()
            if not (f < cert.delta or f > 1 - cert.delta):
                fails.append((k, None, "angle_window", f"{{2*m_{k}*rho}} outside the delta window for rho={rho}"))
        s_plus = positive_splitting_at_one(g.decomp)
        c_total = total_negative_splitting(g.decomp)
        dk = delta_counts(g, mk, cert.delta)
        for m in range(1, cert.mbar + 1):
            if 2 * mk - m < 1:
                break
            nu = nullity_at(g.decomp, m)
            if nullity_at(g.decomp, 2 * mk - m) != nu or nullity_at(g.decomp, 2 * mk + m) != nu:
                fails.append((k, m, "nullity", "nullity of 2m_k +- m differs from nullity of m"))
            im = index_of_iterate(g, m)
            after = index_of_iterate(g, 2 * mk + m)
            if after != two_n + im:
                fails.append((k, m, "index_after", f"i(c^(2m_k+m))={after} != 2N + i(c^m)={two_n + im}"))
            before = index_of_iterate(g, 2 * mk - m)
            want = two_n - im - 2 * (s_plus + q_counts(g, mk, m))
            if before != want:
                fails.append((k, m, "index_before", f"i(c^(2m_k-m))={before} != {want}"))
        mid = index_of_iterate(g, 2 * mk)
        want_mid = two_n - (s_plus + c_total - 2 * dk)
        if mid != want_mid:
            fails.append((k, None, "index_middle", f"i(c^(2m_k))={mid} != 2N-(S+ + C - 2*Delta)={want_mid}"))
        records.append(
            {
                "model": k,
                "label": g.label,
                "m_k": mk,
                "chi": chi,
                "S_plus_1": s_plus,
                "C": c_total,
                "Delta": dk,
                "index_2mk": mid,
            }
        )
    return CertificateReport(not fails, fails, records)


def attach_verification(models, cert: JumpCertificate) -> JumpCertificate:
    rep = verify_certificate(models, cert)
    return replace(cert, verification=tuple(rep.records))


def dual_certificate(
    models: Sequence[GeodesicModel],
    cert: JumpCertificate,
    *,
    budget: Optional[int] = None,
    workers: Optional[int] = None,
) -> JumpCertificate:
    """The first certificate ``N' >= N`` with ``Delta'_k = C(M_k) - Delta_k`` for every ``k``.

    Uses the same ``Mbar``, ``M0``, ``eps``, ``delta`` and ``mbar``; a
    certificate with ``2*Delta_k = C(M_k)`` for all ``k`` (every hyperbolic
    one, for instance) is its own dual.
    """
    rep = verify_certificate(models, cert)
    if not rep.ok:
        raise SearchError(f"certificate N={cert.N} does not verify: {rep.failures[0]}")
    plan = _make_plan(models, cert.mbar, cert.M0, cert.epsilon, cert.delta)
    targets = [
        total_negative_splitting(g.decomp) - delta_counts(g, mk, cert.delta) for g, mk in zip(models, cert.m)
    ]

    def accept(hit):
        _, ms, _ = hit
        return all(delta_counts(g, mk, cert.delta) == t for g, mk, t in zip(models, ms, targets))

    budget = scan_budget() if budget is None else budget
    start_j = cert.N // cert.M0
    hits = _run_scan(plan, start_j, budget // cert.M0, 1, workers, accept)
    if not hits:
        raise BudgetExhausted(f"budget exhausted: no dual certificate with N' <= {budget}")
    return _to_cert(plan, hits[0])
