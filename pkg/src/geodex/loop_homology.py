"""Equivariant Betti numbers of the contractible loop space of S^{2n+1}/G and Morse audits."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .iteration import (
    GeodesicModel,
    analytical_period,
    index_of_iterate,
    mean_index,
    type_numbers,
    validate_model,
)
from .scalar import Surd

__all__ = [
    "GeodesicSystem",
    "MorseTable",
    "MorseAudit",
    "ResonanceResult",
    "betti",
    "betti_table",
    "average_betti",
    "partial_alternating_average",
    "morse_type_numbers",
    "morse_audit",
    "mean_euler",
    "resonance_check",
    "DEFAULT_DEGREE_CAP",
]

DEFAULT_DEGREE_CAP = 200


@dataclass(frozen=True)
class GeodesicSystem:
    n: int
    geodesics: tuple
    bumpy: bool = True
    curvature_pinched: bool = False
    group_label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "geodesics", tuple(self.geodesics))

    @property
    def half_dim(self) -> int:
        return 2 * self.n

    def labels(self) -> list[str]:
        return [g.label or f"c{k + 1}" for k, g in enumerate(self.geodesics)]

    def problems(self) -> list[str]:
        out = []
        if not isinstance(self.n, int) or self.n < 1:
            return [f"n must be a positive integer, got {self.n!r}"]
        for k, g in enumerate(self.geodesics):
            tag = g.label or f"c{k + 1}"
            if g.half_dim != self.half_dim:
                out.append(f"{tag}: Poincare map must live in Sp({2 * self.half_dim}), got half_dim {g.half_dim}")
                continue
            msgs = validate_model(g, bumpy=self.bumpy, curvature_pinched=self.curvature_pinched)
            if msgs:
                out.extend(msgs)
                continue
            if mean_index(g) <= 0:
                out.append(f"{tag}: mean index must be positive, got {mean_index(g)}")
        return out


def betti(n: int, j: int) -> int:
    """Rational S^1-equivariant Betti number of the contractible loop space pair."""
    if j < 2 * n or j % 2:
        return 0
    if j % (2 * n) == 0 and j >= 4 * n:
        return 2
    return 1


def betti_table(n: int, cap: int) -> list[int]:
    return [betti(n, j) for j in range(cap + 1)]


def average_betti(n: int) -> Fraction:
    if n < 1:
        raise ValueError("n must be positive")
    return Fraction(n + 1, 2 * n)


def partial_alternating_average(n: int, q: int) -> Fraction:
    """``(1/q) * sum_{k<=q} (-1)^k beta_k``."""
    if q < 1:
        raise ValueError("q must be positive")
    return Fraction(sum((-1) ** k * betti(n, k) for k in range(q + 1)), q)


@dataclass
class MorseTable:
    cap: int
    values: list
    contributions: dict = field(default_factory=dict)  # degree -> [(label, m, count)]

    def __getitem__(self, p: int) -> int:
        return self.values[p]


def _horizon(g: GeodesicModel, cap: int, half_dim: int) -> int:
    # i(c^m) >= m*mean - half_dim, so iterates beyond this never reach degree cap
    mu = mean_index(g)
    return int((Surd(cap + half_dim) / mu).floor()) + 1


def morse_type_numbers(s: GeodesicSystem, cap: int = DEFAULT_DEGREE_CAP) -> MorseTable:
    values = [0] * (cap + 1)
    contrib: dict[int, list] = {}
    for label, g in zip(s.labels(), s.geodesics):
        for m in range(1, _horizon(g, cap, g.half_dim) + 1):
            base = index_of_iterate(g, m)
            ks = type_numbers(g, m)
            for l, k in enumerate(ks):
                p = base + l
                if k and 0 <= p <= cap:
                    values[p] += k
                    contrib.setdefault(p, []).append((label, m, k))
    return MorseTable(cap, values, dict(sorted(contrib.items())))


@dataclass
class MorseAudit:
    cap: int
    morse: list
    betti: list
    violations: list  # (degree, kind, message)
    all_even: bool

    @property
    def ok(self) -> bool:
        return not self.violations


def morse_audit(s: GeodesicSystem, cap: int = DEFAULT_DEGREE_CAP) -> MorseAudit:
    table = morse_type_numbers(s, cap)
    M = table.values
    B = betti_table(s.n, cap)
    out = []
    alt_m = alt_b = 0
    for p in range(cap + 1):
        if M[p] < B[p]:
            out.append((p, "pointwise", f"M_{p}={M[p]} < beta_{p}={B[p]}"))
        alt_m = M[p] - alt_m
        alt_b = B[p] - alt_b
        if alt_m < alt_b:
            out.append((p, "alternating", f"alternating sum at degree {p}: {alt_m} < {alt_b}"))
    all_even = all(
        index_of_iterate(g, m) % 2 == 0
        for g in s.geodesics
        for m in range(1, _horizon(g, cap, g.half_dim) + 1)
    )
    if all_even:
        for p in range(cap + 1):
            if M[p] > B[p]:
                out.append((p, "equality", f"M_{p}={M[p]} != beta_{p}={B[p]} in an even-index system"))
    rank = {"pointwise": 0, "alternating": 1, "equality": 2}
    out.sort(key=lambda v: (v[0], rank[v[1]]))
    return MorseAudit(cap, M, B, out, all_even)


def mean_euler(g: GeodesicModel) -> Fraction:
    """Mean Euler number, averaged over one analytical period."""
    nc = analytical_period(g)
    total = 0
    for m in range(1, nc + 1):
        sign = -1 if index_of_iterate(g, m) % 2 else 1
        for l, k in enumerate(type_numbers(g, m)):
            total += sign * (-1) ** l * k
    return Fraction(total, nc)


@dataclass
class ResonanceResult:
    verdict: str  # holds | fails | inconclusive
    lhs: Surd
    rhs: Fraction
    terms: list  # (label, chi_hat, mean_index)

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


def resonance_check(s: GeodesicSystem) -> ResonanceResult:
    """Exact evaluation of ``sum chi_hat/i_hat`` against ``(n+1)/(2n)``.

    Sums of square roots with distinct square-free radicands are linearly
    independent over the rationals, so exact comparison always decides.
    """
    lhs = Surd(0)
    terms = []
    for label, g in zip(s.labels(), s.geodesics):
        mu = mean_index(g)
        if mu <= 0:
            raise ValueError(f"{label}: mean index must be positive, got {mu}")
        chi = mean_euler(g)
        terms.append((label, chi, mu))
        lhs = lhs + Surd(chi) / mu
    rhs = average_betti(s.n)
    return ResonanceResult("holds" if lhs == rhs else "fails", lhs, rhs, terms)


def alternating_sum(values: Sequence[int], upto: Optional[int] = None) -> int:
    """``sum_{p<=upto} (-1)^p values[p]``."""
    upto = len(values) - 1 if upto is None else upto
    return sum((-1) ** p * values[p] for p in range(upto + 1))
