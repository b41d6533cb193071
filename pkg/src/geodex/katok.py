"""Katok-type geodesic systems on S^{2n+1}/G and a search for admissible configurations.

The Katok perturbation ``H_0 + alpha*H_1`` composes the round geodesic flow
with a one-parameter rotation group ``exp(t*alpha*A)``, ``A`` acting on the
``k``-th coordinate plane with rate ``w_k = min(p)/p_k``.  Its prime closed
geodesics are the ``n+1`` coordinate great circles, each traversed in both
directions.  Along the circle in plane ``k`` with orientation ``s``, the
normal Jacobi oscillators of the other planes split into modes of frequency
``1 +- alpha*w_j``; over one period ``2*pi/(1 + s*alpha*w_k)`` they turn by

    R = (1 +- alpha*w_j) / (1 + s*alpha*w_k)

full revolutions.  The Poincare map is the diamond sum of the rotations
``R({R})`` and, starting from index ``2n`` on the round sphere, each integer
crossing of a mode adds two to the index, so ``i(c) = 2n + 2*sum [R]``.
:mod:`geodex.katok_oracle` recovers the same numbers by integrating the
linearized flow; the shipped fixtures were produced and cross-checked that way.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import gcd
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, Union

from .iteration import GeodesicModel, index_of_iterate, mean_index
from .loop_homology import (
    GeodesicSystem,
    betti,
    morse_audit,
    morse_type_numbers,
    resonance_check,
)
from .normal_form import NormalFormDecomposition, Rotation, classify
from .scalar import Surd, as_surd

__all__ = [
    "KatokParameters",
    "InadmissibleAngleData",
    "default_weights",
    "katok_modes",
    "katok_angle_data",
    "katok_system",
    "system_from_angle_data",
    "admissible_search",
    "grid_family",
    "katok_family",
]

Candidate = Sequence[tuple[int, Sequence[Surd]]]


class InadmissibleAngleData(ValueError):
    """Angle data contradicts parity, ellipticity, or the Morse audits."""


@dataclass(frozen=True)
class KatokParameters:
    n: int
    alpha: Surd
    p: tuple

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_surd(self.alpha))
        object.__setattr__(self, "p", tuple(int(x) for x in self.p))

    def problems(self) -> list[str]:
        out = []
        if not isinstance(self.n, int) or self.n < 1:
            out.append(f"n must be a positive integer, got {self.n!r}")
            return out
        if self.alpha.is_rational():
            out.append(f"alpha must be irrational, got {self.alpha}")
        if not (Surd(0) < self.alpha < 1):
            out.append(f"alpha must lie in (0, 1), got {self.alpha}")
        if len(self.p) != self.n + 1:
            out.append(f"expected {self.n + 1} weights, got {len(self.p)}")
        if any(x < 1 for x in self.p):
            out.append("weights must be positive")
        for i in range(len(self.p)):
            for j in range(i + 1, len(self.p)):
                if gcd(self.p[i], self.p[j]) != 1:
                    out.append(f"weights {self.p[i]} and {self.p[j]} are not coprime")
        return out

    def rates(self) -> list[Surd]:
        lo = min(self.p)
        return [self.alpha * Surd(lo) / x for x in self.p]


def default_weights(n: int) -> tuple[int, ...]:
    """``(1, 2, 3, 5, 7, ...)``: one followed by the first ``n`` primes."""
    out = [1]
    c = 2
    while len(out) < n + 1:
        if all(c % q for q in out[1:]):
            out.append(c)
        c += 1
    return tuple(out)


def katok_modes(params: KatokParameters) -> list[tuple[str, list[Surd]]]:
    """``(label, [R_1..R_{2n}])`` for each of the ``2n+2`` prime closed geodesics."""
    bad = params.problems()
    if bad:
        raise ValueError("; ".join(bad))
    r = params.rates()
    out = []
    for k in range(params.n + 1):
        for s, tag in ((1, "+"), (-1, "-")):
            den = 1 + s * r[k]
            modes = []
            for j in range(params.n + 1):
                if j != k:
                    modes.append((1 + r[j]) / den)
                    modes.append((1 - r[j]) / den)
            out.append((f"plane{k + 1}{tag}", modes))
    return out


def katok_angle_data(params: KatokParameters) -> list[dict]:
    """Initial index and rotation numbers per geodesic, in closed form."""
    out = []
    for label, modes in katok_modes(params):
        for R in modes:
            if R.is_integer():
                raise InadmissibleAngleData(f"{label}: mode {R} is resonant, the circle is degenerate")
        index = 2 * params.n + 2 * sum(R.floor() for R in modes)
        out.append({"label": label, "initial_index": index, "rhos": [R.frac() for R in modes]})
    return out


def system_from_angle_data(
    n: int, data: Iterable, group_label: str = "", check_audits: bool = True, cap: int = 100
) -> GeodesicSystem:
    """Build a bumpy even-index rotation system, rejecting data that cannot be Katok-type."""
    geos = []
    for k, item in enumerate(data):
        if isinstance(item, GeodesicModel):
            g = item
        else:
            if isinstance(item, dict):
                index, rhos, label = item["initial_index"], item["rhos"], item.get("label", "")
            else:
                index, rhos = item
                label = ""
            g = GeodesicModel(index, NormalFormDecomposition(2 * n, tuple(Rotation(x) for x in rhos)), label=label or f"c{k + 1}")
        tag = g.label or f"c{k + 1}"
        if g.initial_index % 2:
            raise InadmissibleAngleData(f"{tag}: initial index {g.initial_index} is odd")
        if classify(g.decomp) != "irrationally_elliptic":
            raise InadmissibleAngleData(f"{tag}: Poincare map is not irrationally elliptic")
        geos.append(g)
    if len(geos) != 2 * n + 2:
        raise InadmissibleAngleData(f"expected {2 * n + 2} geodesics, got {len(geos)}")
    system = GeodesicSystem(n, tuple(geos), bumpy=True, curvature_pinched=False, group_label=group_label)
    bad = system.problems()
    if bad:
        raise InadmissibleAngleData("; ".join(bad))
    if check_audits:
        audit = morse_audit(system, cap)
        if not audit.ok:
            raise InadmissibleAngleData(f"inadmissible angle data: {audit.violations[0][2]}")
        res = resonance_check(system)
        if not res.holds:
            raise InadmissibleAngleData(f"inadmissible angle data: resonance sum {res.lhs} != {res.rhs}")
    return system


def katok_system(
    params: KatokParameters,
    angle_source: Union[str, Path, None] = None,
    group_label: str = "",
    cap: int = 100,
) -> GeodesicSystem:
    """Katok system from the closed form (``angle_source=None``) or a fixture file."""
    if angle_source is None:
        data = katok_angle_data(params)
    else:
        from .io import load_system

        loaded = load_system(angle_source)
        if loaded.n != params.n:
            raise InadmissibleAngleData(f"fixture is for n={loaded.n}, expected n={params.n}")
        data = list(loaded.geodesics)
        group_label = group_label or loaded.group_label
    return system_from_angle_data(params.n, data, group_label=group_label, cap=cap)


def _passes(n: int, cand: Candidate, cap: int) -> Optional[GeodesicSystem]:
    try:
        system = system_from_angle_data(n, list(cand), check_audits=False)
    except InadmissibleAngleData:
        return None
    if not resonance_check(system).holds:
        return None
    if cap > 0:
        table = morse_type_numbers(system, cap).values
        if any(table[p] != betti(n, p) for p in range(cap + 1)):
            return None
    return system


def admissible_search(n: int, cap: int, family: Iterable[Candidate]) -> Optional[GeodesicSystem]:
    """First candidate whose Morse table equals the Betti table up to ``cap``
    and whose resonance sum is exactly ``(n+1)/(2n)``; ``None`` if exhausted.

    With ``cap = 0`` only degree 0 is compared, where both sides vanish for
    every candidate, so the first parity-valid resonant candidate is returned.
    """
    for cand in family:
        found = _passes(n, cand, cap)
        if found is not None:
            return found
    return None


def grid_family(n: int, indices: Sequence[int], rho_tuples: Sequence[Sequence]) -> Iterator[list]:
    """Multisets of ``2n+2`` geodesics over ``indices x rho_tuples``, lexicographically."""
    options = [(i, tuple(as_surd(x) for x in rhos)) for i in sorted(indices) for rhos in rho_tuples]
    for combo in combinations_with_replacement(range(len(options)), 2 * n + 2):
        yield [options[c] for c in combo]


def katok_family(n: int, alphas: Sequence, weights: Optional[Sequence[int]] = None) -> Iterator[list]:
    """One candidate per ``alpha``, taken from the closed form."""
    p = tuple(weights) if weights else default_weights(n)
    for a in alphas:
        try:
            data = katok_angle_data(KatokParameters(n, as_surd(a), p))
        except (ValueError, InadmissibleAngleData):
            continue
        yield [(d["initial_index"], d["rhos"]) for d in data]


def summary(system: GeodesicSystem, upto: int = 6) -> list[dict]:
    """Labels, first indices and mean indices, for reports."""
    return [
        {
            "label": lab,
            "indices": [index_of_iterate(g, m) for m in range(1, upto + 1)],
            "mean_index": mean_index(g),
        }
        for lab, g in zip(system.labels(), system.geodesics)
    ]

