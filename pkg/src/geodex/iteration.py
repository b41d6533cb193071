"""Index iteration for closed geodesics given by a normal form and an initial index."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import lcm
from typing import Optional

from .normal_form import (
    N1,
    N2,
    NormalFormDecomposition,
    Rotation,
    nullity_at,
    validate,
)
from .scalar import Surd

__all__ = [
    "GeodesicModel",
    "AnalyticalPeriodError",
    "index_of_iterate",
    "mean_index",
    "index_parity",
    "epsilon",
    "analytical_period",
    "growth_bound_check",
    "validate_model",
    "is_structurally_bumpy",
    "DEFAULT_PERIOD_CAP",
]

DEFAULT_PERIOD_CAP = 10**6


class AnalyticalPeriodError(ValueError):
    """The rational-angle period exceeds the configured search cap."""


@dataclass(frozen=True)
class GeodesicModel:
    """A closed geodesic ``c``: its Morse index ``i(c)`` and the normal form of ``P_c``.

    ``type_tables`` maps an iterate ``m`` to the local type numbers
    ``(k_0, ..., k_L)`` of ``c^m``; only degenerate models need it.
    """

    initial_index: int
    decomp: NormalFormDecomposition
    type_tables: Optional[dict] = None
    label: str = ""
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    @property
    def half_dim(self) -> int:
        return self.decomp.half_dim

    def index(self, m: int) -> int:
        return index_of_iterate(self, m)

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_cache"] = {}
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)


def _coeffs(g: GeodesicModel):
    c = g._cache.get("coeffs")
    if c is None:
        d = g.decomp
        rot = tuple(d.rotation_angles)
        n2 = tuple(d.nontrivial_n2_angles)
        c = (
            g.initial_index + d.p_minus + d.p_zero - d.r,  # slope
            -d.r - d.p_minus - d.p_zero - 2 * d.r_star,  # constant
            d.q_zero + d.q_plus,  # even-iterate correction
            rot,
            n2,
        )
        g._cache["coeffs"] = c
    return c


def index_of_iterate(g: GeodesicModel, m: int) -> int:
    """``i(c^m)`` by the precise iteration formula."""
    if m < 1:
        raise ValueError(f"iterate must be a positive integer, got {m}")
    slope, const, qcorr, rot, n2 = _coeffs(g)
    total = m * slope + const
    if not m % 2:
        total -= qcorr
    for rho in rot:
        total += 2 * rho.ceil_times(m)
    for rho in n2:
        # 2*varphi(m*rho)
        if rho.ceil_times(m) != rho.floor_times(m):
            total += 2
    return total


def mean_index(g: GeodesicModel) -> Surd:
    """Exact ``lim i(c^m)/m``."""
    c = g._cache.get("mean")
    if c is None:
        d = g.decomp
        c = Surd(g.initial_index + d.p_minus + d.p_zero - d.r)
        for rho in d.rotation_angles:
            c = c + 2 * rho
        g._cache["mean"] = c
    return c


def index_parity(g: GeodesicModel, m: int) -> tuple[str, int]:
    """Parity of ``i(c^m)`` and ``epsilon(c^m) = (-1)^(i(c^m) - i(c))``."""
    i_m = index_of_iterate(g, m)
    return ("even" if i_m % 2 == 0 else "odd"), epsilon(g, m)


def epsilon(g: GeodesicModel, m: int) -> int:
    return 1 if (index_of_iterate(g, m) - g.initial_index) % 2 == 0 else -1


def nullity_period(d: NormalFormDecomposition, cap: int = DEFAULT_PERIOD_CAP) -> int:
    """Least ``L`` such that ``nu(c^L)`` is maximal (nullity is ``L``-periodic)."""
    L = 1
    for b in d.blocks:
        if isinstance(b, N1) and b.lam == -1:
            L = lcm(L, 2)
        elif isinstance(b, (Rotation, N2)) and b.rho.is_rational():
            L = lcm(L, b.rho.to_fraction().denominator)
        if L > cap:
            raise AnalyticalPeriodError(f"unbounded search: rational-angle period exceeds cap {cap}")
    return L


def analytical_period(g: GeodesicModel, cap: int = DEFAULT_PERIOD_CAP) -> int:
    """The least ``j`` with maximal ``nu(c^j)`` and ``i(c^{m+j}) - i(c^m)`` even for all ``m``.

    Parity of ``i(c^m)`` is ``m*slope + const + [m even]*(q0+q+)`` mod 2, so
    it has period 1 or 2; maximal nullity is attained exactly on multiples of
    :func:`nullity_period`.
    """
    L = nullity_period(g.decomp, cap)
    slope, _, qcorr, _, _ = _coeffs(g)
    if L % 2 == 0 or (slope + qcorr) % 2 == 0:
        return L
    if 2 * L > cap:
        raise AnalyticalPeriodError(f"unbounded search: analytical period exceeds cap {cap}")
    return 2 * L


def growth_bound_check(g: GeodesicModel, horizon: int, bound: Optional[int] = None):
    """Check ``|i(c^m) - m*mean| <= bound`` for ``m <= horizon``.

    ``bound`` defaults to the half dimension of the normal form (``2n`` for
    geodesics on a ``(2n+1)``-manifold).  Returns ``(ok, worst)`` where
    ``worst`` is the exact maximal deviation seen.
    """
    if bound is None:
        bound = g.half_dim
    mu = mean_index(g)
    ok = True
    approx = float(mu)
    devs = []
    for m in range(1, horizon + 1):
        i = index_of_iterate(g, m)
        # i - bound <= m*mu <= i + bound, decided on integer parts
        if mu.floor_times(m) < i - bound or mu.ceil_times(m) > i + bound:
            ok = False
        devs.append((abs(i - m * approx), m, i))
    if not devs:
        return True, Surd(0)
    # the exact maximum is taken over every iterate that floats cannot separate from it
    top = max(d for d, _, _ in devs)
    tol = 1e-9 * (1 + horizon * abs(approx))
    worst = max(abs(i - mu * m) for d, m, i in devs if d >= top - tol)
    return ok, worst


def is_structurally_bumpy(d: NormalFormDecomposition) -> bool:
    """No eigenvalue +-1 and no rational angle, hence ``nu(c^m) = 0`` for all ``m``."""
    if d.has_eigenvalue_one_or_minus_one():
        return False
    return all(not rho.is_rational() for rho in d.spectral_angles())


def validate_model(
    g: GeodesicModel,
    *,
    bumpy: bool = False,
    curvature_pinched: bool = False,
    max_type_degree: Optional[int] = None,
    horizon: int = 200,
) -> list[str]:
    """All violated invariants of a model (empty when valid)."""
    out = [f"{g.label or 'model'}: {msg}" for msg in validate(g.decomp)]
    tag = g.label or "model"
    if not isinstance(g.initial_index, int) or g.initial_index < 0:
        out.append(f"{tag}: initial index must be a non-negative integer")
        return out
    if out:
        return out
    if bumpy:
        if not is_structurally_bumpy(g.decomp):
            out.append(f"{tag}: bumpy flag set but the normal form is degenerate")
        else:
            bad = [m for m in range(1, horizon + 1) if nullity_at(g.decomp, m)]
            if bad:
                out.append(f"{tag}: bumpy flag set but nu(c^{bad[0]}) > 0")
    if curvature_pinched and g.initial_index < g.half_dim:
        out.append(f"{tag}: pinching requires i(c) >= {g.half_dim}, got {g.initial_index}")
    if g.type_tables:
        out.extend(_table_problems(g, max_type_degree))
    return out


def _table_problems(g: GeodesicModel, max_degree: Optional[int]) -> list[str]:
    tag = g.label or "model"
    out = []
    if max_degree is None:
        max_degree = 2 * g.half_dim
    for m, ks in g.type_tables.items():
        if not isinstance(m, int) or m < 1:
            out.append(f"{tag}: type table key {m!r} is not a positive iterate")
            continue
        if len(ks) > max_degree + 1:
            out.append(f"{tag}: type table for m={m} has degrees beyond {max_degree}")
        if any((not isinstance(k, int)) or k < 0 for k in ks):
            out.append(f"{tag}: type numbers for m={m} must be non-negative integers")
    try:
        nc = analytical_period(g)
    except AnalyticalPeriodError as exc:
        return out + [f"{tag}: {exc}"]
    for m, ks in g.type_tables.items():
        if isinstance(m, int) and m > nc:
            base = (m - 1) % nc + 1
            ref = g.type_tables.get(base)
            if ref is not None and tuple(ref) != tuple(ks):
                out.append(f"{tag}: type table breaks periodicity: m={m} differs from m={base}")
    return out


def type_numbers(g: GeodesicModel, m: int) -> tuple[int, ...]:
    """Local type numbers ``k_l(c^m)``, synthesized for non-degenerate iterates.

    A non-degenerate iterate has ``k_0 = 1`` exactly when ``i(c^m) - i(c)`` is
    even; a degenerate one needs a user table, reduced mod the analytical period.
    """
    if nullity_at(g.decomp, m) == 0 and not g.type_tables:
        return (1,) if epsilon(g, m) == 1 else (0,)
    tables = g.type_tables or {}
    if m in tables:
        return tuple(tables[m])
    nc = analytical_period(g)
    base = (m - 1) % nc + 1
    if base in tables:
        return tuple(tables[base])
    if nullity_at(g.decomp, m) == 0:
        return (1,) if epsilon(g, m) == 1 else (0,)
    raise MissingTypeTable(f"{g.label or 'model'}: missing type table for iterate {base}")


class MissingTypeTable(ValueError):
    pass
