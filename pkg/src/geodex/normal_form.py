"""Basic normal forms of symplectic matrices and their per-eigenvalue data.

A decomposition is a diamond-sum of elementary blocks:

* ``N1(lam, b)`` with ``lam = +-1`` and ``b in {-1, 0, 1}``; ``b = 0`` stands for
  the identity ``I2`` (``lam = 1``) or ``-I2`` (``lam = -1``),
* ``Rotation(rho)``, the rotation ``R(2*pi*rho)``,
* ``N2(rho, nontrivial)``, the 4x4 Jordan-type block with eigenvalues
  ``exp(+-2*pi*i*rho)``,
* ``Hyperbolic(sign)``, the block ``D(sign*2)``.

Angles are carried as rotation numbers ``rho = theta / (2*pi)`` in ``(0, 1)``
and unit-circle points as "turns" ``t`` with ``omega = exp(2*pi*i*t)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Union

from .scalar import Surd, as_surd

__all__ = [
    "N1",
    "Rotation",
    "N2",
    "Hyperbolic",
    "Block",
    "Omega",
    "NormalFormDecomposition",
    "validate",
    "nullity_at",
    "splitting_numbers",
    "total_negative_splitting",
    "classify",
]

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class N1:
    lam: int
    b: int

    dim = 1

    @property
    def kind(self) -> str:
        if self.lam == 1:
            return {1: "p_minus", 0: "p_zero", -1: "p_plus"}[self.b]
        return {1: "q_minus", 0: "q_zero", -1: "q_plus"}[self.b]

    def problems(self) -> list[str]:
        out = []
        if self.lam not in (1, -1):
            out.append(f"N1 eigenvalue must be +1 or -1, got {self.lam}")
        if self.b not in (-1, 0, 1):
            out.append(f"N1 off-diagonal must be normalized to -1, 0 or 1, got {self.b}")
        return out


@dataclass(frozen=True)
class Rotation:
    rho: Surd

    dim = 1

    def __post_init__(self):
        object.__setattr__(self, "rho", as_surd(self.rho))

    def problems(self) -> list[str]:
        return _angle_problems("rotation", self.rho)


@dataclass(frozen=True)
class N2:
    rho: Surd
    nontrivial: bool = True

    dim = 2

    def __post_init__(self):
        object.__setattr__(self, "rho", as_surd(self.rho))

    def problems(self) -> list[str]:
        return _angle_problems("N2", self.rho)


@dataclass(frozen=True)
class Hyperbolic:
    sign: int = 1

    dim = 1

    def problems(self) -> list[str]:
        if self.sign not in (1, -1):
            return [f"hyperbolic sign must be +1 or -1, got {self.sign}"]
        return []


Block = Union[N1, Rotation, N2, Hyperbolic]


def _angle_problems(name: str, rho: Surd) -> list[str]:
    if not (Surd(0) < rho < 1):
        return [f"{name} angle {rho} outside (0, 1)"]
    if rho == HALF:
        return [f"{name} angle must differ from 1/2"]
    return []


@dataclass(frozen=True)
class Omega:
    """A point ``exp(2*pi*i*turn)`` of the unit circle, ``0 <= turn < 1``."""

    turn: Surd

    def __post_init__(self):
        t = as_surd(self.turn)
        if not (Surd(0) <= t < 1):
            raise ValueError(f"turn {t} is not in [0, 1)")
        object.__setattr__(self, "turn", t)

    @classmethod
    def of(cls, value) -> "Omega":
        """Accept ``1``, ``-1``, an :class:`Omega`, or ``("exp", rho)``."""
        if isinstance(value, Omega):
            return value
        if isinstance(value, tuple) and len(value) == 2 and value[0] == "exp":
            rho = as_surd(value[1])
            return cls(rho - rho.floor())
        if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
            if value == 1:
                return cls(Surd(0))
            if value == -1:
                return cls(Surd(HALF))
        raise ValueError(f"{value!r} is not a point of the unit circle")


def _unit_eigen(block: Block) -> list[tuple[Surd, int, int]]:
    """(turn, S+, S-) for each unit-circle eigenvalue of ``block``."""
    if isinstance(block, N1):
        if block.lam == 1:
            s = 1 if block.b >= 0 else 0
            return [(Surd(0), s, s)]
        s = 1 if block.b <= 0 else 0
        return [(Surd(HALF), s, s)]
    if isinstance(block, Rotation):
        return [(block.rho, 0, 1), (1 - block.rho, 1, 0)]
    if isinstance(block, N2):
        s = 1 if block.nontrivial else 0
        return [(block.rho, s, s), (1 - block.rho, s, s)]
    return []


def _block_nullity(block: Block, m: int) -> int:
    if isinstance(block, N1):
        if block.lam == -1 and m % 2:
            return 0
        return 2 if block.b == 0 else 1
    if isinstance(block, (Rotation, N2)):
        return 2 if (block.rho * m).is_integer() else 0
    return 0


@dataclass(frozen=True)
class NormalFormDecomposition:
    half_dim: int
    blocks: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))

    # counts in the order used by the iteration formula
    def _count(self, kind: str) -> int:
        return sum(1 for b in self.blocks if isinstance(b, N1) and b.kind == kind)

    @property
    def p_minus(self) -> int:
        return self._count("p_minus")

    @property
    def p_zero(self) -> int:
        return self._count("p_zero")

    @property
    def p_plus(self) -> int:
        return self._count("p_plus")

    @property
    def q_minus(self) -> int:
        return self._count("q_minus")

    @property
    def q_zero(self) -> int:
        return self._count("q_zero")

    @property
    def q_plus(self) -> int:
        return self._count("q_plus")

    @property
    def rotation_angles(self) -> list[Surd]:
        return [b.rho for b in self.blocks if isinstance(b, Rotation)]

    @property
    def nontrivial_n2_angles(self) -> list[Surd]:
        return [b.rho for b in self.blocks if isinstance(b, N2) and b.nontrivial]

    @property
    def trivial_n2_angles(self) -> list[Surd]:
        return [b.rho for b in self.blocks if isinstance(b, N2) and not b.nontrivial]

    @property
    def hyperbolic_signs(self) -> list[int]:
        return [b.sign for b in self.blocks if isinstance(b, Hyperbolic)]

    @property
    def r(self) -> int:
        return len(self.rotation_angles)

    @property
    def r_star(self) -> int:
        return len(self.nontrivial_n2_angles)

    @property
    def r_zero(self) -> int:
        return len(self.trivial_n2_angles)

    @property
    def h(self) -> int:
        return len(self.hyperbolic_signs)

    def used_dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    def __add__(self, other: "NormalFormDecomposition") -> "NormalFormDecomposition":
        """Diamond sum."""
        return NormalFormDecomposition(self.half_dim + other.half_dim, self.blocks + other.blocks)

    def unit_eigenvalues(self) -> list[tuple[Surd, int, int]]:
        out = []
        for b in self.blocks:
            out.extend(_unit_eigen(b))
        return out

    def spectral_angles(self) -> list[Surd]:
        """Rotation numbers of rotation and N2 blocks."""
        return [b.rho for b in self.blocks if isinstance(b, (Rotation, N2))]

    def irrational_angles(self) -> list[Surd]:
        return [rho for rho in self.spectral_angles() if not rho.is_rational()]

    def has_eigenvalue_one_or_minus_one(self) -> bool:
        return any(isinstance(b, N1) for b in self.blocks)

    @classmethod
    def of(cls, half_dim: int, blocks: Iterable[Block]) -> "NormalFormDecomposition":
        return cls(half_dim, tuple(blocks))


def validate(d: NormalFormDecomposition) -> list[str]:
    """Every violated invariant of ``d``; an empty list means valid."""
    out = []
    if not isinstance(d.half_dim, int) or d.half_dim < 1:
        out.append(f"half_dim must be a positive integer, got {d.half_dim!r}")
    for i, b in enumerate(d.blocks):
        if not isinstance(b, (N1, Rotation, N2, Hyperbolic)):
            out.append(f"block {i}: unknown block {b!r}")
            continue
        out.extend(f"block {i}: {msg}" for msg in b.problems())
    used = d.used_dim()
    if used != d.half_dim:
        out.append(f"dimension budget {used} != {d.half_dim}")
    return out


def nullity_at(d: NormalFormDecomposition, m: int) -> int:
    """``dim ker(M^m - I)`` summed over blocks."""
    return sum(_block_nullity(b, m) for b in d.blocks)


def splitting_numbers(d: NormalFormDecomposition, omega) -> tuple[int, int]:
    """``(S+, S-)`` of ``d`` at ``omega`` (``1``, ``-1``, ``Omega`` or ``("exp", rho)``)."""
    w = Omega.of(omega)
    sp = sm = 0
    for turn, a, b in d.unit_eigenvalues():
        if turn == w.turn:
            sp += a
            sm += b
    return sp, sm


def total_negative_splitting(d: NormalFormDecomposition) -> int:
    """C(M): the sum of S- over unit eigenvalues ``exp(i*theta)``, ``0 < theta < 2*pi``.

    Every block contributes its own eigenvalues, so coinciding eigenvalues of
    different blocks add, as splitting numbers do under diamond sums.
    """
    return sum(sm for turn, _, sm in d.unit_eigenvalues() if turn != 0)


def positive_splitting_at_one(d: NormalFormDecomposition) -> int:
    return splitting_numbers(d, 1)[0]


def rational_period(d: NormalFormDecomposition) -> int:
    """Least ``M`` with ``M*theta/pi`` integral for every rational spectral angle."""
    out = 1
    for turn, _, _ in d.unit_eigenvalues():
        if turn.is_rational():
            out = lcm(out, (2 * turn.to_fraction()).denominator)
    return out


def classify(d: NormalFormDecomposition) -> str:
    """One of ``hyperbolic``, ``irrationally_elliptic``, ``elliptic``, ``mixed``."""
    if not d.blocks:
        return "hyperbolic"
    if all(isinstance(b, Hyperbolic) for b in d.blocks):
        return "hyperbolic"
    if all(isinstance(b, Rotation) for b in d.blocks):
        if all(not b.rho.is_rational() for b in d.blocks):
            return "irrationally_elliptic"
        return "elliptic"
    if all(isinstance(b, (Rotation, N2)) for b in d.blocks):
        return "elliptic"
    return "mixed"
