"""Numerical oracle for Katok rotation numbers, used to produce and re-check fixtures.

The Katok geodesic flow on the unit sphere bundle of S^{2n+1} is the linear
flow ``x' = v + alpha*A x``, ``v' = -x + alpha*A v`` on pairs ``(x, v)``,
where ``A`` rotates the ``j``-th coordinate plane with rate ``w_j``.  For the
great circle in plane ``k`` this module

1. integrates the orbit until its angle has advanced by one full turn, which
   gives the period ``T``;
2. integrates the variational equation of every other plane ``j`` over
   ``[0, T]`` to get the monodromy block (the Poincare map);
3. reads the two mode frequencies of plane ``j`` from the eigenvalues of
   positive Krein type of the generator, turns them into rotation counts
   ``R = omega*T/(2*pi)`` and checks ``exp(2*pi*i*R)`` against the monodromy
   spectrum;
4. identifies each ``R`` as an element of ``Q(sqrt(d))`` with an integer
   relation search and returns exact values.

Requires scipy and mpmath; not needed at library runtime.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from .scalar import Surd

__all__ = ["OracleGeodesic", "oracle_modes", "identify", "oracle_angle_data", "main"]

_J = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass
class OracleGeodesic:
    label: str
    period: float
    modes: list  # floats R
    monodromy_error: float


def _plane_generator(rate: float) -> np.ndarray:
    I2 = np.eye(2)
    return np.block([[rate * _J, I2], [-I2, rate * _J]])


def _period(rate_k: float, s: int) -> float:
    from scipy.integrate import solve_ivp

    G = _plane_generator(rate_k)

    def rhs(_t, z):
        x, v = z[:2], z[2:4]
        dz = G @ z[:4]
        omega = (x[0] * dz[1] - x[1] * dz[0]) / (x @ x)
        return np.concatenate([dz, [omega]])

    def turned(_t, z):
        return abs(z[4]) - 2 * np.pi

    turned.terminal = True
    z0 = np.array([1.0, 0.0, 0.0, float(s), 0.0])
    sol = solve_ivp(rhs, (0.0, 100.0), z0, events=turned, rtol=1e-12, atol=1e-13)
    return float(sol.t_events[0][0])


def _monodromy(rate_j: float, T: float) -> np.ndarray:
    from scipy.integrate import solve_ivp

    G = _plane_generator(rate_j)
    sol = solve_ivp(
        lambda _t, y: (G @ y.reshape(4, 4)).ravel(),
        (0.0, T),
        np.eye(4).ravel(),
        rtol=1e-12,
        atol=1e-13,
    )
    return sol.y[:, -1].reshape(4, 4)


def _positive_frequencies(rate_j: float) -> list[float]:
    G = _plane_generator(rate_j)
    omega = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    vals, vecs = np.linalg.eig(G)
    out = []
    for lam, xi in zip(vals, vecs.T):
        # Krein form of an eigenvector; positive type rotates forward
        kappa = (-1j * xi.conj() @ omega @ xi).real
        if kappa > 0:
            out.append(abs(lam.imag))
    return sorted(out, reverse=True)


def oracle_modes(n: int, alpha: float, weights) -> list[OracleGeodesic]:
    lo = min(weights)
    rates = [alpha * lo / p for p in weights]
    out = []
    for k in range(n + 1):
        for s, tag in ((1, "+"), (-1, "-")):
            T = _period(rates[k], s)
            modes, err = [], 0.0
            for j in range(n + 1):
                if j == k:
                    continue
                P = _monodromy(rates[j], T)
                spec = np.linalg.eigvals(P)
                for w in _positive_frequencies(rates[j]):
                    R = w * T / (2 * np.pi)
                    z = np.exp(2j * np.pi * R)
                    err = max(err, float(np.min(np.abs(spec - z))))
                    modes.append(R)
            out.append(OracleGeodesic(f"plane{k + 1}{tag}", T, modes, err))
    return out


def identify(x: float, d: int = 2, tol: float = 1e-9, maxcoeff: int = 10**5) -> Surd:
    """The element ``a + b*sqrt(d)`` of small height closest to ``x``."""
    import mpmath

    mpmath.mp.dps = 30
    rel = mpmath.pslq([mpmath.mpf(x), 1, mpmath.sqrt(d)], tol=tol, maxcoeff=maxcoeff, maxsteps=10**6)
    if rel is None or rel[0] == 0:
        raise ValueError(f"no relation found for {x!r} in Q(sqrt({d}))")
    a, b, c = rel
    return -(Surd(b) + Surd(c) * Surd.sqrt(d)) / a


def oracle_angle_data(n: int, alpha: float, weights, radicand: int = 2) -> list[dict]:
    data = []
    for geo in oracle_modes(n, alpha, weights):
        if geo.monodromy_error > 1e-7:
            raise ValueError(f"{geo.label}: monodromy mismatch {geo.monodromy_error:.2e}")
        exact = [identify(R, radicand) for R in geo.modes]
        for R, e in zip(geo.modes, exact):
            if abs(float(e) - R) > 1e-8:
                raise ValueError(f"{geo.label}: identification drifted for {R!r}")
        index = 2 * n + 2 * sum(e.floor() for e in exact)
        data.append({"label": geo.label, "initial_index": index, "rhos": [e.frac() for e in exact]})
    return data


def main(argv=None) -> int:
    from .io import dump_system
    from .katok import system_from_angle_data
    from .scalar import parse_scalar

    ap = argparse.ArgumentParser(prog="python -m geodex.katok_oracle", description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, required=True)
    ap.add_argument("--alpha", required=True, help="exact alpha, e.g. 'sqrt(2)/2'")
    ap.add_argument("--weights", type=int, nargs="+", required=True)
    ap.add_argument("--radicand", type=int, default=2)
    ap.add_argument("--out", required=True)
    ap.add_argument("--group-label", default="trivial")
    args = ap.parse_args(argv)
    alpha = float(parse_scalar(args.alpha))
    data = oracle_angle_data(args.n, alpha, args.weights, args.radicand)
    system = system_from_angle_data(args.n, data, group_label=args.group_label)
    desc = f"Katok system, n={args.n}, alpha={args.alpha}, weights={tuple(args.weights)}"
    dump_system(system, args.out, desc)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
