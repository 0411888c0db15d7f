"""Run-length asymptotics for coin tossing, and the Poisson special case.

The probability of seeing no head run of length ``k`` in ``n`` tosses decays
geometrically, ``p_n ~ c_k s_k^{n+1}``, where ``s_k`` is the dominant root of
the characteristic polynomial of the run recursion and ``c_k`` the matching
residue constant.  The continuous-time analogue with unit-rate structure
replaces the polynomial by the transcendental equation ``x e^{-x} = r e^{-r}``
whose companion root plays the part of the decay rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NumericError, PreconditionError

__all__ = [
    "CoinResult",
    "PoissonResult",
    "coin_root",
    "coin_constant",
    "coin_exact",
    "coin_result",
    "poisson_phi",
]

_BISECT_TOL = 1e-12


@dataclass(frozen=True)
class CoinResult:
    """Answer set for one ``(p, k)`` pair.

    ``table`` rows, when built, are ``(n, exact, asymptote)`` with the
    asymptote ``c_k * s_k ** (n + 1)``.
    """

    p: float
    k: int
    s_k: float
    c_k: float
    table: tuple | None = None


@dataclass(frozen=True)
class PoissonResult:
    """Decay rate and prefactor constant for the rate-``r`` special case."""

    r: float
    phi_r: float
    c_r: float


def _charpoly(p: float, k: int):
    # x^k - q * sum_{j<k} p^j x^{k-1-j}; the sum evaluated by Horner
    q = 1.0 - p
    powers = [p**j for j in range(k)]

    def f(x: float) -> float:
        acc = 0.0
        for coeff in powers:
            acc = acc * x + coeff
        return x**k - q * acc

    return f


def coin_root(p: float, k: int) -> float:
    """Largest root in (0, 1) of the no-run characteristic polynomial.

    Bisection to 1e-12 from a sign-change bracket.  The textbook bracket
    ``[p, 1)`` holds whenever ``p <= k/(k+1)``; for more lopsided coins the
    crossing nearest 1 is located by walking down from the top first.
    """
    if not 0.0 < p < 1.0:
        raise PreconditionError("head probability must lie strictly inside (0, 1)")
    if k < 1:
        raise PreconditionError("run length must be at least 1")
    q = 1.0 - p
    if k == 1:
        # linear equation x - q = 0
        return q
    f = _charpoly(p, k)
    lo, hi = p, 1.0
    if not f(lo) < 0.0:
        found = False
        step = 1.0 / 4096.0
        x_hi = 1.0
        x = 1.0 - step
        while x > 0.0:
            if f(x) < 0.0:
                lo, hi = x, x_hi
                found = True
                break
            x_hi = x
            x -= step
        if not found:
            raise NumericError("no sign change found for the run-length polynomial")
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def coin_constant(p: float, k: int, s_k: float) -> float:
    """Residue constant ``(s-p) / (q ((k+1) s - k))`` at the dominant root.

    The ``k = 1`` fair coin hits 0/0 and is returned as the degenerate value
    0.0: a run of length one appears at the very first head, so there is no
    geometric sharpening to report.  A vanishing denominator away from that
    corner raises :class:`NumericError`.
    """
    q = 1.0 - p
    num = s_k - p
    den = q * ((k + 1) * s_k - k)
    if abs(den) < 1e-12:
        if abs(num) < 1e-9:
            return 0.0
        raise NumericError("run-length constant has a vanishing denominator")
    return num / den


def coin_exact(p: float, k: int, n: int) -> float:
    """Probability of no head run of length ``k`` within ``n`` tosses.

    Exact dynamic program over the trailing run length (capped below k),
    O(n k) time.  ``n < k`` gives exactly 1: the run cannot fit.
    """
    if not 0.0 <= p <= 1.0:
        raise PreconditionError("head probability must lie in [0, 1]")
    if k < 1:
        raise PreconditionError("run length must be at least 1")
    if n < 0:
        raise PreconditionError("number of tosses must be nonnegative")
    q = 1.0 - p
    alive = [0.0] * k
    alive[0] = 1.0
    for _ in range(n):
        total = sum(alive)
        nxt = [0.0] * k
        nxt[0] = q * total
        for r in range(k - 1):
            nxt[r + 1] = p * alive[r]
        alive = nxt
    return sum(alive)


def coin_result(p: float, k: int, n_max: int | None = None) -> CoinResult:
    """Bundle root and constant, optionally with an exact-vs-asymptote table.

    With ``n_max`` given, the table runs over n = 0..n_max.
    """
    s = coin_root(p, k)
    c = coin_constant(p, k, s)
    table = None
    if n_max is not None:
        if n_max < 0:
            raise PreconditionError("n_max must be nonnegative")
        table = tuple(
            (n, coin_exact(p, k, n), c * s ** (n + 1)) for n in range(n_max + 1)
        )
    return CoinResult(p=p, k=k, s_k=s, c_k=c, table=table)


def poisson_phi(r: float) -> PoissonResult:
    """Decay rate and constant for the rate-``r`` continuous special case.

    ``r = 1`` sits at the double root and returns ``(1, 2)`` exactly.
    Otherwise the companion root of ``x e^{-x} = r e^{-r}`` lies on the
    opposite side of 1 from ``r`` and is bisected to 1e-12; the constant is
    ``(phi - r) / (r (phi - 1))``.
    """
    if r <= 0.0:
        raise PreconditionError("rate must be positive")
    if r == 1.0:
        return PoissonResult(r=1.0, phi_r=1.0, c_r=2.0)
    target = r * math.exp(-r)

    def f(x: float) -> float:
        return x * math.exp(-x) - target

    if r > 1.0:
        lo, hi = 0.0, 1.0
    else:
        lo, hi = 1.0, 2.0
        while f(hi) > 0.0:
            hi *= 2.0
            if hi > 1e3:
                raise NumericError("companion-root bracket failed to close")
    neg_lo = f(lo) < 0.0
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if (f(mid) < 0.0) == neg_lo:
            lo = mid
        else:
            hi = mid
    phi = 0.5 * (lo + hi)
    return PoissonResult(r=r, phi_r=phi, c_r=(phi - r) / (r * (phi - 1.0)))
