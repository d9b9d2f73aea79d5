"""Exact rational helpers: rising factorials, finite differences, disc integrals.

Everything that feeds an identity check stays in ``fractions.Fraction``;
floating point enters only through the Gauss-Legendre cross-check of the
radial integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import IndexOutOfRange

Rational = Fraction


def pochhammer(x: int | Fraction, k: int) -> Fraction:
    """Rising factorial x(x+1)...(x+k-1); 1 when k = 0.

    The base must be at least 1 (integer or exact rational); nothing in
    this package evaluates the gamma-function extension.
    """
    if k < 0:
        raise ValueError("exponent must be nonnegative")
    if x < 1:
        raise ValueError("base must be at least 1")
    result = Fraction(1)
    for i in range(k):
        result *= x + i
    return result


def pochhammer_ratio(a: int | Fraction, b: int | Fraction, k: int) -> Fraction:
    """(a)_k / (b)_k in lowest terms."""
    return pochhammer(a, k) / pochhammer(b, k)


def pochhammer_negative(x: int | Fraction, j: int) -> Fraction:
    """Rising factorial at a negative exponent: (x)_{-j} = 1/(x-j)_j.

    Requires x - j >= 1 so the reciprocal product stays positive.
    """
    if j < 0:
        raise ValueError("j must be nonnegative")
    if x - j < 1:
        raise ValueError("(x)_{-j} needs x - j >= 1")
    return 1 / pochhammer(x - j, j)


def alternating_binomial_sum(
    seq: Sequence[Fraction], q: int, at: int = 0
) -> Fraction:
    """Signed binomial sum over a window: sum_k (-1)^k C(q,k) seq[at+k].

    This is (-1)^q times the q-th forward difference at ``at``; it
    annihilates any sequence that is polynomial of degree < q.
    """
    if q < 0 or at < 0:
        raise ValueError("q and at must be nonnegative")
    if at + q >= len(seq):
        raise IndexOutOfRange(f"window [{at}, {at + q}] exceeds length {len(seq)}")
    return sum(
        (-1) ** k * math.comb(q, k) * Fraction(seq[at + k]) for k in range(q + 1)
    )


@dataclass(frozen=True)
class HausdorffReport:
    """Outcome of a complete-monotonicity check.

    ``violation`` is the first (difference order, index, value) triple with
    the wrong sign, or None when the check passed.
    """

    passed: bool
    order: int
    violation: tuple[int, int, Fraction] | None = None


def hausdorff_check(seq: Sequence[Fraction], order: int) -> HausdorffReport:
    """Verify complete monotonicity up to the given difference order.

    A sequence of moments of a measure on [0, 1] satisfies
    (-1)^m (delta^m seq)_k >= 0 for every m and k; the comparison is exact.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if order >= len(seq):
        raise IndexOutOfRange(f"order {order} needs at least {order + 1} values")
    current = [Fraction(x) for x in seq]
    for m in range(order + 1):
        sign = -1 if m % 2 else 1
        for k, value in enumerate(current):
            if sign * value < 0:
                return HausdorffReport(passed=False, order=order, violation=(m, k, value))
        current = [current[k + 1] - current[k] for k in range(len(current) - 1)]
    return HausdorffReport(passed=True, order=order)


def radial_integral(coefficients: Mapping[int, Fraction] | Sequence[Fraction]) -> Fraction:
    """Integral over the unit disc, normalized area measure, of a radial
    polynomial given by coefficients of |z|^(2j).

    Uses the exact moments int |z|^(2j) dA = 1/(j+1).
    """
    if isinstance(coefficients, Mapping):
        items = coefficients.items()
    else:
        items = enumerate(coefficients)
    return sum((Fraction(c) / (j + 1) for j, c in items), start=Fraction(0))


@lru_cache(maxsize=None)
def _gauss_legendre_unit(nodes: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    return tuple((x + 1.0) / 2.0), tuple(w / 2.0)


def radial_integral_quadrature(g: Callable[[float], float], nodes: int = 64) -> float:
    """Gauss-Legendre value of the disc integral of a radial function.

    ``g`` receives t = |z|^2; with the normalized area measure the disc
    integral reduces to the integral of g over [0, 1].  64 nodes are exact
    for polynomials in t up to degree 127.
    """
    points, weights = _gauss_legendre_unit(nodes)
    return float(sum(w * g(t) for t, w in zip(points, weights)))
