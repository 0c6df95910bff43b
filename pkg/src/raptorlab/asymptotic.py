"""Closed forms for the infinite-maximum-degree limit.

The optimal degree polynomial in the vanishing-SNR, unbounded-degree
limit is

    Omega_inf(x) = (1/(4 ln 2)) * integral_0^x phi_inv(t) dt,

whose Maclaurin coefficients give exact small-degree fractions
(Omega_2 = 1/(4 ln 2), Omega_3 = 1/(6 ln 2), Omega_4 = 1/(24 ln 2),
Omega_5 = 1/(10 ln 2); beyond degree 5 the expansion turns negative and
stops being a distribution).  Two independent recovery routes are
implemented:

* derivatives of phi at 0 from the Bernoulli-number series, inverted by
  exact rational power-series reversion;
* a moment-matching route: Omega_inf'(x)/(4 ln 2) is a density on
  [0, 1), its monomial moments satisfy a Hilbert-matrix system, and the
  closed-form integer inverse of the Hilbert matrix recovers truncated
  fractions.  The Hilbert matrix is catastrophically ill-conditioned, so
  the order is capped at 8; past that double precision returns noise and
  we refuse rather than pretend.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .numerics import (FOUR_LN2, NumericalRangeError, phi_inv,
                       phi_inv_integral)

_SMALL_DEGREE_MAX = 5
_HILBERT_ORDER_MAX = 8
_PHI_DERIV_MAX = 12
_MOMENT_CUTOFF = 1e-7  # integrate to 1 - this; the tail is added analytically


@lru_cache(maxsize=None)
def bernoulli_numbers(count: int) -> tuple[Fraction, ...]:
    """B_0..B_count as exact rationals (B_1 = -1/2 convention).

    Akiyama-Tanigawa recurrence; after the m-th sweep the head of the
    working row is B_m.
    """
    row = [Fraction(0)] * (count + 1)
    out = []
    for m in range(count + 1):
        row[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            row[j - 1] = j * (row[j - 1] - row[j])
        out.append(row[0])
    if count >= 1:
        out[1] = Fraction(-1, 2)  # the recurrence yields the +1/2 convention
    return tuple(out)


def tanh_series_coefficient(n: int) -> Fraction:
    """Coefficient of v^(2n-1) in tanh(v): 2^2n (2^2n - 1) B_2n / (2n)!."""
    if n < 1:
        raise ValueError("n must be >= 1")
    b = bernoulli_numbers(2 * n)[2 * n]
    return Fraction(2 ** (2 * n) * (2 ** (2 * n) - 1), math.factorial(2 * n)) * b


def _phi_derivative_fraction(i: int) -> Fraction:
    """Exact i-th derivative of phi at 0 from the Bernoulli sum."""
    total = Fraction(0)
    lo = -(-(i + 1) // 2)  # ceil((i+1)/2)
    for n in range(lo, i + 1):
        b = bernoulli_numbers(2 * n)[2 * n]
        num = Fraction((2 ** (2 * n) - 1) * math.factorial(i),
                       n * math.factorial(2 * n - i - 1) * math.factorial(2 * i - 2 * n + 1))
        total += num * b
    return total


def phi_derivative_at_zero(i: int) -> float:
    """phi^(i)(0); i = 0 returns 0 since phi(0) = 0.

    Exact rational arithmetic underneath; capped at i = 12 where the
    Bernoulli numbers start to dwarf double precision on conversion.
    """
    if i < 0:
        raise ValueError("derivative order must be nonnegative")
    if i == 0:
        return 0.0
    if i > _PHI_DERIV_MAX:
        raise NumericalRangeError(
            f"phi derivatives supported for i <= {_PHI_DERIV_MAX}")
    return float(_phi_derivative_fraction(i))


@lru_cache(maxsize=None)
def _phi_inverse_series(order: int) -> tuple[Fraction, ...]:
    """Power-series reversion: coefficients b_1..b_order of phi_inv(y).

    phi(x) = sum a_i x^i with a_i = phi^(i)(0)/i!; solve for the inverse
    series term by term (a_1 = 1/2 is invertible).
    """
    a = [Fraction(0)] + [_phi_derivative_fraction(i) / math.factorial(i)
                         for i in range(1, order + 1)]
    b = [Fraction(0)] * (order + 1)
    b[1] = 1 / a[1]
    for k in range(2, order + 1):
        # coefficient of y^k in sum_{i>=2} a_i * (partial inverse)^i;
        # powers of the series only touch b_1..b_{k-1} at that order
        acc = Fraction(0)
        series = b[:]
        cur = [Fraction(1)] + [Fraction(0)] * order  # series^0
        for i in range(1, k + 1):
            nxt = [Fraction(0)] * (order + 1)
            for p in range(order + 1):
                if cur[p] == 0:
                    continue
                for q in range(1, order + 1 - p):
                    nxt[p + q] += cur[p] * series[q]
            cur = nxt
            if i >= 2:
                acc += a[i] * cur[k]
        b[k] = -acc / a[1]
    return tuple(b)


def phi_inverse_derivative_at_zero(i: int) -> float:
    """(phi_inv)^(i)(0) via exact series reversion (i <= 5)."""
    if not 1 <= i <= _SMALL_DEGREE_MAX:
        raise NumericalRangeError("inverse derivatives supported for 1 <= i <= 5")
    b = _phi_inverse_series(i)
    return float(b[i] * math.factorial(i))


def small_degree_fractions(j_max: int = _SMALL_DEGREE_MAX) -> dict[int, float]:
    """Exact limiting fractions Omega_2..Omega_{j_max} (j_max <= 5).

    Omega_j = (phi_inv)^(j-1)(0) / (4 ln 2 * j!).  The expansion yields
    negative values from degree 6 on, so larger j_max is refused.
    """
    if j_max > _SMALL_DEGREE_MAX:
        raise NumericalRangeError(
            "fractions beyond degree 5 are unavailable: the series "
            "expansion of the limiting distribution turns negative there")
    if j_max < 2:
        raise ValueError("j_max must be at least 2")
    b = _phi_inverse_series(j_max - 1)
    return {j: float(b[j - 1] * math.factorial(j - 1)) / (FOUR_LN2 * math.factorial(j))
            for j in range(2, j_max + 1)}


def omega_infinity(x: float) -> float:
    """The limiting degree polynomial (1/(4 ln 2)) * int_0^x phi_inv.

    Defined on [0, 1]; x = 1 is the limit and evaluates to 1 up to the
    quadrature tail (well within 1e-3).
    """
    if not 0 <= x <= 1:
        raise ValueError("omega_infinity is defined on [0, 1]")
    if x == 1.0:
        return (phi_inv_integral(1.0 - _MOMENT_CUTOFF)
                + _integral_tail(_MOMENT_CUTOFF)) / FOUR_LN2
    return phi_inv_integral(x) / FOUR_LN2


def _integral_tail(delta: float) -> float:
    """First-order estimate of int_{1-delta}^1 phi_inv(t) dt."""
    return delta * phi_inv(1.0 - delta)


def hilbert_matrix(order: int) -> np.ndarray:
    i = np.arange(1, order + 1)
    return 1.0 / (i[:, None] + i[None, :] - 1.0)


def hilbert_inverse_exact(order: int) -> np.ndarray:
    """Closed-form inverse of the order-n Hilbert matrix (integer entries)."""
    n = order
    out = np.empty((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            val = ((-1) ** (i + j) * (i + j - 1)
                   * math.comb(n + i - 1, n - j)
                   * math.comb(n + j - 1, n - i)
                   * math.comb(i + j - 2, i - 1) ** 2)
            out[i - 1, j - 1] = float(val)
    return out


def distribution_moment(n: int) -> float:
    """n-th moment G_n of the density g(t) = phi_inv(t) / (4 ln 2).

    Quadrature runs to 1 - 1e-7; the remaining sliver is added as
    delta * phi_inv(1 - delta) (g is within O(delta) of flat there),
    keeping the moment error below ~1e-5.
    """
    if n < 0:
        raise ValueError("moment order must be nonnegative")
    delta = _MOMENT_CUTOFF
    top = 1.0 - delta
    nodes, weights = np.polynomial.legendre.leggauss(64)
    total = 0.0
    breaks = [0.0, 0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999, top]
    for a, b in zip(breaks[:-1], breaks[1:]):
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        t = mid + half * nodes
        total += half * float(np.dot(weights, t ** n * phi_inv(t)))
    total += _integral_tail(delta)  # t^n ~ 1 in the tail
    return total / FOUR_LN2


def hilbert_moment_distribution(order: int, support_cap: int = 60) -> dict[int, float]:
    """Recover degree fractions from the moments G_1..G_order.

    (1 - G_n)/n = sum_d Omega_d / (d + n) is a Hilbert-structured moment
    system.  Truncating the unknowns at `order` and applying the
    closed-form inverse amplifies the tail mass catastrophically (the
    condition number grows like e^(3.5*order)), so the system is instead
    solved as nonnegative least squares over degrees 0..support_cap --
    the one extra fact every degree distribution satisfies.  The result
    is a sparse atomic distribution matching all requested moments.

    Orders above 8 are rejected: the moments themselves carry ~1e-5
    quadrature error, which conditioning turns into noise beyond that.
    """
    if not 2 <= order <= _HILBERT_ORDER_MAX:
        raise NumericalRangeError(
            f"hilbert recovery supports order in [2, {_HILBERT_ORDER_MAX}]; "
            "the matrix is too ill-conditioned beyond that")
    from scipy.optimize import nnls

    g = np.array([distribution_moment(n) for n in range(1, order + 1)])
    rhs = (1.0 - g) / np.arange(1, order + 1)
    degrees = np.arange(0, support_cap + 1)
    system = 1.0 / (np.arange(1, order + 1)[:, None] + degrees[None, :])
    omega, _ = nnls(system, rhs)
    out = {int(d): float(v) for d, v in zip(degrees, omega)
           if v > 1e-12 or d < order}
    return out


def beta_min(delta_d: float) -> float:
    """Minimum average output degree phi_inv(1 - delta)/(4 ln 2) for a
    design that has to carry the mean LLR up to phi_inv(1 - delta)."""
    if not 0 < delta_d < 1:
        raise ValueError("delta must lie in (0, 1)")
    return phi_inv(1.0 - delta_d) / FOUR_LN2
