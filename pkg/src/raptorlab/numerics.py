"""Scalar special functions for mean-LLR analysis on the BI-AWGN channel.

Everything here revolves around the kernel

    phi(mu) = E[tanh(X/2)],   X ~ N(mu, 2*mu),

the mean of the hyperbolic tangent of half a "symmetric Gaussian" LLR
(variance locked to twice the mean).  On top of it sit the inverse
phi_inv, the integral of the inverse (which tends to 4*ln2), the
elementary EXIT function f_d of an output node of degree d, binary-input
AWGN capacity, and the mean-LLR density-evolution recursion.

Evaluation strategy for phi:

* mu < 0.05: Gauss-Hermite quadrature on the defining integral.  The
  integrand is entire with poles far from the real axis at small mu, so
  a 96-node rule is accurate to ~1e-15 there.
* mu >= 0.05: the alternating series

      1 - phi(x) = 4 * sum_k (-1)^k exp(x(k^2+k)) Q(sqrt(x/2)(2k+1))

  whose terms decay only like 1/(2k+1), summed with the Cohen-Villegas-
  Zagier acceleration (geometric convergence for totally monotone
  terms).  Working with 1-phi directly keeps full absolute precision in
  the tail where phi -> 1.

Both paths are exposed separately (`phi_integral_form`, `phi_series`) so
they can cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import log_ndtr

FOUR_LN2 = 4.0 * math.log(2.0)

# phi switches from quadrature to the accelerated series here; the two
# agree to ~1e-14 across [0.01, 5], which doubles as a self-test.
_PHI_SPLIT = 0.05
_CVZ_TERMS = 40
_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(96)
_PHI_INV_MU_MAX = 500.0


class NumericalRangeError(ValueError):
    """An input is outside the range the numerical method can support."""


@dataclass(frozen=True)
class Snr:
    """Linear channel SNR gamma; channel LLRs are N(2*gamma, 4*gamma)."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"snr gamma must be positive, got {self.gamma}")

    @classmethod
    def from_db(cls, db: float) -> "Snr":
        return cls(10.0 ** (db / 10.0))

    @property
    def db(self) -> float:
        return 10.0 * math.log10(self.gamma)

    @property
    def noise_variance(self) -> float:
        return 1.0 / self.gamma

    @property
    def llr_mean(self) -> float:
        return 2.0 * self.gamma

    @property
    def llr_variance(self) -> float:
        return 4.0 * self.gamma


@dataclass(frozen=True)
class QuadratureSpec:
    """Knobs for the randomized / quadrature estimators.

    mc_samples counts antithetic pairs drawn per expectation; the same
    seed always reproduces the same estimate.
    """

    node_count: int = 96
    mc_samples: int = 200_000
    rng_seed: int = 20160331

    def __post_init__(self):
        if self.node_count < 16:
            raise ValueError("node_count must be at least 16")
        if self.mc_samples < 10_000:
            raise ValueError("mc_samples must be at least 10**4")


def _as_float_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def one_minus_phi(mu):
    """1 - phi(mu), computed without cancellation in the tail.

    Scalar in, scalar out; array in, array out.  mu >= 0 required.
    """
    arr, scalar = _as_float_array(mu)
    if np.any(arr < 0):
        raise ValueError("phi is defined for mu >= 0 only")
    out = np.empty_like(arr)
    small = arr < _PHI_SPLIT
    if np.any(small):
        out[small] = 1.0 - _phi_gauss_hermite(arr[small])
    if np.any(~small):
        out[~small] = _one_minus_phi_series(arr[~small])
    return float(out[0]) if scalar else out


def phi(mu):
    """E[tanh(X/2)] for X ~ N(mu, 2*mu); increasing from 0 toward 1."""
    result = one_minus_phi(mu)
    return 1.0 - result


def _phi_gauss_hermite(mu: np.ndarray, nodes: int | None = None) -> np.ndarray:
    if nodes is None:
        t, w = _GH_NODES, _GH_WEIGHTS
    else:
        t, w = np.polynomial.hermite.hermgauss(nodes)
    # X = mu + sqrt(2 * 2mu) * t with weight exp(-t^2)
    u = mu[:, None] + 2.0 * np.sqrt(mu[:, None]) * t[None, :]
    return (w * np.tanh(0.5 * u)).sum(axis=1) / math.sqrt(math.pi)


def _one_minus_phi_series(x: np.ndarray) -> np.ndarray:
    """Accelerated alternating sum of 4*exp(x(k^2+k))*Q(sqrt(x/2)(2k+1)).

    Plain truncation is hopeless here (terms fall off like 1/(2k+1)),
    but the terms form a totally monotone sequence, so the Cohen-
    Villegas-Zagier scheme converges like (3+sqrt(8))^-n.
    """
    n = _CVZ_TERMS
    big = (3.0 + math.sqrt(8.0)) ** n
    big = (big + 1.0 / big) / 2.0
    b = -1.0
    c = -big
    s = np.zeros_like(x)
    sqrt_half_x = np.sqrt(0.5 * x)
    for k in range(n):
        c = b - c
        z = sqrt_half_x * (2 * k + 1)
        # log-space: exp(x(k^2+k)) overflows alone, the product does not
        term = 4.0 * np.exp(x * (k * k + k) + log_ndtr(-z))
        s += c * term
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0))
    return s / big


def phi_series(mu: float) -> float:
    """phi via the accelerated alternating series alone (mu > 0)."""
    arr = np.asarray([float(mu)])
    if arr[0] <= 0:
        raise ValueError("series form requires mu > 0")
    return float(1.0 - _one_minus_phi_series(arr)[0])


def phi_integral_form(mu: float, rel_tol: float = 1e-13) -> float:
    """phi via adaptive quadrature of the defining Gaussian integral."""
    mu = float(mu)
    if mu < 0:
        raise ValueError("phi is defined for mu >= 0 only")
    if mu == 0.0:
        return 0.0
    sigma = math.sqrt(2.0 * mu)

    def integrand(u):
        return math.tanh(0.5 * u) * math.exp(-((u - mu) ** 2) / (4.0 * mu))

    val, _ = quad(integrand, mu - 13.0 * sigma, mu + 13.0 * sigma,
                  epsabs=rel_tol, epsrel=rel_tol, limit=300)
    return val / math.sqrt(4.0 * math.pi * mu)


def phi_inv(y, tol: float = 1e-10):
    """Inverse of phi on [0, 1): the mu with phi(mu) = y.

    Bisection on [0, 500]; phi is strictly increasing so this is
    unconditionally safe.  Values of mu beyond 500 would need
    1 - y < 1e-55, far outside any design range.
    """
    arr, scalar = _as_float_array(y)
    if np.any((arr < 0) | (arr >= 1)):
        raise ValueError("phi_inv is defined on [0, 1)")
    lo = np.zeros_like(arr)
    hi = np.full_like(arr, _PHI_INV_MU_MAX)
    target = 1.0 - arr  # compare in the 1-phi scale: no tail cancellation
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        high_side = one_minus_phi(mid) > target  # phi(mid) < y
        lo = np.where(high_side, mid, lo)
        hi = np.where(high_side, hi, mid)
        if np.max(hi - lo) < 1e-13 * max(1.0, np.max(hi)):
            break
    mid = 0.5 * (lo + hi)
    mid[arr == 0.0] = 0.0
    bad = np.abs(phi(mid) - arr) > tol
    if np.any(bad):
        raise NumericalRangeError(
            f"phi_inv did not reach tolerance {tol} at y={arr[bad][:3]}")
    return float(mid[0]) if scalar else mid


def _adaptive_gl_panel(f, a: float, b: float, tol: float, depth: int = 0) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(24)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    coarse = half * float(np.dot(weights, f(mid + half * nodes)))
    m = 0.5 * (a + b)
    h1, m1 = 0.5 * (m - a), 0.5 * (a + m)
    h2, m2 = 0.5 * (b - m), 0.5 * (m + b)
    fine = h1 * float(np.dot(weights, f(m1 + h1 * nodes))) \
        + h2 * float(np.dot(weights, f(m2 + h2 * nodes)))
    if abs(fine - coarse) < tol or depth >= 24:
        return fine
    return (_adaptive_gl_panel(f, a, m, tol / 2, depth + 1)
            + _adaptive_gl_panel(f, m, b, tol / 2, depth + 1))


def phi_inv_integral(x: float, tol: float = 1e-7) -> float:
    """Integral of phi_inv over [0, x], x in [0, 1).

    Adaptive Gauss-Legendre with panels refined toward 1, where phi_inv
    blows up logarithmically.  Absolute tolerance `tol` (default well
    under the 1e-6 contract).
    """
    x = float(x)
    if not 0 <= x < 1:
        raise ValueError("phi_inv_integral is defined on [0, 1)")
    if x == 0.0:
        return 0.0
    breaks = [0.0]
    for b in (0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999):
        if b < x:
            breaks.append(b)
    breaks.append(x)
    total = 0.0
    panel_tol = tol / len(breaks)
    for a, b in zip(breaks[:-1], breaks[1:]):
        total += _adaptive_gl_panel(lambda t: phi_inv(t), a, b, panel_tol)
    return total


def bi_awgn_capacity(snr: Snr, spec: QuadratureSpec | None = None) -> float:
    """Capacity (bits/use) of the binary-input AWGN channel at SNR gamma.

    C = 1 - E[log2(1 + exp(-L))] with L ~ N(2*gamma, 4*gamma), evaluated
    by adaptive quadrature truncated at 12 standard deviations (the
    integrand decays like the Gaussian; truncation error < 1e-12).
    """
    gamma = snr.gamma
    mean = 2.0 * gamma
    sigma = 2.0 * math.sqrt(gamma)

    def integrand(u):
        # log2(1 + e^-u) without overflow for u << 0
        return np.logaddexp(0.0, -u) / math.log(2.0) \
            * math.exp(-((u - mean) ** 2) / (8.0 * gamma))

    val, _ = quad(integrand, mean - 12.0 * sigma, mean + 12.0 * sigma,
                  epsabs=1e-12, epsrel=1e-12, limit=200)
    return 1.0 - val / math.sqrt(8.0 * math.pi * gamma)


def exit_fd(mu: float, snr: Snr, d: int, spec: QuadratureSpec) -> float:
    """Elementary EXIT function: mean output-to-input message at degree d.

        f_d(mu) = 2 E[atanh(tanh(Z/2) * prod_{q<d} tanh(X_q/2))]

    with Z ~ N(2*gamma, 4*gamma) and X_q ~ N(mu, 2*mu) i.i.d.  Monte
    Carlo with antithetic pairing on Z plus a control variate whose mean
    2*phi(2*gamma)*phi(mu)^(d-1) is known exactly; at low SNR this cuts
    the variance by orders of magnitude (the estimator then only has to
    resolve the atanh curvature).  Deterministic for a fixed spec.

    d = 1 is exactly 2*gamma and returns without sampling.
    """
    if d < 1:
        raise ValueError("output node degree must be >= 1")
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if d == 1:
        return 2.0 * snr.gamma
    if mu == 0.0:
        return 0.0  # every X_q is exactly 0, the product vanishes
    return exit_profile(mu, snr, (d,), spec)[d]


def exit_profile(mu: float, snr: Snr, degrees, spec: QuadratureSpec) -> dict[int, float]:
    """f_d(mu) for several degrees at once, sharing one sample set.

    The product over X factors is accumulated incrementally, so the cost
    is one pass up to max(degrees)-1 regardless of how many degrees are
    requested.  Same estimator as exit_fd.
    """
    degrees = sorted(set(int(d) for d in degrees))
    if degrees and degrees[0] < 1:
        raise ValueError("output node degree must be >= 1")
    gamma = snr.gamma
    out: dict[int, float] = {}
    if 1 in degrees:
        out[1] = 2.0 * gamma
        degrees = degrees[1:]
    if not degrees:
        return out
    if mu == 0.0:
        return out | {d: 0.0 for d in degrees}

    rng = np.random.default_rng(spec.rng_seed)
    m = spec.mc_samples
    w = rng.standard_normal(m)
    z_plus = 2.0 * gamma + 2.0 * math.sqrt(gamma) * w
    z_minus = 2.0 * gamma - 2.0 * math.sqrt(gamma) * w
    t_plus = np.tanh(0.5 * z_plus)
    t_minus = np.tanh(0.5 * z_minus)
    t_pair = t_plus + t_minus

    phi_mu = phi(mu)
    phi_2g = phi(2.0 * gamma)
    sq = math.sqrt(2.0 * mu)

    prod = np.ones(m)
    max_d = degrees[-1]
    targets = set(degrees)
    for q in range(1, max_d):
        prod = prod * np.tanh(0.5 * (mu + sq * rng.standard_normal(m)))
        d = q + 1
        if d in targets:
            raw = np.arctanh(np.clip(t_plus * prod, -1 + 1e-15, 1 - 1e-15)) \
                + np.arctanh(np.clip(t_minus * prod, -1 + 1e-15, 1 - 1e-15))
            cv = t_pair * prod
            out[d] = float(np.mean(raw - cv)) + 2.0 * phi_2g * phi_mu ** (d - 1)
    return out


def density_evolution_trace(dist, alpha: float, snr: Snr, mu0: float,
                            iters: int, spec: QuadratureSpec,
                            stop_above: float | None = None,
                            stall_tol: float = 0.0) -> np.ndarray:
    """Mean-LLR recursion mu <- alpha * sum_d omega_d f_d(mu).

    Returns the trajectory [mu0, mu1, ...].  The same spec (hence the
    same seed) is used at every step, so the trace iterates a fixed
    deterministic map.  Optional early exits: `stop_above` ends the
    trace once mu exceeds it, `stall_tol` > 0 ends it when successive
    steps change by less than that for five steps running.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    omega = dist.omega_edge
    degrees = dist.support
    traj = [float(mu0)]
    flat = 0
    for _ in range(iters):
        mu = traj[-1]
        f = exit_profile(mu, snr, degrees, spec)
        nxt = alpha * sum(omega[d] * f[d] for d in degrees)
        traj.append(float(nxt))
        if stop_above is not None and nxt >= stop_above:
            break
        if stall_tol > 0:
            flat = flat + 1 if abs(nxt - mu) < stall_tol else 0
            if flat >= 5:
                break
    return np.asarray(traj)
