"""Closed-form mode propagators for u'' + lambda^2 u + b u' + m^2 u = 0.

With Delta = b^2/4 - m^2 - lambda^2 the scalar solution is

    u(t)  = e^{-bt/2} [G0 u0 + G1 (u1 + b/2 u0)]
    u'(t) = e^{-bt/2} [G0 u1 - G1 (b/2 u1 + (lambda^2 + m^2) u0)]

where G1 = sinh(sqrt(Delta) t)/sqrt(Delta), t, or sin(sqrt(-Delta) t)/sqrt(-Delta) and
G0 = dG1/dt.  Everything here is vectorised over lambda^2 and t.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# |Delta| below DEGENERATE_RTOL * max(1, b^2/4) uses the Taylor series in Delta t^2
DEGENERATE_RTOL = 1e-8
_TAYLOR_TERMS = 12
# e^{-bt/2} cosh/sinh switch to exponent form beyond this value of sqrt(Delta) t
_EXP_FORM_THRESHOLD = 20.0


class Regime(str, enum.Enum):
    UNDERDAMPED = "underdamped"
    CRITICAL = "critical"
    OVERDAMPED = "overdamped"


class ModeRegime(str, enum.Enum):
    HYPERBOLIC = "hyperbolic"
    DEGENERATE = "degenerate"
    OSCILLATORY = "oscillatory"


@dataclass(frozen=True)
class EvolutionParams:
    """Damping ``b`` and squared mass ``m_sq`` (both > 0).

    ``critical_rtol`` decides when b^2 and 4 m^2 count as equal.
    """

    b: float
    m_sq: float
    critical_rtol: float = 1e-12
    discriminant_base: float = field(init=False)

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValueError(f"damping b must be a positive finite number, got {self.b}")
        if not (self.m_sq > 0 and math.isfinite(self.m_sq)):
            raise ValueError(f"m_sq must be a positive finite number, got {self.m_sq}")
        object.__setattr__(self, "discriminant_base", self.b**2 / 4 - self.m_sq)

    def regime(self) -> Regime:
        b2, four_m2 = self.b**2, 4 * self.m_sq
        if abs(b2 - four_m2) <= self.critical_rtol * max(b2, four_m2):
            return Regime.CRITICAL
        return Regime.UNDERDAMPED if b2 < four_m2 else Regime.OVERDAMPED

    def decay_rate(self) -> float:
        """Exponential rate of the decay function (the exponent's coefficient of t)."""
        if self.regime() is Regime.OVERDAMPED:
            return -self.b / 2 + math.sqrt(self.discriminant_base)
        return -self.b / 2

    def degenerate_tol(self) -> float:
        return DEGENERATE_RTOL * max(1.0, self.b**2 / 4)

    def mode_discriminant(self, lambda_sq):
        return self.discriminant_base - np.asarray(lambda_sq, dtype=float)

    def mode_regime(self, lambda_sq: float) -> ModeRegime:
        delta = float(self.mode_discriminant(lambda_sq))
        if abs(delta) <= self.degenerate_tol():
            return ModeRegime.DEGENERATE
        return ModeRegime.HYPERBOLIC if delta > 0 else ModeRegime.OSCILLATORY


def decay_function(t, params: EvolutionParams, regularized: bool = False):
    """d_{b,m^2}(t).

    ``regularized`` replaces t by max(t, 1) in the critical branch so the weight
    stays positive at t = 0 (an equivalent norm on bounded time intervals).
    """
    t = np.asarray(t, dtype=float)
    regime = params.regime()
    if regime is Regime.UNDERDAMPED:
        out = np.exp(-params.b * t / 2)
    elif regime is Regime.CRITICAL:
        factor = np.maximum(t, 1.0) if regularized else t
        out = factor * np.exp(-params.b * t / 2)
    else:
        out = np.exp(params.decay_rate() * t)
    return out[()] if out.ndim == 0 else out


def _taylor_series(x, odd: bool):
    """sum_j x^j / (2j + odd)!  via Horner; x = Delta t^2."""
    acc = np.ones_like(x)
    for j in range(_TAYLOR_TERMS, 0, -1):
        acc = 1.0 + acc * x / ((2 * j + odd) * (2 * j - 1 + odd))
    return acc


def _damped_pair(t, params: EvolutionParams, lambda_sq):
    """(e^{-bt/2} G0, e^{-bt/2} G1), broadcast over t and lambda_sq."""
    t, lam = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(lambda_sq, dtype=float))
    half_b = params.b / 2
    delta = params.discriminant_base - lam
    tol = params.degenerate_tol()
    x = delta * t * t
    # Taylor only where it converges quickly; larger |x| is accurate in closed form anyway
    degenerate = (np.abs(delta) <= tol) & (np.abs(x) <= 1.0)
    hyper = (delta > 0) & ~degenerate
    osc = (delta < 0) & ~degenerate

    damp = np.exp(-half_b * t)
    d0 = np.empty_like(t)
    d1 = np.empty_like(t)

    if np.any(degenerate):
        xd, td = x[degenerate], t[degenerate]
        d0[degenerate] = damp[degenerate] * _taylor_series(xd, odd=False)
        d1[degenerate] = damp[degenerate] * td * _taylor_series(xd, odd=True)

    if np.any(osc):
        w = np.sqrt(-delta[osc])
        to = t[osc]
        d0[osc] = damp[osc] * np.cos(w * to)
        d1[osc] = damp[osc] * np.sin(w * to) / w

    if np.any(hyper):
        s = np.sqrt(delta[hyper])
        th = t[hyper]
        st = s * th
        small = st <= _EXP_FORM_THRESHOLD
        h0 = np.empty_like(th)
        h1 = np.empty_like(th)
        dh = damp[hyper]
        h0[small] = dh[small] * np.cosh(st[small])
        h1[small] = dh[small] * np.sinh(st[small]) / s[small]
        big = ~small
        if np.any(big):
            # b/2 > sqrt(Delta) keeps both exponents negative; cosh alone would overflow
            e_plus = np.exp((s[big] - half_b) * th[big])
            e_minus = np.exp((-s[big] - half_b) * th[big])
            h0[big] = 0.5 * (e_plus + e_minus)
            h1[big] = 0.5 * (e_plus - e_minus) / s[big]
        d0[hyper] = h0
        d1[hyper] = h1
    return d0, d1


def _undamped(t, params, lambda_sq, which):
    t_arr = np.asarray(t, dtype=float)
    d0, d1 = _damped_pair(t_arr, params, lambda_sq)
    d = d0 if which == 0 else d1
    with np.errstate(over="ignore"):
        out = d * np.exp(params.b * np.broadcast_to(t_arr, d.shape) / 2)
    return out[()] if out.ndim == 0 else out


def g0(t, params: EvolutionParams, lambda_sq):
    """cosh(sqrt(D) t), 1, or cos(sqrt(-D) t) with D = b^2/4 - m^2 - lambda^2."""
    return _undamped(t, params, lambda_sq, 0)


def g1(t, params: EvolutionParams, lambda_sq):
    """sinh(sqrt(D) t)/sqrt(D), t, or sin(sqrt(-D) t)/sqrt(-D); the t-antiderivative of g0."""
    return _undamped(t, params, lambda_sq, 1)


def propagator_matrix(t, params: EvolutionParams, lambda_sq):
    """Entries of the 2x2 map (u0, u1) -> (u(t), u'(t)), each broadcast over (t, lambda_sq).

    Returns (a00, a01, a10, a11) with
    u = a00 u0 + a01 u1 and u' = a10 u0 + a11 u1.
    """
    lam = np.asarray(lambda_sq, dtype=float)
    d0, d1 = _damped_pair(t, params, lam)
    half_b = params.b / 2
    a00 = d0 + half_b * d1
    a01 = d1
    a10 = -(lam + params.m_sq) * d1
    a11 = d0 - half_b * d1
    return a00, a01, a10, a11


def propagate_mode(u0_hat, u1_hat, t, params: EvolutionParams, lambda_sq):
    """Exact (u_hat(t), ut_hat(t)) for one or many modes; t = 0 returns the data unchanged."""
    a00, a01, a10, a11 = propagator_matrix(t, params, lambda_sq)
    u0_hat = np.asarray(u0_hat)
    u1_hat = np.asarray(u1_hat)
    u = a00 * u0_hat + a01 * u1_hat
    ut = a10 * u0_hat + a11 * u1_hat
    if np.ndim(u) == 0:
        return u[()], ut[()]
    return u, ut


def duhamel_multiplier(t, params: EvolutionParams, lambda_sq):
    """e^{-bt/2} g1: the u-component of the flow started from (0, 1)."""
    _, d1 = _damped_pair(t, params, lambda_sq)
    return d1[()] if d1.ndim == 0 else d1


def duhamel_multiplier_dt(t, params: EvolutionParams, lambda_sq):
    """Time derivative of ``duhamel_multiplier``: e^{-bt/2} (g0 - b/2 g1)."""
    d0, d1 = _damped_pair(t, params, lambda_sq)
    out = d0 - params.b / 2 * d1
    return out[()] if out.ndim == 0 else out


def propagator_table(times, params: EvolutionParams, lambda_sq: float):
    """Rows (t, g0, g1, d) for debugging dumps."""
    times = np.asarray(times, dtype=float)
    return np.column_stack([
        times,
        g0(times, params, lambda_sq),
        g1(times, params, lambda_sq),
        decay_function(times, params),
    ])
