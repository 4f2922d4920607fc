"""Exact kinetics of the recovery field.

The recovery variable obeys v' = g(u, v) with u in {0, 1} and

    g(u, v) = g1*u - g2*v / (g3*v + g4),

and interfaces of the excited set move at speed +-W(v) with W(v) = a - b*v.
Because 1/g(u, .) has a closed-form antiderivative for both u = 0 and u = 1,
the flow maps of v' = g(u, v) can be evaluated exactly by inverting those
antiderivatives with a safeguarded Newton iteration.  Everything here is pure,
immutable after construction, and accepts scalars or numpy arrays.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

__all__ = [
    "Phase",
    "Parameters",
    "FlowConvergenceError",
    "reaction_rate",
    "front_speed",
    "antiderivative_outside",
    "antiderivative_inside",
    "flow_outside",
    "flow_inside",
]

NEWTON_RTOL = 1e-12
NEWTON_MAX_ITER = 100
# below this v the log term of the outside antiderivative degenerates;
# the flow is replaced by its exact linearization at v = 0
TINY_V = 1e-14


class FlowConvergenceError(RuntimeError):
    """Flow-map inversion failed to converge; indicates a kinetics bug."""


class Phase(IntEnum):
    """Which reaction branch a point sees: u = 0 outside the excited set, 1 inside."""

    OUTSIDE = 0
    INSIDE = 1


@dataclass(frozen=True)
class Parameters:
    """Kinetic constants, wave-speed coefficients and the reference level M.

    Requires g1*g3 > g2 so that g(1, v) > 0 for every v >= 0; a warning is
    emitted when the stronger condition g1*g3 > 2*g2 fails, since parts of the
    theory assume it.  M only shifts the outside antiderivative: flow outputs
    are independent of it (set it to max(1, sup v0) by convention).
    """

    g1: float
    g2: float
    g3: float
    g4: float
    a: float
    b: float
    M: float = 1.0

    def __post_init__(self) -> None:
        for name in ("g1", "g2", "g3", "g4", "a", "b"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"parameter {name} must be strictly positive")
        if not self.M > 0.0:
            raise ValueError("reference level M must be positive")
        if not self.g1 * self.g3 > self.g2:
            raise ValueError(
                "require g1*g3 > g2 so the excited reaction rate stays positive "
                f"(got g1*g3 = {self.g1 * self.g3!r}, g2 = {self.g2!r})"
            )
        if not self.strong_A:
            warnings.warn(
                "g1*g3 <= 2*g2: the strong parameter assumption fails; "
                "results are still well defined but outside the usual regime",
                UserWarning,
                stacklevel=2,
            )

    @property
    def strong_A(self) -> bool:
        """Whether the strong constraint g1*g3 > 2*g2 holds."""
        return self.g1 * self.g3 > 2.0 * self.g2

    @property
    def v_star(self) -> float:
        """The unique zero a/b of the speed law W."""
        return self.a / self.b

    def rest_rate_coeffs(self) -> tuple[float, float]:
        """(A, B) with g(1, v) = (A*v + B) / (g3*v + g4); both positive."""
        return self.g1 * self.g3 - self.g2, self.g1 * self.g4


def _as_float_array(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _scalar_like(out: np.ndarray, *inputs) -> np.ndarray | float:
    if all(np.ndim(v) == 0 for v in inputs):
        return float(out)
    return out


def reaction_rate(p: Parameters, phase: Phase, v) -> np.ndarray | float:
    """g(u, v) = g1*u - g2*v/(g3*v + g4) for v >= 0."""
    varr = _as_float_array(v)
    if np.any(varr < 0.0):
        raise ValueError("reaction_rate requires v >= 0")
    out = p.g1 * float(int(phase)) - p.g2 * varr / (p.g3 * varr + p.g4)
    return _scalar_like(out, v)


def front_speed(p: Parameters, v) -> np.ndarray | float:
    """W(v) = a - b*v; positive below a/b, negative above."""
    varr = _as_float_array(v)
    return _scalar_like(p.a - p.b * varr, v)


def antiderivative_outside(p: Parameters, v) -> np.ndarray | float:
    """Antiderivative of 1/g(0, .) evaluated from the reference level M.

    Closed form -(g3/g2)*(v - M) - (g4/g2)*ln(v/M); strictly decreasing, zero
    at v = M, and divergent as v -> 0+ (hence the v > 0 requirement).
    """
    varr = _as_float_array(v)
    if np.any(varr <= 0.0):
        raise ValueError("antiderivative_outside requires v > 0 (diverges at 0)")
    out = -(p.g3 / p.g2) * (varr - p.M) - (p.g4 / p.g2) * np.log(varr / p.M)
    return _scalar_like(out, v)


def antiderivative_inside(p: Parameters, v) -> np.ndarray | float:
    """Antiderivative of 1/g(1, .) evaluated from 0.

    With A = g1*g3 - g2 and B = g1*g4 the closed form is
    (g3/A)*v - (g2*g4/A^2)*ln((A*v + B)/B); strictly increasing, zero at 0.
    """
    varr = _as_float_array(v)
    if np.any(varr < 0.0):
        raise ValueError("antiderivative_inside requires v >= 0")
    A, B = p.rest_rate_coeffs()
    out = (p.g3 / A) * varr - (p.g2 * p.g4 / A**2) * np.log1p(A * varr / B)
    return _scalar_like(out, v)


def _newton_invert(f, fprime_recip, target, lo, hi, init, what: str) -> np.ndarray:
    """Solve f(v) = target on the bracket [lo, hi] by safeguarded Newton.

    ``fprime_recip(v)`` returns 1/f'(v) (the reaction rate here).  Newton steps
    falling outside the current bracket are replaced by bisection.  All
    arguments are arrays of the same shape.
    """
    v = np.clip(init, lo, hi)
    increasing = None  # resolved on first residual evaluation
    for _ in range(NEWTON_MAX_ITER):
        resid = f(v) - target
        if increasing is None:
            # f is monotone with a known bracket; orient the updates once
            increasing = bool(np.all(f(hi) >= f(lo)))
        if increasing:
            hi = np.where(resid > 0.0, np.minimum(hi, v), hi)
            lo = np.where(resid <= 0.0, np.maximum(lo, v), lo)
        else:
            lo = np.where(resid > 0.0, np.maximum(lo, v), lo)
            hi = np.where(resid <= 0.0, np.minimum(hi, v), hi)
        step = resid * fprime_recip(v)
        v_new = v - step
        bad = ~np.isfinite(v_new) | (v_new < lo) | (v_new > hi)
        v_new = np.where(bad, 0.5 * (lo + hi), v_new)
        done = np.abs(v_new - v) <= NEWTON_RTOL * np.maximum(np.abs(v_new), 1e-300)
        v = v_new
        if bool(np.all(done)):
            return v
    raise FlowConvergenceError(f"{what}: inversion did not converge in {NEWTON_MAX_ITER} iterations")


def flow_outside(p: Parameters, v0, t) -> np.ndarray | float:
    """Exact solution at time t of v' = g(0, v), v(0) = v0 (v0, t >= 0).

    Strictly decreasing toward 0, never negative, and nonexpansive in v0.
    Values of v0 below TINY_V use the exact rate-g2/g4 exponential
    linearization instead of the degenerate log inversion.  The inversion
    works on w = ln v: the solution decays exponentially, so only the
    logarithmic variable gives a well-scaled bracket.
    """
    v0a, ta = np.broadcast_arrays(_as_float_array(v0), _as_float_array(t))
    if np.any(v0a < 0.0):
        raise ValueError("flow_outside requires v0 >= 0")
    if np.any(ta < 0.0):
        raise ValueError("flow_outside requires t >= 0")
    v0a = v0a.astype(float, copy=True)
    ta = np.asarray(ta, dtype=float)
    out = v0a.copy()

    linear = v0a < TINY_V
    out[linear] = (v0a * np.exp(-(p.g2 / p.g4) * ta))[linear]

    active = ~linear & (ta > 0.0)
    if not np.any(active):
        return _scalar_like(out, v0, t)
    va, tt = v0a[active], ta[active]
    target = antiderivative_outside(p, va) + tt

    def resid(w: np.ndarray) -> np.ndarray:
        # antiderivative evaluated at v = e^w without forming tiny exps badly
        return -(p.g3 / p.g2) * (np.exp(w) - p.M) - (p.g4 / p.g2) * (w - np.log(p.M)) - target

    # -g2 v / g4 bounds the decay rate from below, -g2 v/(g3 v0 + g4) from above
    w_lo = np.log(va) - (p.g2 / p.g4) * tt
    w_hi = np.log(va)
    w = np.log(va) - p.g2 * tt / (p.g3 * va + p.g4)
    for _ in range(NEWTON_MAX_ITER):
        r = resid(w)
        # resid is strictly decreasing in w
        w_lo = np.where(r > 0.0, np.maximum(w_lo, w), w_lo)
        w_hi = np.where(r <= 0.0, np.minimum(w_hi, w), w_hi)
        v = np.exp(w)
        slope = -(p.g3 * v + p.g4) / p.g2  # d resid / dw
        w_new = w - r / slope
        bad = ~np.isfinite(w_new) | (w_new < w_lo) | (w_new > w_hi)
        w_new = np.where(bad, 0.5 * (w_lo + w_hi), w_new)
        done = np.abs(w_new - w) <= NEWTON_RTOL
        w = w_new
        if bool(np.all(done)):
            out[active] = np.exp(w)
            return _scalar_like(out, v0, t)
    raise FlowConvergenceError(
        f"flow_outside: inversion did not converge in {NEWTON_MAX_ITER} iterations"
    )


def flow_inside(p: Parameters, v0, t) -> np.ndarray | float:
    """Exact solution at time t of v' = g(1, v), v(0) = v0 (v0, t >= 0).

    Strictly increasing and unbounded in t since g(1, v) >= g1 - g2/g3 > 0.
    """
    v0a, ta = np.broadcast_arrays(_as_float_array(v0), _as_float_array(t))
    if np.any(v0a < 0.0):
        raise ValueError("flow_inside requires v0 >= 0")
    if np.any(ta < 0.0):
        raise ValueError("flow_inside requires t >= 0")
    v0a = v0a.astype(float, copy=True)
    out = v0a.copy()

    active = ta > 0.0
    if np.any(active):
        va, tt = v0a[active], np.asarray(ta, dtype=float)[active]
        target = antiderivative_inside(p, va) + tt
        lo = va
        hi = va + p.g1 * tt  # growth rate is at most g1
        init = np.clip(va + reaction_rate(p, Phase.INSIDE, va) * tt, lo, hi)
        out[active] = _newton_invert(
            lambda v: antiderivative_inside(p, v),
            lambda v: reaction_rate(p, Phase.INSIDE, v),
            target,
            lo,
            hi,
            init,
            "flow_inside",
        )
    return _scalar_like(out, v0, t)
