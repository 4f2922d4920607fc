"""Classical-solution engine on one annihilation-free time segment.

The 2m interface positions satisfy the coupled ODE system

    x_k'(t) = (-1)^k * W(v(x_k(t), t)),    k = 1, ..., 2m,

where v(x, t) is reconstructed semi-analytically: each spatial point evolves
by the exact inside/outside flow maps, switching branch at the arrival times
of the interfaces that cross it.  The system is integrated with an embedded
Bogacki-Shampine 3(2) pair under error-per-unit-step control, with cubic
Hermite dense output; gap closures (collisions of adjacent interfaces) are
localized on the dense output by bisection.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .kinetics import Parameters, flow_inside, flow_outside, front_speed
from .state import IntervalSet, Profile, validate_initial, default_margin

__all__ = [
    "NotReached",
    "StepFailure",
    "DegeneracyWarning",
    "EventKind",
    "EventRecord",
    "SegmentStats",
    "InterfaceTrajectory",
    "ClassicalSegment",
    "DensePath",
    "run_segment",
    "integrate_adaptive",
]


class NotReached(ValueError):
    """The queried position is never attained by the trajectory in this segment."""


class StepFailure(RuntimeError):
    """The adaptive step controller could not satisfy the tolerance."""


class DegeneracyWarning(UserWarning):
    """An interface speed dropped below the non-degeneracy margin."""


class EventKind(str, Enum):
    MERGE = "merge"    # the gap between two adjacent excited intervals closes
    VANISH = "vanish"  # an excited interval contracts to a point


@dataclass(frozen=True)
class EventRecord:
    """One annihilation: two adjacent interfaces collide at time `time`."""

    time: float
    kind: EventKind
    indices: tuple[int, int]   # 1-based endpoint indices within the segment
    labels: tuple[int, int]    # persistent interface labels
    position: float
    components_before: int
    components_after: int


@dataclass
class SegmentStats:
    steps: int = 0
    rejected: int = 0
    min_gap: float = math.inf
    min_speed: float = math.inf
    degeneracy_events: list = field(default_factory=list)


# --- cubic Hermite basis -------------------------------------------------

def _hermite(theta, h, y0, f0, y1, f1):
    t2 = theta * theta
    t3 = t2 * theta
    return (
        (2 * t3 - 3 * t2 + 1) * y0
        + (t3 - 2 * t2 + theta) * h * f0
        + (-2 * t3 + 3 * t2) * y1
        + (t3 - t2) * h * f1
    )


def _hermite_deriv(theta, h, y0, f0, y1, f1):
    t2 = theta * theta
    return (
        (6 * t2 - 6 * theta) * y0 / h
        + (3 * t2 - 4 * theta + 1) * f0
        + (6 * theta - 6 * t2) * y1 / h
        + (3 * t2 - 2 * theta) * f1
    )


class DensePath:
    """Accepted integration knots (t_i, y_i, f_i) with C1 cubic dense output."""

    def __init__(self, t0: float, y0, f0):
        y0 = np.atleast_1d(np.asarray(y0, dtype=float))
        f0 = np.atleast_1d(np.asarray(f0, dtype=float))
        self._ts = [float(t0)]
        self._ys = [y0.copy()]
        self._fs = [f0.copy()]
        self._cache: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    def __len__(self) -> int:
        return len(self._ts)

    @property
    def dim(self) -> int:
        return self._ys[0].size

    @property
    def t_start(self) -> float:
        return self._ts[0]

    @property
    def t_end(self) -> float:
        return self._ts[-1]

    def append(self, t: float, y, f) -> None:
        if t <= self._ts[-1]:
            raise ValueError("knot times must increase")
        self._ts.append(float(t))
        self._ys.append(np.asarray(y, dtype=float).copy())
        self._fs.append(np.asarray(f, dtype=float).copy())
        self._cache = None

    def truncate_last(self, t_cut: float) -> None:
        """Shorten the final step to end at t_cut, keeping the same cubic."""
        if len(self._ts) < 2 or not (self._ts[-2] < t_cut <= self._ts[-1]):
            raise ValueError("t_cut must lie inside the final step")
        y_cut = self.eval(t_cut)
        f_cut = self.deriv(t_cut)
        self._ts[-1] = float(t_cut)
        self._ys[-1] = np.atleast_1d(y_cut)
        self._fs[-1] = np.atleast_1d(f_cut)
        self._cache = None

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._cache is None:
            self._cache = (
                np.asarray(self._ts),
                np.vstack(self._ys),
                np.vstack(self._fs),
            )
        return self._cache

    def last(self) -> tuple[float, np.ndarray, np.ndarray]:
        return self._ts[-1], self._ys[-1], self._fs[-1]

    def _locate(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ts, _, _ = self.arrays()
        idx = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, max(len(ts) - 2, 0))
        return ts, idx

    def eval(self, t) -> np.ndarray:
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        ts, Y, F = self.arrays()
        if len(ts) == 1:
            out = np.broadcast_to(Y[0], tq.shape + (self.dim,)).copy()
        else:
            idx = np.clip(np.searchsorted(ts, tq, side="right") - 1, 0, len(ts) - 2)
            h = (ts[idx + 1] - ts[idx])[:, None]
            theta = ((tq - ts[idx]) / (ts[idx + 1] - ts[idx]))[:, None]
            out = _hermite(theta, h, Y[idx], F[idx], Y[idx + 1], F[idx + 1])
        return out[0] if np.ndim(t) == 0 else out

    def deriv(self, t) -> np.ndarray:
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        ts, Y, F = self.arrays()
        if len(ts) == 1:
            out = np.broadcast_to(F[0], tq.shape + (self.dim,)).copy()
        else:
            idx = np.clip(np.searchsorted(ts, tq, side="right") - 1, 0, len(ts) - 2)
            h = (ts[idx + 1] - ts[idx])[:, None]
            theta = ((tq - ts[idx]) / (ts[idx + 1] - ts[idx]))[:, None]
            out = _hermite_deriv(theta, h, Y[idx], F[idx], Y[idx + 1], F[idx + 1])
        return out[0] if np.ndim(t) == 0 else out

    def invert_col(self, col: int, y, sign: float, not_reached: float = math.inf) -> np.ndarray:
        """Arrival times of the (strictly monotone) component `col` at positions y.

        Returns t_start for positions already passed at the initial time and
        `not_reached` for positions beyond the range covered so far.
        """
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        ts, Y, F = self.arrays()
        xk = Y[:, col]
        out = np.full(ys.shape, not_reached)
        xo = sign * xk
        yo = sign * ys
        pre = yo <= xo[0]
        out[pre] = ts[0]
        if len(ts) == 1:
            return out
        idx = np.searchsorted(xo, yo, side="left")
        mid = (~pre) & (idx <= len(ts) - 1)
        if np.any(mid):
            i = idx[mid] - 1
            h = ts[i + 1] - ts[i]
            y0, f0 = Y[i, col], F[i, col]
            y1, f1 = Y[i + 1, col], F[i + 1, col]
            target = ys[mid]
            lo = np.zeros(i.shape)
            hi = np.ones(i.shape)
            denom = y1 - y0
            theta = np.clip((target - y0) / np.where(denom == 0.0, 1.0, denom), 0.0, 1.0)
            for _ in range(60):
                val = _hermite(theta, h, y0, f0, y1, f1) - target
                below = sign * val < 0.0
                lo = np.where(below, np.maximum(lo, theta), lo)
                hi = np.where(~below, np.minimum(hi, theta), hi)
                slope = _hermite_deriv(theta, h, y0, f0, y1, f1)
                step = val / np.where(slope == 0.0, np.inf, slope) / h
                nt = theta - step
                bad = ~np.isfinite(nt) | (nt < lo) | (nt > hi)
                nt = np.where(bad, 0.5 * (lo + hi), nt)
                if np.all(np.abs(nt - theta) * h <= 1e-14 * np.maximum(1.0, np.abs(ts[i]))):
                    theta = nt
                    break
                theta = nt
            out[mid] = ts[i] + theta * h
        return out


class InterfaceTrajectory:
    """Read-only view of one interface inside a segment.

    The 1-based index k fixes the orientation: odd k are left endpoints of
    excited components (velocity -W), even k are right endpoints (velocity +W).
    """

    def __init__(self, segment: "ClassicalSegment", col: int):
        self._seg = segment
        self._col = col

    @property
    def k(self) -> int:
        return self._col + 1

    @property
    def label(self) -> int:
        return self._seg.labels[self._col]

    @property
    def birth(self) -> float:
        return self._seg.t_start

    @property
    def death(self) -> float | None:
        ev = self._seg.event
        if ev is not None and self.k in ev.indices:
            return ev.time
        return None

    @property
    def sign(self) -> int:
        return int(self._seg._signs[self._col])

    @property
    def times(self) -> np.ndarray:
        return self._seg._path.arrays()[0]

    def position(self, t) -> np.ndarray | float:
        out = self._seg._path.eval(t)[..., self._col]
        return float(out) if np.ndim(t) == 0 else out

    def velocity(self, t) -> np.ndarray | float:
        out = self._seg._path.deriv(t)[..., self._col]
        return float(out) if np.ndim(t) == 0 else out

    def arrival_time(self, y: float) -> float:
        """Time at which the interface reaches y; the segment start time for
        positions already behind the motion; NotReached beyond its range."""
        out = float(
            self._seg._path.invert_col(self._col, float(y), self.sign, not_reached=math.nan)[0]
        )
        if math.isnan(out):
            raise NotReached(
                f"interface k={self.k} never reaches x={y!r} within [{self.birth}, {self._seg.t_end}]"
            )
        return out


_RK_C2, _RK_C3 = 0.5, 0.75
_RK_B = (2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0)
_RK_E = (-5.0 / 72.0, 1.0 / 12.0, 1.0 / 9.0, -1.0 / 8.0)  # third-minus-second order weights


class ClassicalSegment:
    """One annihilation-free piece of the evolution, advanced step by step.

    Mutated by a single driver through advance(); once finished it is an
    immutable record queryable from anywhere.
    """

    def __init__(
        self,
        params: Parameters,
        omega_start: IntervalSet,
        profile_start: Profile,
        t_start: float,
        t_end: float,
        *,
        tol_step: float = 1e-8,
        tol_event: float = 1e-10,
        margin: float | None = None,
        labels: tuple[int, ...] | None = None,
    ):
        if not t_end > t_start:
            raise ValueError("segment needs t_end > t_start")
        if not (tol_step > 0.0 and tol_event > 0.0):
            raise ValueError("tolerances must be positive")
        self.report = validate_initial(params, omega_start, profile_start, margin)
        self.params = params
        self.omega_start = omega_start
        self.profile_start = profile_start
        self.t_start = float(t_start)
        self.t_goal = float(t_end)
        self.tol_step = float(tol_step)
        self.tol_event = float(tol_event)
        self.margin = default_margin(params) if margin is None else float(margin)
        self.stats = SegmentStats()
        self.event: EventRecord | None = None

        n = len(omega_start.endpoints)
        self.labels = tuple(labels) if labels is not None else tuple(range(1, n + 1))
        if len(self.labels) != n:
            raise ValueError("one label per endpoint required")
        self._parity = np.array([(-1.0) ** k for k in range(1, n + 1)])
        x0 = np.asarray(omega_start.endpoints, dtype=float)
        if n:
            # at the initial time the field is the profile itself
            v0_at = np.atleast_1d(np.asarray(profile_start.eval(x0), dtype=float))
            f0 = self._parity * (params.a - params.b * v0_at)
            self._signs = np.sign(f0)
            self._path = DensePath(self.t_start, x0, f0)
            self.finished = False
        else:
            self._signs = np.zeros(0)
            self._path = DensePath(self.t_start, np.zeros(0), np.zeros(0))
            self.finished = True
        self._h = min(math.sqrt(self.tol_step), 0.25 * (self.t_goal - self.t_start))
        self._degeneracy_flagged = False

    # -- basic queries ----------------------------------------------------

    @property
    def n_interfaces(self) -> int:
        return len(self.labels)

    @property
    def t_end(self) -> float:
        if self.n_interfaces == 0:
            return self.t_goal
        return self._path.t_end

    @property
    def trajectories(self) -> list[InterfaceTrajectory]:
        return [InterfaceTrajectory(self, j) for j in range(self.n_interfaces)]

    def positions(self, t) -> np.ndarray:
        self._check_time(t)
        return self._path.eval(t)

    def _check_time(self, t) -> None:
        tq = np.asarray(t, dtype=float)
        slack = 1e-12 * max(1.0, abs(self.t_end))
        if np.any(tq < self.t_start - slack) or np.any(tq > self.t_end + slack):
            raise ValueError(
                f"time outside segment [{self.t_start}, {self.t_end}]"
            )

    # -- field reconstruction ---------------------------------------------

    def _arrivals(self, xs: np.ndarray, tq: np.ndarray, frontier) -> np.ndarray:
        n = self.n_interfaces
        T = np.full((xs.size, n), math.inf)
        for j in range(n):
            T[:, j] = self._path.invert_col(j, xs, self._signs[j], not_reached=math.inf)
        if frontier is not None:
            tn, xn, fn = frontier
            for j in range(n):
                need = ~np.isfinite(T[:, j])
                if not np.any(need):
                    continue
                if fn[j] == 0.0:
                    continue
                t_lin = tn + (xs[need] - xn[j]) / fn[j]
                ok = (t_lin > tn) & (t_lin <= tq[need] + 1e-15)
                T[need, j] = np.where(ok, t_lin, math.inf)
        # crossings at or before the segment start are part of the initial state
        T[T <= self.t_start] = math.inf
        return T

    def _initial_phase(self, xs: np.ndarray) -> np.ndarray:
        """Membership of each point in the excited set for t -> t_start+.

        Interior/exterior points keep their open-set membership.  A point
        exactly at an endpoint is absorbed into the interior immediately when
        its interface moves away from the component it bounds (expanding
        motion), and stays exterior otherwise; this is the limit the exact
        flow composition needs for continuity of v.
        """
        phase0 = np.asarray(self.omega_start.contains(xs)).copy()
        endpoints = self.omega_start.endpoints
        for j, xk in enumerate(endpoints):
            k = j + 1
            expanding = (k % 2 == 1 and self._signs[j] < 0) or (k % 2 == 0 and self._signs[j] > 0)
            if expanding:
                phase0 |= xs == xk
        return phase0

    def _v_field(self, xs: np.ndarray, tq: np.ndarray, frontier=None) -> np.ndarray:
        phase0 = self._initial_phase(xs)
        v = np.atleast_1d(np.asarray(self.profile_start.eval(xs), dtype=float)).copy()
        n = self.n_interfaces
        if n == 0:
            dt = np.maximum(tq - self.t_start, 0.0)
            return np.asarray(flow_outside(self.params, v, dt))
        S = np.sort(self._arrivals(xs, tq, frontier), axis=1)
        prev = np.full(xs.shape, self.t_start)
        for slot in range(n + 1):
            bend = tq if slot == n else np.minimum(S[:, slot], tq)
            dt = np.maximum(bend - prev, 0.0)
            inside = phase0 ^ (slot % 2 == 1)
            m_in = inside & (dt > 0.0)
            m_out = (~inside) & (dt > 0.0)
            if np.any(m_in):
                v[m_in] = flow_inside(self.params, v[m_in], dt[m_in])
            if np.any(m_out):
                v[m_out] = flow_outside(self.params, v[m_out], dt[m_out])
            prev = bend if slot < n else prev
        return v

    def evaluate_v(self, x, t) -> np.ndarray | float:
        """Recovery field v(x, t) for t inside the segment (x, t broadcastable)."""
        self._check_time(t)
        xs, ts = np.broadcast_arrays(
            np.asarray(x, dtype=float), np.asarray(t, dtype=float)
        )
        shape = xs.shape
        out = self._v_field(xs.ravel().astype(float), ts.ravel().astype(float))
        out = out.reshape(shape)
        if np.ndim(x) == 0 and np.ndim(t) == 0:
            return float(out)
        return out

    def interface_velocity(self, k: int, t) -> np.ndarray | float:
        """(-1)^k * W(v(x_k(t), t)) for the 1-based endpoint index k."""
        if not 1 <= k <= self.n_interfaces:
            raise ValueError(f"no interface with index {k}")
        xk = self._path.eval(t)[..., k - 1]
        w = front_speed(self.params, self.evaluate_v(xk, t))
        return (-1.0) ** k * w

    # -- integration -------------------------------------------------------

    def _rhs(self, t: float, x: np.ndarray, frontier) -> np.ndarray:
        tq = np.full(x.shape, t)
        v = self._v_field(np.asarray(x, dtype=float), tq, frontier)
        return self._parity * (self.params.a - self.params.b * v)

    def advance(self, dt_max: float | None = None) -> bool:
        """Take one accepted adaptive step; returns False once finished."""
        if self.finished:
            return False
        tn, xn, fn = self._path.last()
        h = min(self._h, self.t_goal - tn)
        if dt_max is not None:
            h = min(h, float(dt_max))
        h = min(h, self._event_cap(xn, fn))
        frontier = (tn, xn, fn)
        while True:
            h_min = 1e-13 * max(1.0, abs(tn))
            k1 = fn
            k2 = self._rhs(tn + _RK_C2 * h, xn + (_RK_C2 * h) * k1, frontier)
            k3 = self._rhs(tn + _RK_C3 * h, xn + (_RK_C3 * h) * k2, frontier)
            x_new = xn + h * (_RK_B[0] * k1 + _RK_B[1] * k2 + _RK_B[2] * k3)
            k4 = self._rhs(tn + h, x_new, frontier)
            err = float(
                np.max(
                    np.abs(
                        h
                        * (
                            _RK_E[0] * k1
                            + _RK_E[1] * k2
                            + _RK_E[2] * k3
                            + _RK_E[3] * k4
                        )
                    )
                )
            )
            allowed = self.tol_step * h
            if err <= allowed:
                break
            if h <= h_min:
                raise StepFailure(
                    f"cannot satisfy tol_step={self.tol_step:g} at t={tn!r} (err={err:.3e})"
                )
            self.stats.rejected += 1
            h = max(h * max(0.2, 0.9 * math.sqrt(allowed / err)), h_min)

        t_new = tn + h
        if t_new >= self.t_goal - 1e-13 * max(1.0, abs(self.t_goal)):
            t_new = self.t_goal
        self._path.append(t_new, x_new, k4)
        self.stats.steps += 1
        if x_new.size > 1:
            self.stats.min_gap = min(self.stats.min_gap, float(np.min(np.diff(x_new))))
        self.stats.min_speed = min(self.stats.min_speed, float(np.min(np.abs(k4))))
        if not self._degeneracy_flagged and np.min(np.abs(k4)) < self.margin:
            self._degeneracy_flagged = True
            self.stats.degeneracy_events.append((t_new, float(np.min(np.abs(k4)))))
            warnings.warn(
                f"interface speed below margin {self.margin:g} at t={t_new:g}",
                DegeneracyWarning,
                stacklevel=2,
            )
        grow = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * math.sqrt(self.tol_step * h / err)))
        self._h = h * grow

        hit = self._scan_event()
        if hit is not None:
            t_a, pair = hit
            self._finalize_event(t_a, pair)
        elif t_new >= self.t_goal:
            self.finished = True
        return True

    def _event_cap(self, xn: np.ndarray, fn: np.ndarray) -> float:
        if xn.size < 2:
            return math.inf
        gaps = np.diff(xn)
        approach = fn[:-1] - fn[1:]
        closing = approach > 0.0
        if not np.any(closing):
            return math.inf
        cap = float(np.min(gaps[closing] / approach[closing]))
        return max(0.5 * cap, 16.0 * self.tol_event)

    def _gap_cubic(self, i: int):
        ts, Y, F = self._path.arrays()
        h = ts[-1] - ts[-2]
        g0 = Y[-2, i + 1] - Y[-2, i]
        d0 = F[-2, i + 1] - F[-2, i]
        g1 = Y[-1, i + 1] - Y[-1, i]
        d1 = F[-1, i + 1] - F[-1, i]
        return h, g0, d0, g1, d1

    def _scan_event(self) -> tuple[float, int] | None:
        """Earliest gap closure inside the last accepted step, if any."""
        n = self.n_interfaces
        if n < 2 or len(self._path) < 2:
            return None
        ts, _, _ = self._path.arrays()
        t0, t1 = ts[-2], ts[-1]
        best: tuple[float, int] | None = None
        for i in range(n - 1):
            h, g0, d0, g1, d1 = self._gap_cubic(i)
            gap = lambda th: _hermite(th, h, g0, d0, g1, d1)
            thetas = list(np.linspace(0.0, 1.0, 13))
            # stationary points of the cubic catch dips between samples
            a3 = 2 * g0 + h * d0 - 2 * g1 + h * d1
            a2 = -3 * g0 - 2 * h * d0 + 3 * g1 - h * d1
            a1 = h * d0
            disc = 4 * a2 * a2 - 12 * a3 * a1
            if a3 != 0.0 and disc >= 0.0:
                r = math.sqrt(disc)
                for root in ((-2 * a2 - r) / (6 * a3), (-2 * a2 + r) / (6 * a3)):
                    if 0.0 < root < 1.0:
                        thetas.append(root)
            elif a3 == 0.0 and a2 != 0.0:
                root = -a1 / (2 * a2)
                if 0.0 < root < 1.0:
                    thetas.append(root)
            thetas = sorted(set(thetas))
            hit_th = None
            for j in range(1, len(thetas)):
                if gap(thetas[j]) <= 0.0:
                    lo, hi = thetas[j - 1], thetas[j]
                    while (hi - lo) * h > self.tol_event:
                        mid = 0.5 * (lo + hi)
                        if gap(mid) <= 0.0:
                            hi = mid
                        else:
                            lo = mid
                    hit_th = 0.5 * (lo + hi)
                    break
            if hit_th is None:
                continue
            t_a = t0 + hit_th * h
            if best is None or t_a < best[0] - self.tol_event:
                best = (t_a, i)
            # ties within tol_event resolve to the leftmost pair, i.e. first i
        return best

    def _finalize_event(self, t_a: float, i: int) -> None:
        if t_a <= self._path.arrays()[0][-2]:
            t_a = np.nextafter(self._path.arrays()[0][-2], math.inf)
        self._path.truncate_last(t_a)
        x_final = self._path.last()[1]
        k = i + 1  # 1-based index of the left member of the colliding pair
        kind = EventKind.VANISH if k % 2 == 1 else EventKind.MERGE
        m = self.n_interfaces // 2
        self.event = EventRecord(
            time=float(t_a),
            kind=kind,
            indices=(k, k + 1),
            labels=(self.labels[i], self.labels[i + 1]),
            position=float(0.5 * (x_final[i] + x_final[i + 1])),
            components_before=m,
            components_after=m - 1,
        )
        self.finished = True

    def locate_event(self) -> EventRecord | None:
        """The annihilation that terminated this segment, if one occurred."""
        return self.event


def run_segment(
    params: Parameters,
    omega_start: IntervalSet,
    profile_start: Profile,
    t_start: float,
    t_end: float,
    *,
    tol_step: float = 1e-8,
    tol_event: float = 1e-10,
    margin: float | None = None,
    labels: tuple[int, ...] | None = None,
    max_steps: int = 500_000,
) -> tuple[ClassicalSegment, EventRecord | None]:
    """Integrate from t_start until t_end or the first annihilation."""
    seg = ClassicalSegment(
        params,
        omega_start,
        profile_start,
        t_start,
        t_end,
        tol_step=tol_step,
        tol_event=tol_event,
        margin=margin,
        labels=labels,
    )
    while not seg.finished:
        if seg.stats.steps >= max_steps:
            raise StepFailure(f"step budget {max_steps} exhausted at t={seg.t_end!r}")
        seg.advance()
    return seg, seg.event


def integrate_adaptive(
    f,
    t0: float,
    y0,
    t_end: float,
    *,
    tol: float = 1e-9,
    max_steps: int = 500_000,
) -> DensePath:
    """Generic adaptive 3(2) integration of y' = f(t, y) with dense output."""
    y = np.atleast_1d(np.asarray(y0, dtype=float))
    path = DensePath(t0, y, f(t0, y))
    h = min(math.sqrt(tol), 0.25 * (t_end - t0))
    t = float(t0)
    for _ in range(max_steps):
        if t >= t_end:
            return path
        h = min(h, t_end - t)
        _, yn, fn = path.last()
        while True:
            k1 = fn
            k2 = f(t + _RK_C2 * h, yn + (_RK_C2 * h) * k1)
            k3 = f(t + _RK_C3 * h, yn + (_RK_C3 * h) * k2)
            y_new = yn + h * (_RK_B[0] * k1 + _RK_B[1] * k2 + _RK_B[2] * k3)
            k4 = f(t + h, y_new)
            err = float(
                np.max(np.abs(h * (_RK_E[0] * k1 + _RK_E[1] * k2 + _RK_E[2] * k3 + _RK_E[3] * k4)))
            )
            allowed = tol * h
            if err <= allowed:
                break
            h_min = 1e-13 * max(1.0, abs(t))
            if h <= h_min:
                raise StepFailure(f"adaptive integration stalled at t={t!r}")
            h = max(h * max(0.2, 0.9 * math.sqrt(allowed / err)), h_min)
        t_new = t + h
        if t_new >= t_end - 1e-13 * max(1.0, abs(t_end)):
            t_new = t_end
        path.append(t_new, y_new, k4)
        t = t_new
        h *= 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * math.sqrt(allowed / err)))
    raise StepFailure(f"step budget {max_steps} exhausted at t={t!r}")
