"""Weak-solution driver: continuation of the evolution through annihilations.

A weak solution is a chain of classical segments joined by surgery: when two
adjacent interfaces collide, the colliding pair is removed (a merge absorbs
the touching point of two components, a vanish deletes an empty component),
the field is resampled at the collision time, and a fresh classical segment
is started from the surgered data.  The module also provides numerical checks
of the integral identities that characterize weak solutions, the structural
no-nucleation test, and the two-continuation demo of the degenerate-start
ill-posedness.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .kinetics import Parameters, Phase, flow_inside, flow_outside, front_speed, reaction_rate
from .state import H2Violation, IntervalSet, Profile, validate_initial
from .classical import (
    ClassicalSegment,
    DensePath,
    EventKind,
    EventRecord,
    integrate_adaptive,
    run_segment,
)

__all__ = [
    "SurgeryH2Failure",
    "GlueMismatch",
    "WeakSolution",
    "annihilation_surgery",
    "glue",
    "run_weak",
    "check_no_nucleation",
    "SpaceTimePolynomial",
    "tensor_test_functions",
    "weak_residual",
    "interface_speed_integral",
    "IllPosedBranch",
    "ill_posedness_demo",
    "events_as_json",
]


class SurgeryH2Failure(RuntimeError):
    """Post-surgery data failed re-validation; flags accumulated numerical error."""


class GlueMismatch(ValueError):
    """Adjacent segments disagree at their junction beyond tolerance."""


@dataclass
class WeakSolution:
    """Ordered classical segments with the annihilation events joining them."""

    params: Parameters
    segments: list[ClassicalSegment] = dc_field(default_factory=list)
    events: list[EventRecord] = dc_field(default_factory=list)

    @property
    def t_start(self) -> float:
        return self.segments[0].t_start if self.segments else 0.0

    @property
    def t_end(self) -> float:
        return self.segments[-1].t_end if self.segments else 0.0

    def segment_at(self, t: float) -> ClassicalSegment:
        if not self.segments:
            raise ValueError("empty weak solution")
        starts = [seg.t_start for seg in self.segments]
        idx = int(np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(starts) - 1))
        return self.segments[idx]

    def evaluate_v(self, x, t) -> np.ndarray | float:
        xs, ts = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        shape = xs.shape
        xf = xs.ravel().astype(float)
        tf = ts.ravel().astype(float)
        starts = np.asarray([seg.t_start for seg in self.segments])
        idx = np.clip(np.searchsorted(starts, tf, side="right") - 1, 0, len(starts) - 1)
        out = np.empty(xf.shape)
        for j in np.unique(idx):
            mask = idx == j
            out[mask] = np.asarray(self.segments[j].evaluate_v(xf[mask], tf[mask]))
        out = out.reshape(shape)
        if np.ndim(x) == 0 and np.ndim(t) == 0:
            return float(out)
        return out

    def interface_positions(self, t: float) -> np.ndarray:
        """Sorted positions of the interfaces alive at time t."""
        return np.atleast_1d(self.segment_at(t).positions(float(t)))

    def component_count(self, t: float) -> int:
        return self.segment_at(t).n_interfaces // 2

    def trajectories(self):
        for i, seg in enumerate(self.segments):
            for traj in seg.trajectories:
                yield i, traj


def events_as_json(w: WeakSolution) -> str:
    records = [
        {
            "time": ev.time,
            "kind": ev.kind.value,
            "indices": list(ev.indices),
            "labels": list(ev.labels),
            "position": ev.position,
            "components_before": ev.components_before,
            "components_after": ev.components_after,
        }
        for ev in w.events
    ]
    return json.dumps(records, sort_keys=True, indent=2) + "\n"


# --- surgery ---------------------------------------------------------------

def _dedupe_sorted(xs: np.ndarray, tol: float) -> np.ndarray:
    xs = np.sort(xs)
    keep = np.ones(xs.shape, dtype=bool)
    keep[1:] = np.diff(xs) > tol
    return xs[keep]


def _refined_samples(f, knots: np.ndarray, tol: float, max_points: int = 500_000):
    """Insert midpoints until linear interpolation matches f to tol."""
    xs = knots.copy()
    vs = np.atleast_1d(f(xs))
    for _ in range(40):
        mids = 0.5 * (xs[:-1] + xs[1:])
        fm = np.atleast_1d(f(mids))
        lin = 0.5 * (vs[:-1] + vs[1:])
        widths = np.diff(xs)
        bad = (np.abs(fm - lin) > tol) & (widths > 1e-9)
        if not np.any(bad) or xs.size + int(bad.sum()) > max_points:
            break
        merged = np.concatenate([xs, mids[bad]])
        values = np.concatenate([vs, fm[bad]])
        order = np.argsort(merged, kind="stable")
        xs, vs = merged[order], values[order]
    return xs, vs


def _surgery_core(
    seg: ClassicalSegment,
    ev: EventRecord,
    *,
    resample_tol: float = 1e-9,
    margin: float | None = None,
):
    """Remove collided pairs at ev.time and resample the field there.

    Returns (omega, profile, extra_events, dead_labels).  extra_events covers
    the measure-zero case of further gaps closing within event tolerance of
    the primary collision; they are collapsed left to right at the same time.
    """
    t_a = ev.time
    pos = np.atleast_1d(seg.positions(t_a)).astype(float)
    labels = list(seg.labels)
    dead = list(ev.labels)
    keep = [j for j in range(pos.size) if labels[j] not in dead]
    extra_events: list[EventRecord] = []
    zero_gap = max(16.0 * seg.tol_event, 1e-12 * max(1.0, float(np.max(np.abs(pos))) if pos.size else 1.0))
    while True:
        kept_pos = pos[keep]
        gaps = np.diff(kept_pos)
        if kept_pos.size < 2 or np.all(gaps > zero_gap):
            break
        i = int(np.argmax(gaps <= zero_gap))  # leftmost offending pair
        k = i + 1
        m_now = len(keep) // 2
        extra = EventRecord(
            time=t_a,
            kind=EventKind.VANISH if k % 2 == 1 else EventKind.MERGE,
            indices=(k, k + 1),
            labels=(labels[keep[i]], labels[keep[i + 1]]),
            position=float(0.5 * (kept_pos[i] + kept_pos[i + 1])),
            components_before=m_now,
            components_after=m_now - 1,
        )
        extra_events.append(extra)
        dead.extend(extra.labels)
        del keep[i : i + 2]

    omega_new = IntervalSet(tuple(pos[keep]))

    knots = np.concatenate(
        [
            np.asarray(seg.profile_start.xs, dtype=float),
            np.asarray(seg.omega_start.endpoints, dtype=float),
            pos,
            np.asarray([ev.position]),
        ]
    )
    knots = _dedupe_sorted(knots, 1e-12 * max(1.0, float(np.max(np.abs(knots)))))
    f = lambda xs: np.maximum(np.atleast_1d(np.asarray(seg.evaluate_v(xs, t_a))), 0.0)
    xs, vs = _refined_samples(f, knots, resample_tol)
    profile_new = Profile(xs, vs)

    try:
        validate_initial(seg.params, omega_new, profile_new, margin)
    except H2Violation as exc:
        raise SurgeryH2Failure(
            f"post-surgery data at t={t_a!r} fails the endpoint non-degeneracy check; "
            "this indicates accumulated numerical error"
        ) from exc
    return omega_new, profile_new, extra_events, dead


def annihilation_surgery(
    seg: ClassicalSegment,
    ev: EventRecord,
    *,
    resample_tol: float = 1e-9,
    margin: float | None = None,
) -> tuple[IntervalSet, Profile]:
    """State just after the annihilation: collided pair removed, field resampled."""
    omega, profile, _, _ = _surgery_core(seg, ev, resample_tol=resample_tol, margin=margin)
    return omega, profile


def glue(w: WeakSolution, seg: ClassicalSegment, *, tol: float = 1e-8) -> WeakSolution:
    """Append a segment, verifying junction continuity of time and field."""
    if not w.segments:
        return WeakSolution(w.params, [seg], list(w.events))
    prev = w.segments[-1]
    t_j = seg.t_start
    if abs(prev.t_end - t_j) > 1e-10 * max(1.0, abs(t_j)):
        raise GlueMismatch(f"segment starts at {t_j!r} but previous ends at {prev.t_end!r}")
    grid = np.asarray(seg.profile_start.xs, dtype=float)
    if grid.size >= 2:
        grid = np.sort(np.concatenate([grid, 0.5 * (grid[:-1] + grid[1:])]))
    v_prev = np.atleast_1d(np.asarray(prev.evaluate_v(grid, prev.t_end)))
    v_next = np.atleast_1d(np.asarray(seg.profile_start.eval(grid)))
    sup = float(np.max(np.abs(v_prev - v_next))) if grid.size else 0.0
    if sup > tol:
        raise GlueMismatch(
            f"recovery field jumps by {sup:.3e} (tol {tol:.1e}) across the junction at t={t_j!r}"
        )
    return WeakSolution(w.params, list(w.segments) + [seg], list(w.events))


def run_weak(
    params: Parameters,
    omega0: IntervalSet,
    v0: Profile,
    t_end: float,
    *,
    tol_step: float = 1e-8,
    tol_event: float = 1e-10,
    margin: float | None = None,
    resample_tol: float = 1e-9,
    glue_tol: float = 1e-8,
    max_steps: int = 500_000,
) -> WeakSolution:
    """Evolve (omega0, v0) to t_end, continuing through every annihilation."""
    w = WeakSolution(params)
    omega, prof = omega0, v0
    labels = tuple(range(1, len(omega0.endpoints) + 1))
    t = 0.0
    max_events = 2 * omega0.m
    while True:
        seg, ev = run_segment(
            params,
            omega,
            prof,
            t,
            t_end,
            tol_step=tol_step,
            tol_event=tol_event,
            margin=margin,
            labels=labels,
            max_steps=max_steps,
        )
        w = glue(w, seg, tol=glue_tol)
        if ev is None:
            break
        omega, prof, extras, dead = _surgery_core(
            seg, ev, resample_tol=resample_tol, margin=margin
        )
        w.events.extend([ev, *extras])
        if len(w.events) > max_events:
            raise RuntimeError("more annihilations than interfaces; invariant violated")
        labels = tuple(l for l in labels if l not in dead)
        t = ev.time
        if t >= t_end - 1e-13 * max(1.0, abs(t_end)):
            break
    return w


def check_no_nucleation(w: WeakSolution) -> bool:
    """Structural no-nucleation test: every interface is traceable to the
    initial time or ends at a recorded event, and the component count never
    increases."""
    if not w.segments:
        return True
    counts = [seg.n_interfaces for seg in w.segments]
    if any(c % 2 != 0 for c in counts):
        return False
    # count must be non-increasing and drop by exactly one pair per event
    drops = 0
    for a, b in zip(counts, counts[1:]):
        if b > a:
            return False
        if (a - b) % 2 != 0:
            return False
        drops += (a - b) // 2
    if drops != len(w.events):
        return False
    # labels must persist (no fresh interfaces) and survivor positions must connect
    for prev, nxt in zip(w.segments, w.segments[1:]):
        if abs(prev.t_end - nxt.t_start) > 1e-9 * max(1.0, abs(nxt.t_start)):
            return False
        if not set(nxt.labels) <= set(prev.labels):
            return False
        prev_pos = dict(zip(prev.labels, np.atleast_1d(prev.positions(prev.t_end))))
        for lab, x in zip(nxt.labels, nxt.omega_start.endpoints):
            if abs(prev_pos[lab] - x) > 1e-7 * max(1.0, abs(x)):
                return False
    # within a segment the ordering must hold at a few sample times
    for seg in w.segments:
        if seg.n_interfaces < 2:
            continue
        for t in np.linspace(seg.t_start, seg.t_end, 5):
            pos = np.atleast_1d(seg.positions(float(t)))
            # at an annihilation knot the colliding gap sits at bisection scale
            if np.any(np.diff(pos) < -max(1e-8, 100.0 * seg.tol_event)):
                return False
    return True


# --- weak-form residuals ----------------------------------------------------

class SpaceTimePolynomial:
    """Tensor polynomial in window-normalized coordinates, with exact d/dt."""

    def __init__(self, coeffs, window: tuple[float, float, float, float]):
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
        self.window = tuple(float(v) for v in window)

    def _normalized(self, x, t):
        x1, x2, t1, t2 = self.window
        xh = (np.asarray(x, float) - x1) / (x2 - x1)
        th = (np.asarray(t, float) - t1) / (t2 - t1)
        return np.broadcast_arrays(xh, th)

    def value(self, x, t):
        xh, th = self._normalized(x, t)
        return np.polynomial.polynomial.polyval2d(xh, th, self.coeffs)

    def dt(self, x, t):
        x1, x2, t1, t2 = self.window
        c = self.coeffs
        if c.shape[1] == 1:
            return np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape)
        ct = c[:, 1:] * np.arange(1, c.shape[1]) / (t2 - t1)
        xh, th = self._normalized(x, t)
        return np.polynomial.polynomial.polyval2d(xh, th, ct)


def tensor_test_functions(window, degree: int = 3) -> list[SpaceTimePolynomial]:
    """The constant plus all tensor monomials x^i t^j up to the given degree."""
    funcs = [SpaceTimePolynomial([[1.0]], window)]
    for i in range(degree + 1):
        for j in range(degree + 1):
            if i == 0 and j == 0:
                continue
            c = np.zeros((i + 1, j + 1))
            c[i, j] = 1.0
            funcs.append(SpaceTimePolynomial(c, window))
    return funcs


def _structural_x(w: WeakSolution) -> np.ndarray:
    """Fixed x-locations where the field can have slope discontinuities.

    Kinks of v(., t) never move: they sit at the initial profile knots, at the
    start positions of every segment's interfaces, and at event positions.
    """
    pts: list[float] = []
    if w.segments:
        pts.extend(float(x) for x in np.asarray(w.segments[0].profile_start.xs))
    for seg in w.segments:
        pts.extend(float(x) for x in seg.omega_start.endpoints if math.isfinite(x))
    pts.extend(ev.position for ev in w.events)
    return np.unique(np.asarray(pts, dtype=float))


def _time_breakpoints(
    w: WeakSolution, t1: float, t2: float, x1: float, x2: float, cuts: np.ndarray
) -> np.ndarray:
    pts = {t1, t2}
    markers = np.concatenate([np.asarray([x1, x2]), cuts])
    for seg in w.segments:
        for t in (seg.t_start, seg.t_end):
            if t1 < t < t2:
                pts.add(t)
        for traj in seg.trajectories:
            for xb in markers:
                try:
                    ta = traj.arrival_time(float(xb))
                except Exception:
                    continue
                if t1 < ta < t2:
                    pts.add(ta)
    return np.asarray(sorted(pts))


def _pieces_at(w: WeakSolution, t: float, x1: float, x2: float, cuts=None):
    """Partition (x1, x2) at the interfaces alive at t plus any fixed kink
    locations; yields (lo, hi, inside)."""
    pos = w.interface_positions(t)
    inner = [float(p) for p in pos if x1 < p < x2]
    if cuts is not None:
        inner.extend(float(c) for c in cuts if x1 < c < x2)
    edges = np.unique(np.asarray([x1, *inner, x2]))
    out = []
    for lo, hi in zip(edges, edges[1:]):
        if hi - lo <= 1e-13:
            continue
        mid = 0.5 * (lo + hi)
        inside = bool(np.count_nonzero(pos < mid) % 2 == 1)
        out.append((float(lo), float(hi), inside))
    return out


# two-point Gauss nodes per uniform cell; the integrand is smooth within each
# piece, so this reaches the residual tolerances at modest cell counts
_G2_LO = 0.5 - 0.5 / math.sqrt(3.0)
_G2_HI = 0.5 + 0.5 / math.sqrt(3.0)


def _gauss_cells(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(a, b, n + 1)
    widths = np.diff(edges)
    nodes = np.concatenate([edges[:-1] + _G2_LO * widths, edges[:-1] + _G2_HI * widths])
    weights = np.concatenate([0.5 * widths, 0.5 * widths])
    return nodes, weights


def _gauss_integral_1d(f, pieces, n_total: int, inside_only: bool) -> float:
    total = 0.0
    span = sum(hi - lo for lo, hi, _ in pieces) or 1.0
    for lo, hi, inside in pieces:
        if inside_only and not inside:
            continue
        n = max(2, int(round(n_total * (hi - lo) / span)))
        xs, ws = _gauss_cells(lo, hi, n)
        total += float(np.sum(np.asarray(f(xs)) * ws))
    return total


def weak_residual(
    w: WeakSolution,
    window: tuple[float, float, float, float],
    phi,
    psi,
    *,
    nt: int = 96,
    nx: int = 96,
) -> tuple[float, float]:
    """Absolute residuals of the two weak-form identities on a window.

    The first identity balances the change of the excited measure against the
    time integral of the test function inside the excited set plus the
    interface line integral of W(v); on trajectory graphs the surface measure
    |n_1| dsigma reduces to dt.  The second is the weak (in time) form of the
    field equation v_t = g(1_Omega, v).  phi and psi must expose value(x, t)
    and dt(x, t); see SpaceTimePolynomial.
    """
    x1, x2, t1, t2 = (float(v) for v in window)
    if not (x1 < x2 and t1 < t2):
        raise ValueError("window must satisfy x1 < x2 and t1 < t2")
    if t1 < w.t_start - 1e-12 or t2 > w.t_end + 1e-12:
        raise ValueError("window exceeds the solution horizon")
    cuts = _structural_x(w)
    brk = _time_breakpoints(w, t1, t2, x1, x2, cuts)

    # -- identity for the excited measure -----------------------------------
    def area_term(t: float) -> float:
        pieces = _pieces_at(w, t, x1, x2, cuts)
        return _gauss_integral_1d(lambda xs: phi.value(xs, t), pieces, nx, True)

    a_lo, a_hi = area_term(t1), area_term(t2)

    b_term = 0.0
    c_term = 0.0
    for lo, hi in zip(brk, brk[1:]):
        length = hi - lo
        if length <= 0.0:
            continue
        n_rows = max(4, int(round(nt * length / (t2 - t1))))
        taus, tws = _gauss_cells(lo, hi, n_rows)
        for tau, tw in zip(taus, tws):
            pieces = _pieces_at(w, float(tau), x1, x2, cuts)
            b_term += tw * _gauss_integral_1d(
                lambda xs: phi.dt(xs, tau), pieces, nx, True
            )
        seg = w.segment_at(float(0.5 * (lo + hi)))
        for traj in seg.trajectories:
            xs = np.asarray(traj.position(taus))
            present = (xs > x1) & (xs < x2)
            if not np.any(present):
                continue
            vs = np.asarray(seg.evaluate_v(xs[present], taus[present]))
            wv = front_speed(w.params, vs)
            c_term += float(np.sum(tws[present] * wv * phi.value(xs[present], taus[present])))
    r1 = abs((a_hi - a_lo) - b_term - c_term)

    # -- weak form of the field equation ------------------------------------
    def field_term(t: float) -> float:
        pieces = _pieces_at(w, t, x1, x2, cuts)
        return _gauss_integral_1d(
            lambda xs: np.asarray(w.evaluate_v(xs, t)) * psi.value(xs, t), pieces, nx, False
        )

    d_lo, d_hi = field_term(t1), field_term(t2)

    e_term = 0.0
    span = x2 - x1
    for lo, hi in zip(brk, brk[1:]):
        length = hi - lo
        if length <= 0.0:
            continue
        n_rows = max(4, int(round(nt * length / (t2 - t1))))
        taus, tws = _gauss_cells(lo, hi, n_rows)
        xs_all: list[np.ndarray] = []
        ts_all: list[np.ndarray] = []
        wq_all: list[np.ndarray] = []
        inside_all: list[np.ndarray] = []
        for tau, tw in zip(taus, tws):
            for plo, phi_, inside in _pieces_at(w, float(tau), x1, x2, cuts):
                n = max(2, int(round(nx * (phi_ - plo) / span)))
                xs, ws = _gauss_cells(plo, phi_, n)
                xs_all.append(xs)
                ts_all.append(np.full(xs.size, tau))
                wq_all.append(tw * ws)
                inside_all.append(np.full(xs.size, inside, dtype=bool))
        xs_f = np.concatenate(xs_all)
        ts_f = np.concatenate(ts_all)
        wq_f = np.concatenate(wq_all)
        in_f = np.concatenate(inside_all)
        v_f = np.asarray(w.evaluate_v(xs_f, ts_f))
        g_f = np.where(
            in_f,
            np.asarray(reaction_rate(w.params, Phase.INSIDE, v_f)),
            np.asarray(reaction_rate(w.params, Phase.OUTSIDE, v_f)),
        )
        integrand = v_f * np.asarray(psi.dt(xs_f, ts_f)) + g_f * np.asarray(psi.value(xs_f, ts_f))
        e_term += float(np.sum(integrand * wq_f))
    r2 = abs((d_hi - d_lo) - e_term)
    return r1, r2


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


def interface_speed_integral(w: WeakSolution, label: int, t1: float, t2: float) -> float:
    """Quadrature of W(v(x_k(t), t)) dt along the labeled interface."""
    total = 0.0
    for seg in w.segments:
        traj = next((tr for tr in seg.trajectories if tr.label == label), None)
        if traj is None:
            continue
        lo = max(t1, seg.t_start)
        hi = min(t2, seg.t_end)
        if hi <= lo:
            continue
        knots = traj.times
        cuts = np.unique(np.concatenate([[lo, hi], knots[(knots > lo) & (knots < hi)]]))
        for a, b in zip(cuts, cuts[1:]):
            half = 0.5 * (b - a)
            ts = 0.5 * (a + b) + half * _GL_NODES
            xs = np.asarray(traj.position(ts))
            vs = np.asarray(seg.evaluate_v(xs, ts))
            total += half * float(np.sum(_GL_WEIGHTS * front_speed(w.params, vs)))
    return total


# --- ill-posedness demo -------------------------------------------------------

@dataclass(frozen=True)
class IllPosedBranch:
    """One continuation from the degenerate half-line start.

    The excited set is (s(t), inf); the field is taken as the inside flow of
    the initial profile to the right of s(t) and the outside flow to its left.
    The 'front' branch drives s with the inside reading of v at the interface,
    the 'back' branch with the outside reading; both start with zero speed.
    """

    role: str
    params: Parameters
    path: DensePath

    def position(self, t) -> np.ndarray | float:
        out = self.path.eval(t)[..., 0]
        return float(out) if np.ndim(t) == 0 else out

    def velocity(self, t) -> np.ndarray | float:
        out = self.path.deriv(t)[..., 0]
        return float(out) if np.ndim(t) == 0 else out

    def initial_profile(self, x):
        return np.maximum(self.params.v_star - np.arctan(np.asarray(x, dtype=float)), 0.0)

    def v(self, x, t):
        xs = np.asarray(x, dtype=float)
        ts = np.asarray(t, dtype=float)
        v0 = self.initial_profile(xs)
        s = self.path.eval(ts)[..., 0]
        inside = xs > s
        out = np.where(
            inside,
            flow_inside(self.params, v0, np.maximum(ts, 0.0)),
            flow_outside(self.params, v0, np.maximum(ts, 0.0)),
        )
        return float(out) if np.ndim(x) == 0 and np.ndim(t) == 0 else out


def ill_posedness_demo(
    params: Parameters, horizon: float, *, tol_step: float = 1e-9
) -> tuple[IllPosedBranch, IllPosedBranch]:
    """Two distinct continuations from Omega(0) = (0, inf), v0 = a/b - arctan x.

    The start violates the endpoint non-degeneracy condition (W(v0(0)) = 0),
    and the interface may consistently be driven either by the inside flow of
    v0 (it then recedes) or by the outside flow (it then advances), yielding
    two solutions from the same data.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")

    def v0_at(s: float) -> float:
        return max(params.v_star - math.atan(s), 0.0)

    def rhs_front(t, y):
        v = flow_inside(params, v0_at(float(y[0])), max(t, 0.0))
        return np.array([params.a - params.b * v])

    def rhs_back(t, y):
        v = flow_outside(params, v0_at(float(y[0])), max(t, 0.0))
        return np.array([params.a - params.b * v])

    front = integrate_adaptive(rhs_front, 0.0, [0.0], horizon, tol=tol_step)
    back = integrate_adaptive(rhs_back, 0.0, [0.0], horizon, tol=tol_step)
    return (
        IllPosedBranch("front", params, front),
        IllPosedBranch("back", params, back),
    )
