"""Problem state: the excited set as a finite interval union and the recovery
profile as a piecewise-linear bounded Lipschitz function, plus the structural
and non-degeneracy validation applied to initial data."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinetics import Parameters, Phase, front_speed

__all__ = [
    "IntervalSet",
    "Profile",
    "H2Violation",
    "EndpointCheck",
    "ValidationReport",
    "eval_profile",
    "component_membership",
    "validate_initial",
    "default_margin",
]


class H2Violation(ValueError):
    """The speed law vanishes (within the margin) at an initial endpoint.

    Carries the offending endpoint checks; starting a run from such data is
    ill posed (two distinct continuations exist).
    """

    def __init__(self, message: str, offenders: tuple["EndpointCheck", ...]):
        super().__init__(message)
        self.offenders = offenders


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of disjoint open intervals, stored as a flat strictly
    increasing endpoint sequence (l1, r1, l2, r2, ...).

    A single half-infinite right endpoint (math.inf) is tolerated only in the
    ill-posedness demo; everything else requires finite endpoints.
    """

    endpoints: tuple[float, ...]
    allow_half_infinite: bool = False

    def __post_init__(self) -> None:
        pts = tuple(float(x) for x in self.endpoints)
        object.__setattr__(self, "endpoints", pts)
        if len(pts) % 2 != 0:
            raise ValueError("interval set needs an even number of endpoints")
        for i in range(len(pts) - 1):
            if not pts[i] < pts[i + 1]:
                raise ValueError(
                    f"endpoints must be strictly increasing; got {pts[i]!r} >= {pts[i + 1]!r} "
                    "(overlapping or degenerate intervals)"
                )
        finite = all(math.isfinite(x) for x in pts)
        if not finite:
            half_inf_ok = (
                self.allow_half_infinite
                and len(pts) >= 2
                and pts[-1] == math.inf
                and all(math.isfinite(x) for x in pts[:-1])
            )
            if not half_inf_ok:
                raise ValueError("endpoints must be finite (half-infinite only in demo mode)")

    @classmethod
    def from_pairs(cls, pairs, allow_half_infinite: bool = False) -> "IntervalSet":
        flat: list[float] = []
        for l, r in pairs:
            flat.extend((float(l), float(r)))
        return cls(tuple(flat), allow_half_infinite)

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @property
    def m(self) -> int:
        """Number of interval components."""
        return len(self.endpoints) // 2

    @property
    def pairs(self) -> tuple[tuple[float, float], ...]:
        e = self.endpoints
        return tuple((e[2 * j], e[2 * j + 1]) for j in range(self.m))

    def total_length(self) -> float:
        return float(sum(r - l for l, r in self.pairs))

    def contains(self, x) -> np.ndarray | bool:
        """Open-set membership; boundary points count as outside."""
        xs = np.asarray(x, dtype=float)
        if not self.endpoints:
            out = np.zeros(xs.shape, dtype=bool)
            return bool(out) if xs.ndim == 0 else out
        flat = np.asarray(self.endpoints)
        idx = np.searchsorted(flat, xs, side="right")
        inside = (idx % 2 == 1) & (xs > flat[np.clip(idx - 1, 0, None)])
        return bool(inside) if xs.ndim == 0 else inside

    def membership(self, x: float) -> tuple[Phase, int | None]:
        """Phase of a point plus its 1-based component index when inside."""
        if not self.contains(x):
            return Phase.OUTSIDE, None
        idx = int(np.searchsorted(np.asarray(self.endpoints), float(x), side="right"))
        return Phase.INSIDE, (idx + 1) // 2


def component_membership(omega: IntervalSet, x: float) -> tuple[Phase, int | None]:
    return omega.membership(x)


@dataclass(frozen=True)
class Profile:
    """Piecewise-linear sample of a non-negative bounded Lipschitz function.

    Linear interpolation between samples, constant extension outside them.
    The Lipschitz constant and the sup bound are recorded at construction.
    """

    xs: np.ndarray
    vs: np.ndarray
    lipschitz: float = field(init=False)
    bound: float = field(init=False)

    def __post_init__(self) -> None:
        xs = np.atleast_1d(np.asarray(self.xs, dtype=float))
        vs = np.atleast_1d(np.asarray(self.vs, dtype=float))
        if xs.ndim != 1 or xs.shape != vs.shape or xs.size == 0:
            raise ValueError("profile needs matching 1-D sample arrays")
        if np.any(np.diff(xs) <= 0.0):
            raise ValueError("profile abscissae must be strictly increasing")
        if np.any(vs < 0.0):
            raise ValueError("profile values must be non-negative")
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(vs)):
            raise ValueError("profile samples must be finite")
        xs.setflags(write=False)
        vs.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vs", vs)
        lip = 0.0 if xs.size < 2 else float(np.max(np.abs(np.diff(vs) / np.diff(xs))))
        object.__setattr__(self, "lipschitz", lip)
        object.__setattr__(self, "bound", float(np.max(vs)))

    @classmethod
    def constant(cls, value: float, span: tuple[float, float] = (0.0, 1.0)) -> "Profile":
        lo, hi = span
        return cls(np.array([lo, hi]), np.array([value, value], dtype=float))

    def eval(self, x) -> np.ndarray | float:
        xs = np.asarray(x, dtype=float)
        out = np.interp(xs, self.xs, self.vs)
        return float(out) if xs.ndim == 0 else out

    __call__ = eval


def eval_profile(profile: Profile, x) -> np.ndarray | float:
    return profile.eval(x)


@dataclass(frozen=True)
class EndpointCheck:
    k: int                  # 1-based endpoint index; odd = left end of a component
    position: float
    v0: float
    speed: float            # W(v0) at the endpoint
    velocity: float         # actual endpoint velocity (-1)^k * W(v0)

    @property
    def side(self) -> str:
        return "left" if self.k % 2 == 1 else "right"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    margin: float
    checks: tuple[EndpointCheck, ...]


def default_margin(p: Parameters) -> float:
    """Default degeneracy margin for the |W| != 0 endpoint condition."""
    return 1e-6 * max(p.a, p.b * p.M)


def validate_initial(
    p: Parameters,
    omega: IntervalSet,
    v0: Profile,
    margin: float | None = None,
) -> ValidationReport:
    """Check the structural hypotheses and the endpoint non-degeneracy.

    Accepts iff the interval set is a valid disjoint finite union, the profile
    is non-negative, and |W(v0(x))| >= margin at every endpoint of omega.  The
    returned report records W at each endpoint, whose sign fixes the initial
    direction of motion.  Raises H2Violation listing the degenerate endpoints.
    """
    eta = default_margin(p) if margin is None else float(margin)
    if eta <= 0.0:
        raise ValueError("degeneracy margin must be positive")
    if not omega.allow_half_infinite and omega.endpoints:
        if not all(math.isfinite(x) for x in omega.endpoints):
            raise ValueError("initial interval set must have finite endpoints")

    checks = []
    for i, x in enumerate(omega.endpoints):
        if not math.isfinite(x):
            continue  # demo-mode infinite endpoint carries no interface
        k = i + 1
        v_here = float(v0.eval(x))
        w = float(front_speed(p, v_here))
        checks.append(EndpointCheck(k=k, position=x, v0=v_here, speed=w, velocity=(-1.0) ** k * w))
    offenders = tuple(c for c in checks if abs(c.speed) < eta)
    if offenders:
        where = ", ".join(f"x_{c.k}={c.position:g} (W={c.speed:.3e})" for c in offenders)
        raise H2Violation(
            f"speed law degenerate at initial endpoint(s): {where}; "
            f"|W| >= {eta:.3e} required for a well-posed start",
            offenders,
        )
    return ValidationReport(ok=True, margin=eta, checks=tuple(checks))
