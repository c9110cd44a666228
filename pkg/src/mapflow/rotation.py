"""Rotation numbers on invariant level-set components, three independent ways.

Flow route: on a periodic component gamma_p with period T, the map (or
its m-th iterate, m the component multiplicity) acts as the time-tau flow
map, so rho = |tau| / T.  tau is the signed flight time of smallest
magnitude; reporting |tau|/T places rho in (0, 1/2] and matches the
rotation angle of the linearization at an elliptic fixed point
(arg lambda in (0, pi)).  The sign of tau is kept in sweep rows, so the
orientation information is not lost, and any fixed convention leaves
monotonicity verdicts unchanged.

Birkhoff route: average angular increments of the discrete orbit around
a center the component is star-shaped about.  Entirely independent of
the vector field and the integrator; used as a cross-check.

Linearization route: at an elliptic fixed point the rotation number of
nearby components tends to arg(lambda) / 2pi for the non-real eigenvalue
pair of DF.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .fields import build_field, check_condition_X, check_condition_mu, VectorFieldSpec
from .flow import (
    IntegratorConfig,
    NearCriticalError,
    NonClosureError,
    OrbitClass,
    _multiplicity_on_trace,
    _time_to_image_on_trace,
    trace_orbit,
)
from .maps import MapSpec, MultiplierSpec, ScalarField, SigmaClass, integral_values

__all__ = [
    "NotInvariantError",
    "NotStarShapedError",
    "HyperbolicFixedPointError",
    "FlowRotation",
    "SeedRay",
    "SweepRow",
    "MonotonicityReport",
    "rotation_number_flow",
    "flow_rotation_data",
    "rotation_number_birkhoff",
    "fixed_point_rotation",
    "sweep",
    "monotonicity_report",
]


class NotInvariantError(RuntimeError):
    """No iterate F^k (k <= m_max) maps the component to itself."""


class NotStarShapedError(RuntimeError):
    """The orbit is not star-shaped about the chosen center: an angular
    increment reached half a turn, so winding cannot be counted."""


class HyperbolicFixedPointError(RuntimeError):
    """The fixed point is hyperbolic; no rotation number exists there."""


@dataclass(frozen=True)
class FlowRotation:
    """Everything the flow route knows about one seed."""

    seed: np.ndarray
    period: float
    tau: float
    multiplicity: int
    rho: float
    closure_residual: float


def flow_rotation_data(
    X: VectorFieldSpec,
    m: MapSpec,
    p,
    cfg: Optional[IntegratorConfig] = None,
    m_max: int = 4,
    multiplicity: Optional[int] = None,
) -> FlowRotation:
    """Period, flight time, multiplicity and rotation number at one seed.

    Raises the flow errors of :func:`mapflow.flow.trace_orbit`, plus
    :class:`NotInvariantError` when no iterate up to m_max returns to the
    component, and :class:`NonClosureError` when the component is open
    (no period exists; a translation-type flight time may still exist).
    """
    cfg = cfg if cfg is not None else IntegratorConfig()
    result, trace = trace_orbit(X, p, cfg)
    if result.classification is OrbitClass.CRITICAL_POINT:
        raise NearCriticalError("seed is a critical point of X; rotation number undefined")
    mult = multiplicity
    if mult is None:
        mult = _multiplicity_on_trace(trace, result, m, m_max)
    if mult is None:
        raise NotInvariantError(
            f"component through {np.asarray(p, float).tolist()} is not invariant: "
            f"no k <= {m_max} makes F^k a time shift of the component")
    if result.classification is not OrbitClass.PERIODIC:
        raise NonClosureError(
            "component is open (unbounded or not closed within the horizon); "
            "no period, so no rotation number")
    tau = _time_to_image_on_trace(trace, result, m, mult)
    if tau is None:
        raise NotInvariantError(
            f"F^{mult}(p) did not land on the traced component within tolerance")
    T = float(result.period)
    return FlowRotation(
        seed=np.asarray(p, dtype=float),
        period=T,
        tau=float(tau),
        multiplicity=int(mult),
        rho=abs(float(tau)) / T,
        closure_residual=float(result.closure_residual),
    )


def rotation_number_flow(
    X: VectorFieldSpec,
    m: MapSpec,
    p,
    cfg: Optional[IntegratorConfig] = None,
    m_max: int = 4,
    multiplicity: Optional[int] = None,
) -> float:
    """rho = |tau| / T for F^m on the periodic component through p."""
    return flow_rotation_data(X, m, p, cfg=cfg, m_max=m_max, multiplicity=multiplicity).rho


def rotation_number_birkhoff(
    m: MapSpec,
    p,
    center: Optional[Sequence[float]] = None,
    iterations: int = 10_000,
    power: int = 1,
    projection: Optional[Tuple[int, int]] = None,
) -> float:
    """Rotation number of F^power from angular increments of its orbit.

    The orbit is projected onto two coordinates (the map's default
    projection for n > 2) and angles are measured about ``center``
    (default: the orbit centroid, which works whenever the projected
    component is star-shaped about its centroid).  Increments are taken
    in (-pi, pi); an increment at half a turn means winding cannot be
    counted and raises :class:`NotStarShapedError`.  The estimate
    averages over a tail window of starting indices, and is reported in
    (0, 1/2] like the flow route.
    """
    if iterations < 10:
        raise ValueError("iterations must be at least 10")
    proj = projection if projection is not None else (m.projection if m.n > 2 else (0, 1))
    i, j = proj
    pts = np.empty((iterations + 1, 2))
    q = np.asarray(p, dtype=float)
    pts[0] = q[i], q[j]
    for k in range(1, iterations + 1):
        q = m.iterate(q, power)
        pts[k] = q[i], q[j]
    if center is None:
        c = pts.mean(axis=0)
    else:
        c = np.asarray(center, dtype=float)
        if c.size == m.n:
            c = np.array([c[i], c[j]])
    rel = pts - c
    radii = np.hypot(rel[:, 0], rel[:, 1])
    if np.any(radii <= 0):
        raise NotStarShapedError("orbit passes through the center")
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    inc = np.diff(ang)
    inc = (inc + np.pi) % (2.0 * np.pi) - np.pi
    if np.any(np.abs(inc) >= np.pi - 1e-9):
        raise NotStarShapedError(
            "an angular increment reached half a turn about the center; "
            "choose a better center or projection")
    theta = np.concatenate([[0.0], np.cumsum(inc)])
    N = iterations
    J = max(1, min(N // 8, 2000))
    span = N - J
    ests = [(theta[span + jj] - theta[jj]) / (2.0 * np.pi * span) for jj in range(1, J + 1)]
    raw = float(np.mean(ests)) % 1.0
    return min(raw, 1.0 - raw)


def fixed_point_rotation(m: MapSpec, p: Optional[Sequence[float]] = None) -> float:
    """arg(lambda) / 2pi at an elliptic fixed point (the limit of rho).

    Raises :class:`HyperbolicFixedPointError` when DF has no unit-modulus
    non-real eigenvalue pair, and ValueError when p is not fixed.
    """
    if p is None:
        if not m.known_fixed_points:
            raise ValueError(f"{m.label()} has no catalogued fixed point; pass one")
        p = m.known_fixed_points[0]
    p = np.asarray(p, dtype=float)
    if float(np.linalg.norm(m.step(p) - p)) > 1e-8 * (1.0 + float(np.linalg.norm(p))):
        raise ValueError(f"{p.tolist()} is not a fixed point of {m.label()}")
    eigs = np.linalg.eigvals(np.asarray(m.jacobian(p), dtype=float))
    pairs = [lam for lam in eigs if lam.imag > 1e-9]
    if not pairs:
        raise HyperbolicFixedPointError(
            f"fixed point {p.tolist()} of {m.label()} is hyperbolic "
            f"(spectrum {np.round(eigs, 6).tolist()}); no rotation number")
    lam = max(pairs, key=lambda z: z.imag)
    if abs(abs(lam) - 1.0) > 1e-6:
        raise HyperbolicFixedPointError(
            f"non-real eigenvalue has |lambda| = {abs(lam):.8f} != 1; "
            "fixed point is not elliptic")
    theta = float(np.angle(lam))
    return theta / (2.0 * np.pi)


@dataclass(frozen=True)
class SeedRay:
    """Seeds base + s * direction for s in [s_min, s_max], transversal to
    the level sets being swept."""

    base: np.ndarray
    direction: np.ndarray
    s_min: float
    s_max: float

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))
        if not np.any(self.direction != 0):
            raise ValueError("ray direction must be nonzero")
        if not self.s_min < self.s_max:
            raise ValueError("need s_min < s_max")

    def points(self, count: int) -> np.ndarray:
        if count < 1:
            raise ValueError("count must be positive")
        s = np.linspace(self.s_min, self.s_max, count)
        return self.base[None, :] + s[:, None] * self.direction[None, :]


@dataclass(frozen=True)
class SweepRow:
    """One level of a sweep.  ``h`` holds the integral values, ``tau`` is
    signed, ``rho`` = |tau|/T in (0, 1/2], and residuals are relative.
    Failed levels keep their seed and status instead of being dropped."""

    h: Tuple[float, ...]
    seed: np.ndarray
    period: Optional[float]
    tau: Optional[float]
    rho: Optional[float]
    multiplicity: Optional[int]
    res_mu: Optional[float]
    res_X: Optional[float]
    res_V: Optional[float]
    status: str


def _integral_drift(m: MapSpec, trace, period: float, h_ref: np.ndarray) -> float:
    """Max relative drift of the integrals along one period of the trace."""
    ts = np.linspace(0.0, period, 65)
    ys = trace(ts)
    worst = 0.0
    for idx, v in enumerate(m.integrals):
        vals = np.asarray(v.fn(ys), dtype=float)
        ref = h_ref[idx]
        worst = max(worst, float(np.max(np.abs(vals - ref))) / max(1.0, abs(ref)))
    return worst


def sweep(
    m: MapSpec,
    mu: Union[None, str, ScalarField, MultiplierSpec] = None,
    ray: Optional[SeedRay] = None,
    count: int = 20,
    cfg: Optional[IntegratorConfig] = None,
    m_max: int = 4,
    residual_tol: float = 1e-8,
) -> List[SweepRow]:
    """Rotation-number sweep along a seed ray, one row per level.

    Every seed yields a row: levels that fail closure, invariance or the
    residual thresholds are flagged through ``status`` rather than
    silently dropped.  Rows are sorted by the integral values ``h``.
    """
    cfg = cfg if cfg is not None else IntegratorConfig()
    if ray is None:
        if m.default_ray is None:
            raise ValueError(f"{m.label()} has no default seed ray; pass one")
        base, direction, s_min, s_max = m.default_ray
        ray = SeedRay(base, direction, s_min, s_max)

    if mu is None or isinstance(mu, str):
        mu_spec = m.multiplier(mu)
    elif isinstance(mu, MultiplierSpec):
        mu_spec = mu
    else:
        mu_spec = MultiplierSpec(field=mu, claimed_class=SigmaClass.PLUS)
    check_power = 1 if mu_spec.claimed_class is SigmaClass.PLUS else 2
    X = build_field(m, mu_spec.field)

    rows: List[SweepRow] = []
    for seed in ray.points(count):
        h: Tuple[float, ...]
        try:
            h = tuple(float(v) for v in integral_values(m, seed))
        except Exception:
            rows.append(SweepRow(h=(np.nan,) * (m.n - 1), seed=seed, period=None,
                                 tau=None, rho=None, multiplicity=None, res_mu=None,
                                 res_X=None, res_V=None, status="outside_domain"))
            continue
        try:
            result, trace = trace_orbit(X, seed, cfg)
            if result.classification is OrbitClass.CRITICAL_POINT:
                raise NearCriticalError("critical seed")
            mult = _multiplicity_on_trace(trace, result, m, m_max)
            if mult is None:
                raise NotInvariantError("component not invariant")
            if result.classification is not OrbitClass.PERIODIC:
                raise NonClosureError("open component")
            tau = _time_to_image_on_trace(trace, result, m, mult)
            if tau is None:
                raise NotInvariantError("flight time absent")
        except NotInvariantError:
            rows.append(SweepRow(h=h, seed=seed, period=None, tau=None, rho=None,
                                 multiplicity=None, res_mu=None, res_X=None,
                                 res_V=None, status="not_invariant"))
            continue
        except NearCriticalError:
            rows.append(SweepRow(h=h, seed=seed, period=None, tau=None, rho=None,
                                 multiplicity=None, res_mu=None, res_X=None,
                                 res_V=None, status="near_critical"))
            continue
        except Exception as exc:
            tag = type(exc).__name__.replace("Error", "").lower() or "failed"
            rows.append(SweepRow(h=h, seed=seed, period=None, tau=None, rho=None,
                                 multiplicity=None, res_mu=None, res_X=None,
                                 res_V=None, status=tag))
            continue

        T = float(result.period)
        res_mu = check_condition_mu(m, mu_spec.field, seed, power=check_power).relative
        res_X = check_condition_X(m, X, seed, power=check_power).relative
        res_V = _integral_drift(m, trace, T, np.asarray(h))
        flagged = max(res_mu, res_X, res_V) > residual_tol
        rows.append(SweepRow(
            h=h, seed=seed, period=T, tau=float(tau), rho=abs(float(tau)) / T,
            multiplicity=int(mult), res_mu=res_mu, res_X=res_X, res_V=res_V,
            status="flagged" if flagged else "ok",
        ))
    rows.sort(key=lambda r: r.h)
    return rows


@dataclass(frozen=True)
class MonotonicityReport:
    """Strict-monotonicity verdict over the usable rows of a sweep.

    ``violations`` lists adjacent out-of-order pairs as 1-based index
    pairs like ``"(2,3)"`` among the usable rows.  A sweep whose rho is
    constant to ``tie_tol`` is reported as non-monotonic with the
    ``constant`` flag set.  When a fixed-point reference is supplied, the
    endpoint row's rho is compared against it.
    """

    verdict: str
    constant: bool
    violations: Tuple[str, ...]
    n_usable: int
    rhos: Tuple[float, ...]
    endpoint_rho: Optional[float] = None
    endpoint_reference: Optional[float] = None

    @property
    def endpoint_gap(self) -> Optional[float]:
        if self.endpoint_rho is None or self.endpoint_reference is None:
            return None
        return abs(self.endpoint_rho - self.endpoint_reference)


def monotonicity_report(
    rows: Sequence[SweepRow],
    tie_tol: float = 1e-9,
    fixed_point_rho: Optional[float] = None,
    endpoint: str = "first",
) -> MonotonicityReport:
    """Judge strict monotonicity of rho along a sweep (rows sorted by h)."""
    usable = [r for r in rows if r.rho is not None and r.status in ("ok", "flagged")]
    if len(usable) < 3:
        raise ValueError(f"need at least 3 usable rows, got {len(usable)}")
    rhos = [r.rho for r in usable]
    diffs = np.diff(rhos)
    signs = np.where(diffs > tie_tol, 1, np.where(diffs < -tie_tol, -1, 0))

    constant = bool(np.all(signs == 0))
    if constant:
        verdict = "non_monotonic"
        violations: Tuple[str, ...] = ()
    elif np.all(signs == 1):
        verdict, violations = "increasing", ()
    elif np.all(signs == -1):
        verdict, violations = "decreasing", ()
    else:
        majority = 1 if np.sum(signs == 1) >= np.sum(signs == -1) else -1
        verdict = "non_monotonic"
        violations = tuple(
            f"({i + 1},{i + 2})" for i, s in enumerate(signs) if s != majority
        )

    endpoint_rho = None
    if fixed_point_rho is not None:
        endpoint_rho = rhos[0] if endpoint == "first" else rhos[-1]
    return MonotonicityReport(
        verdict=verdict,
        constant=constant,
        violations=violations,
        n_usable=len(usable),
        rhos=tuple(float(r) for r in rhos),
        endpoint_rho=endpoint_rho,
        endpoint_reference=fixed_point_rho,
    )
