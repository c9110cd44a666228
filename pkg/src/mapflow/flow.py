"""Flowing the associated vector field: periods, flight times, multiplicities.

The solver is scipy's explicit Runge-Kutta machinery driven step by step
(default DOP853; RK45 selectable).  Driving the solver ourselves instead
of calling ``solve_ivp`` buys three things the contracts need: domain
exits are caught mid-step with the exit time preserved, trajectories that
blow up are classified rather than raised from deep inside scipy, and
Poincare-section crossings are refined on the local dense output without
re-integrating.

Period detection works on the section through the seed orthogonal to the
field there, Sigma_p = { q : (q - p) . X(p) = 0 }, counting only
same-orientation crossings ((q - p) . X(p) increasing through zero).  The
first crossing within the closure tolerance of the seed is the period.

Flight times tau solve phi(tau, p) = F^k(p) on the traced orbit.  The
reported tau is the signed representative of smallest magnitude, so on a
period-T orbit tau lies in (-T/2, T/2]; the sign records whether the map
steps with or against the field's time orientation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.integrate import OdeSolution, DOP853, RK45
from scipy.optimize import brentq, minimize_scalar

from .fields import VectorFieldSpec
from .maps import MapSpec, OutsideDomainError

__all__ = [
    "IntegratorConfig",
    "OrbitClass",
    "OrbitResult",
    "OrbitTrace",
    "FlowError",
    "DomainExitError",
    "BlowUpError",
    "NearCriticalError",
    "NonClosureError",
    "integrate",
    "trace_orbit",
    "detect_period",
    "time_to_image",
    "component_multiplicity",
]

_METHODS = {"DOP853": DOP853, "RK45": RK45}


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and budgets for all flow operations.

    ``closure_tol`` is a relative figure: the closure test at seed p uses
    ``closure_tol * (1 + |p|)``.  ``near_critical_factor`` rejects seeds
    with ``|X(p)| <= near_critical_factor * abs_tol`` (while a seed with
    ``|X(p)| <= abs_tol`` is accepted as an exact critical point).
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    max_step: float = np.inf
    horizon: float = 1000.0
    max_returns: int = 24
    method: str = "DOP853"
    closure_tol: float = 1e-7
    near_critical_factor: float = 1e3
    unbounded_radius: float = 1e8
    event_time_tol: float = 1e-13
    max_steps: int = 500_000

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {sorted(_METHODS)}, got {self.method!r}")
        if min(self.rel_tol, self.abs_tol, self.horizon, self.closure_tol) <= 0:
            raise ValueError("tolerances and horizon must be positive")
        if self.max_returns < 1:
            raise ValueError("max_returns must be at least 1")

    def closure_radius(self, p: np.ndarray) -> float:
        return self.closure_tol * (1.0 + float(np.linalg.norm(p)))


class OrbitClass(str, Enum):
    CRITICAL_POINT = "critical_point"
    PERIODIC = "periodic"
    UNBOUNDED_OR_OPEN = "unbounded_or_open"
    NOT_CLOSED = "not_closed_within_horizon"


@dataclass(frozen=True)
class OrbitResult:
    """What became of the orbit through one seed."""

    seed: np.ndarray
    classification: OrbitClass
    period: Optional[float]
    closure_residual: float
    section_hits: int = 0

    @property
    def is_periodic(self) -> bool:
        return self.classification is OrbitClass.PERIODIC


class FlowError(RuntimeError):
    """Base class for flow failures; ``time`` is the failure time if known."""

    def __init__(self, message: str, time: Optional[float] = None):
        super().__init__(message)
        self.time = time


class DomainExitError(FlowError):
    """The trajectory left the map's domain before finishing its job."""


class BlowUpError(FlowError):
    """The trajectory left every bounded region (or the solver died there)."""


class NearCriticalError(FlowError):
    """The seed is too close to a critical point of X to trust the flow."""


class NonClosureError(FlowError):
    """Too many section returns without closing, or an open orbit where a
    period was required."""


class _DomainExit(Exception):
    def __init__(self, t: float):
        self.t = float(t)


@dataclass
class _Segment:
    """One direction of a traced orbit: piecewise dense output."""

    sol: Optional[OdeSolution]
    t_end: float  # signed: last time covered
    status: str   # "reached" | "stopped" | "domain_exit" | "unbounded" | "failed"
    exit_time: Optional[float] = None
    last_point: Optional[np.ndarray] = None


def _march(
    X: VectorFieldSpec,
    p: np.ndarray,
    t_bound: float,
    cfg: IntegratorConfig,
    section: Optional[Callable[[np.ndarray], float]] = None,
    on_crossing: Optional[Callable[[float, np.ndarray], bool]] = None,
) -> _Segment:
    """Step from t=0 to t_bound, refining positive-direction section
    crossings on the local dense output."""
    domain = X.map.domain

    def rhs(t, q):
        if not domain(q):
            raise _DomainExit(t)
        with np.errstate(all="ignore"):
            v = X(q)
        return v

    solver = _METHODS[cfg.method](
        rhs, 0.0, p, t_bound,
        rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.max_step,
    )
    interpolants: List = []
    ts: List[float] = [0.0]
    status = "reached"
    exit_time: Optional[float] = None
    g_prev = float(section(p)) if section is not None else 0.0
    guards = X.map.guards
    guard_prev = [float(g(p)) for g in guards]
    steps = 0
    while solver.status == "running":
        steps += 1
        if steps > cfg.max_steps:
            raise FlowError(f"integrator exceeded {cfg.max_steps} steps at t={solver.t:.6g}", time=solver.t)
        try:
            solver.step()
        except _DomainExit as exc:
            status = "domain_exit"
            exit_time = exc.t
            break
        if solver.status == "failed":
            status = "failed"
            break
        seg = solver.dense_output()
        interpolants.append(seg)
        ts.append(solver.t)
        q = solver.y
        if not np.all(np.isfinite(q)) or float(np.linalg.norm(q)) > cfg.unbounded_radius:
            status = "unbounded"
            break
        if guards:
            # a sign flip between step endpoints means the path crossed a
            # boundary piece, even if no evaluation landed on it
            t_lo, t_hi = ts[-2], ts[-1]
            t_cross: Optional[float] = None
            for i, g in enumerate(guards):
                g_now = float(g(q))
                flipped = (g_now == 0.0) or (
                    guard_prev[i] != 0.0 and (g_now < 0.0) != (guard_prev[i] < 0.0))
                if flipped:
                    if g_now == 0.0:
                        t_c = t_hi
                    else:
                        t_c = float(brentq(
                            lambda t, g=g: float(g(np.asarray(seg(t), dtype=float))),
                            t_lo, t_hi,
                            xtol=cfg.event_time_tol, rtol=4 * np.finfo(float).eps,
                        ))
                    if t_cross is None or abs(t_c - t_lo) < abs(t_cross - t_lo):
                        t_cross = t_c
                guard_prev[i] = g_now
            if t_cross is not None:
                status = "domain_exit"
                exit_time = t_cross
                if abs(t_cross - t_lo) > 0.0:
                    ts[-1] = t_cross
                else:
                    interpolants.pop()
                    ts.pop()
                break
        if section is not None:
            g_now = float(section(q))
            if g_prev < 0.0 <= g_now:
                t_lo, t_hi = ts[-2], ts[-1]
                if g_now == 0.0:
                    t_root = t_hi
                else:
                    t_root = brentq(
                        lambda t: float(section(seg(t))),
                        t_lo, t_hi, xtol=cfg.event_time_tol, rtol=4 * np.finfo(float).eps,
                    )
                q_root = np.asarray(seg(t_root), dtype=float)
                if on_crossing is not None and on_crossing(float(t_root), q_root):
                    status = "stopped"
                    g_prev = g_now
                    break
            g_prev = g_now

    sol = OdeSolution(np.array(ts), interpolants) if interpolants else None
    return _Segment(
        sol=sol,
        t_end=ts[-1],
        status=status,
        exit_time=exit_time,
        last_point=np.array(solver.y, dtype=float),
    )


@dataclass
class OrbitTrace:
    """Dense representation of the orbit through a seed.

    ``forward`` always covers [0, t_end]; ``backward`` is filled on
    demand for open orbits (negative times).  For periodic orbits the
    forward segment covers at least one full period.
    """

    seed: np.ndarray
    X: VectorFieldSpec
    cfg: IntegratorConfig
    forward: Optional[_Segment]
    backward: Optional[_Segment] = None
    period: Optional[float] = None

    def ensure_backward(self) -> None:
        if self.backward is None:
            self.backward = _march(self.X, self.seed, -self.cfg.horizon, self.cfg)

    def spans(self) -> List[Tuple[OdeSolution, float, float]]:
        """(solution, t_lo, t_hi) pairs covering everything traced."""
        out = []
        if self.forward is not None and self.forward.sol is not None:
            hi = self.period if self.period is not None else self.forward.t_end
            out.append((self.forward.sol, 0.0, hi))
        if self.backward is not None and self.backward.sol is not None:
            out.append((self.backward.sol, self.backward.t_end, 0.0))
        return out

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            if np.any(t_arr > 0):
                raise ValueError("evaluate forward and backward times separately")
            self.ensure_backward()
            if self.backward is None or self.backward.sol is None:
                raise FlowError("no backward trajectory available")
            return self.backward.sol(t_arr)
        if self.forward is None or self.forward.sol is None:
            raise FlowError("no forward trajectory available")
        return self.forward.sol(t_arr)


def _classify_failure(seg: _Segment, p: np.ndarray) -> Optional[FlowError]:
    """Map a non-reached march onto an error, or None if it is an honest
    unbounded classification."""
    if seg.status == "domain_exit":
        t = seg.exit_time if seg.exit_time is not None else seg.t_end
        return DomainExitError(
            f"trajectory left the domain near t={t:.9g} "
            f"(last inside point at t={seg.t_end:.9g})", time=t)
    if seg.status == "failed":
        last = seg.last_point if seg.last_point is not None else p
        if float(np.linalg.norm(last)) < 1e3 * (1.0 + float(np.linalg.norm(p))):
            return FlowError(f"integrator failed at t={seg.t_end:.9g} without blow-up", time=seg.t_end)
    return None


def trace_orbit(
    X: VectorFieldSpec,
    p,
    cfg: Optional[IntegratorConfig] = None,
) -> Tuple[OrbitResult, OrbitTrace]:
    """Classify the orbit through p and keep its dense trace for reuse."""
    cfg = cfg if cfg is not None else IntegratorConfig()
    p = np.asarray(p, dtype=float)
    if not X.map.domain(p):
        raise OutsideDomainError(f"seed {p.tolist()} is outside the domain of {X.map.label()}")
    v = X(p)
    speed = float(np.linalg.norm(v))
    if speed <= cfg.abs_tol:
        result = OrbitResult(seed=p, classification=OrbitClass.CRITICAL_POINT,
                             period=None, closure_residual=0.0)
        return result, OrbitTrace(seed=p, X=X, cfg=cfg, forward=None)
    if speed <= cfg.near_critical_factor * cfg.abs_tol:
        raise NearCriticalError(
            f"|X(p)| = {speed:.3e} is within {cfg.near_critical_factor:g} * abs_tol "
            "of zero; seed rejected as near-critical")

    closure = cfg.closure_radius(p)
    hits: List[Tuple[float, np.ndarray]] = []
    closure_hit = {}

    def section(q):
        return float(np.dot(q - p, v))

    def on_crossing(t, q):
        residual = float(np.linalg.norm(q - p))
        hits.append((t, residual))
        if residual <= closure:
            closure_hit["T"] = t
            closure_hit["residual"] = residual
            return True
        return len(hits) >= cfg.max_returns

    seg = _march(X, p, cfg.horizon, cfg, section=section, on_crossing=on_crossing)

    if "T" in closure_hit:
        result = OrbitResult(
            seed=p, classification=OrbitClass.PERIODIC,
            period=float(closure_hit["T"]),
            closure_residual=float(closure_hit["residual"]),
            section_hits=len(hits),
        )
        trace = OrbitTrace(seed=p, X=X, cfg=cfg, forward=seg, period=result.period)
        return result, trace

    if len(hits) >= cfg.max_returns:
        raise NonClosureError(
            f"{len(hits)} section returns without closing (closest approach "
            f"{min(r for _, r in hits):.3e}, tolerance {closure:.3e})")

    err = _classify_failure(seg, p)
    if err is not None:
        raise err

    if seg.status in ("unbounded", "failed"):
        result = OrbitResult(seed=p, classification=OrbitClass.UNBOUNDED_OR_OPEN,
                             period=None, closure_residual=np.inf,
                             section_hits=len(hits))
    else:  # reached the horizon without closing
        best = min((r for _, r in hits), default=np.inf)
        result = OrbitResult(seed=p, classification=OrbitClass.NOT_CLOSED,
                             period=None, closure_residual=best,
                             section_hits=len(hits))
    return result, OrbitTrace(seed=p, X=X, cfg=cfg, forward=seg)


def detect_period(X: VectorFieldSpec, p, cfg: Optional[IntegratorConfig] = None) -> Optional[float]:
    """Period of the flow orbit through p, or None when it does not close
    (see :func:`trace_orbit` for the full classification)."""
    result, _ = trace_orbit(X, p, cfg)
    return result.period


def integrate(X: VectorFieldSpec, p, t: float, cfg: Optional[IntegratorConfig] = None) -> np.ndarray:
    """The flow map phi(t, p), |t| <= horizon."""
    cfg = cfg if cfg is not None else IntegratorConfig()
    p = np.asarray(p, dtype=float)
    if abs(t) > cfg.horizon:
        raise ValueError(f"|t| = {abs(t):g} exceeds the horizon {cfg.horizon:g}")
    if not X.map.domain(p):
        raise OutsideDomainError(f"seed {p.tolist()} is outside the domain of {X.map.label()}")
    if t == 0.0:
        return p.copy()
    if float(np.linalg.norm(X(p))) <= cfg.abs_tol:
        return p.copy()
    seg = _march(X, p, float(t), cfg)
    if seg.status == "reached":
        return np.asarray(seg.sol(t), dtype=float)
    err = _classify_failure(seg, p)
    if err is not None:
        raise err
    raise BlowUpError(f"trajectory blew up near t={seg.t_end:.9g} before reaching t={t:g}",
                      time=seg.t_end)


def _scan_closest(sol: OdeSolution, t_lo: float, t_hi: float, target: np.ndarray,
                  samples: int = 1024) -> Tuple[float, float, float, float]:
    """Coarse scan for the closest approach to target on [t_lo, t_hi].

    Returns (t_best, d_best, bracket_lo, bracket_hi)."""
    ts = np.linspace(t_lo, t_hi, samples)
    ys = sol(ts)
    d2 = np.sum((ys - target[:, None]) ** 2, axis=0)
    i = int(np.argmin(d2))
    lo = ts[max(i - 1, 0)]
    hi = ts[min(i + 1, samples - 1)]
    return float(ts[i]), float(np.sqrt(d2[i])), float(lo), float(hi)


def _refine_closest(sol: OdeSolution, t_lo: float, t_hi: float,
                    target: np.ndarray) -> Tuple[float, float]:
    """Polish the closest approach inside a bracket; (t, distance)."""
    if t_hi <= t_lo:
        q = np.asarray(sol(t_lo), dtype=float)
        return t_lo, float(np.linalg.norm(q - target))
    res = minimize_scalar(
        lambda t: float(np.sum((np.asarray(sol(t)) - target) ** 2)),
        bounds=(t_lo, t_hi), method="bounded",
        options={"xatol": 1e-13},
    )
    t_best = float(res.x)
    return t_best, float(np.sqrt(max(res.fun, 0.0)))


def _refine_passage(sol: OdeSolution, t_lo: float, t_hi: float, target: np.ndarray,
                    v_target: np.ndarray, cfg: IntegratorConfig) -> Tuple[float, float]:
    """Refine the time the orbit passes through target.

    Prefers a root of the section function (phi(t)-target).X(target),
    which pins transversal passages to the event tolerance; falls back to
    the distance minimum when the section does not change sign.
    """
    def g(t):
        return float(np.dot(np.asarray(sol(t)) - target, v_target))

    g_lo, g_hi = g(t_lo), g(t_hi)
    if g_lo == 0.0:
        t_best = t_lo
    elif g_hi == 0.0:
        t_best = t_hi
    elif g_lo * g_hi < 0.0:
        t_best = float(brentq(g, t_lo, t_hi, xtol=cfg.event_time_tol,
                              rtol=4 * np.finfo(float).eps))
    else:
        return _refine_closest(sol, t_lo, t_hi, target)
    q = np.asarray(sol(t_best), dtype=float)
    return t_best, float(np.linalg.norm(q - target))


def _passage_time(trace: OrbitTrace, target: np.ndarray,
                  require_root: bool = True) -> Tuple[Optional[float], float]:
    """Signed time at which the traced orbit passes through target.

    Returns (t, distance at closest approach over all spans).  t is None
    when no span comes within the closure tolerance of the target.  On a
    periodic orbit the result is folded to the representative of smallest
    magnitude in (-T/2, T/2]."""
    cfg = trace.cfg
    if not trace.spans():
        return None, np.inf
    tol = cfg.closure_tol * (1.0 + float(np.linalg.norm(target)))
    v_target = trace.X(target)
    best_t: Optional[float] = None
    best_d = np.inf
    for sol, t_lo, t_hi in trace.spans():
        if t_hi <= t_lo:
            continue
        _, _, blo, bhi = _scan_closest(sol, t_lo, t_hi, target)
        if require_root:
            t_r, d_r = _refine_passage(sol, blo, bhi, target, v_target, cfg)
        else:
            t_r, d_r = _refine_closest(sol, blo, bhi, target)
        if d_r < best_d:
            best_d, best_t = d_r, t_r
    if best_d > tol:
        return None, best_d
    if trace.period is not None:
        T = trace.period
        folded = (best_t + T / 2.0) % T - T / 2.0
        if folded <= -T / 2.0 + 1e-15:
            folded = T / 2.0
        best_t = folded if folded != 0.0 else T  # phi(T) = p for on-seed targets
        # an exact zero can only mean the target coincides with the seed
        if abs(best_t) < 1e-15:
            best_t = T
    return best_t, best_d


def time_to_image(
    X: VectorFieldSpec,
    m: MapSpec,
    p,
    cfg: Optional[IntegratorConfig] = None,
    power: int = 1,
) -> Optional[float]:
    """Flight time tau with phi(tau, p) = F^power(p), or None if absent.

    On periodic orbits tau is the representative of smallest magnitude
    (in (-T/2, T/2]); its sign records whether the map steps with or
    against the field's orientation.  At a critical seed that F^power
    fixes, tau = 0 by convention.
    """
    cfg = cfg if cfg is not None else IntegratorConfig()
    result, trace = trace_orbit(X, p, cfg)
    return _time_to_image_on_trace(trace, result, m, power)


def _time_to_image_on_trace(trace: OrbitTrace, result: OrbitResult,
                            m: MapSpec, power: int) -> Optional[float]:
    target = m.iterate(trace.seed, power)
    if result.classification is OrbitClass.CRITICAL_POINT:
        if float(np.linalg.norm(target - trace.seed)) <= trace.cfg.closure_radius(trace.seed):
            return 0.0
        return None
    if result.classification is not OrbitClass.PERIODIC:
        trace.ensure_backward()
    tau, _ = _passage_time(trace, target)
    return tau


def component_multiplicity(
    X: VectorFieldSpec,
    m: MapSpec,
    p,
    m_max: int = 4,
    cfg: Optional[IntegratorConfig] = None,
) -> Optional[int]:
    """Smallest k <= m_max such that F^k maps the orbit component of p
    to itself, acting on it as a single time shift of the flow.

    F^k(p) landing back on the component is necessary but not
    sufficient: when F is not a diffeomorphism of an invariant set, an
    iterate can return one point to the component while tearing the
    component itself apart.  Candidates are therefore confirmed at probe
    points spread along the component — every probe must stay iterable,
    land back on the component, and agree on the flight time.  Returns
    None when no k <= m_max survives."""
    cfg = cfg if cfg is not None else IntegratorConfig()
    result, trace = trace_orbit(X, p, cfg)
    return _multiplicity_on_trace(trace, result, m, m_max)


_PROBE_FRACTIONS = (0.05, 0.23, 0.41, 0.59, 0.77, 0.95)


def _probe_times(trace: OrbitTrace) -> List[float]:
    if trace.period is not None:
        return [trace.period * f for f in _PROBE_FRACTIONS]
    spans = trace.spans()
    t_lo = min(s[1] for s in spans)
    t_hi = max(s[2] for s in spans)
    return [t_lo + f * (t_hi - t_lo) for f in _PROBE_FRACTIONS]


def _is_time_shift(trace: OrbitTrace, m: MapSpec, power: int,
                   tau_ref: float) -> bool:
    """Whether F^power acts on the traced component as the time shift by
    tau_ref: probes along the component must map into the component with
    matching flight times."""
    cfg = trace.cfg
    T = trace.period
    tau_tol = max(1e-6 * (1.0 + abs(tau_ref)), 1e3 * cfg.abs_tol)
    for t_i in _probe_times(trace):
        q = np.asarray(trace(t_i), dtype=float)
        try:
            img = m.iterate(q, power)
        except OutsideDomainError:
            return False
        t_opt, _ = _passage_time(trace, img, require_root=False)
        if t_opt is None:
            return False
        d = (t_opt - t_i) - tau_ref
        if T is not None:
            d = (d + T / 2.0) % T - T / 2.0
        if abs(d) > tau_tol:
            return False
    return True


def _multiplicity_on_trace(trace: OrbitTrace, result: OrbitResult,
                           m: MapSpec, m_max: int) -> Optional[int]:
    p = trace.seed
    if result.classification is OrbitClass.CRITICAL_POINT:
        tol = trace.cfg.closure_radius(p)
        q = p
        for k in range(1, m_max + 1):
            q = m.step(q)
            if float(np.linalg.norm(q - p)) <= tol:
                return k
        return None
    if result.classification is not OrbitClass.PERIODIC:
        trace.ensure_backward()
    q = p
    for k in range(1, m_max + 1):
        try:
            q = m.step(q)
        except OutsideDomainError:
            return None
        tol = trace.cfg.closure_tol * (1.0 + float(np.linalg.norm(q)))
        t_k, dist = _passage_time(trace, q, require_root=False)
        if dist <= tol and _is_time_shift(trace, m, k, t_k):
            return k
    return None
