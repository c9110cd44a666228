"""Phase portraits as standalone SVG.

The portrait overlays continuous level-set components (flow trajectories
of the associated field) with discrete orbits of the map itself, so the
eye can confirm what the numbers claim: iterates travel along the flow
curves.  The writer is plain text SVG with fixed-precision coordinates,
so identical inputs produce byte-identical files; seeds that cannot be
drawn (outside the domain, near-critical, trajectory failures) are
recorded in a metadata comment instead of silently vanishing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .fields import build_field
from .flow import FlowError, IntegratorConfig, OrbitClass, trace_orbit
from .maps import MapSpec, OutsideDomainError

__all__ = ["PortraitSummary", "render_portrait"]

_CURVE_STYLE = 'fill="none" stroke="#4878a8" stroke-width="1.2"'
_MARKER_STYLE = 'fill="#c03028" stroke="none"'


@dataclass(frozen=True)
class PortraitSummary:
    curves: int
    markers: int
    skipped: Tuple[Tuple[Tuple[float, ...], str], ...]
    path: str


def _grid_seeds(m: MapSpec, window, grid, projection, anchor) -> List[np.ndarray]:
    x0, x1, y0, y1 = window
    gx, gy = grid
    xs = np.linspace(x0 + 0.08 * (x1 - x0), x1 - 0.08 * (x1 - x0), gx)
    ys = np.linspace(y0 + 0.08 * (y1 - y0), y1 - 0.08 * (y1 - y0), gy)
    i, j = projection
    seeds = []
    for xv in xs:
        for yv in ys:
            p = anchor.copy()
            p[i], p[j] = xv, yv
            seeds.append(p)
    return seeds


def render_portrait(
    m: MapSpec,
    mu=None,
    window: Optional[Tuple[float, float, float, float]] = None,
    grid: Tuple[int, int] = (6, 6),
    markers: int = 40,
    cfg: Optional[IntegratorConfig] = None,
    out: str = "mapflow_portrait.svg",
    projection: Optional[Tuple[int, int]] = None,
    size: Tuple[int, int] = (640, 640),
) -> PortraitSummary:
    """Draw flow curves and discrete orbits for a grid of seeds.

    Portraits favour robustness over precision: the default integrator
    settings here are looser than the analysis defaults, and any seed
    that cannot be traced is skipped (and listed in the SVG metadata).
    """
    if window is None:
        if m.plot_window is None:
            raise ValueError(f"{m.label()} has no default plot window; pass one")
        window = m.plot_window
    proj = projection if projection is not None else (m.projection if m.n > 2 else (0, 1))
    cfg = cfg if cfg is not None else IntegratorConfig(
        rel_tol=1e-9, abs_tol=1e-9, horizon=200.0, max_returns=12)
    if m.known_fixed_points:
        anchor = m.known_fixed_points[0].astype(float).copy()
    else:
        anchor = np.ones(m.n)
    X = build_field(m, mu)
    i, j = proj

    x0, x1, y0, y1 = window
    W, H = size

    def to_px(pt2):
        px = (pt2[0] - x0) / (x1 - x0) * W
        py = H - (pt2[1] - y0) / (y1 - y0) * H
        return px, py

    def fmt(v):
        return f"{v:.3f}"

    curves: List[str] = []
    dots: List[str] = []
    skipped: List[Tuple[Tuple[float, ...], str]] = []

    for seed in _grid_seeds(m, window, grid, proj, anchor):
        if not m.domain(seed):
            skipped.append((tuple(round(float(c), 6) for c in seed), "outside_domain"))
            continue
        try:
            result, trace = trace_orbit(X, seed, cfg)
        except FlowError as exc:
            skipped.append((tuple(round(float(c), 6) for c in seed),
                            type(exc).__name__.replace("Error", "").lower()))
            continue
        except OutsideDomainError:
            skipped.append((tuple(round(float(c), 6) for c in seed), "outside_domain"))
            continue
        if result.classification is OrbitClass.CRITICAL_POINT:
            skipped.append((tuple(round(float(c), 6) for c in seed), "critical_point"))
            continue
        if trace.forward is None or trace.forward.sol is None:
            skipped.append((tuple(round(float(c), 6) for c in seed), "no_trajectory"))
            continue
        t_hi = result.period if result.is_periodic else trace.forward.t_end
        ts = np.linspace(0.0, t_hi, 400)
        ys = trace.forward.sol(ts)
        pts = np.stack([ys[i], ys[j]], axis=1)
        # break the polyline where it leaves a generous bounding frame
        in_frame = (
            (pts[:, 0] > x0 - (x1 - x0)) & (pts[:, 0] < x1 + (x1 - x0))
            & (pts[:, 1] > y0 - (y1 - y0)) & (pts[:, 1] < y1 + (y1 - y0))
            & np.all(np.isfinite(pts), axis=1)
        )
        run: List[str] = []
        for ok, pt in zip(in_frame, pts):
            if ok:
                px, py = to_px(pt)
                run.append(f"{fmt(px)},{fmt(py)}")
            elif len(run) > 1:
                curves.append(f'<polyline {_CURVE_STYLE} points="{" ".join(run)}"/>')
                run = []
            else:
                run = []
        if len(run) > 1:
            curves.append(f'<polyline {_CURVE_STYLE} points="{" ".join(run)}"/>')

        q = seed.copy()
        for _ in range(markers):
            pt = (float(q[i]), float(q[j]))
            if x0 <= pt[0] <= x1 and y0 <= pt[1] <= y1:
                px, py = to_px(pt)
                dots.append(f'<circle {_MARKER_STYLE} cx="{fmt(px)}" cy="{fmt(py)}" r="1.8"/>')
            try:
                q = m.step(q)
            except OutsideDomainError:
                break

    meta_lines = [f"map: {m.label()}", f"mu: {X.mu.name}",
                  f"window: {window}", f"projection: {proj}"]
    if m.diffeo_counterexample:
        meta_lines.append("note: non-diffeomorphism counterexample; "
                          "curves are level sets, not invariant components")
    if skipped:
        meta_lines.append("skipped seeds:")
        meta_lines.extend(f"  {s} [{reason}]" for s, reason in skipped)
    else:
        meta_lines.append("skipped seeds: none")
    meta = "\n".join(meta_lines)

    svg = "\n".join(
        [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}">',
            f"<!--\n{meta}\n-->",
            f'<rect width="{W}" height="{H}" fill="white"/>',
            *curves,
            *dots,
            "</svg>",
            "",
        ]
    )
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    return PortraitSummary(
        curves=len(curves),
        markers=len(dots),
        skipped=tuple(skipped),
        path=out,
    )
