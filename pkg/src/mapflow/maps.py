"""Map bundles: a diffeomorphism together with everything we know about it.

A :class:`MapSpec` packages the forward/inverse maps, the closed-form
Jacobian, the first integrals, the candidate multipliers with their
claimed functional-equation class, known fixed points, and a seedable
domain sampler.  The concrete catalog lives in :mod:`mapflow.catalog`;
this module only defines the types and the generic operations on them.

Scalar data (integrals, multipliers) are :class:`ScalarField` objects
carrying a closed-form gradient next to the value, so downstream code
never has to differentiate symbolically and finite differences remain
available as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .linalg import det

__all__ = [
    "SigmaClass",
    "ScalarField",
    "MultiplierSpec",
    "MapSpec",
    "OutsideDomainError",
    "integral_values",
    "jacobian_det",
    "product_field",
    "constant_field",
]

Point = np.ndarray


class OutsideDomainError(ValueError):
    """A point fed to a checked map operation is outside the map's domain."""


class SigmaClass(str, Enum):
    """Functional-equation class of a multiplier under the map.

    ``PLUS``  : mu(F(p)) = det DF(p) * mu(p)
    ``MINUS`` : mu(F(p)) = -det DF(p) * mu(p)
    ``NONE``  : neither identity holds.
    """

    PLUS = "plus"
    MINUS = "minus"
    NONE = "none"

    def sign(self) -> int:
        if self is SigmaClass.PLUS:
            return 1
        if self is SigmaClass.MINUS:
            return -1
        raise ValueError("sign undefined for SigmaClass.NONE")


@dataclass(frozen=True)
class ScalarField:
    """A smooth scalar observable with a closed-form gradient.

    ``fn`` and ``grad`` take a bare ndarray.  The arithmetic in the
    catalog is written component-wise, so ``fn`` transparently broadcasts
    over points stacked in trailing axes (shape ``(n, k)``), which the
    Monte Carlo measure check exploits.
    """

    name: str
    fn: Callable[[Point], float]
    grad: Callable[[Point], Point]

    def __call__(self, p) -> float:
        return self.fn(np.asarray(p, dtype=float))

    def gradient(self, p) -> Point:
        return np.asarray(self.grad(np.asarray(p, dtype=float)), dtype=float)


def constant_field(value: float, name: Optional[str] = None) -> ScalarField:
    """The constant scalar field p -> value."""
    label = name if name is not None else f"{value:g}"
    return ScalarField(
        name=label,
        fn=lambda p, _v=value: _v if p.ndim == 1 else np.full(p.shape[1:], _v),
        grad=lambda p, _z=value: np.zeros_like(p, dtype=float),
    )


def product_field(f: ScalarField, g: ScalarField, name: Optional[str] = None) -> ScalarField:
    """Pointwise product f*g with the product-rule gradient."""
    return ScalarField(
        name=name if name is not None else f"{f.name}*{g.name}",
        fn=lambda p: f.fn(p) * g.fn(p),
        grad=lambda p: np.asarray(g.fn(p) * np.asarray(f.grad(p), dtype=float)
                                  + f.fn(p) * np.asarray(g.grad(p), dtype=float)),
    )


@dataclass(frozen=True)
class MultiplierSpec:
    """A candidate multiplier and the class it is claimed to belong to."""

    field: ScalarField
    claimed_class: SigmaClass

    @property
    def name(self) -> str:
        return self.field.name


@dataclass(frozen=True)
class MapSpec:
    """A diffeomorphism of an open domain of R^n with its integrable data.

    Attributes
    ----------
    name, n, params
        Identity of the map: catalog name, ambient dimension, parameters.
    domain
        Predicate with a safety margin already baked in; ``forward``,
        ``inverse`` and ``jacobian`` are raw callables that do *not*
        check it (the checked entry points are :meth:`step`,
        :meth:`back`, :func:`integral_values`, :func:`jacobian_det`).
    integrals
        n-1 functionally independent first integrals.
    multipliers
        Candidate multipliers with claimed classes; ``default_multiplier``
        names the one used when callers do not choose.
    known_fixed_points
        Fixed points inside the domain (possibly empty).
    sample
        Seedable sampler returning one domain point per call.
    diffeo_counterexample
        True for catalog entries that deliberately fail to be
        diffeomorphisms of any invariant open set; analysis tools still
        run, but reports must label diffeomorphism-based conclusions as
        inapplicable.
    measure_power
        Smallest k with det D(F^k) > 0 throughout the domain, i.e. the
        iterate whose Jacobian factor in the change of variables is
        orientation-consistent; used by the invariant-measure check.
    default_box
        A box (lo, hi) well inside the domain, used as the default region
        for measure checks.
    default_ray
        (base, direction, s_min, s_max) describing a transversal seed ray
        for level sweeps, or None.
    plot_window
        (xmin, xmax, ymin, ymax) for portraits, in the projected plane.
    projection
        Coordinate pair used to draw n > 2 maps.
    guards
        Scalar functions, nonzero throughout the domain, that vanish
        exactly on its excluded boundary pieces.  Trajectory integrators
        watch their signs between steps: a flip means the path crossed a
        boundary that pointwise domain checks can step straight over.
    """

    name: str
    n: int
    params: Mapping[str, float]
    domain: Callable[[Point], bool]
    forward: Callable[[Point], Point]
    inverse: Callable[[Point], Point]
    jacobian: Callable[[Point], Point]
    integrals: Tuple[ScalarField, ...]
    multipliers: Tuple[MultiplierSpec, ...]
    default_multiplier: str
    sample: Callable[[np.random.Generator], Point]
    known_fixed_points: Tuple[Point, ...] = ()
    named_fields: Mapping[str, ScalarField] = field(default_factory=dict)
    diffeo_counterexample: bool = False
    measure_power: int = 1
    default_box: Optional[Tuple[Point, Point]] = None
    default_ray: Optional[Tuple[Point, Point, float, float]] = None
    plot_window: Optional[Tuple[float, float, float, float]] = None
    projection: Tuple[int, int] = (0, 1)
    guards: Tuple[Callable[[Point], float], ...] = ()

    # -- checked entry points -------------------------------------------

    def _require_inside(self, p: Point) -> Point:
        q = np.asarray(p, dtype=float)
        if q.shape != (self.n,):
            raise ValueError(f"{self.name} expects points of shape ({self.n},), got {q.shape}")
        if not self.domain(q):
            raise OutsideDomainError(f"point {q.tolist()} is outside the domain of {self.label()}")
        return q

    def step(self, p) -> Point:
        """Apply F once, checking the domain first."""
        return np.asarray(self.forward(self._require_inside(p)), dtype=float)

    def back(self, p) -> Point:
        """Apply the inverse once, checking the domain first."""
        return np.asarray(self.inverse(self._require_inside(p)), dtype=float)

    def iterate(self, p, k: int) -> Point:
        """Apply F^k (k may be negative) with a domain check at every stop."""
        q = np.asarray(p, dtype=float)
        stepper = self.step if k >= 0 else self.back
        for _ in range(abs(int(k))):
            q = stepper(q)
        # the final point must still be usable by callers
        self._require_inside(q)
        return q

    def multiplier(self, name: Optional[str] = None) -> MultiplierSpec:
        """Look up a multiplier by name (default: the map's default)."""
        wanted = self.default_multiplier if name is None else name
        for spec in self.multipliers:
            if spec.name == wanted:
                return spec
        known = ", ".join(s.name for s in self.multipliers)
        raise KeyError(f"{self.label()} has no multiplier {wanted!r} (known: {known})")

    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.name}({inner})"


def integral_values(m: MapSpec, p) -> np.ndarray:
    """Values of the n-1 first integrals at p (domain-checked)."""
    q = m._require_inside(p)
    return np.array([v.fn(q) for v in m.integrals])


def jacobian_det(m: MapSpec, p) -> float:
    """det DF(p) from the closed-form Jacobian (domain-checked)."""
    q = m._require_inside(p)
    return det(np.asarray(m.jacobian(q), dtype=float))
