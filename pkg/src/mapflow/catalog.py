"""Built-in map catalog.

Every entry ships closed-form first integrals with closed-form gradients,
candidate multipliers with their functional-equation class, the inverse
map, and the exact Jacobian.  All of these are cross-checked against
finite differences and against the defining functional equations in the
test suite; nothing here is trusted on authority.

Catalog
-------
``lyness``         (x, y) -> (y, (a+y)/x) on the open first quadrant.
``gumovski_mira``  (x, y) -> (y, -x + (B*y+C)/(y^2+A)); area preserving.
``kulenovic``      (x, y) -> (y, (a*y+b)/((c*y+d)*x)) on the first quadrant.
``tilde_lyness``   a deliberate non-diffeomorphism counterexample in the
                   plane; it satisfies the multiplier functional equation
                   yet no branch of its invariant hyperbolas is invariant,
                   so conclusions that need a diffeomorphism fail for it.
``todd``           (x, y, z) -> (y, z, (a+y+z)/x) on the open octant.
``hky_y1``         (x, y, z) -> (y, z, (y+1)(z+1)/(x(1+y+z))).
"""

from __future__ import annotations

from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from .maps import (
    MapSpec,
    MultiplierSpec,
    ScalarField,
    SigmaClass,
    constant_field,
    product_field,
)

__all__ = ["builtin", "available_maps"]


def _log_uniform_sampler(n: int, lo: float, hi: float,
                         pred: Optional[Callable] = None) -> Callable:
    """Seedable sampler, log-uniform per coordinate, with optional rejection."""
    def sample(rng: np.random.Generator) -> np.ndarray:
        for _ in range(10_000):
            p = np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))
            if pred is None or pred(p):
                return p
        raise RuntimeError("rejection sampling failed to find a domain point")
    return sample


def _box_sampler(lo: np.ndarray, hi: np.ndarray,
                 pred: Optional[Callable] = None) -> Callable:
    def sample(rng: np.random.Generator) -> np.ndarray:
        for _ in range(10_000):
            p = rng.uniform(lo, hi)
            if pred is None or pred(p):
                return p
        raise RuntimeError("rejection sampling failed to find a domain point")
    return sample


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


# ----------------------------------------------------------------------
# lyness: F(x, y) = (y, (a+y)/x)

def _build_lyness(params: Mapping[str, float], margin: float) -> MapSpec:
    a = float(params.get("a", 1.0))
    _require(a > 0, f"lyness requires a > 0, got a={a}")

    def forward(p):
        x, y = p[0], p[1]
        return np.array([y, (a + y) / x])

    def inverse(p):
        u, v = p[0], p[1]
        return np.array([(a + u) / v, u])

    def jac(p):
        x, y = p[0], p[1]
        return np.array([[0.0, 1.0], [-(a + y) / x**2, 1.0 / x]])

    def domain(p):
        return bool(np.all(p > margin)) and bool(np.all(np.isfinite(p)))

    V = ScalarField(
        name="V",
        fn=lambda p: (p[0] + 1) * (p[1] + 1) * (p[0] + p[1] + a) / (p[0] * p[1]),
        grad=lambda p: np.array(
            [
                (p[1] + 1) * (p[0] ** 2 - p[1] - a) / (p[0] ** 2 * p[1]),
                (p[0] + 1) * (p[1] ** 2 - p[0] - a) / (p[0] * p[1] ** 2),
            ]
        ),
    )
    xy = ScalarField(
        name="xy",
        fn=lambda p: p[0] * p[1],
        grad=lambda p: np.array([p[1], p[0]]),
    )

    xc = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * a))
    fixed = (np.array([xc, xc]),)

    return MapSpec(
        name="lyness",
        n=2,
        params={"a": a},
        domain=domain,
        forward=forward,
        inverse=inverse,
        jacobian=jac,
        integrals=(V,),
        multipliers=(MultiplierSpec(xy, SigmaClass.PLUS),),
        default_multiplier="xy",
        sample=_log_uniform_sampler(2, 0.1, 10.0),
        known_fixed_points=fixed,
        measure_power=1,
        default_box=(np.array([1.0, 1.0]), np.array([2.0, 2.0])),
        default_ray=(np.zeros(2), np.array([1.0, 1.0]), xc + 0.05, xc + 3.0),
        plot_window=(0.15, 7.0, 0.15, 7.0),
        guards=(lambda p: p[0], lambda p: p[1]),
    )


# ----------------------------------------------------------------------
# gumovski_mira: F(x, y) = (y, -x + (B*y + C)/(y^2 + A))

def _build_gumovski_mira(params: Mapping[str, float], margin: float) -> MapSpec:
    A = float(params.get("A", 1.0))
    B = float(params.get("B", 1.0))
    C = float(params.get("C", 0.0))
    _require(A != 0, "gumovski_mira with A = 0 has poles on y = 0; unsupported")

    annulus = A < 0
    if annulus:
        # Only the period-annulus subfamily (B, C) = (-2, 0) is supported
        # for negative A; its domain is the open region bounded by the
        # separatrix level through the four saddles.
        _require(
            B == -2.0 and C == 0.0,
            "gumovski_mira with A < 0 is supported only for B=-2, C=0",
        )
        _require(A < -1.0, f"gumovski_mira(A={A}, -2, 0) needs A < -1 "
                           "(the invariant annulus is empty otherwise)")
        a_par = np.sqrt(-A)
        s_par = np.sqrt(a_par**2 - 1.0)

    def forward(p):
        x, y = p[0], p[1]
        return np.array([y, -x + (B * y + C) / (y**2 + A)])

    def inverse(p):
        u, v = p[0], p[1]
        return np.array([(B * u + C) / (u**2 + A) - v, u])

    def jac(p):
        y = p[1]
        return np.array(
            [
                [0.0, 1.0],
                [-1.0, (B * (A - y**2) - 2.0 * C * y) / (y**2 + A) ** 2],
            ]
        )

    if annulus:
        def domain(p):
            x, y = p[0], p[1]
            if not np.all(np.isfinite(p)):
                return False
            if abs(x) >= s_par - margin:
                return False
            hi = (a_par * x + a_par**2 - 1.0) / (x + a_par)
            lo = (-a_par * x + a_par**2 - 1.0) / (x - a_par)
            return bool(lo + margin < y < hi - margin)
    else:
        def domain(p):
            return bool(np.all(np.isfinite(p)))

    V = ScalarField(
        name="V",
        fn=lambda p: (p[0] ** 2 * p[1] ** 2 + A * (p[0] ** 2 + p[1] ** 2)
                      - B * p[0] * p[1] - C * (p[0] + p[1])),
        grad=lambda p: np.array(
            [
                2.0 * p[0] * p[1] ** 2 + 2.0 * A * p[0] - B * p[1] - C,
                2.0 * p[0] ** 2 * p[1] + 2.0 * A * p[1] - B * p[0] - C,
            ]
        ),
    )

    multipliers = (
        MultiplierSpec(V, SigmaClass.PLUS),
        MultiplierSpec(constant_field(1.0, "one"), SigmaClass.PLUS),
    )

    # Fixed points solve 2 t^3 + (2A - B) t - C = 0 on the diagonal.
    roots = np.roots([2.0, 0.0, 2.0 * A - B, -C])
    fixed = tuple(
        np.array([r.real, r.real])
        for r in roots
        if abs(r.imag) < 1e-12 and domain(np.array([r.real, r.real]))
    )

    if annulus:
        lim = s_par - 2.0 * margin
        sampler = _box_sampler(np.array([-lim, -lim]), np.array([lim, lim]), domain)
        window = (-s_par, s_par, -s_par, s_par)
        box = None
        ray = None
        guards = (
            lambda p: s_par - p[0],
            lambda p: s_par + p[0],
            lambda p: (a_par * p[0] + a_par**2 - 1.0) / (p[0] + a_par) - p[1],
            lambda p: p[1] - (-a_par * p[0] + a_par**2 - 1.0) / (p[0] - a_par),
        )
    else:
        sampler = _box_sampler(np.array([-2.5, -2.5]), np.array([2.5, 2.5]), domain)
        window = (-3.0, 3.0, -3.0, 3.0)
        box = (np.array([0.5, 0.5]), np.array([1.5, 1.5]))
        ray = (np.zeros(2), np.array([1.0, 1.0]), 0.15, 1.5)
        guards = ()

    return MapSpec(
        name="gumovski_mira",
        n=2,
        params={"A": A, "B": B, "C": C},
        domain=domain,
        forward=forward,
        inverse=inverse,
        jacobian=jac,
        integrals=(V,),
        multipliers=multipliers,
        default_multiplier="V",
        sample=sampler,
        known_fixed_points=fixed,
        measure_power=1,
        default_box=box,
        default_ray=ray,
        plot_window=window,
        guards=guards,
    )


# ----------------------------------------------------------------------
# kulenovic: F(x, y) = (y, (a*y + b) / ((c*y + d) * x))

def _build_kulenovic(params: Mapping[str, float], margin: float) -> MapSpec:
    a = float(params.get("a", 1.0))
    b = float(params.get("b", 1.0))
    c = float(params.get("c", 1.0))
    d = float(params.get("d", 1.0))
    _require(min(a, b, c, d) > 0, "kulenovic requires a, b, c, d > 0")

    def forward(p):
        x, y = p[0], p[1]
        return np.array([y, (a * y + b) / ((c * y + d) * x)])

    def inverse(p):
        u, v = p[0], p[1]
        return np.array([(a * u + b) / ((c * u + d) * v), u])

    def jac(p):
        x, y = p[0], p[1]
        return np.array(
            [
                [0.0, 1.0],
                [-(a * y + b) / ((c * y + d) * x**2),
                 (a * d - b * c) / ((c * y + d) ** 2 * x)],
            ]
        )

    def domain(p):
        return bool(np.all(p > margin)) and bool(np.all(np.isfinite(p)))

    def V_fn(p):
        x, y = p[0], p[1]
        return ((d + c * x) * (d * x + a) * y**2
                + (a**2 + b * d + (a * c + d**2) * x**2) * y
                + (d * x + a) * (a * x + b)) / (x * y)

    def V_grad(p):
        x, y = p[0], p[1]
        gx = (d * (c * x**2 - a) * y**2
              + ((a * c + d**2) * x**2 - a**2 - b * d) * y
              + a * (d * x**2 - b)) / (x**2 * y)
        gy = (d * x + a) * ((d + c * x) * y**2 - (a * x + b)) / (x * y**2)
        return np.array([gx, gy])

    V = ScalarField(name="V", fn=V_fn, grad=V_grad)
    xy = ScalarField(
        name="xy",
        fn=lambda p: p[0] * p[1],
        grad=lambda p: np.array([p[1], p[0]]),
    )
    xy_V = product_field(xy, V, name="xy_V")

    multipliers = (
        MultiplierSpec(xy, SigmaClass.PLUS),
        MultiplierSpec(xy_V, SigmaClass.PLUS),
    )

    roots = np.roots([c, d, -a, -b])
    fixed = tuple(
        np.array([r.real, r.real])
        for r in roots
        if abs(r.imag) < 1e-12 and r.real > margin
    )
    xc = fixed[0][0] if fixed else 1.0

    return MapSpec(
        name="kulenovic",
        n=2,
        params={"a": a, "b": b, "c": c, "d": d},
        domain=domain,
        forward=forward,
        inverse=inverse,
        jacobian=jac,
        integrals=(V,),
        multipliers=multipliers,
        default_multiplier="xy",
        sample=_log_uniform_sampler(2, 0.1, 10.0),
        known_fixed_points=fixed,
        measure_power=1,
        default_box=(np.array([1.0, 1.0]), np.array([2.0, 2.0])),
        default_ray=(np.zeros(2), np.array([1.0, 1.0]), xc + 0.05, xc + 2.5),
        plot_window=(0.15, 7.0, 0.15, 7.0),
        guards=(lambda p: p[0], lambda p: p[1]),
    )


# ----------------------------------------------------------------------
# tilde_lyness: the planar counterexample F~(y, z)

def _build_tilde_lyness(params: Mapping[str, float], margin: float) -> MapSpec:
    a = float(params.get("a", 3.0))

    def forward(p):
        y, z = p[0], p[1]
        return np.array(
            [
                -(1.0 + y + z) / z,
                (1.0 + y + (2.0 - a) * z) / (z * (a + y + z)),
            ]
        )

    def inverse(p):
        u, v = p[0], p[1]
        z = ((a - 1.0) * (v + 1.0) + u) / (u * v)
        return np.array([-1.0 - (1.0 + u) * z, z])

    def jac(p):
        y, z = p[0], p[1]
        P = 1.0 + y + (2.0 - a) * z
        Q = z * (a + y + z)
        return np.array(
            [
                [-1.0 / z, (1.0 + y) / z**2],
                [(a - 1.0) * z * (1.0 + z) / Q**2,
                 ((2.0 - a) * Q - P * (a + y + 2.0 * z)) / Q**2],
            ]
        )

    def domain(p):
        y, z = p[0], p[1]
        return (bool(np.all(np.isfinite(p)))
                and abs(z) > margin
                and abs(a + y + z) > margin)

    H = ScalarField(
        name="H",
        fn=lambda p: (1.0 + p[0] + p[1]) * (p[0] + a - 1.0) / p[1],
        grad=lambda p: np.array(
            [
                (2.0 * p[0] + a + p[1]) / p[1],
                -(1.0 + p[0]) * (p[0] + a - 1.0) / p[1] ** 2,
            ]
        ),
    )
    z_zp1 = ScalarField(
        name="z_zp1",
        fn=lambda p: p[1] * (1.0 + p[1]),
        grad=lambda p: np.array([np.zeros_like(p[0]), 1.0 + 2.0 * p[1]]),
    )

    return MapSpec(
        name="tilde_lyness",
        n=2,
        params={"a": a},
        domain=domain,
        forward=forward,
        inverse=inverse,
        jacobian=jac,
        integrals=(H,),
        multipliers=(MultiplierSpec(z_zp1, SigmaClass.PLUS),),
        default_multiplier="z_zp1",
        sample=_log_uniform_sampler(2, 0.2, 5.0,
                                    pred=lambda p: abs(a + p[0] + p[1]) > 10 * margin),
        known_fixed_points=(),
        diffeo_counterexample=True,
        measure_power=1,
        default_box=None,
        default_ray=None,
        plot_window=(0.2, 6.0, 0.2, 6.0),
        guards=(lambda p: p[1], lambda p: a + p[0] + p[1]),
    )


# ----------------------------------------------------------------------
# todd: F(x, y, z) = (y, z, (a+y+z)/x)

def _build_todd(params: Mapping[str, float], margin: float) -> MapSpec:
    a = float(params.get("a", 1.0))
    _require(a > 0, f"todd requires a > 0, got a={a}")

    def forward(p):
        x, y, z = p[0], p[1], p[2]
        return np.array([y, z, (a + y + z) / x])

    def inverse(p):
        u, v, w = p[0], p[1], p[2]
        return np.array([(a + u + v) / w, u, v])

    def jac(p):
        x, y, z = p[0], p[1], p[2]
        return np.array(
            [
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [-(a + y + z) / x**2, 1.0 / x, 1.0 / x],
            ]
        )

    def domain(p):
        return bool(np.all(p > margin)) and bool(np.all(np.isfinite(p)))

    def V1_fn(p):
        x, y, z = p[0], p[1], p[2]
        return (x + 1) * (y + 1) * (z + 1) * (a + x + y + z) / (x * y * z)

    def V1_grad(p):
        x, y, z = p[0], p[1], p[2]
        return np.array(
            [
                (y + 1) * (z + 1) * (x**2 - a - y - z) / (x**2 * y * z),
                (x + 1) * (z + 1) * (y**2 - a - x - z) / (x * y**2 * z),
                (x + 1) * (y + 1) * (z**2 - a - x - y) / (x * y * z**2),
            ]
        )

    def V2_fn(p):
        x, y, z = p[0], p[1], p[2]
        return (1 + y + z) * (1 + x + y) * (a + x + y + z + x * z) / (x * y * z)

    def V2_grad(p):
        x, y, z = p[0], p[1], p[2]
        A_ = a + x + y + z + x * z
        B_ = 1 + y + z
        C_ = 1 + x + y
        gx = B_ * (x**2 * (1 + z) - (1 + y) * (a + y + z)) / (x**2 * y * z)
        gy = (y * A_ * (B_ + C_) + y * B_ * C_ - A_ * B_ * C_) / (x * y**2 * z)
        gz = C_ * (z**2 * (1 + x) - (1 + y) * (a + x + y)) / (x * y * z**2)
        return np.array([gx, gy, gz])

    V1 = ScalarField("V1", V1_fn, V1_grad)
    V2 = ScalarField("V2", V2_fn, V2_grad)

    def G_fn(p):
        x, y, z = p[0], p[1], p[2]
        return (-y**3 - (x + a + 1 + z) * y**2 - (a + x + z) * y
                + x**2 * z**2 + x * z + x**2 * z + x * z**2)

    def G_grad(p):
        x, y, z = p[0], p[1], p[2]
        return np.array(
            [
                -y**2 - y + 2 * x * z**2 + z + 2 * x * z + z**2,
                -3 * y**2 - 2 * (x + a + 1 + z) * y - (a + x + z),
                -y**2 - y + 2 * x**2 * z + x + x**2 + 2 * x * z,
            ]
        )

    G = ScalarField("G", G_fn, G_grad)

    xyz = ScalarField(
        name="xyz",
        fn=lambda p: p[0] * p[1] * p[2],
        grad=lambda p: np.array([p[1] * p[2], p[0] * p[2], p[0] * p[1]]),
    )

    def mu_tilde_fn(p):
        x, y, z = p[0], p[1], p[2]
        return -(x * y * z) ** 2 / G_fn(p)

    def mu_tilde_grad(p):
        x, y, z = p[0], p[1], p[2]
        s = (x * y * z) ** 2
        ds = np.array([2 * x * y**2 * z**2, 2 * x**2 * y * z**2, 2 * x**2 * y**2 * z])
        g = G_fn(p)
        return (s * G_grad(p) - g * ds) / g**2

    mu_tilde = ScalarField("mu_tilde", mu_tilde_fn, mu_tilde_grad)

    xc = 1.0 + np.sqrt(1.0 + a)

    return MapSpec(
        name="todd",
        n=3,
        params={"a": a},
        domain=domain,
        forward=forward,
        inverse=inverse,
        jacobian=jac,
        integrals=(V1, V2),
        multipliers=(
            MultiplierSpec(mu_tilde, SigmaClass.PLUS),
            MultiplierSpec(xyz, SigmaClass.MINUS),
            MultiplierSpec(G, SigmaClass.PLUS),
        ),
        default_multiplier="mu_tilde",
        sample=_log_uniform_sampler(3, 0.25, 4.0),
        known_fixed_points=(np.array([xc, xc, xc]),),
        measure_power=2,
        default_box=(np.ones(3), 2.0 * np.ones(3)),
        default_ray=(np.zeros(3), np.ones(3), xc + 0.05, xc + 2.0),
        plot_window=(0.2, 8.0, 0.2, 8.0),
        projection=(0, 1),
        guards=(lambda p: p[0], lambda p: p[1], lambda p: p[2]),
    )


# ----------------------------------------------------------------------
# hky_y1: F(x, y, z) = (y, z, (y+1)(z+1)/(x(1+y+z)))

def _build_hky_y1(params: Mapping[str, float], margin: float) -> MapSpec:
    _require(not params, "hky_y1 takes no parameters")

    def forward(p):
        x, y, z = p[0], p[1], p[2]
        return np.array([y, z, (y + 1) * (z + 1) / (x * (1 + y + z))])

    def inverse(p):
        u, v, w = p[0], p[1], p[2]
        return np.array([(u + 1) * (v + 1) / (w * (1 + u + v)), u, v])

    def jac(p):
        x, y, z = p[0], p[1], p[2]
        B = 1.0 + y + z
        return np.array(
            [
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [-(y + 1) * (z + 1) / (x**2 * B),
                 (z + 1) * z / (x * B**2),
                 (y + 1) * y / (x * B**2)],
            ]
        )

    def domain(p):
        return bool(np.all(p > margin)) and bool(np.all(np.isfinite(p)))

    # I1, I2 form a 2-cycle under composition: I1 o F = I2, I2 o F = I1.
    def I1_fn(p):
        x, y, z = p[0], p[1], p[2]
        return (1 + x + y + z + x * y + y * z + x * y * z) / (x * z)

    def I1_grad(p):
        x, y, z = p[0], p[1], p[2]
        return np.array(
            [
                -(1 + y) * (1 + z) / (x**2 * z),
                (1 + x) * (1 + z) / (x * z),
                -(1 + x) * (1 + y) / (x * z**2),
            ]
        )

    def I2_fn(p):
        x, y, z = p[0], p[1], p[2]
        return (1 + x + z + x * y + x * z + y * z) / y

    def I2_grad(p):
        x, y, z = p[0], p[1], p[2]
        return np.array(
            [
                (1 + y + z) / y,
                -(1 + x) * (1 + z) / y**2,
                (1 + x + y) / y,
            ]
        )

    I1 = ScalarField("I1", I1_fn, I1_grad)
    I2 = ScalarField("I2", I2_fn, I2_grad)

    V1 = ScalarField(
        name="V1",
        fn=lambda p: I1_fn(p) + I2_fn(p),
        grad=lambda p: np.asarray(I1_grad(p)) + np.asarray(I2_grad(p)),
    )
    V2 = ScalarField(
        name="V2",
        fn=lambda p: I1_fn(p) * I2_fn(p),
        grad=lambda p: (I2_fn(p) * np.asarray(I1_grad(p))
                        + I1_fn(p) * np.asarray(I2_grad(p))),
    )

    def G_fn(p):
        x, y, z = p[0], p[1], p[2]
        return (-(1 + x) * (1 + z) * y**2
                + (x**2 * z + (z**2 - 1) * x - (1 + z)) * y
                + x * z * (x + 1) * (z + 1))

    def G_grad(p):
        x, y, z = p[0], p[1], p[2]
        return np.array(
            [
                -(1 + z) * y**2 + (2 * x * z + z**2 - 1) * y + z * (z + 1) * (2 * x + 1),
                -2 * (1 + x) * (1 + z) * y + x**2 * z + (z**2 - 1) * x - (1 + z),
                -(1 + x) * y**2 + (x**2 + 2 * x * z - 1) * y + x * (x + 1) * (2 * z + 1),
            ]
        )

    G = ScalarField("G", G_fn, G_grad)
    xyz = ScalarField(
        name="xyz",
        fn=lambda p: p[0] * p[1] * p[2],
        grad=lambda p: np.array([p[1] * p[2], p[0] * p[2], p[0] * p[1]]),
    )

    roots = np.roots([2.0, 0.0, -2.0, -1.0])
    tc = float(max(r.real for r in roots if abs(r.imag) < 1e-12))
    fixed = (np.array([tc, tc, tc]),)

    return MapSpec(
        name="hky_y1",
        n=3,
        params={},
        domain=domain,
        forward=forward,
        inverse=inverse,
        jacobian=jac,
        integrals=(V1, V2),
        multipliers=(
            MultiplierSpec(xyz, SigmaClass.MINUS),
            MultiplierSpec(G, SigmaClass.PLUS),
        ),
        default_multiplier="xyz",
        sample=_log_uniform_sampler(3, 0.25, 4.0),
        known_fixed_points=fixed,
        named_fields={"I1": I1, "I2": I2},
        measure_power=2,
        default_box=(np.ones(3), 2.0 * np.ones(3)),
        default_ray=(np.zeros(3), np.ones(3), tc + 0.05, tc + 2.0),
        plot_window=(0.2, 6.0, 0.2, 6.0),
        projection=(0, 1),
        guards=(lambda p: p[0], lambda p: p[1], lambda p: p[2]),
    )


_BUILDERS: Dict[str, Callable[[Mapping[str, float], float], MapSpec]] = {
    "lyness": _build_lyness,
    "gumovski_mira": _build_gumovski_mira,
    "kulenovic": _build_kulenovic,
    "tilde_lyness": _build_tilde_lyness,
    "todd": _build_todd,
    "hky_y1": _build_hky_y1,
}


def available_maps() -> Tuple[str, ...]:
    """Names accepted by :func:`builtin`."""
    return tuple(sorted(_BUILDERS))


def builtin(name: str, margin: float = 1e-8, **params: float) -> MapSpec:
    """Construct a catalog map.

    Parameters
    ----------
    name
        One of :func:`available_maps`.
    margin
        Safety margin for the domain predicate: points closer than this
        to the boundary are treated as outside.
    **params
        Map parameters (e.g. ``a=2`` for lyness, ``A=1, B=1, C=0`` for
        gumovski_mira).  Unknown or invalid parameters raise ValueError.
    """
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(
            f"unknown map {name!r}; available: {', '.join(available_maps())}"
        ) from None
    if margin <= 0:
        raise ValueError("margin must be positive")
    spec = builder(params, margin)
    unknown = set(params) - set(spec.params)
    if unknown:
        raise ValueError(f"{name} does not take parameter(s) {sorted(unknown)}")
    return spec
