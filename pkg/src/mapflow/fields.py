"""Vector fields attached to integrable maps, and the functional equations.

For a map F of an open U in R^n with first integrals V_1, ..., V_{n-1}
and a scalar multiplier mu, the associated field is

    n = 2 :  X = mu * (-dV/dy, dV/dx)
    n > 2 :  X = mu * (grad V_1 x ... x grad V_{n-1})

Two pointwise identities tie the field to the map and are checked here
numerically rather than assumed:

    condition mu :  mu(F(p)) = det DF(p) * mu(p)
    condition X  :  X(F(p))  = DF(p) X(p)

For a diffeomorphism with the given integrals the two are equivalent;
the catalog's ``tilde_lyness`` entry shows the equivalence is about the
functional equation only and implies nothing dynamical when F fails to
be a diffeomorphism onto an invariant set.

Multipliers on the "minus" branch (mu o F = -det DF * mu) become plain
multipliers for F composed with itself; :func:`sigma_combine` tracks the
sign bookkeeping when multiplying powers of known multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .linalg import cross, det
from .maps import MapSpec, MultiplierSpec, ScalarField, SigmaClass

__all__ = [
    "VectorFieldSpec",
    "Residual",
    "ClassificationReport",
    "DerivedMultiplier",
    "MeasureComparison",
    "build_field",
    "check_condition_X",
    "check_condition_mu",
    "classify_multiplier",
    "sigma_combine",
    "check_invariant_measure",
]


@dataclass(frozen=True)
class Residual:
    """Absolute residual together with the scale it should be judged on."""

    value: float
    scale: float

    @property
    def relative(self) -> float:
        return self.value / max(1.0, self.scale)

    def __repr__(self) -> str:
        return f"Residual(value={self.value:.3e}, scale={self.scale:.3e}, relative={self.relative:.3e})"


@dataclass(frozen=True)
class VectorFieldSpec:
    """The field mu * (cross of integral gradients) for one map."""

    map: MapSpec
    mu: ScalarField

    def __call__(self, p) -> np.ndarray:
        q = np.asarray(p, dtype=float)
        grads = [np.asarray(v.grad(q), dtype=float) for v in self.map.integrals]
        if self.map.n == 2:
            g = grads[0]
            w = np.array([-g[1], g[0]])
        else:
            w = cross(*grads)
        return self.mu.fn(q) * w

    @property
    def name(self) -> str:
        return f"X[{self.map.label()}, mu={self.mu.name}]"


def build_field(m: MapSpec, mu: Union[None, str, ScalarField, MultiplierSpec] = None) -> VectorFieldSpec:
    """Construct the field associated with map m and multiplier mu.

    ``mu`` may be a multiplier name from the catalog entry, a bare
    :class:`ScalarField`, a :class:`MultiplierSpec`, or None for the
    map's default multiplier.
    """
    if mu is None or isinstance(mu, str):
        mu_field = m.multiplier(mu).field
    elif isinstance(mu, MultiplierSpec):
        mu_field = mu.field
    elif isinstance(mu, ScalarField):
        mu_field = mu
    else:
        raise TypeError(f"mu must be None, str, ScalarField or MultiplierSpec, got {type(mu)}")
    return VectorFieldSpec(map=m, mu=mu_field)


def _chain(m: MapSpec, p, power: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """q = F^power(p), the chain-rule Jacobian D(F^power)(p), and its det."""
    if power < 1:
        raise ValueError("power must be a positive integer")
    q = m._require_inside(np.asarray(p, dtype=float))
    J = np.eye(m.n)
    d = 1.0
    for _ in range(power):
        Jstep = np.asarray(m.jacobian(q), dtype=float)
        J = Jstep @ J
        d *= det(Jstep)
        q = m.step(q)
    return q, J, d


def check_condition_mu(m: MapSpec, mu: ScalarField, p, power: int = 1) -> Residual:
    """Residual of mu(F^k(p)) = det D(F^k)(p) * mu(p) for k = power."""
    p = np.asarray(p, dtype=float)
    q, _, d = _chain(m, p, power)
    lhs = float(mu.fn(q))
    rhs = d * float(mu.fn(p))
    return Residual(value=abs(lhs - rhs), scale=max(abs(lhs), abs(rhs)))


def check_condition_X(m: MapSpec, X: VectorFieldSpec, p, power: int = 1) -> Residual:
    """Residual of X(F^k(p)) = D(F^k)(p) X(p) for k = power."""
    p = np.asarray(p, dtype=float)
    q, J, _ = _chain(m, p, power)
    lhs = X(q)
    rhs = J @ X(p)
    value = float(np.linalg.norm(lhs - rhs))
    scale = float(max(np.linalg.norm(lhs), np.linalg.norm(rhs)))
    return Residual(value=value, scale=scale)


@dataclass(frozen=True)
class ClassificationReport:
    """Outcome of sampling-based multiplier classification.

    ``verdict`` is unanimous over the points that carried information;
    points where both sides of the identity are below the information
    floor are skipped and counted in ``n_skipped``.
    """

    verdict: SigmaClass
    n_samples: int
    n_used: int
    n_skipped: int
    max_residual_plus: float
    max_residual_minus: float
    threshold: float

    @property
    def quorum(self) -> float:
        return self.n_used / self.n_samples if self.n_samples else 0.0


def classify_multiplier(
    m: MapSpec,
    mu: ScalarField,
    samples: int = 400,
    seed: int = 0,
    power: int = 1,
    threshold: float = 1e-8,
    info_floor: float = 1e-12,
) -> ClassificationReport:
    """Decide empirically whether mu(F^k) = +/- det D(F^k) * mu.

    Draws ``samples`` domain points from the map's sampler and demands a
    unanimous verdict on every informative point.  Points where both
    |mu(F^k(p))| and |det * mu(p)| fall below ``info_floor`` cannot
    distinguish the classes and are skipped (they are reported so callers
    can judge the quorum).
    """
    rng = np.random.default_rng(seed)
    used = skipped = 0
    max_plus = max_minus = 0.0
    for _ in range(samples):
        p = m.sample(rng)
        q, _, d = _chain(m, p, power)
        lhs = float(mu.fn(q))
        rhs = d * float(mu.fn(p))
        scale = max(abs(lhs), abs(rhs))
        if scale < info_floor:
            skipped += 1
            continue
        used += 1
        denom = max(1.0, scale)
        max_plus = max(max_plus, abs(lhs - rhs) / denom)
        max_minus = max(max_minus, abs(lhs + rhs) / denom)
    if used and max_plus <= threshold:
        verdict = SigmaClass.PLUS
    elif used and max_minus <= threshold:
        verdict = SigmaClass.MINUS
    else:
        verdict = SigmaClass.NONE
    return ClassificationReport(
        verdict=verdict,
        n_samples=samples,
        n_used=used,
        n_skipped=skipped,
        max_residual_plus=max_plus,
        max_residual_minus=max_minus,
        threshold=threshold,
    )


@dataclass(frozen=True)
class DerivedMultiplier:
    """A multiplier produced by :func:`sigma_combine`.

    ``plus_power`` is the smallest iterate k for which the derived field
    is a plain ("plus") multiplier of F^k: 1 when the sign bookkeeping
    lands on the plus branch, 2 when it lands on the minus branch.
    """

    field: ScalarField
    sigma_class: SigmaClass
    plus_power: int


def sigma_combine(
    entries: Sequence[Union[MultiplierSpec, Tuple[ScalarField, SigmaClass]]],
    exponents: Sequence[int],
    integral: Optional[ScalarField] = None,
) -> DerivedMultiplier:
    """Combine known multipliers into a new one: prod mu_i^e_i (* integral).

    Each entry satisfies mu_i(F(p)) = s_i det DF(p) mu_i(p) with
    s_i = +1 or -1, so the product transforms with det^(sum e_i) times
    prod s_i^e_i.  A multiplier needs the determinant to enter linearly,
    hence ``sum(exponents) == 1`` is required; multiplying by a first
    integral leaves the class unchanged.
    """
    pairs = []
    for entry in entries:
        if isinstance(entry, MultiplierSpec):
            pairs.append((entry.field, entry.claimed_class))
        else:
            fld, cls = entry
            pairs.append((fld, SigmaClass(cls)))
    if len(pairs) != len(exponents):
        raise ValueError("entries and exponents must have equal length")
    if not pairs:
        raise ValueError("need at least one entry")
    exps = [int(e) for e in exponents]
    if sum(exps) != 1:
        raise ValueError(
            f"exponents must sum to 1 for the determinant to enter linearly, got {sum(exps)}"
        )
    sign = 1
    for (_, cls), e in zip(pairs, exps):
        if cls is SigmaClass.NONE:
            raise ValueError("cannot combine a multiplier of class 'none'")
        sign *= cls.sign() ** (e % 2)

    name_parts = []
    for (fld, _), e in zip(pairs, exps):
        name_parts.append(fld.name if e == 1 else f"{fld.name}^{e}")
    if integral is not None:
        name_parts.append(integral.name)
    name = "*".join(name_parts)

    factors = [(fld, e) for (fld, _), e in zip(pairs, exps)]
    if integral is not None:
        factors.append((integral, 1))

    def fn(p):
        v = 1.0
        for fld, e in factors:
            base = fld.fn(p)
            if e < 0 and base == 0.0:
                raise ZeroDivisionError(
                    f"multiplier {fld.name} vanishes where the combination needs 1/{fld.name}"
                )
            v = v * base ** e
        return v

    def grad(p):
        v = 1.0
        g = np.zeros_like(np.asarray(p, dtype=float))
        for fld, e in factors:
            base = fld.fn(p)
            gbase = np.asarray(fld.grad(p), dtype=float)
            if e < 0 and base == 0.0:
                raise ZeroDivisionError(
                    f"multiplier {fld.name} vanishes where the combination needs 1/{fld.name}"
                )
            g = g * base ** e + v * e * base ** (e - 1) * gbase
            v = v * base ** e
        return g

    derived = ScalarField(name=name, fn=fn, grad=grad)
    cls = SigmaClass.PLUS if sign > 0 else SigmaClass.MINUS
    return DerivedMultiplier(
        field=derived,
        sigma_class=cls,
        plus_power=1 if sign > 0 else 2,
    )


@dataclass(frozen=True)
class MeasureComparison:
    """Monte Carlo comparison of a box mass with its preimage mass."""

    mass_box: float
    mass_preimage: float
    stderr_box: float
    stderr_preimage: float
    n_samples: int
    power: int
    covering_box: Tuple[np.ndarray, np.ndarray]

    @property
    def z_score(self) -> float:
        spread = np.hypot(self.stderr_box, self.stderr_preimage)
        return abs(self.mass_box - self.mass_preimage) / spread if spread > 0 else np.inf

    @property
    def agrees(self) -> bool:
        return self.z_score <= 3.0


def _boundary_grid(lo: np.ndarray, hi: np.ndarray, per_face: int = 12) -> np.ndarray:
    """Points covering the boundary of a box, stacked as rows."""
    n = lo.size
    axes = [np.linspace(lo[i], hi[i], per_face) for i in range(n)]
    pts = []
    for i in range(n):
        for val in (lo[i], hi[i]):
            mesh = np.meshgrid(*[axes[j] for j in range(n) if j != i], indexing="ij")
            face = np.stack([g.ravel() for g in mesh], axis=1)
            col = np.full((face.shape[0], 1), val)
            pts.append(np.hstack([face[:, :i], col, face[:, i:]]))
    return np.vstack(pts)


def _require_mu_bounded_away_from_zero(mu: ScalarField, lo: np.ndarray,
                                       hi: np.ndarray, per_axis: int = 9) -> None:
    """Reject boxes on which the density 1/mu is not integrable.

    The probe is a lattice over the box (odd per-axis count, so the center
    is included): any sign change, non-finite value, or value tiny
    relative to the lattice median marks a zero of mu inside or touching
    the box."""
    axes = [np.linspace(lo[i], hi[i], per_axis) for i in range(lo.size)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=0)
    with np.errstate(all="ignore"):
        vals = np.asarray(mu.fn(pts), dtype=float)
    bad = (not np.all(np.isfinite(vals))) \
        or float(vals.max()) > 0.0 > float(vals.min()) \
        or float(np.min(np.abs(vals))) <= 1e-3 * float(np.median(np.abs(vals)))
    if bad:
        raise ValueError(
            f"multiplier {mu.name} vanishes on (or too close to) the box; "
            "the density 1/mu is not integrable there — choose a box away "
            "from the zero set of mu")


def check_invariant_measure(
    m: MapSpec,
    mu: ScalarField,
    box: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    n_samples: int = 1_000_000,
    seed: int = 0,
    power: Optional[int] = None,
) -> MeasureComparison:
    """Monte Carlo check that the density 1/mu gives an invariant measure.

    Compares the nu-mass of a box B with the nu-mass of F^(-k)(B), where
    k defaults to the map's ``measure_power`` (the iterate with positive
    Jacobian determinant throughout the domain, so that the sign carried
    by det in the change of variables is consistent).  The two masses are
    estimated from *independent* sample streams: plain Monte Carlo over B,
    and hit-or-miss Monte Carlo over a covering box of the preimage built
    from the inverse map alone.  Agreement is judged at three combined
    standard errors by the caller via :attr:`MeasureComparison.agrees`.
    """
    if box is None:
        if m.default_box is None:
            raise ValueError(f"{m.label()} has no default measure box; pass one explicitly")
        box = m.default_box
    lo = np.asarray(box[0], dtype=float)
    hi = np.asarray(box[1], dtype=float)
    if lo.shape != (m.n,) or hi.shape != (m.n,) or np.any(hi <= lo):
        raise ValueError("box must be (lo, hi) arrays with hi > lo componentwise")
    k = m.measure_power if power is None else int(power)
    _require_mu_bounded_away_from_zero(mu, lo, hi)

    # Covering box of F^(-k)(B): image of a boundary grid, inflated.
    bnd = _boundary_grid(lo, hi)
    pre = np.empty_like(bnd)
    for i, row in enumerate(bnd):
        q = row
        for _ in range(k):
            q = np.asarray(m.inverse(q), dtype=float)
        pre[i] = q
    w_lo = pre.min(axis=0)
    w_hi = pre.max(axis=0)
    pad = 0.05 * (w_hi - w_lo)
    w_lo, w_hi = w_lo - pad, w_hi + pad

    stream_box, stream_pre = np.random.SeedSequence(seed).spawn(2)
    rng_box = np.random.default_rng(stream_box)
    rng_pre = np.random.default_rng(stream_pre)

    # Mass of B: vol(B) * E[nu] over uniform samples in B.
    u = rng_box.uniform(lo, hi, size=(n_samples, m.n)).T
    with np.errstate(all="ignore"):
        nu_u = 1.0 / np.asarray(mu.fn(u), dtype=float)
    if not np.all(np.isfinite(nu_u)):
        raise ValueError("1/mu is singular inside the box; choose a box away from zeros of mu")
    vol_b = float(np.prod(hi - lo))
    mass_b = vol_b * float(np.mean(nu_u))
    se_b = vol_b * float(np.std(nu_u)) / np.sqrt(n_samples)

    # Mass of F^(-k)(B): vol(W) * E[nu * 1_B(F^k)] over uniform samples in W.
    w = rng_pre.uniform(w_lo, w_hi, size=(n_samples, m.n)).T
    img = w
    with np.errstate(all="ignore"):
        for _ in range(k):
            img = np.asarray(m.forward(img), dtype=float)
        inside = np.all(np.isfinite(img), axis=0)
        inside &= np.all((img >= lo[:, None]) & (img <= hi[:, None]), axis=0)
        nu_w = np.zeros(n_samples)
        nu_raw = 1.0 / np.asarray(mu.fn(w), dtype=float)
    nu_w[inside] = nu_raw[inside]
    if not np.all(np.isfinite(nu_w)):
        raise ValueError("1/mu is singular inside the preimage region")
    vol_w = float(np.prod(w_hi - w_lo))
    mass_w = vol_w * float(np.mean(nu_w))
    se_w = vol_w * float(np.std(nu_w)) / np.sqrt(n_samples)

    return MeasureComparison(
        mass_box=mass_b,
        mass_preimage=mass_w,
        stderr_box=se_b,
        stderr_preimage=se_w,
        n_samples=n_samples,
        power=k,
        covering_box=(w_lo, w_hi),
    )
