import math

import numpy as np
import pytest

import mapflow as mf
from mapflow import (
    HyperbolicFixedPointError,
    IntegratorConfig,
    MapSpec,
    MultiplierSpec,
    NearCriticalError,
    NonClosureError,
    NotInvariantError,
    NotStarShapedError,
    ScalarField,
    SeedRay,
    SigmaClass,
    SweepRow,
    constant_field,
)


def field_for(name, **params):
    m = mf.builtin(name, **params)
    return m, mf.build_field(m)


def translation_map(c=0.4):
    """x -> x + c: the time-(-c) map of the constant field X = (-1, 0)
    derived from V = y with mu = 1.  Every orbit is an open line, so the
    flow route finds a flight time but never a period."""
    height = ScalarField(name="height", fn=lambda p: p[1],
                         grad=lambda p: np.array([0.0, 1.0]))
    return MapSpec(
        name="shift",
        n=2,
        params={"c": c},
        domain=lambda p: True,
        forward=lambda p: np.array([p[0] + c, p[1]]),
        inverse=lambda p: np.array([p[0] - c, p[1]]),
        jacobian=lambda p: np.eye(2),
        integrals=(height,),
        multipliers=(MultiplierSpec(field=constant_field(1.0, name="one"),
                                    claimed_class=SigmaClass.PLUS),),
        default_multiplier="one",
        sample=lambda rng: rng.uniform(-1.0, 1.0, size=2),
    )


# -- flow route ---------------------------------------------------------


@pytest.mark.parametrize("seed", [(1.0, 1.0), (1.0, 3.0), (0.5, 2.5)])
def test_lyness_a1_rho_is_one_fifth(seed):
    # every orbit of the a=1 map is 5-periodic, so rho = 1/5 on all levels
    m, X = field_for("lyness", a=1.0)
    data = mf.flow_rotation_data(X, m, np.array(seed))
    assert data.rho == pytest.approx(0.2, abs=1e-9)
    assert data.multiplicity == 1
    assert data.period > 0
    assert data.tau < 0  # the map steps against the field's orientation
    assert data.rho == pytest.approx(abs(data.tau) / data.period, abs=0)


def test_todd_squared_rho_is_one_quarter():
    # (F^2)^4 = id for a=1, so the second iterate rotates by exactly 1/4
    m, X = field_for("todd", a=1.0)
    rng = np.random.default_rng(3)
    for _ in range(2):
        data = mf.flow_rotation_data(X, m, m.sample(rng))
        assert data.multiplicity == 2
        assert data.rho == pytest.approx(0.25, abs=1e-9)


def test_flow_matches_birkhoff_lyness():
    m, X = field_for("lyness", a=2.0)
    p = np.array([1.0, 3.0])
    rho_flow = mf.rotation_number_flow(X, m, p)
    rho_birk = mf.rotation_number_birkhoff(m, p)
    assert abs(rho_flow - rho_birk) <= 1e-4


def test_flow_matches_birkhoff_todd_second_iterate():
    m, X = field_for("todd", a=1.0)
    p = m.sample(np.random.default_rng(11))
    data = mf.flow_rotation_data(X, m, p)
    rho_birk = mf.rotation_number_birkhoff(m, p, power=data.multiplicity)
    assert abs(data.rho - rho_birk) <= 1e-4


def test_rho_stays_in_half_open_unit_half():
    for name, params, seed in [
        ("lyness", {"a": 2.0}, (1.0, 3.0)),
        ("kulenovic", {"a": 1.0, "b": 1.0, "c": 1.0, "d": 1.0}, (1.0, 2.0)),
        ("gumovski_mira", {"A": -4.0, "B": -2.0, "C": 0.0}, (0.3, 0.1)),
    ]:
        m, X = field_for(name, **params)
        rho = mf.rotation_number_flow(X, m, np.array(seed))
        assert 0.0 < rho <= 0.5


# -- linearization route ------------------------------------------------


@pytest.mark.parametrize(
    "name, params, expected",
    [
        ("lyness", {"a": 1.0}, 0.2),
        ("lyness", {"a": 2.0}, math.acos(0.25) / (2.0 * math.pi)),
        ("gumovski_mira", {"A": 3.0, "B": -2.0, "C": 0.0}, 0.3040867239846963),
        ("kulenovic", {"a": 1.0, "b": 1.0, "c": 1.0, "d": 1.0}, 0.25),
        ("todd", {"a": 1.0}, 0.125),
        ("hky_y1", {}, 0.14842865493520188),
    ],
)
def test_fixed_point_rotation_frozen_values(name, params, expected):
    m = mf.builtin(name, **params)
    assert mf.fixed_point_rotation(m) == pytest.approx(expected, abs=1e-12)


def test_flow_rho_tends_to_fixed_point_rotation():
    m, X = field_for("lyness", a=2.0)
    fp = m.known_fixed_points[0]
    reference = mf.fixed_point_rotation(m)
    rho = mf.rotation_number_flow(X, m, fp + 1e-2)
    assert abs(rho - reference) <= 1e-6


def test_fixed_point_rotation_hyperbolic():
    m = mf.builtin("gumovski_mira", A=1.0, B=-2.0, C=0.0)
    with pytest.raises(HyperbolicFixedPointError, match="hyperbolic"):
        mf.fixed_point_rotation(m)


def test_fixed_point_rotation_rejects_non_fixed_point():
    m = mf.builtin("lyness", a=2.0)
    with pytest.raises(ValueError, match="not a fixed point"):
        mf.fixed_point_rotation(m, (1.0, 3.0))


def test_fixed_point_rotation_needs_a_point():
    with pytest.raises(ValueError, match="no catalogued fixed point"):
        mf.fixed_point_rotation(mf.builtin("tilde_lyness"))


# -- Birkhoff route -----------------------------------------------------


def test_birkhoff_rejects_center_on_orbit():
    m = mf.builtin("lyness", a=2.0)
    with pytest.raises(NotStarShapedError, match="center"):
        mf.rotation_number_birkhoff(m, (1.0, 3.0), center=(1.0, 3.0))


def test_birkhoff_iteration_budget_validated():
    m = mf.builtin("lyness", a=2.0)
    with pytest.raises(ValueError, match="iterations"):
        mf.rotation_number_birkhoff(m, (1.0, 3.0), iterations=5)


# -- error paths of the flow route --------------------------------------


def test_non_invariant_component_is_reported():
    m, X = field_for("tilde_lyness")
    with pytest.raises(NotInvariantError, match="not invariant"):
        mf.flow_rotation_data(X, m, np.array([1.0, 1.0]))


def test_critical_seed_has_no_rotation_number():
    m, X = field_for("lyness", a=2.0)
    with pytest.raises(NearCriticalError, match="critical"):
        mf.flow_rotation_data(X, m, m.known_fixed_points[0])


def test_open_component_has_flight_time_but_no_period():
    m = translation_map(c=0.4)
    X = mf.build_field(m)
    cfg = IntegratorConfig(horizon=50.0)
    with pytest.raises(NonClosureError, match="open"):
        mf.flow_rotation_data(X, m, np.array([0.0, 1.0]), cfg)


# -- seed rays -----------------------------------------------------------


def test_seed_ray_points():
    ray = SeedRay(np.zeros(2), np.array([1.0, 2.0]), 1.0, 2.0)
    pts = ray.points(3)
    assert pts.shape == (3, 2)
    np.testing.assert_allclose(pts[0], [1.0, 2.0])
    np.testing.assert_allclose(pts[-1], [2.0, 4.0])


def test_seed_ray_validation():
    with pytest.raises(ValueError, match="nonzero"):
        SeedRay(np.zeros(2), np.zeros(2), 0.0, 1.0)
    with pytest.raises(ValueError, match="s_min"):
        SeedRay(np.zeros(2), np.ones(2), 2.0, 1.0)
    with pytest.raises(ValueError, match="count"):
        SeedRay(np.zeros(2), np.ones(2), 0.0, 1.0).points(0)


# -- sweeps ---------------------------------------------------------------


def test_sweep_lyness_levels():
    m = mf.builtin("lyness", a=2.0)
    rows = mf.sweep(m, count=8)
    assert len(rows) == 8
    assert all(r.status == "ok" for r in rows)
    hs = [r.h[0] for r in rows]
    assert hs == sorted(hs)
    assert all(r.multiplicity == 1 for r in rows)
    assert all(r.tau < 0 for r in rows)
    assert all(0.0 < r.rho <= 0.5 for r in rows)
    assert all(max(r.res_mu, r.res_X, r.res_V) <= 1e-8 for r in rows)
    # levels further out rotate slower for this parameter value
    rhos = [r.rho for r in rows]
    assert all(a > b for a, b in zip(rhos, rhos[1:]))


def test_sweep_is_deterministic():
    m = mf.builtin("lyness", a=2.0)
    first = mf.sweep(m, count=5)
    second = mf.sweep(m, count=5)
    assert [r.rho for r in first] == [r.rho for r in second]
    assert [r.period for r in first] == [r.period for r in second]


def test_sweep_three_dimensional_levels():
    m = mf.builtin("todd", a=1.0)
    rows = mf.sweep(m, count=3)
    assert len(rows) == 3
    assert all(len(r.h) == 2 for r in rows)
    assert all(r.status == "ok" for r in rows)
    assert all(r.multiplicity == 2 for r in rows)
    assert [r.h for r in rows] == sorted(r.h for r in rows)


def test_sweep_keeps_failed_levels():
    m = mf.builtin("lyness", a=2.0)
    ray = SeedRay(np.zeros(2), np.array([1.0, 1.0]), -0.5, 2.5)
    rows = mf.sweep(m, ray=ray, count=7)
    assert len(rows) == 7
    by_status = {}
    for r in rows:
        by_status.setdefault(r.status, 0)
        by_status[r.status] += 1
    assert by_status.get("outside_domain", 0) == 2  # s = -0.5 and s = 0
    assert by_status.get("near_critical", 0) == 1  # s = 2 is the fixed point
    assert by_status.get("ok", 0) == 4
    outside = [r for r in rows if r.status == "outside_domain"]
    assert all(r.rho is None and r.period is None for r in outside)
    assert all(np.isnan(r.h).all() for r in outside)


def test_sweep_marks_non_invariant_levels():
    m = mf.builtin("tilde_lyness")
    ray = SeedRay(np.zeros(2), np.array([1.0, 1.0]), 0.6, 1.4)
    rows = mf.sweep(m, ray=ray, count=3)
    assert [r.status for r in rows] == ["not_invariant"] * 3


def test_sweep_requires_a_ray_when_map_has_none():
    with pytest.raises(ValueError, match="ray"):
        mf.sweep(mf.builtin("tilde_lyness"), count=3)


# -- monotonicity verdicts ------------------------------------------------


def mk_row(h, rho, status="ok"):
    return SweepRow(h=(h,), seed=np.array([h, h]), period=1.0,
                    tau=None if rho is None else -rho, rho=rho,
                    multiplicity=None if rho is None else 1,
                    res_mu=0.0, res_X=0.0, res_V=0.0, status=status)


def test_monotonicity_increasing():
    rows = [mk_row(h, r) for h, r in zip([1, 2, 3, 4], [0.1, 0.2, 0.3, 0.4])]
    rep = mf.monotonicity_report(rows)
    assert rep.verdict == "increasing"
    assert rep.violations == ()
    assert not rep.constant
    assert rep.n_usable == 4


def test_monotonicity_decreasing():
    rows = [mk_row(h, r) for h, r in zip([1, 2, 3], [0.4, 0.3, 0.2])]
    assert mf.monotonicity_report(rows).verdict == "decreasing"


def test_monotonicity_violations_are_localized():
    rows = [mk_row(h, r) for h, r in zip([1, 2, 3, 4], [0.1, 0.3, 0.2, 0.4])]
    rep = mf.monotonicity_report(rows)
    assert rep.verdict == "non_monotonic"
    assert rep.violations == ("(2,3)",)


def test_monotonicity_tie_counts_as_violation():
    rows = [mk_row(h, r) for h, r in zip([1, 2, 3, 4], [0.1, 0.1, 0.2, 0.3])]
    rep = mf.monotonicity_report(rows)
    assert rep.verdict == "non_monotonic"
    assert rep.violations == ("(1,2)",)


def test_monotonicity_constant_sweep_is_flagged():
    rows = [mk_row(h, 0.2 + k * 1e-12) for k, h in enumerate([1, 2, 3])]
    rep = mf.monotonicity_report(rows)
    assert rep.constant
    assert rep.verdict == "non_monotonic"
    assert rep.violations == ()


def test_monotonicity_needs_three_usable_rows():
    rows = [mk_row(1, 0.1), mk_row(2, 0.2)]
    with pytest.raises(ValueError, match="usable"):
        mf.monotonicity_report(rows)
    rows += [mk_row(3, None, status="not_invariant"),
             mk_row(4, None, status="near_critical")]
    with pytest.raises(ValueError, match="usable"):
        mf.monotonicity_report(rows)


def test_monotonicity_skips_unusable_rows():
    rows = [mk_row(1, 0.1), mk_row(2, None, status="outside_domain"),
            mk_row(3, 0.2), mk_row(4, 0.3, status="flagged")]
    rep = mf.monotonicity_report(rows)
    assert rep.n_usable == 3
    assert rep.verdict == "increasing"


def test_monotonicity_endpoint_comparison():
    rows = [mk_row(h, r) for h, r in zip([1, 2, 3], [0.26, 0.3, 0.4])]
    rep = mf.monotonicity_report(rows, fixed_point_rho=0.25, endpoint="first")
    assert rep.endpoint_rho == pytest.approx(0.26)
    assert rep.endpoint_gap == pytest.approx(0.01)
    rep = mf.monotonicity_report(rows, fixed_point_rho=0.25, endpoint="last")
    assert rep.endpoint_rho == pytest.approx(0.4)
    assert mf.monotonicity_report(rows).endpoint_gap is None
