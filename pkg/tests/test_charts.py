import numpy as np
import pytest

from kinplex.charts import (Chart, Circle, Interval, Line, SphereModel,
                            annulus, cylinder, torus, wrap_angle, wrap_positive)
from kinplex.errors import PreconditionError

TWO_PI = 2.0 * np.pi


def test_wrap_angle_range(rng):
    x = rng.uniform(-50, 50, 1000)
    w = wrap_angle(x)
    assert np.all(w > -np.pi) and np.all(w <= np.pi)
    assert np.allclose(np.sin(w), np.sin(x), atol=1e-12)
    assert np.allclose(np.cos(w), np.cos(x), atol=1e-12)


def test_wrap_positive_range(rng):
    x = rng.uniform(-50, 50, 1000)
    w = wrap_positive(x)
    assert np.all(w >= 0.0) and np.all(w < TWO_PI)


def test_circle_diff_is_shortest(rng):
    c = Circle()
    a = rng.uniform(0, TWO_PI, 500)
    b = rng.uniform(0, TWO_PI, 500)
    d = c.diff(a, b)
    assert np.all(np.abs(d) <= np.pi + 1e-12)
    assert np.allclose(wrap_positive(b + d), wrap_positive(a), atol=1e-9)


def test_interval_clamps_nothing_but_checks_contains():
    f = Interval(0.0, 2.0)
    assert f.contains(np.array(1.0))
    assert not f.contains(np.array(2.5))
    assert f.contains(np.array(2.2), tol=0.3)


def test_chart_distance_mixed_factors():
    chart = Chart([Circle(), Interval(0.0, 4.0)])
    a = np.array([0.1, 1.0])
    b = np.array([TWO_PI - 0.1, 3.0])
    # circle distance 0.2 through the seam, interval distance 2
    assert np.isclose(chart.distance(a, b), np.hypot(0.2, 2.0))


def test_chart_interpolate_endpoint_exact(rng):
    chart = torus()
    a = rng.uniform(0, TWO_PI, (50, 2))
    b = rng.uniform(0, TWO_PI, (50, 2))
    p0 = chart.interpolate(a, b, np.zeros(50))
    assert np.array_equal(p0, a)
    p1 = chart.interpolate(a, b, np.ones(50))
    assert np.allclose(chart.distance(p1, b), 0.0, atol=1e-9)


def test_chart_interpolate_crosses_seam():
    chart = Chart([Circle()])
    mid = chart.interpolate(np.array([0.2]), np.array([TWO_PI - 0.2]), np.array(0.5))
    assert np.isclose(wrap_angle(mid[0]), 0.0, atol=1e-12)


def test_grid_points_shapes():
    chart = annulus(1.0, 3.0)
    pts = chart.grid_points(7)
    assert pts.shape == (49, 2)
    assert np.all(pts[:, 1] >= 1.0) and np.all(pts[:, 1] <= 3.0)


def test_sphere_distance_matches_angle(rng):
    m = SphereModel()
    # oracle: build pairs with a known separation angle
    for ang in [1e-9, 1e-6, 0.1, 1.0, np.pi - 1e-6]:
        a = np.array([0.0, 0.0, 1.0])
        b = np.array([np.sin(ang), 0.0, np.cos(ang)])
        assert np.isclose(m.distance(a, b), ang, rtol=1e-9, atol=1e-12)


def test_sphere_distance_well_conditioned_near_zero():
    m = SphereModel()
    ang = 3e-8
    a = np.array([0.0, 0.0, 1.0])
    b = np.array([np.sin(ang), 0.0, np.cos(ang)])
    # the arccos form of the metric loses half the significand here
    assert abs(m.distance(a, b) - ang) < 1e-15


def test_sphere_latlon_round_trip(rng):
    m = SphereModel()
    lat = rng.uniform(-np.pi / 2 + 0.01, np.pi / 2 - 0.01, 200)
    lon = rng.uniform(0, TWO_PI, 200)
    w = m.from_latlon(lat, lon)
    la, lo = m.latlon(w)
    assert np.allclose(la, lat, atol=1e-12)
    assert np.allclose(lo, lon, atol=1e-12)


def test_sphere_interpolate_stays_unit(rng):
    m = SphereModel()
    a = rng.standard_normal((30, 3))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b = rng.standard_normal((30, 3))
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    mid = m.interpolate(a, b, np.full(30, 0.5))
    assert np.allclose(np.linalg.norm(mid, axis=1), 1.0, atol=1e-12)


def test_sphere_grid_includes_poles():
    m = SphereModel()
    pts = m.grid_points(9)
    lat, _ = m.latlon(pts)
    assert np.isclose(lat.min(), -np.pi / 2)
    assert np.isclose(lat.max(), np.pi / 2)


def test_line_factor_unbounded():
    f = Line()
    assert f.contains(np.array(1e12))
    assert np.isclose(f.distance(np.array(3.0), np.array(-1.0)), 4.0)


def test_cylinder_chart_factors():
    chart = cylinder(1.0, 3.0, 0.0, 1.0)
    assert chart.dim == 3
    assert isinstance(chart.factors[0], Circle)


def test_chart_equality_by_factors():
    assert torus() == Chart([Circle(), Circle()])
    assert annulus(1.0, 3.0) != annulus(1.0, 2.0)


def test_chart_grid_rejects_unbounded():
    with pytest.raises(PreconditionError):
        Chart([Line()]).grid_points(5)
