"""Coordinate charts and workspace models.

Configuration spaces are finite products of one-dimensional factors
(circles, closed intervals, unbounded lines).  Workspaces are either such
products (plane, space, annulus, cylinder, torus, circle, interval) or one
of the special models (unit sphere, rotation group, rigid motions) that
carry their own point representation and metric.

All distances on product charts are Euclidean combinations of per-factor
distances; circle factors use arc distance, so a full wind counts as zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError

TWO_PI = 2.0 * np.pi


def wrap_angle(x):
    """Wrap to (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi
    return np.where(y == -np.pi, np.pi, y)


def wrap_positive(x):
    """Wrap to [0, 2*pi)."""
    return np.mod(np.asarray(x, dtype=float), TWO_PI)


@dataclass(frozen=True)
class Circle:
    """Angular factor, coordinates taken mod 2*pi."""

    def wrap(self, x):
        return wrap_positive(x)

    def diff(self, a, b):
        # shortest signed arc from b to a
        return wrap_angle(np.asarray(a, float) - np.asarray(b, float))

    def distance(self, a, b):
        return np.abs(self.diff(a, b))

    def contains(self, x, tol=0.0):
        return np.ones_like(np.asarray(x, float), dtype=bool)

    def grid(self, n):
        return np.arange(n) * (TWO_PI / n)

    def spacing(self, n):
        return TWO_PI / n


@dataclass(frozen=True)
class Interval:
    """Closed bounded factor [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise PreconditionError(f"empty interval [{self.lo}, {self.hi}]")

    def wrap(self, x):
        return np.asarray(x, dtype=float)

    def diff(self, a, b):
        return np.asarray(a, float) - np.asarray(b, float)

    def distance(self, a, b):
        return np.abs(self.diff(a, b))

    def contains(self, x, tol=0.0):
        x = np.asarray(x, float)
        return (x >= self.lo - tol) & (x <= self.hi + tol)

    def grid(self, n):
        return np.linspace(self.lo, self.hi, n)

    def spacing(self, n):
        return (self.hi - self.lo) / max(n - 1, 1)


@dataclass(frozen=True)
class Line:
    """Unbounded factor (plane and space coordinates)."""

    def wrap(self, x):
        return np.asarray(x, dtype=float)

    def diff(self, a, b):
        return np.asarray(a, float) - np.asarray(b, float)

    def distance(self, a, b):
        return np.abs(self.diff(a, b))

    def contains(self, x, tol=0.0):
        return np.ones_like(np.asarray(x, float), dtype=bool)

    def grid(self, n):
        raise PreconditionError("cannot grid an unbounded factor")

    def spacing(self, n):
        raise PreconditionError("cannot grid an unbounded factor")


class Chart:
    """Product of one-dimensional factors with the product metric.

    Points are arrays whose last axis indexes factors.  Broadcasting over
    leading axes is supported throughout, so batched evaluation is free.
    """

    def __init__(self, factors):
        self.factors = tuple(factors)
        if not self.factors:
            raise PreconditionError("chart needs at least one factor")

    @property
    def dim(self):
        return len(self.factors)

    # representation dimension; product charts represent points by their
    # factor coordinates, so it equals dim
    @property
    def rep_dim(self):
        return self.dim

    def _per_factor(self, method, *arrays):
        arrays = [np.asarray(a, float) for a in arrays]
        cols = [
            getattr(f, method)(*[a[..., i] for a in arrays])
            for i, f in enumerate(self.factors)
        ]
        return np.stack(cols, axis=-1)

    def wrap(self, x):
        return self._per_factor("wrap", x)

    def diff(self, a, b):
        """Per-factor shortest signed difference a - b."""
        return self._per_factor("diff", a, b)

    def distance(self, a, b):
        return np.linalg.norm(self._per_factor("distance", a, b), axis=-1)

    def contains(self, x, tol=0.0):
        x = np.asarray(x, float)
        ok = np.ones(x.shape[:-1], dtype=bool)
        for i, f in enumerate(self.factors):
            ok &= f.contains(x[..., i], tol)
        return ok

    def interpolate(self, a, b, t):
        """Geodesic interpolation from a to b, t in [0, 1].

        Circle factors move along the shortest arc; at t=0 the result is
        exactly a.
        """
        a = np.asarray(a, float)
        t = np.asarray(t, float)
        d = self.diff(b, a)
        return a + t[..., None] * d

    def axis_grids(self, n):
        """Per-factor sample arrays for an n-per-axis grid."""
        return [f.grid(n) for f in self.factors]

    def grid_points(self, n):
        """All grid points, shape (n**dim, dim), C-order over axes."""
        axes = self.axis_grids(n)
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def max_spacing(self, n):
        return max(f.spacing(n) for f in self.factors)

    def random_points(self, n, rng):
        cols = []
        for f in self.factors:
            if isinstance(f, Circle):
                cols.append(rng.uniform(0.0, TWO_PI, n))
            elif isinstance(f, Interval):
                cols.append(rng.uniform(f.lo, f.hi, n))
            else:
                cols.append(rng.standard_normal(n))
        return np.stack(cols, axis=-1)

    def __eq__(self, other):
        return isinstance(other, Chart) and self.factors == other.factors

    def __repr__(self):
        return f"Chart({list(self.factors)!r})"


class SphereModel:
    """Unit sphere in R^3; points are unit vectors (x, y, z).

    The metric is great-circle angle.  Domain clauses address the derived
    latitude/longitude features rather than the ambient coordinates.
    """

    rep_dim = 3
    dim = 2
    feature_names = ("lat", "lon")

    def contains(self, w, tol=1e-9):
        w = np.asarray(w, float)
        return np.abs(np.linalg.norm(w, axis=-1) - 1.0) <= tol

    def distance(self, a, b):
        # chord form of the great-circle angle: well conditioned near zero,
        # where arccos of the dot product loses half the significand
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        chord = np.linalg.norm(a - b, axis=-1)
        return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))

    def latlon(self, w):
        w = np.asarray(w, float)
        lat = np.arctan2(w[..., 2], np.hypot(w[..., 0], w[..., 1]))
        lon = wrap_positive(np.arctan2(w[..., 1], w[..., 0]))
        return lat, lon

    def from_latlon(self, lat, lon):
        lat = np.asarray(lat, float)
        lon = np.asarray(lon, float)
        cl = np.cos(lat)
        return np.stack([cl * np.cos(lon), cl * np.sin(lon), np.sin(lat)], axis=-1)

    def interpolate(self, a, b, t):
        """Geodesic (great-circle) interpolation."""
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        t = np.asarray(t, float)
        dot = np.clip(np.sum(a * b, axis=-1), -1.0, 1.0)
        ang = np.arccos(dot)
        out = np.empty(np.broadcast_shapes(a.shape, b.shape, t.shape + (1,)))
        small = ang < 1e-12
        s = np.sin(np.where(small, 1.0, ang))
        w0 = np.where(small, 1.0 - t, np.sin((1.0 - t) * ang) / s)
        w1 = np.where(small, t, np.sin(t * ang) / s)
        out = w0[..., None] * a + w1[..., None] * b
        return out

    def interp_velocity(self, a, b, t):
        """d/dt of interpolate at parameter t (ambient velocity)."""
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        t = np.asarray(t, float)
        dot = np.clip(np.sum(a * b, axis=-1), -1.0, 1.0)
        ang = np.arccos(dot)
        small = ang < 1e-12
        s = np.sin(np.where(small, 1.0, ang))
        g = np.where(small, 0.0, ang / s)
        w0 = -g * np.cos((1.0 - t) * ang)
        w1 = g * np.cos(t * ang)
        return w0[..., None] * a + w1[..., None] * b

    def grid_points(self, n):
        """Latitude-longitude grid including both poles, shape (n*n, 3)."""
        lat = np.linspace(-np.pi / 2, np.pi / 2, n)
        lon = np.arange(n) * (TWO_PI / n)
        la, lo = np.meshgrid(lat, lon, indexing="ij")
        return self.from_latlon(la.ravel(), lo.ravel())

    def max_spacing(self, n):
        return max(np.pi / max(n - 1, 1), TWO_PI / n)

    def __eq__(self, other):
        return isinstance(other, SphereModel)

    def __repr__(self):
        return "SphereModel()"


class RigidModel:
    """Rigid motions of R^3; points are (qw, qx, qy, qz, tx, ty, tz).

    Used as the workspace of mechanism-backed maps.  The metric combines
    rotation angle with translation distance.
    """

    rep_dim = 7
    dim = 6

    def contains(self, w, tol=1e-9):
        w = np.asarray(w, float)
        return np.abs(np.linalg.norm(w[..., :4], axis=-1) - 1.0) <= tol

    def distance(self, a, b):
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        dot = np.clip(np.abs(np.sum(a[..., :4] * b[..., :4], axis=-1)), -1.0, 1.0)
        ang = 2.0 * np.arccos(dot)
        dt = np.linalg.norm(a[..., 4:] - b[..., 4:], axis=-1)
        return np.hypot(ang, dt)

    def __eq__(self, other):
        return isinstance(other, RigidModel)

    def __repr__(self):
        return "RigidModel()"


class RotationModel:
    """Rotations of R^3; points are unit quaternions (w, x, y, z)."""

    rep_dim = 4
    dim = 3

    def contains(self, w, tol=1e-9):
        w = np.asarray(w, float)
        return np.abs(np.linalg.norm(w, axis=-1) - 1.0) <= tol

    def distance(self, a, b):
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        dot = np.clip(np.abs(np.sum(a * b, axis=-1)), -1.0, 1.0)
        return 2.0 * np.arccos(dot)

    def __eq__(self, other):
        return isinstance(other, RotationModel)

    def __repr__(self):
        return "RotationModel()"


# workspace constructors for the supported catalog
def plane():
    return Chart([Line(), Line()])


def space():
    return Chart([Line(), Line(), Line()])


def annulus(r_inner, r_outer):
    """S^1 x [r_inner, r_outer], points (phi, r)."""
    return Chart([Circle(), Interval(r_inner, r_outer)])


def cylinder(r_inner, r_outer, z_lo, z_hi):
    """S^1 x [r-, r+] x [z-, z+], points (phi, r, z)."""
    return Chart([Circle(), Interval(r_inner, r_outer), Interval(z_lo, z_hi)])


def circle():
    return Chart([Circle()])


def interval(lo=0.0, hi=1.0):
    return Chart([Interval(lo, hi)])


def torus(k=2):
    return Chart([Circle()] * k)
