"""Analytic 2D shapes with embedded Cartesian grids.

Nodes are classified by the exact sign of the shape's implicit description;
boundary-adjacent nodes store exact cut distances along grid axes.  Volume
quadrature uses per-cell clipped areas (chord polygons, subsample fallback),
boundary quadrature uses analytic arc-length weights at midpoint samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import ellipe

from .errors import DegenerateGridError, EmlabError

# direction order used throughout: +x, -x, +y, -y
DIRS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])


# ---------------------------------------------------------------------------
# shapes
# ---------------------------------------------------------------------------

class Shape:
    """Common interface: exact inside tests, axis cuts, boundary geometry."""

    kind = "shape"
    smooth_boundary = True

    def inside(self, x, y):
        raise NotImplementedError

    def extent(self):
        """Half-extents (ex, ey) of the bounding box around the center."""
        raise NotImplementedError

    def area(self):
        raise NotImplementedError

    def perimeter(self):
        raise NotImplementedError

    def boundary_components(self):
        """List of (length, sampler) pairs; sampler(n) -> (pts, nu, H, w)."""
        raise NotImplementedError

    def axis_cut(self, x, y, direction, length):
        """Exact fraction t in (0, 1] of the first boundary crossing along
        ``(x, y) + t*length*direction`` for a point strictly inside."""
        raise NotImplementedError

    def boundary_geometry(self, pt, tol=1e-9):
        """Outward unit normal and mean curvature at a boundary point.

        H >= 0 where the domain is locally convex.  Raises ValueError when
        the point is off the boundary by more than ``tol`` (relative to the
        shape scale).
        """
        raise NotImplementedError

    def curvature_near(self, pt):
        """Signed curvature of the boundary piece closest to pt (for the
        chord-sagitta quadrature correction); 0 disables the correction."""
        return 0.0

    def describe(self):
        return {"kind": self.kind, "parameters": list(self._params()),
                "center": [float(self.cx), float(self.cy)],
                "smooth_boundary": self.smooth_boundary}

    def _params(self):
        raise NotImplementedError


def _circle_cut(px, py, cx, cy, R, direction, length):
    """Roots t in (0, 1] of |p + t*length*d - c| = R, smallest first."""
    dx, dy = direction[0] * length, direction[1] * length
    rx, ry = px - cx, py - cy
    a = dx * dx + dy * dy
    b = 2.0 * (rx * dx + ry * dy)
    c = rx * rx + ry * ry - R * R
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    s = math.sqrt(disc)
    roots = sorted(((-b - s) / (2.0 * a), (-b + s) / (2.0 * a)))
    return [t for t in roots if 1e-14 < t <= 1.0 + 1e-12]


class Disc(Shape):
    kind = "disc"

    def __init__(self, radius, center=(0.0, 0.0)):
        if radius <= 0:
            raise ValueError("disc radius must be positive")
        self.R = float(radius)
        self.cx, self.cy = float(center[0]), float(center[1])

    def _params(self):
        return (self.R,)

    def inside(self, x, y):
        return (np.asarray(x) - self.cx) ** 2 + (np.asarray(y) - self.cy) ** 2 < self.R ** 2

    def extent(self):
        return self.R, self.R

    def area(self):
        return math.pi * self.R ** 2

    def perimeter(self):
        return 2.0 * math.pi * self.R

    def boundary_components(self):
        def sampler(n):
            theta = (np.arange(n) + 0.5) * (2.0 * math.pi / n)
            nu = np.column_stack([np.cos(theta), np.sin(theta)])
            pts = np.column_stack([self.cx + self.R * nu[:, 0],
                                   self.cy + self.R * nu[:, 1]])
            H = np.full(n, 1.0 / self.R)
            w = np.full(n, 2.0 * math.pi * self.R / n)
            return pts, nu, H, w
        return [(self.perimeter(), sampler)]

    def axis_cut(self, x, y, direction, length):
        roots = _circle_cut(x, y, self.cx, self.cy, self.R, direction, length)
        if not roots:
            raise EmlabError("expected a boundary crossing on the disc")
        return min(roots[0], 1.0)

    def boundary_geometry(self, pt, tol=1e-9):
        rx, ry = pt[0] - self.cx, pt[1] - self.cy
        r = math.hypot(rx, ry)
        if abs(r - self.R) > tol * max(1.0, self.R):
            raise ValueError(f"point {pt} is off the disc boundary")
        return np.array([rx / r, ry / r]), 1.0 / self.R

    def curvature_near(self, pt):
        return 1.0 / self.R


class Annulus(Shape):
    kind = "annulus"

    def __init__(self, inner, outer, center=(0.0, 0.0)):
        if not 0 < inner < outer:
            raise ValueError("annulus needs 0 < inner < outer")
        self.a, self.b = float(inner), float(outer)
        self.cx, self.cy = float(center[0]), float(center[1])

    def _params(self):
        return (self.a, self.b)

    def inside(self, x, y):
        r2 = (np.asarray(x) - self.cx) ** 2 + (np.asarray(y) - self.cy) ** 2
        return (r2 > self.a ** 2) & (r2 < self.b ** 2)

    def extent(self):
        return self.b, self.b

    def area(self):
        return math.pi * (self.b ** 2 - self.a ** 2)

    def perimeter(self):
        return 2.0 * math.pi * (self.a + self.b)

    def boundary_components(self):
        def outer_sampler(n):
            theta = (np.arange(n) + 0.5) * (2.0 * math.pi / n)
            nu = np.column_stack([np.cos(theta), np.sin(theta)])
            pts = np.column_stack([self.cx + self.b * nu[:, 0],
                                   self.cy + self.b * nu[:, 1]])
            return pts, nu, np.full(n, 1.0 / self.b), np.full(n, 2 * math.pi * self.b / n)

        def inner_sampler(n):
            theta = (np.arange(n) + 0.5) * (2.0 * math.pi / n)
            radial = np.column_stack([np.cos(theta), np.sin(theta)])
            pts = np.column_stack([self.cx + self.a * radial[:, 0],
                                   self.cy + self.a * radial[:, 1]])
            # outward normal points into the hole; boundary is concave there
            return pts, -radial, np.full(n, -1.0 / self.a), np.full(n, 2 * math.pi * self.a / n)

        return [(2 * math.pi * self.b, outer_sampler),
                (2 * math.pi * self.a, inner_sampler)]

    def axis_cut(self, x, y, direction, length):
        roots = (_circle_cut(x, y, self.cx, self.cy, self.a, direction, length)
                 + _circle_cut(x, y, self.cx, self.cy, self.b, direction, length))
        if not roots:
            raise EmlabError("expected a boundary crossing on the annulus")
        return min(min(roots), 1.0)

    def boundary_geometry(self, pt, tol=1e-9):
        rx, ry = pt[0] - self.cx, pt[1] - self.cy
        r = math.hypot(rx, ry)
        scale = max(1.0, self.b)
        if abs(r - self.b) <= tol * scale:
            return np.array([rx / r, ry / r]), 1.0 / self.b
        if abs(r - self.a) <= tol * scale:
            return np.array([-rx / r, -ry / r]), -1.0 / self.a
        raise ValueError(f"point {pt} is off the annulus boundary")

    def curvature_near(self, pt):
        r = math.hypot(pt[0] - self.cx, pt[1] - self.cy)
        return 1.0 / self.b if abs(r - self.b) < abs(r - self.a) else -1.0 / self.a


class Ellipse(Shape):
    kind = "ellipse"

    def __init__(self, semi_x, semi_y, center=(0.0, 0.0)):
        if semi_x <= 0 or semi_y <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        self.A, self.B = float(semi_x), float(semi_y)
        self.cx, self.cy = float(center[0]), float(center[1])

    def _params(self):
        return (self.A, self.B)

    def inside(self, x, y):
        return (((np.asarray(x) - self.cx) / self.A) ** 2
                + ((np.asarray(y) - self.cy) / self.B) ** 2) < 1.0

    def extent(self):
        return self.A, self.B

    def area(self):
        return math.pi * self.A * self.B

    def perimeter(self):
        big, small = max(self.A, self.B), min(self.A, self.B)
        return 4.0 * big * float(ellipe(1.0 - (small / big) ** 2))

    def boundary_components(self):
        def sampler(n):
            theta = (np.arange(n) + 0.5) * (2.0 * math.pi / n)
            ct, st = np.cos(theta), np.sin(theta)
            pts = np.column_stack([self.cx + self.A * ct, self.cy + self.B * st])
            grad = np.column_stack([ct / self.A, st / self.B])
            nu = grad / np.linalg.norm(grad, axis=1)[:, None]
            speed = np.sqrt((self.A * st) ** 2 + (self.B * ct) ** 2)
            H = self.A * self.B / ((self.A * st) ** 2 + (self.B * ct) ** 2) ** 1.5
            w = speed * (2.0 * math.pi / n)
            return pts, nu, H, w
        return [(self.perimeter(), sampler)]

    def axis_cut(self, x, y, direction, length):
        roots = _circle_cut((x - self.cx) / self.A, (y - self.cy) / self.B, 0.0, 0.0, 1.0,
                            (direction[0] / self.A, direction[1] / self.B), length)
        if not roots:
            raise EmlabError("expected a boundary crossing on the ellipse")
        return min(roots[0], 1.0)

    def boundary_geometry(self, pt, tol=1e-9):
        X, Y = (pt[0] - self.cx) / self.A, (pt[1] - self.cy) / self.B
        rho = math.hypot(X, Y)
        if abs(rho - 1.0) > tol:
            raise ValueError(f"point {pt} is off the ellipse boundary")
        grad = np.array([X / self.A, Y / self.B])
        nu = grad / np.linalg.norm(grad)
        st, ct = Y / rho, X / rho
        H = self.A * self.B / ((self.A * st) ** 2 + (self.B * ct) ** 2) ** 1.5
        return nu, H

    def curvature_near(self, pt):
        X, Y = (pt[0] - self.cx) / self.A, (pt[1] - self.cy) / self.B
        rho = math.hypot(X, Y)
        if rho == 0.0:
            return 0.0
        st, ct = Y / rho, X / rho
        return self.A * self.B / ((self.A * st) ** 2 + (self.B * ct) ** 2) ** 1.5


class Rectangle(Shape):
    kind = "rectangle"
    smooth_boundary = False  # corners violate the C^{2+alpha} hypothesis

    def __init__(self, width, height, center=(0.0, 0.0)):
        if width <= 0 or height <= 0:
            raise ValueError("rectangle sides must be positive")
        self.w, self.hgt = float(width), float(height)
        self.cx, self.cy = float(center[0]), float(center[1])

    def _params(self):
        return (self.w, self.hgt)

    def inside(self, x, y):
        return ((np.abs(np.asarray(x) - self.cx) < self.w / 2.0)
                & (np.abs(np.asarray(y) - self.cy) < self.hgt / 2.0))

    def extent(self):
        return self.w / 2.0, self.hgt / 2.0

    def area(self):
        return self.w * self.hgt

    def perimeter(self):
        return 2.0 * (self.w + self.hgt)

    def boundary_components(self):
        hw, hh = self.w / 2.0, self.hgt / 2.0
        edges = [  # (start, tangent, length, outward normal)
            ((self.cx - hw, self.cy - hh), (1.0, 0.0), self.w, (0.0, -1.0)),
            ((self.cx + hw, self.cy - hh), (0.0, 1.0), self.hgt, (1.0, 0.0)),
            ((self.cx + hw, self.cy + hh), (-1.0, 0.0), self.w, (0.0, 1.0)),
            ((self.cx - hw, self.cy + hh), (0.0, -1.0), self.hgt, (-1.0, 0.0)),
        ]

        def sampler(n):
            per_edge = [max(4, int(round(n * L / self.perimeter()))) for _, _, L, _ in edges]
            pts, nus, ws = [], [], []
            for (start, tang, L, nu), m in zip(edges, per_edge):
                s = (np.arange(m) + 0.5) * (L / m)
                pts.append(np.column_stack([start[0] + s * tang[0], start[1] + s * tang[1]]))
                nus.append(np.tile(nu, (m, 1)))
                ws.append(np.full(m, L / m))
            pts = np.vstack(pts)
            return pts, np.vstack(nus), np.zeros(len(pts)), np.concatenate(ws)

        return [(self.perimeter(), sampler)]

    def axis_cut(self, x, y, direction, length):
        hw, hh = self.w / 2.0, self.hgt / 2.0
        if direction[0] > 0:
            t = (self.cx + hw - x) / length
        elif direction[0] < 0:
            t = (x - (self.cx - hw)) / length
        elif direction[1] > 0:
            t = (self.cy + hh - y) / length
        else:
            t = (y - (self.cy - hh)) / length
        if not 0.0 < t <= 1.0 + 1e-12:
            raise EmlabError("expected a boundary crossing on the rectangle")
        return min(t, 1.0)

    def boundary_geometry(self, pt, tol=1e-9):
        hw, hh = self.w / 2.0, self.hgt / 2.0
        dx, dy = pt[0] - self.cx, pt[1] - self.cy
        scale = max(1.0, hw, hh)
        sides = [(abs(dx - hw), (1.0, 0.0)), (abs(dx + hw), (-1.0, 0.0)),
                 (abs(dy - hh), (0.0, 1.0)), (abs(dy + hh), (0.0, -1.0))]
        dist, nu = min(sides, key=lambda s: s[0])
        if dist > tol * scale or abs(dx) > hw + tol * scale or abs(dy) > hh + tol * scale:
            raise ValueError(f"point {pt} is off the rectangle boundary")
        return np.array(nu), 0.0

    def exact_cell_area(self, x, y, h):
        """Axis-aligned overlap; exact even at corners, where a chord is not."""
        h2 = h / 2.0
        wx = min(x + h2, self.cx + self.w / 2) - max(x - h2, self.cx - self.w / 2)
        wy = min(y + h2, self.cy + self.hgt / 2) - max(y - h2, self.cy - self.hgt / 2)
        return max(wx, 0.0) * max(wy, 0.0)


SHAPE_KINDS = {"disc": (Disc, 1), "annulus": (Annulus, 2),
               "ellipse": (Ellipse, 2), "rectangle": (Rectangle, 2)}


def make_shape(kind, parameters, center=(0.0, 0.0)):
    if kind not in SHAPE_KINDS:
        raise ValueError(f"unknown shape kind {kind!r}; choose from {sorted(SHAPE_KINDS)}")
    cls, nparams = SHAPE_KINDS[kind]
    params = [float(x) for x in parameters]
    if len(params) != nparams:
        raise ValueError(f"shape {kind!r} expects {nparams} parameters, got {len(params)}")
    return cls(*params, center=center)


# ---------------------------------------------------------------------------
# discrete domain
# ---------------------------------------------------------------------------

@dataclass
class DiscreteDomain:
    """Embedded Cartesian grid over a shape, immutable after build."""

    shape: Shape
    h: float
    gx0: float
    gy0: float
    nx: int
    ny: int
    interior_index: np.ndarray      # (nx, ny) -> interior id or -1
    interior_ij: np.ndarray         # (n_int, 2) lattice coordinates
    xy: np.ndarray                  # (n_int, 2) physical coordinates
    nbr: np.ndarray                 # (n_int, 4) interior neighbor id or -1
    arm: np.ndarray                 # (n_int, 4) arm length to neighbor/boundary
    boundary_adjacent: np.ndarray   # (n_int,) bool
    weights: np.ndarray             # (n_int,) clipped cell areas
    bpts: np.ndarray                # (nb, 2) boundary sample points
    bnu: np.ndarray                 # (nb, 2) outward unit normals
    bH: np.ndarray                  # (nb,) mean curvature
    bw: np.ndarray                  # (nb,) arc weights
    bcomp: np.ndarray               # (nb,) boundary component id
    dist: np.ndarray                # (n_int,) distance to boundary
    dropped_area: float = 0.0
    _tree: object = field(default=None, repr=False)
    _int_tree: object = field(default=None, repr=False)

    @property
    def n_interior(self):
        return len(self.xy)

    @property
    def n_boundary(self):
        return len(self.bpts)

    @property
    def boundary_component_count(self):
        return int(self.bcomp.max()) + 1 if len(self.bcomp) else 0

    def core_mask(self, depth=2.0):
        """Interior nodes at least ``depth*h`` away from the boundary."""
        return self.dist >= depth * self.h - 1e-12

    def node_point(self, i, j):
        return self.gx0 + i * self.h, self.gy0 + j * self.h


def _clip_cell_area(shape, x, y, h):
    """Area of cell [x-h/2, x+h/2] x [y-h/2, y+h/2] inside the shape.

    Chord polygon through exact edge crossings, plus a circular-segment
    (sagitta) correction ``H L^3 / 12`` signed by the local curvature.
    """
    if hasattr(shape, "exact_cell_area"):
        return shape.exact_cell_area(x, y, h)
    h2 = h / 2.0
    corners = [(x - h2, y - h2), (x + h2, y - h2), (x + h2, y + h2), (x - h2, y + h2)]
    flags = [bool(shape.inside(cx, cy)) for cx, cy in corners]
    n_in = sum(flags)
    if n_in == 4:
        return h * h
    if n_in == 0:
        return _subsample_cell_area(shape, x, y, h) if bool(shape.inside(x, y)) else 0.0
    if flags in ([True, False, True, False], [False, True, False, True]):
        return _subsample_cell_area(shape, x, y, h)  # saddle cell: chord ambiguous
    poly, crossings = [], []
    for k in range(4):
        c0, c1 = corners[k], corners[(k + 1) % 4]
        if flags[k]:
            poly.append(c0)
        if flags[k] != flags[(k + 1) % 4]:
            p_in, p_out = (c0, c1) if flags[k] else (c1, c0)
            crossing = _bisect_crossing(shape, p_in, p_out)
            poly.append(crossing)
            crossings.append(crossing)
    area = _shoelace(poly)
    if len(crossings) == 2:
        (x0, y0), (x1, y1) = crossings
        chord = math.hypot(x1 - x0, y1 - y0)
        kappa = shape.curvature_near(((x0 + x1) / 2.0, (y0 + y1) / 2.0))
        area += kappa * chord ** 3 / 12.0
    if not 0.0 <= area <= h * h * (1.0 + 1e-9):
        return _subsample_cell_area(shape, x, y, h)
    return area


def _bisect_crossing(shape, p_in, p_out, iterations=60):
    ax, ay = p_in
    bx, by = p_out
    for _ in range(iterations):
        mx, my = 0.5 * (ax + bx), 0.5 * (ay + by)
        if bool(shape.inside(mx, my)):
            ax, ay = mx, my
        else:
            bx, by = mx, my
    return 0.5 * (ax + bx), 0.5 * (ay + by)


def _shoelace(poly):
    if len(poly) < 3:
        return 0.0
    s = 0.0
    for k in range(len(poly)):
        x0, y0 = poly[k]
        x1, y1 = poly[(k + 1) % len(poly)]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


def _subsample_cell_area(shape, x, y, h, n=32):
    offs = (np.arange(n) + 0.5) / n - 0.5
    xs = x + offs * h
    ys = y + offs * h
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return h * h * float(np.count_nonzero(shape.inside(X, Y))) / (n * n)


def build_domain(shape, spacing):
    """Classify a symmetric node lattice against the shape and precompute
    cut distances, clipped cell areas and boundary samples."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    h = float(spacing)
    ex, ey = shape.extent()
    mx = int(math.ceil(ex / h)) + 2
    my = int(math.ceil(ey / h)) + 2
    gx0, gy0 = shape.cx - mx * h, shape.cy - my * h
    nx, ny = 2 * mx + 1, 2 * my + 1

    xs = gx0 + np.arange(nx) * h
    ys = gy0 + np.arange(ny) * h
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    interior = shape.inside(X, Y)
    n_int = int(np.count_nonzero(interior))
    if n_int < 9:
        raise DegenerateGridError(
            f"only {n_int} interior nodes at spacing {h}; refine the grid")
    if isinstance(shape, Annulus) and shape.b - shape.a <= 3.0 * h:
        raise DegenerateGridError("annulus gap must exceed 3 grid spacings")

    interior_index = np.full((nx, ny), -1, dtype=np.int64)
    ii, jj = np.nonzero(interior)
    order = np.lexsort((ii, jj))  # scan rows bottom-to-top, left-to-right
    ii, jj = ii[order], jj[order]
    interior_index[ii, jj] = np.arange(n_int)
    interior_ij = np.column_stack([ii, jj])
    xy = np.column_stack([xs[ii], ys[jj]])

    nbr = np.full((n_int, 4), -1, dtype=np.int64)
    arm = np.full((n_int, 4), h, dtype=float)
    for d, (di, dj) in enumerate(DIRS):
        ni, nj = ii + di, jj + dj
        valid = (0 <= ni) & (ni < nx) & (0 <= nj) & (nj < ny)
        nbr[valid, d] = interior_index[ni[valid], nj[valid]]
    boundary_adjacent = (nbr < 0).any(axis=1)
    for k in np.nonzero(boundary_adjacent)[0]:
        x, y = xy[k]
        for d in range(4):
            if nbr[k, d] < 0:
                arm[k, d] = h * shape.axis_cut(x, y, DIRS[d], h)

    # clipped cell areas; cut cells of exterior nodes fold into the nearest
    # interior neighbor so the cells tile the full domain area
    corner_x = gx0 - h / 2.0 + np.arange(nx + 1) * h
    corner_y = gy0 - h / 2.0 + np.arange(ny + 1) * h
    CX, CY = np.meshgrid(corner_x, corner_y, indexing="ij")
    corner_in = shape.inside(CX, CY)
    cell_nin = (corner_in[:-1, :-1].astype(np.int8) + corner_in[1:, :-1]
                + corner_in[1:, 1:] + corner_in[:-1, 1:])

    weights = np.zeros(n_int)
    full = interior & (cell_nin == 4)
    fi, fj = np.nonzero(full)
    weights[interior_index[fi, fj]] = h * h

    dropped = 0.0
    neighbor_pref = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)]
    cut_i, cut_j = np.nonzero((cell_nin > 0) & (cell_nin < 4) | (interior & (cell_nin == 0)))
    for i, j in zip(cut_i, cut_j):
        area = _clip_cell_area(shape, xs[i], ys[j], h)
        if area <= 0.0:
            continue
        if interior[i, j]:
            weights[interior_index[i, j]] += area
            continue
        for di, dj in neighbor_pref:
            ni, nj = i + di, j + dj
            if 0 <= ni < nx and 0 <= nj < ny and interior[ni, nj]:
                weights[interior_index[ni, nj]] += area
                break
        else:
            dropped += area

    # boundary samples, one block per component
    bpts, bnu, bH, bw, bcomp = [], [], [], [], []
    for comp, (length, sampler) in enumerate(shape.boundary_components()):
        n = max(64, int(math.ceil(2.0 * length / h)))
        pts, nu, H, w = sampler(n)
        bpts.append(pts)
        bnu.append(nu)
        bH.append(H)
        bw.append(w)
        bcomp.append(np.full(len(pts), comp, dtype=np.int64))
    bpts = np.vstack(bpts)
    bnu = np.vstack(bnu)
    bH = np.concatenate(bH)
    bw = np.concatenate(bw)
    bcomp = np.concatenate(bcomp)

    tree = cKDTree(bpts)
    dist, _ = tree.query(xy)

    return DiscreteDomain(shape=shape, h=h, gx0=gx0, gy0=gy0, nx=nx, ny=ny,
                          interior_index=interior_index, interior_ij=interior_ij,
                          xy=xy, nbr=nbr, arm=arm,
                          boundary_adjacent=boundary_adjacent, weights=weights,
                          bpts=bpts, bnu=bnu, bH=bH, bw=bw, bcomp=bcomp,
                          dist=dist, dropped_area=dropped, _tree=tree,
                          _int_tree=cKDTree(xy))


# ---------------------------------------------------------------------------
# quadrature and geometric queries
# ---------------------------------------------------------------------------

def volume_integral(domain, fld):
    """Cell-weighted sum over interior nodes; ``fld`` is a per-node array or
    a vectorized callable of (x, y)."""
    values = fld(domain.xy[:, 0], domain.xy[:, 1]) if callable(fld) else np.asarray(fld)
    if values.shape != (domain.n_interior,):
        raise ValueError("field must provide one value per interior node")
    return float(np.dot(domain.weights, values))


def boundary_integral(domain, density):
    """Arc-weighted sum over boundary samples; ``density`` is a per-sample
    array or a vectorized callable of (x, y)."""
    values = (density(domain.bpts[:, 0], domain.bpts[:, 1])
              if callable(density) else np.asarray(density))
    if values.shape != (domain.n_boundary,):
        raise ValueError("density must provide one value per boundary sample")
    return float(np.dot(domain.bw, values))


def boundary_geometry(shape, pt, tol=1e-9):
    """Outward unit normal and mean curvature of the shape boundary at pt."""
    return shape.boundary_geometry(pt, tol=tol)


def star_center_margin(shape, x0, samples_per_component=4096):
    """min over the boundary of <y - x0, nu(y)>; >= 0 certifies that the
    shape is star-shaped with respect to x0 at sample resolution."""
    margin = math.inf
    for _, sampler in shape.boundary_components():
        pts, nu, _, _ = sampler(samples_per_component)
        rel = pts - np.asarray(x0, dtype=float)
        margin = min(margin, float(np.min(np.einsum("ij,ij->i", rel, nu))))
    return margin


def interpolate_node_field(domain, values, pts):
    """Bilinear interpolation of an interior-node field at arbitrary points.

    Cells with a non-interior corner fall back to the value at the nearest
    interior node, so querying close to the boundary stays defined (at
    reduced order there).
    """
    values = np.asarray(values)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    out = np.empty(len(pts))
    for k, (x, y) in enumerate(pts):
        fx = (x - domain.gx0) / domain.h
        fy = (y - domain.gy0) / domain.h
        i0 = min(max(int(math.floor(fx)), 0), domain.nx - 2)
        j0 = min(max(int(math.floor(fy)), 0), domain.ny - 2)
        tx, ty = fx - i0, fy - j0
        ids = [domain.interior_index[i0, j0], domain.interior_index[i0 + 1, j0],
               domain.interior_index[i0, j0 + 1], domain.interior_index[i0 + 1, j0 + 1]]
        if all(idx >= 0 for idx in ids):
            v00, v10, v01, v11 = (values[idx] for idx in ids)
            out[k] = ((1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10
                      + (1 - tx) * ty * v01 + tx * ty * v11)
        else:
            corners = [(i0, j0, (1 - tx) * (1 - ty)), (i0 + 1, j0, tx * (1 - ty)),
                       (i0, j0 + 1, (1 - tx) * ty), (i0 + 1, j0 + 1, tx * ty)]
            best = max(((w, domain.interior_index[i, j]) for i, j, w in corners
                        if domain.interior_index[i, j] >= 0), default=None)
            if best is None:
                _, idx = domain._int_tree.query([x, y])
                out[k] = values[idx]
            else:
                out[k] = values[best[1]]
    return out
