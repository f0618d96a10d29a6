"""Planar polygon geometry for coverage cells.

Polygons are ``(n, 2)`` float64 arrays with counter-clockwise vertices; the
empty polygon has shape ``(0, 2)``.  Curved cell boundaries (branches of the
distance-difference hyperbola ``|q - far| - |q - near| = delta``) are replaced
by chord polylines whose error always falls on a known side:

* :func:`clip_focal_inner` keeps an inscribed chord polygon, so the result is
  a subset of the exact region;
* :func:`subtract_focal_outer` removes an inscribed chord polygon, so the
  result is a superset of the exact region.

The kernels are compiled with numba and operate on plain arrays; the public
wrappers validate arguments and raise on degenerate input.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

TOL = 1e-9
DEFAULT_CHORDS = 16
LENS_GAP = 1e-6

_AREA_EPS = 1e-14
_DUP_EPS = 1e-12


class GeometryError(ValueError):
    pass


class Circle(NamedTuple):
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class HalfPlane:
    """The closed set ``{q : q . normal <= offset}``."""

    normal: tuple
    offset: float

    def __post_init__(self):
        nx, ny = self.normal
        if abs(math.hypot(nx, ny) - 1.0) > 1e-12:
            raise GeometryError("half-plane normal must be a unit vector")

    @classmethod
    def through(cls, point, normal):
        """Half-plane with boundary through ``point``, outward ``normal``."""
        nx, ny = float(normal[0]), float(normal[1])
        s = math.hypot(nx, ny)
        if s == 0.0:
            raise GeometryError("zero normal")
        nx, ny = nx / s, ny / s
        return cls((nx, ny), nx * float(point[0]) + ny * float(point[1]))


def empty_polygon():
    return np.zeros((0, 2))


def as_polygon(vertices):
    poly = np.ascontiguousarray(vertices, dtype=np.float64).reshape(-1, 2)
    if poly.shape[0] and _signed_area(poly) < 0:
        poly = poly[::-1].copy()
    return poly


def _as_point(p):
    return float(p[0]), float(p[1])


# ---------------------------------------------------------------------------
# basic kernels


@njit(cache=True)
def _signed_area(poly):
    n = poly.shape[0]
    s = 0.0
    for k in range(n):
        j = (k + 1) % n
        s += poly[k, 0] * poly[j, 1] - poly[j, 0] * poly[k, 1]
    return 0.5 * s


@njit(cache=True)
def _cleanup(buf, m):
    """Canonical form: no repeated or collinear vertices, lowest vertex first.

    Equal regions then integrate identically whatever path produced them.
    """
    out = np.empty((max(m, 1), 2))
    c = 0
    for k in range(m):
        if c > 0 and abs(buf[k, 0] - out[c - 1, 0]) < _DUP_EPS and abs(buf[k, 1] - out[c - 1, 1]) < _DUP_EPS:
            continue
        out[c, 0] = buf[k, 0]
        out[c, 1] = buf[k, 1]
        c += 1
    while c > 1 and abs(out[c - 1, 0] - out[0, 0]) < _DUP_EPS and abs(out[c - 1, 1] - out[0, 1]) < _DUP_EPS:
        c -= 1
    # drop vertices that do not turn
    changed = True
    while changed and c >= 3:
        changed = False
        k = 0
        while k < c and c >= 3:
            a = (k - 1) % c
            b = (k + 1) % c
            ex = out[k, 0] - out[a, 0]
            ey = out[k, 1] - out[a, 1]
            fx = out[b, 0] - out[k, 0]
            fy = out[b, 1] - out[k, 1]
            cr = ex * fy - ey * fx
            scale = math.sqrt((ex * ex + ey * ey) * (fx * fx + fy * fy))
            if abs(cr) <= 1e-13 * scale:
                for w in range(k, c - 1):
                    out[w, 0] = out[w + 1, 0]
                    out[w, 1] = out[w + 1, 1]
                c -= 1
                changed = True
            else:
                k += 1
    if c < 3:
        return np.zeros((0, 2))
    s = 0
    for k in range(1, c):
        if out[k, 1] < out[s, 1] or (out[k, 1] == out[s, 1] and out[k, 0] < out[s, 0]):
            s = k
    res = np.empty((c, 2))
    for k in range(c):
        res[k, 0] = out[(s + k) % c, 0]
        res[k, 1] = out[(s + k) % c, 1]
    if _signed_area(res) <= _AREA_EPS:
        return np.zeros((0, 2))
    return res


@njit(cache=True)
def _clip(poly, nx, ny, off):
    """Sutherland-Hodgman step against ``{q : q.n <= off}``."""
    n = poly.shape[0]
    if n == 0:
        return poly
    all_in = True
    all_out = True
    for k in range(n):
        d = poly[k, 0] * nx + poly[k, 1] * ny - off
        if d > TOL:
            all_in = False
        if d <= 0.0:
            all_out = False
    if all_in:
        return poly
    if all_out:
        return np.zeros((0, 2))
    buf = np.empty((2 * n, 2))
    m = 0
    for k in range(n):
        j = (k + 1) % n
        da = poly[k, 0] * nx + poly[k, 1] * ny - off
        db = poly[j, 0] * nx + poly[j, 1] * ny - off
        if da <= 0.0:
            buf[m, 0] = poly[k, 0]
            buf[m, 1] = poly[k, 1]
            m += 1
        if (da < 0.0 and db > 0.0) or (da > 0.0 and db < 0.0):
            t = da / (da - db)
            buf[m, 0] = poly[k, 0] + t * (poly[j, 0] - poly[k, 0])
            buf[m, 1] = poly[k, 1] + t * (poly[j, 1] - poly[k, 1])
            m += 1
    return _cleanup(buf, m)


@njit(cache=True)
def _bisector_clip(poly, px, py, qx, qy):
    # keep the side of the perpendicular bisector closer to p
    dx = qx - px
    dy = qy - py
    s = math.sqrt(dx * dx + dy * dy)
    nx = dx / s
    ny = dy / s
    off = nx * 0.5 * (px + qx) + ny * 0.5 * (py + qy)
    return _clip(poly, nx, ny, off)


@njit(cache=True)
def _point_in_polygon(x, y, poly, tol):
    n = poly.shape[0]
    if n == 0:
        return False
    for k in range(n):
        j = (k + 1) % n
        ax = poly[k, 0]
        ay = poly[k, 1]
        ex = poly[j, 0] - ax
        ey = poly[j, 1] - ay
        ll = ex * ex + ey * ey
        t = 0.0
        if ll > 0.0:
            t = ((x - ax) * ex + (y - ay) * ey) / ll
            t = min(1.0, max(0.0, t))
        dx = x - (ax + t * ex)
        dy = y - (ay + t * ey)
        if dx * dx + dy * dy <= tol * tol:
            return True
    inside = False
    for k in range(n):
        j = (k + 1) % n
        yi = poly[k, 1]
        yj = poly[j, 1]
        if (yi > y) != (yj > y):
            xc = poly[k, 0] + (y - yi) * (poly[j, 0] - poly[k, 0]) / (yj - yi)
            if x < xc:
                inside = not inside
    return inside


@njit(cache=True)
def _points_in_polygon(pts, poly, tol):
    m = pts.shape[0]
    out = np.zeros(m, dtype=np.bool_)
    n = poly.shape[0]
    if n == 0:
        return out
    xmin = poly[:, 0].min() - tol
    xmax = poly[:, 0].max() + tol
    ymin = poly[:, 1].min() - tol
    ymax = poly[:, 1].max() + tol
    for k in range(m):
        x = pts[k, 0]
        y = pts[k, 1]
        if x < xmin or x > xmax or y < ymin or y > ymax:
            continue
        out[k] = _point_in_polygon(x, y, poly, tol)
    return out


# ---------------------------------------------------------------------------
# hyperbola branches


@njit(cache=True)
def _branch(nx_, ny_, fx, fy, delta, window, K):
    """Samples of ``{q : |q-f| - |q-n| = delta}`` covering ``window``.

    Returns ``(pts, ux, uy)`` with ``u`` the unit axis from the far focus to
    the near one; the region on the near side recedes along ``u``.
    """
    dx = nx_ - fx
    dy = ny_ - fy
    d = math.sqrt(dx * dx + dy * dy)
    ux = dx / d
    uy = dy / d
    vx = -uy
    vy = ux
    mx = 0.5 * (nx_ + fx)
    my = 0.5 * (ny_ + fy)
    a = 0.5 * delta
    c = 0.5 * d
    b = math.sqrt(max(c * c - a * a, 0.0))
    ylo = np.inf
    yhi = -np.inf
    for k in range(window.shape[0]):
        yv = (window[k, 0] - mx) * vx + (window[k, 1] - my) * vy
        ylo = min(ylo, yv)
        yhi = max(yhi, yv)
    margin = 0.05 * (yhi - ylo) + 1e-6
    ylo -= margin
    yhi += margin
    tlo = math.asinh(ylo / b)
    thi = math.asinh(yhi / b)
    if tlo < 0.0 < thi:
        tt = max(-tlo, thi)
        tlo = -tt
        thi = tt
    pts = np.empty((K, 2))
    for k in range(K):
        t = tlo + (thi - tlo) * k / (K - 1)
        xp = a * math.cosh(t)
        yp = b * math.sinh(t)
        pts[k, 0] = mx + xp * ux + yp * vx
        pts[k, 1] = my + xp * uy + yp * vy
    return pts, ux, uy


@njit(cache=True)
def _swallowed(d, delta):
    # no usable branch once the focal gap closes (b -> 0)
    return delta >= d * (1.0 - 1e-12)


@njit(cache=True)
def _chord_normal(pts, k, ux, uy):
    ex = pts[k + 1, 0] - pts[k, 0]
    ey = pts[k + 1, 1] - pts[k, 1]
    ix = -ey
    iy = ex
    if ix * ux + iy * uy < 0.0:
        ix = ey
        iy = -ex
    s = math.sqrt(ix * ix + iy * iy)
    if s == 0.0:
        return 0.0, 0.0
    return ix / s, iy / s


@njit(cache=True)
def _in_chord_region(x, y, pts, ux, uy, tol):
    """Membership in conv(pts) + cone(u), the inscribed focal polygon."""
    K = pts.shape[0]
    for k in range(K - 1):
        ix, iy = _chord_normal(pts, k, ux, uy)
        if ix == 0.0 and iy == 0.0:
            continue
        if (x - pts[k, 0]) * ix + (y - pts[k, 1]) * iy < -tol:
            return False
    vx = -uy
    vy = ux
    if (x - pts[0, 0]) * vx + (y - pts[0, 1]) * vy < -tol:
        return False
    if (x - pts[K - 1, 0]) * vx + (y - pts[K - 1, 1]) * vy > tol:
        return False
    return True


@njit(cache=True)
def _focal_inner(poly, nx_, ny_, fx, fy, delta, K):
    if poly.shape[0] == 0:
        return poly
    d = math.sqrt((nx_ - fx) ** 2 + (ny_ - fy) ** 2)
    if _swallowed(d, delta):
        return np.zeros((0, 2))
    pts, ux, uy = _branch(nx_, ny_, fx, fy, delta, poly, K)
    res = poly
    for k in range(K - 1):
        ix, iy = _chord_normal(pts, k, ux, uy)
        if ix == 0.0 and iy == 0.0:
            continue
        res = _clip(res, -ix, -iy, -(ix * pts[k, 0] + iy * pts[k, 1]))
        if res.shape[0] == 0:
            return res
    vx = -uy
    vy = ux
    res = _clip(res, -vx, -vy, -(vx * pts[0, 0] + vy * pts[0, 1]))
    res = _clip(res, vx, vy, vx * pts[K - 1, 0] + vy * pts[K - 1, 1])
    return res


@njit(cache=True)
def _seg_intersect(ax, ay, bx, by, cx, cy, dx, dy):
    """Parameters (t, s) of the crossing of [a,b) and [c,d); t=-1 if none."""
    rx = bx - ax
    ry = by - ay
    sx = dx - cx
    sy = dy - cy
    den = rx * sy - ry * sx
    if den == 0.0:
        return -1.0, -1.0
    qx = cx - ax
    qy = cy - ay
    t = (qx * sy - qy * sx) / den
    s = (qx * ry - qy * rx) / den
    if t < 0.0 or t >= 1.0 or s < 0.0 or s >= 1.0:
        return -1.0, -1.0
    return t, s


@njit(cache=True)
def _focal_outer(poly, kx, ky, fx, fy, delta, K):
    """Remove the inscribed focal polygon around ``f`` from ``poly``.

    Returns ``(result, fallback)``; ``fallback`` is 1 when the cut would need
    a general polygon boolean and ``poly`` is returned unchanged.
    """
    n = poly.shape[0]
    if n == 0:
        return poly, 0
    d = math.sqrt((kx - fx) ** 2 + (ky - fy) ** 2)
    if _swallowed(d, delta):
        return poly, 0
    pts, ux, uy = _branch(fx, fy, kx, ky, delta, poly, K)

    # polyline bounding the removed region, rays truncated well past poly
    cx0 = poly[:, 0].mean()
    cy0 = poly[:, 1].mean()
    reach = 0.0
    for k in range(n):
        reach = max(reach, math.sqrt((poly[k, 0] - cx0) ** 2 + (poly[k, 1] - cy0) ** 2))
    for k in range(K):
        reach = max(reach, math.sqrt((pts[k, 0] - cx0) ** 2 + (pts[k, 1] - cy0) ** 2))
    L = 4.0 * reach + 1.0
    nb = K + 2
    B = np.empty((nb, 2))
    B[0, 0] = pts[0, 0] + L * ux
    B[0, 1] = pts[0, 1] + L * uy
    for k in range(K):
        B[k + 1, 0] = pts[k, 0]
        B[k + 1, 1] = pts[k, 1]
    B[nb - 1, 0] = pts[K - 1, 0] + L * ux
    B[nb - 1, 1] = pts[K - 1, 1] + L * uy

    cap = n * (nb - 1)
    ppos = np.empty(cap)
    bpos = np.empty(cap)
    xs = np.empty(cap)
    ys = np.empty(cap)
    count = 0
    for ia in range(n):
        ja = (ia + 1) % n
        for ib in range(nb - 1):
            t, s = _seg_intersect(poly[ia, 0], poly[ia, 1], poly[ja, 0], poly[ja, 1],
                                  B[ib, 0], B[ib, 1], B[ib + 1, 0], B[ib + 1, 1])
            if t < 0.0:
                continue
            x = poly[ia, 0] + t * (poly[ja, 0] - poly[ia, 0])
            y = poly[ia, 1] + t * (poly[ja, 1] - poly[ia, 1])
            # a crossing through a vertex shows up on both incident edges
            dup = False
            for q in range(count):
                if abs(xs[q] - x) + abs(ys[q] - y) <= 1e-12 * (1.0 + reach):
                    dup = True
            if dup:
                continue
            ppos[count] = ia + t
            bpos[count] = ib + s
            xs[count] = poly[ia, 0] + t * (poly[ja, 0] - poly[ia, 0])
            ys[count] = poly[ia, 1] + t * (poly[ja, 1] - poly[ia, 1])
            count += 1

    if count == 0:
        if _in_chord_region(poly[0, 0], poly[0, 1], pts, ux, uy, 0.0):
            return np.zeros((0, 2)), 0
        return poly, 0
    if count != 2:
        return poly, 1

    i1 = 0
    i2 = 1
    if ppos[1] < ppos[0]:
        i1 = 1
        i2 = 0
    s1 = ppos[i1]
    s2 = ppos[i2]

    # a point of the boundary arc running from X1 to X2
    v = int(math.floor(s1)) + 1
    if v < s2:
        sx = poly[v % n, 0]
        sy = poly[v % n, 1]
    else:
        sx = 0.5 * (xs[i1] + xs[i2])
        sy = 0.5 * (ys[i1] + ys[i2])
    arc_removed = _in_chord_region(sx, sy, pts, ux, uy, 0.0)

    buf = np.empty((n + nb + 4, 2))
    m = 0
    if arc_removed:
        ia_start = i2
        ia_end = i1
    else:
        ia_start = i1
        ia_end = i2
    sa = ppos[ia_start]
    se = ppos[ia_end]
    if se <= sa:
        se += n
    buf[m, 0] = xs[ia_start]
    buf[m, 1] = ys[ia_start]
    m += 1
    v = int(math.floor(sa)) + 1
    while v < se:
        buf[m, 0] = poly[v % n, 0]
        buf[m, 1] = poly[v % n, 1]
        m += 1
        v += 1
    buf[m, 0] = xs[ia_end]
    buf[m, 1] = ys[ia_end]
    m += 1
    # back along the chord polyline
    b_from = bpos[ia_end]
    b_to = bpos[ia_start]
    if b_from < b_to:
        for w in range(nb):
            if b_from < w < b_to:
                buf[m, 0] = B[w, 0]
                buf[m, 1] = B[w, 1]
                m += 1
    else:
        for w in range(nb - 1, -1, -1):
            if b_to < w < b_from:
                buf[m, 0] = B[w, 0]
                buf[m, 1] = B[w, 1]
                m += 1
    res = _cleanup(buf, m)
    if res.shape[0] == 0:
        return poly, 1
    area = _signed_area(res)
    if area > _signed_area(poly) + 1e-9:
        return poly, 1
    if _point_in_polygon(kx, ky, poly, TOL) and not _point_in_polygon(kx, ky, res, 1e-7):
        return poly, 1
    return res, 0


# ---------------------------------------------------------------------------
# circles, hulls


@njit(cache=True)
def _in_circle(x, y, cx, cy, r):
    return math.sqrt((x - cx) ** 2 + (y - cy) ** 2) <= r + 1e-12 * max(1.0, r)


@njit(cache=True)
def _circumcircle(ax, ay, bx, by, cx, cy):
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        # collinear: span the farthest pair
        dab = (ax - bx) ** 2 + (ay - by) ** 2
        dac = (ax - cx) ** 2 + (ay - cy) ** 2
        dbc = (bx - cx) ** 2 + (by - cy) ** 2
        if dab >= dac and dab >= dbc:
            return 0.5 * (ax + bx), 0.5 * (ay + by), 0.5 * math.sqrt(dab)
        if dac >= dbc:
            return 0.5 * (ax + cx), 0.5 * (ay + cy), 0.5 * math.sqrt(dac)
        return 0.5 * (bx + cx), 0.5 * (by + cy), 0.5 * math.sqrt(dbc)
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ox = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    oy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    r = max(math.sqrt((ax - ox) ** 2 + (ay - oy) ** 2),
            math.sqrt((bx - ox) ** 2 + (by - oy) ** 2),
            math.sqrt((cx - ox) ** 2 + (cy - oy) ** 2))
    return ox, oy, r


@njit(cache=True)
def _mec(pts):
    # incremental minidisc; deterministic order, inputs are small
    n = pts.shape[0]
    cx = pts[0, 0]
    cy = pts[0, 1]
    r = 0.0
    for i in range(1, n):
        if _in_circle(pts[i, 0], pts[i, 1], cx, cy, r):
            continue
        cx = pts[i, 0]
        cy = pts[i, 1]
        r = 0.0
        for j in range(i):
            if _in_circle(pts[j, 0], pts[j, 1], cx, cy, r):
                continue
            cx = 0.5 * (pts[i, 0] + pts[j, 0])
            cy = 0.5 * (pts[i, 1] + pts[j, 1])
            r = 0.5 * math.sqrt((pts[i, 0] - pts[j, 0]) ** 2 + (pts[i, 1] - pts[j, 1]) ** 2)
            for k in range(j):
                if _in_circle(pts[k, 0], pts[k, 1], cx, cy, r):
                    continue
                cx, cy, r = _circumcircle(pts[i, 0], pts[i, 1], pts[j, 0], pts[j, 1],
                                          pts[k, 0], pts[k, 1])
    return cx, cy, r


@njit(cache=True)
def _convex_hull(pts):
    n = pts.shape[0]
    if n < 3:
        return pts.copy()
    p = pts.copy()
    # insertion sort by (x, y); hull inputs are a few dozen points
    for i in range(1, n):
        x = p[i, 0]
        y = p[i, 1]
        j = i - 1
        while j >= 0 and (p[j, 0] > x or (p[j, 0] == x and p[j, 1] > y)):
            p[j + 1, 0] = p[j, 0]
            p[j + 1, 1] = p[j, 1]
            j -= 1
        p[j + 1, 0] = x
        p[j + 1, 1] = y
    hull = np.empty((2 * n, 2))
    k = 0
    for i in range(n):
        while k >= 2 and ((hull[k - 1, 0] - hull[k - 2, 0]) * (p[i, 1] - hull[k - 2, 1])
                          - (hull[k - 1, 1] - hull[k - 2, 1]) * (p[i, 0] - hull[k - 2, 0])) <= 0.0:
            k -= 1
        hull[k] = p[i]
        k += 1
    lower = k + 1
    for i in range(n - 2, -1, -1):
        while k >= lower and ((hull[k - 1, 0] - hull[k - 2, 0]) * (p[i, 1] - hull[k - 2, 1])
                              - (hull[k - 1, 1] - hull[k - 2, 1]) * (p[i, 0] - hull[k - 2, 0])) <= 0.0:
            k -= 1
        hull[k] = p[i]
        k += 1
    return hull[:k - 1].copy()


@njit(cache=True)
def _separated_along(a, b, tol):
    n = a.shape[0]
    for k in range(n):
        j = (k + 1) % n
        # outward normal of a CCW edge
        nx = a[j, 1] - a[k, 1]
        ny = -(a[j, 0] - a[k, 0])
        s = math.sqrt(nx * nx + ny * ny)
        if s == 0.0:
            continue
        nx /= s
        ny /= s
        off = nx * a[k, 0] + ny * a[k, 1]
        lo = np.inf
        for m in range(b.shape[0]):
            lo = min(lo, nx * b[m, 0] + ny * b[m, 1])
        if lo > off + tol:
            return True
    return False


@njit(cache=True)
def _convex_overlap(a, b, tol):
    if a.shape[0] == 0 or b.shape[0] == 0:
        return False
    if a.shape[0] < 3 or b.shape[0] < 3:
        return False
    return not (_separated_along(a, b, tol) or _separated_along(b, a, tol))


@njit(cache=True)
def _lens_project(px, py, c1x, c1y, c2x, c2y, b, gap_tol=LENS_GAP):
    """Closest point to p of the intersection of two radius-b disks.

    Returns ``(x, y, ok)``; ``ok`` is False when the disks do not meet.
    """
    d = math.sqrt((c1x - c2x) ** 2 + (c1y - c2y) ** 2)
    slack = TOL * max(1.0, b)
    # quadrature noise can separate the balls by a hair when the bound is ~0
    if d > 2.0 * b + gap_tol:
        return np.nan, np.nan, False
    if d > 2.0 * b:
        # tangent disks up to rounding: the lens is the midpoint
        return 0.5 * (c1x + c2x), 0.5 * (c1y + c2y), True
    d1 = math.sqrt((px - c1x) ** 2 + (py - c1y) ** 2)
    d2 = math.sqrt((px - c2x) ** 2 + (py - c2y) ** 2)
    if d1 <= b and d2 <= b:
        return px, py, True
    best = np.inf
    bx = np.nan
    by = np.nan
    # boundary projections
    for side in range(2):
        if side == 0:
            ox, oy, dd, qx, qy = c1x, c1y, d1, c2x, c2y
        else:
            ox, oy, dd, qx, qy = c2x, c2y, d2, c1x, c1y
        if dd > b and dd > 0.0:
            x = ox + b * (px - ox) / dd
            y = oy + b * (py - oy) / dd
            if math.sqrt((x - qx) ** 2 + (y - qy) ** 2) <= b + slack:
                e = math.sqrt((x - px) ** 2 + (y - py) ** 2)
                if e < best:
                    best = e
                    bx = x
                    by = y
    # corners
    if d > 0.0:
        h = math.sqrt(max(b * b - 0.25 * d * d, 0.0))
        mx = 0.5 * (c1x + c2x)
        my = 0.5 * (c1y + c2y)
        ex = -(c2y - c1y) / d
        ey = (c2x - c1x) / d
        for sgn in (-1.0, 1.0):
            x = mx + sgn * h * ex
            y = my + sgn * h * ey
            e = math.sqrt((x - px) ** 2 + (y - py) ** 2)
            if e < best:
                best = e
                bx = x
                by = y
    elif b == 0.0:
        return c1x, c1y, True
    return bx, by, True


# ---------------------------------------------------------------------------
# public wrappers


def signed_area(poly):
    return float(_signed_area(as_polygon(poly)))


def area(poly):
    return abs(signed_area(poly))


def clip_halfplane(poly, h):
    """``poly`` intersected with half-plane ``h`` (convex or empty in, out)."""
    poly = as_polygon(poly)
    return _clip(poly, float(h.normal[0]), float(h.normal[1]), float(h.offset))


def hyperbola_branch(f_near, f_far, delta, window, K=DEFAULT_CHORDS):
    """Sample K points on the branch of ``|q-f_far| - |q-f_near| = delta``
    closest to ``f_near``, spanning the extent of ``window``."""
    nx_, ny_ = _as_point(f_near)
    fx, fy = _as_point(f_far)
    window = as_polygon(window)
    if K < 2:
        raise GeometryError("need at least two samples")
    if window.shape[0] == 0:
        raise GeometryError("empty window")
    d = math.hypot(nx_ - fx, ny_ - fy)
    if delta < 0:
        raise GeometryError("negative distance offset")
    if _swallowed(d, delta):
        raise GeometryError("uncertainty swallows bisector")
    pts, _, _ = _branch(nx_, ny_, fx, fy, float(delta), window, int(K))
    return pts


def clip_focal_inner(poly, f_near, f_far, delta, K=DEFAULT_CHORDS):
    """Inner approximation of ``poly ∩ {q : |q-f_far| - |q-f_near| >= delta}``.

    Returns the empty polygon when ``delta`` reaches the focal distance.
    """
    poly = as_polygon(poly)
    nx_, ny_ = _as_point(f_near)
    fx, fy = _as_point(f_far)
    if delta < 0:
        raise GeometryError("negative distance offset")
    return _focal_inner(poly, nx_, ny_, fx, fy, float(delta), int(K))


def subtract_focal_outer(poly, f_keep, f_remove, delta, K=DEFAULT_CHORDS, return_flag=False):
    """Outer approximation of ``poly ∩ {q : |q-f_keep| - |q-f_remove| <= delta}``.

    With ``return_flag`` a ``(polygon, fallback)`` pair is returned;
    ``fallback`` is True when the cut was skipped (still an outer bound).
    """
    poly = as_polygon(poly)
    kx, ky = _as_point(f_keep)
    fx, fy = _as_point(f_remove)
    if delta < 0:
        raise GeometryError("negative distance offset")
    res, flag = _focal_outer(poly, kx, ky, fx, fy, float(delta), int(K))
    if return_flag:
        return res, bool(flag)
    return res


def min_enclosing_circle(points):
    pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise GeometryError("degenerate set")
    cx, cy, r = _mec(pts)
    return Circle(np.array([cx, cy]), float(r))


def project_onto_lens(p, c1, c2, b):
    """Closest point to ``p`` of ``B(c1, b) ∩ B(c2, b)``."""
    px, py = _as_point(p)
    c1x, c1y = _as_point(c1)
    c2x, c2y = _as_point(c2)
    if b < 0:
        raise GeometryError("negative radius")
    x, y, ok = _lens_project(px, py, c1x, c1y, c2x, c2y, float(b))
    if not ok:
        raise GeometryError("inconsistent centroid bound")
    return np.array([x, y])


def farthest_vertex_distance(poly, p):
    poly = as_polygon(poly)
    if poly.shape[0] == 0:
        raise GeometryError("empty polygon")
    px, py = _as_point(p)
    return float(np.sqrt(((poly - (px, py)) ** 2).sum(axis=1)).max())


def point_in_polygon(p, poly, tol=TOL):
    px, py = _as_point(p)
    return bool(_point_in_polygon(px, py, as_polygon(poly), tol))


def points_in_polygon(points, poly, tol=TOL):
    pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    return _points_in_polygon(pts, as_polygon(poly), tol)


def convex_hull(points):
    pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] == 0:
        return empty_polygon()
    return _convex_hull(pts)


def convex_polygons_intersect(a, b, tol=TOL):
    return bool(_convex_overlap(as_polygon(a), as_polygon(b), tol))


def rectangle(x0, y0, x1, y1):
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=np.float64)
