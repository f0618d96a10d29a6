"""Independent reference computations used by the tests.

Nothing here calls the package's geometry kernels: every oracle is brute
force (enumeration, dense sampling or nearest-site classification).
"""
import itertools
import math

import numpy as np


def brute_mec(points):
    """Smallest circle through 2 or 3 of the points containing all of them."""
    P = np.asarray(points, float)
    if len(P) == 1:
        return P[0].copy(), 0.0
    best = (None, math.inf)

    def consider(c, r):
        nonlocal best
        if r < best[1] and np.all(np.hypot(*(P - c).T) <= r + 1e-9 * max(1.0, r)):
            best = (c, r)

    for a, b in itertools.combinations(range(len(P)), 2):
        c = (P[a] + P[b]) / 2
        consider(c, float(np.hypot(*(P[a] - c))))
    for a, b, d in itertools.combinations(range(len(P)), 3):
        (ax, ay), (bx, by), (cx, cy) = P[a], P[b], P[d]
        den = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        if abs(den) < 1e-12:
            continue
        ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / den
        uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / den
        c = np.array([ux, uy])
        consider(c, float(np.hypot(*(P[a] - c))))
    return best


def lens_samples(c1, c2, b, n, rng):
    """Uniform rejection samples of ``B(c1, b) ∩ B(c2, b)``."""
    c1 = np.asarray(c1, float)
    c2 = np.asarray(c2, float)
    out = []
    got = 0
    while got < n:
        q = c1 + rng.uniform(-b, b, size=(n, 2))
        ok = (np.hypot(*(q - c1).T) <= b) & (np.hypot(*(q - c2).T) <= b)
        out.append(q[ok])
        got += int(ok.sum())
    return np.concatenate(out)[:n]


def lens_argmin(p, c1, c2, b, n=10 ** 6, seed=0):
    q = lens_samples(c1, c2, b, n, np.random.default_rng(seed))
    d = np.hypot(*(q - np.asarray(p, float)).T)
    k = int(np.argmin(d))
    return q[k], float(d[k])


def lens_boundary_argmin(p, c1, c2, b, n=10 ** 6):
    """Nearest lens point from dense samples of the two boundary arcs."""
    p, c1, c2 = (np.asarray(v, float) for v in (p, c1, c2))
    if np.hypot(*(p - c1)) <= b and np.hypot(*(p - c2)) <= b:
        return p.copy(), 0.0
    a = np.linspace(0, 2 * np.pi, n, endpoint=False)
    ring = np.column_stack([np.cos(a), np.sin(a)]) * b
    arcs = [c + ring for c in (c1, c2)]
    q = np.concatenate([arcs[0][np.hypot(*(arcs[0] - c2).T) <= b + 1e-12],
                        arcs[1][np.hypot(*(arcs[1] - c1).T) <= b + 1e-12]])
    d = np.hypot(*(q - p).T)
    k = int(np.argmin(d))
    return q[k], float(d[k])


def inside_polygon(points, poly):
    """Even-odd ray casting, vectorized; boundary points may go either way."""
    P = np.asarray(points, float).reshape(-1, 2)
    V = np.asarray(poly, float)
    x, y = P[:, 0], P[:, 1]
    inside = np.zeros(len(P), dtype=bool)
    for k in range(len(V)):
        x0, y0 = V[k]
        x1, y1 = V[(k + 1) % len(V)]
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < xc)
    return inside


def midpoint_grid(x0, y0, x1, y1, n):
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    ys = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
    X, Y = np.meshgrid(xs, ys)
    return np.column_stack([X.ravel(), Y.ravel()]), (x1 - x0) * (y1 - y0) / (n * n)


def two_peak_density(points):
    q = np.asarray(points, float)
    return (np.exp(-np.hypot(q[:, 0] - 20.0, q[:, 1] - 30.0) / 100.0)
            + np.exp(-np.hypot(q[:, 0] - 30.0, q[:, 1] - 10.0) / 100.0))


def grid_mass_centroid(poly, density, n=2000, chunks=20):
    """Midpoint-rule mass and centroid of ``poly`` on an ``n x n`` grid over its bbox."""
    V = np.asarray(poly, float)
    x0, y0 = V.min(axis=0)
    x1, y1 = V.max(axis=0)
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    dA = (x1 - x0) * (y1 - y0) / (n * n)
    m = mx = my = 0.0
    for rows in np.array_split(y0 + (np.arange(n) + 0.5) * (y1 - y0) / n, chunks):
        X, Y = np.meshgrid(xs, rows)
        q = np.column_stack([X.ravel(), Y.ravel()])
        q = q[inside_polygon(q, V)]
        f = density(q) * dA
        m += f.sum()
        mx += (f * q[:, 0]).sum()
        my += (f * q[:, 1]).sum()
    return m, np.array([mx / m, my / m])


def nearest_site(points, sites):
    d = np.hypot(points[:, None, 0] - sites[None, :, 0], points[:, None, 1] - sites[None, :, 1])
    return np.argmin(d, axis=1)


def monte_carlo_H(sites, box, density, n=10 ** 6, seed=0, chunk=200000):
    """Monte-Carlo estimate of the coverage cost and its standard error."""
    rng = np.random.default_rng(seed)
    x0, y0, x1, y1 = box
    area = (x1 - x0) * (y1 - y0)
    vals = []
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        q = np.column_stack([rng.uniform(x0, x1, m), rng.uniform(y0, y1, m)])
        d2 = ((q[:, None, :] - sites[None]) ** 2).sum(-1).min(axis=1)
        vals.append(d2 * density(q))
    v = np.concatenate(vals) * area
    return float(v.mean()), float(v.std() / math.sqrt(n))


def exact_voronoi_mask(points, sites, i, tol=1e-9):
    """Points of the closed Voronoi cell of site ``i``."""
    d = np.hypot(points[:, None, 0] - sites[None, :, 0], points[:, None, 1] - sites[None, :, 1])
    others = np.delete(d, i, axis=1)
    dmin = others.min(axis=1) if others.shape[1] else np.full(len(points), np.inf)
    return d[:, i] <= dmin + tol, d[:, i] < dmin - tol


def sample_in_disk(center, radius, rng):
    a = rng.uniform(0, 2 * math.pi)
    r = radius * math.sqrt(rng.uniform())
    return np.asarray(center, float) + r * np.array([math.cos(a), math.sin(a)])


def lloyd_step(sites, box, density, n=400):
    """Grid-based Lloyd update (each site jumps to its cell centroid)."""
    q, dA = midpoint_grid(*box, n)
    owner = nearest_site(q, sites)
    f = density(q) * dA
    out = np.empty_like(sites)
    for i in range(len(sites)):
        w = f[owner == i]
        out[i] = (q[owner == i] * w[:, None]).sum(axis=0) / w.sum()
    return out
