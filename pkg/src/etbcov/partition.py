"""Voronoi, guaranteed and dual-guaranteed cells.

For a site ``p`` with own uncertainty radius ``r0`` against a disk
``(c, r)``, both cell constraints are distance-difference inequalities with
offset ``r0 + r``:

* guaranteed cell keeps ``|q - c| - |q - p| >= r0 + r``;
* dual cell drops ``|q - p| - |q - c| > r0 + r``.

Guaranteed cells are inner approximations and dual cells outer
approximations (see :mod:`etbcov.geometry`).
"""
import math
from typing import NamedTuple

import numpy as np
from numba import njit

from . import geometry as geo
from .density import _moments

DEFAULT_CHORDS = geo.DEFAULT_CHORDS
QUAD_GAP = 1e-5


class UncertaintyDisk(NamedTuple):
    center: np.ndarray
    radius: float


def _disk_arrays(others):
    if len(others) == 0:
        return np.zeros((0, 2)), np.zeros(0)
    centers = np.array([np.asarray(d.center, dtype=float) for d in others]).reshape(-1, 2)
    radii = np.array([float(d.radius) for d in others])
    if np.any(radii < 0):
        raise ValueError("negative uncertainty radius")
    return centers, radii


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True)
def _gv(px, py, own_r, centers, radii, Q, K):
    poly = Q
    for j in range(centers.shape[0]):
        poly = geo._focal_inner(poly, px, py, centers[j, 0], centers[j, 1], own_r + radii[j], K)
        if poly.shape[0] == 0:
            break
    return poly


@njit(cache=True)
def _dgv(px, py, own_r, centers, radii, Q, K):
    poly = Q
    fallbacks = 0
    # nearer disks cut the most, which keeps later windows small
    order = np.argsort((centers[:, 0] - px) ** 2 + (centers[:, 1] - py) ** 2)
    for idx in range(centers.shape[0]):
        j = order[idx]
        poly, fb = geo._focal_outer(poly, px, py, centers[j, 0], centers[j, 1], own_r + radii[j], K)
        fallbacks += fb
    return poly, fallbacks


@njit(cache=True)
def _voronoi(positions, i, Q):
    poly = Q
    for j in range(positions.shape[0]):
        if j == i:
            continue
        poly = geo._bisector_clip(poly, positions[i, 0], positions[i, 1],
                                  positions[j, 0], positions[j, 1])
        if poly.shape[0] == 0:
            break
    return poly


@njit(cache=True)
def _evaluate(px, py, centers, radii, Q, K, kind, fcenters, scale, const, grid, gx0, gy0, gdx, gdy):
    """Everything the motion law needs for one agent.

    Returns ``(gv, dgv, mg, cgx, cgy, md, cdx, cdy, cr, bnd, mx, my, ok, fallbacks)``.
    ``ok`` is False only when the two centroid balls miss each other.
    """
    gv = _gv(px, py, 0.0, centers, radii, Q, K)
    dgv, fallbacks = _dgv(px, py, 0.0, centers, radii, Q, K)
    mg, gmx, gmy = _moments(gv, kind, fcenters, scale, const, grid, gx0, gy0, gdx, gdy)
    md, dmx, dmy = _moments(dgv, kind, fcenters, scale, const, grid, gx0, gy0, gdx, gdy)
    _, _, cr = geo._mec(dgv)
    if md <= 0.0:
        return (gv, dgv, mg, np.nan, np.nan, md, np.nan, np.nan, cr, np.nan,
                np.nan, np.nan, False, fallbacks)
    cdx = dmx / md
    cdy = dmy / md
    if mg > 0.0:
        cgx = gmx / mg
        cgy = gmy / mg
        ratio = min(mg / md, 1.0)
    else:
        cgx = cdx
        cgy = cdy
        ratio = 0.0
    bnd = 2.0 * cr * (1.0 - ratio)
    # centroid quadrature noise scales with the cell size
    mx, my, ok = geo._lens_project(px, py, cgx, cgy, cdx, cdy, bnd, QUAD_GAP * max(cr, 1.0))
    return gv, dgv, mg, cgx, cgy, md, cdx, cdy, cr, bnd, mx, my, ok, fallbacks


@njit(cache=True)
def _dg_mask(px, py, own_r, centers, radii, Q, K):
    """Which disks have a dual cell meeting the own dual cell.

    Every dual cell is built from the same information set: the own region
    ``B(p, own_r)`` plus all disks.
    """
    n = centers.shape[0]
    mask = np.zeros(n, dtype=np.bool_)
    own, _ = _dgv(px, py, own_r, centers, radii, Q, K)
    if own.shape[0] == 0:
        return mask
    own_hull = geo._convex_hull(own)
    for k in range(n):
        oc = np.empty((n, 2))
        orad = np.empty(n)
        oc[0, 0] = px
        oc[0, 1] = py
        orad[0] = own_r
        m = 1
        for j in range(n):
            if j == k:
                continue
            oc[m, 0] = centers[j, 0]
            oc[m, 1] = centers[j, 1]
            orad[m] = radii[j]
            m += 1
        cell, _ = _dgv(centers[k, 0], centers[k, 1], radii[k], oc, orad, Q, K)
        if cell.shape[0] == 0:
            continue
        mask[k] = geo._convex_overlap(own_hull, geo._convex_hull(cell), geo.TOL)
    return mask


@njit(cache=True)
def _neighbor_matrix(positions, Q, tol):
    n = positions.shape[0]
    adj = np.zeros((n, n), dtype=np.bool_)
    for i in range(n):
        cell = _voronoi(positions, i, Q)
        for v in range(cell.shape[0]):
            di = math.sqrt((cell[v, 0] - positions[i, 0]) ** 2 + (cell[v, 1] - positions[i, 1]) ** 2)
            for j in range(n):
                if j == i:
                    continue
                dj = math.sqrt((cell[v, 0] - positions[j, 0]) ** 2 + (cell[v, 1] - positions[j, 1]) ** 2)
                if abs(dj - di) <= tol * max(1.0, di):
                    adj[i, j] = True
                    adj[j, i] = True
    return adj


# ---------------------------------------------------------------------------
# public API


def _check_distinct(positions):
    n = positions.shape[0]
    for i in range(n):
        d = np.abs(positions[i + 1:] - positions[i]).max(axis=1) if i + 1 < n else np.zeros(0)
        if np.any(d == 0.0):
            raise ValueError("degenerate configuration: coincident positions")


def voronoi_cell(i, positions, Q):
    positions = np.ascontiguousarray(positions, dtype=float).reshape(-1, 2)
    _check_distinct(positions)
    return _voronoi(positions, int(i), geo.as_polygon(Q))


def voronoi_cells(positions, Q):
    positions = np.ascontiguousarray(positions, dtype=float).reshape(-1, 2)
    _check_distinct(positions)
    Q = geo.as_polygon(Q)
    return [_voronoi(positions, i, Q) for i in range(positions.shape[0])]


def voronoi_neighbors(positions, Q, tol=1e-7):
    """Neighbor sets from cell vertices equidistant to two sites."""
    adj = neighbor_matrix(positions, Q, tol)
    return [set(np.flatnonzero(row).tolist()) for row in adj]


def neighbor_matrix(positions, Q, tol=1e-7):
    positions = np.ascontiguousarray(positions, dtype=float).reshape(-1, 2)
    _check_distinct(positions)
    return _neighbor_matrix(positions, geo.as_polygon(Q), tol)


def guaranteed_cell(own, others, Q, K=DEFAULT_CHORDS, own_radius=0.0):
    centers, radii = _disk_arrays(others)
    return _gv(float(own[0]), float(own[1]), float(own_radius), centers, radii,
               geo.as_polygon(Q), int(K))


def dual_guaranteed_cell(own, others, Q, K=DEFAULT_CHORDS, own_radius=0.0, return_fallbacks=False):
    centers, radii = _disk_arrays(others)
    poly, fb = _dgv(float(own[0]), float(own[1]), float(own_radius), centers, radii,
                    geo.as_polygon(Q), int(K))
    if return_fallbacks:
        return poly, int(fb)
    return poly


def dg_neighbor(i, j, cells):
    """True when the dual cells of ``i`` and ``j`` meet (via convex hulls)."""
    if i == j:
        return cells[i].shape[0] > 0
    a = geo.convex_hull(cells[i])
    b = geo.convex_hull(cells[j])
    return geo.convex_polygons_intersect(a, b)


def dg_neighbor_mask(own, others, Q, K=DEFAULT_CHORDS, own_radius=0.0):
    centers, radii = _disk_arrays(others)
    return _dg_mask(float(own[0]), float(own[1]), float(own_radius), centers, radii,
                    geo.as_polygon(Q), int(K))


def exclusion_radius(own, dual):
    dual = geo.as_polygon(dual)
    if dual.shape[0] == 0:
        raise ValueError("empty dual cell")
    return 2.0 * geo.farthest_vertex_distance(dual, own)


class CellEvaluation(NamedTuple):
    guaranteed: np.ndarray
    dual: np.ndarray
    g_mass: float
    g_centroid: np.ndarray
    d_mass: float
    d_centroid: np.ndarray
    circumradius: float
    bound: float
    target: np.ndarray
    fallbacks: int


def evaluate(own, centers, radii, Q, field, K=DEFAULT_CHORDS):
    """Cells, masses, centroid bound and target point for one agent."""
    out = _evaluate(float(own[0]), float(own[1]),
                    np.ascontiguousarray(centers, dtype=float).reshape(-1, 2),
                    np.ascontiguousarray(radii, dtype=float), geo.as_polygon(Q), int(K),
                    *field.packed)
    gv, dgv, mg, cgx, cgy, md, cdx, cdy, cr, bnd, mx, my, ok, fb = out
    if md <= 0.0:
        raise ValueError("degenerate dual cell")
    if not ok:
        raise geo.GeometryError("inconsistent centroid bound")
    return CellEvaluation(gv, dgv, mg, np.array([cgx, cgy]), md, np.array([cdx, cdy]),
                          cr, bnd, np.array([mx, my]), int(fb))
