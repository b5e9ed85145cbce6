"""Exact vertex, ray and facet enumeration for polyhedra in R^m, m <= 5.

Everything here is brute force over active sets, which is exact and cheap at
desk scale. Higher dimensions are never passed in (the homogenized problems
used for facet enumeration live in at most MAX_DIM + 1 dimensions).
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import nnls

DET_TOL = 1e-10
FEAS_TOL = 1e-9
ROUND_DECIMALS = 9


def _unique_rows(rows: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        return rows
    keys = np.round(rows, ROUND_DECIMALS) + 0.0
    _, idx = np.unique(keys, axis=0, return_index=True)
    return rows[np.sort(idx)]


def normalize_rows(A: np.ndarray, b: np.ndarray | None = None):
    """Scale inequality rows to unit normals, dropping null rows."""
    norms = np.linalg.norm(A, axis=1)
    keep = norms > 1e-12
    A = A[keep] / norms[keep, None]
    if b is None:
        return A
    return A, b[keep] / norms[keep]


def enumerate_vertices(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vertices of {x : A x <= b} by solving every m-subset of active rows."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m = A.shape[1]
    A, b = normalize_rows(A, b)
    if len(A) < m:
        return np.empty((0, m))
    combos = np.array(list(itertools.combinations(range(len(A)), m)))
    mats = A[combos]
    rhs = b[combos]
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > DET_TOL
    if not np.any(ok):
        return np.empty((0, m))
    sols = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    slack = sols @ A.T - b[None, :]
    feasible = np.all(slack <= FEAS_TOL * (1.0 + np.abs(b))[None, :], axis=1)
    return _unique_rows(sols[feasible])


def prune_redundant(gens: np.ndarray) -> np.ndarray:
    """Drop generators that lie in the cone spanned by the others."""
    kept = list(gens)
    i = 0
    while i < len(kept):
        others = kept[:i] + kept[i + 1:]
        if others:
            _, resid = nnls(np.array(others).T, kept[i])
            if resid <= 1e-9:
                kept.pop(i)
                continue
        i += 1
    return np.array(kept).reshape(-1, gens.shape[1])


def cone_generators(A: np.ndarray) -> np.ndarray:
    """Generators of the cone {d : A d <= 0}.

    The cone intersected with the box [-1, 1]^m is a polytope containing the
    origin; its nonzero vertices generate the whole cone, lines included.
    """
    A = np.asarray(A, dtype=float).reshape(-1, np.shape(A)[-1])
    m = A.shape[1]
    box = np.vstack([np.eye(m), -np.eye(m)])
    full = np.vstack([A, box]) if len(A) else box
    rhs = np.concatenate([np.zeros(len(A)), np.ones(2 * m)])
    verts = enumerate_vertices(full, rhs)
    norms = np.linalg.norm(verts, axis=1)
    verts = verts[norms > 1e-9] / norms[norms > 1e-9, None]
    return prune_redundant(_unique_rows(verts))


def polar_generators(gens: np.ndarray) -> np.ndarray:
    """Generators of the polar cone {y : y . g <= 0 for every generator g}."""
    gens = np.asarray(gens, dtype=float)
    return cone_generators(gens)


def halfspaces_of(points: np.ndarray, rays: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Facet description (A, b) of conv(points) + cone(rays), rows unit-normal.

    Homogenizes to the cone generated by (v, 1) and (r, 0) and reads the
    facets off the generators of its polar.
    """
    m = points.shape[1]
    lifted = [np.hstack([points, np.ones((len(points), 1))])]
    if len(rays):
        lifted.append(np.hstack([rays, np.zeros((len(rays), 1))]))
    polar = polar_generators(np.vstack(lifted))
    A = polar[:, :m]
    beta = polar[:, m]
    keep = np.linalg.norm(A, axis=1) > 1e-9
    A, b = normalize_rows(A[keep], -beta[keep])
    return A.reshape(-1, m), b
