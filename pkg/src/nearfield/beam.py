"""Array gain, beam width, and beam depth for broadside focusing."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .field import element_field_integrals, fresnel_channel_vector
from .geometry import ArrayGeometry
from .numerics import fresnel_cs, sinc, solve_scalar_root
from .regions import boundary_distances

#: Rounded 8 * a3dB * d_FA / d_F for a square array (exact value 9.9373...).
#: This is the constant behind the square-array closed-form beam depth and
#: the canonical focal-point sequence d_FA/20, d_FA/40, ...
SQUARE_DEPTH_CONSTANT = 10.0


@dataclass(frozen=True)
class BeamMetrics:
    """3 dB focus-region metrics for a focal distance F."""

    bw_3db: float
    bd_3db: float
    bd_interval: Tuple[float, float]
    a_3db: float


def array_gain_exact(geom: ArrayGeometry, z: float, tol: float = 1e-6) -> float:
    """Normalized array gain from patch-integrated exact fields, in (0, 1].

    Total matched-filter power over all elements divided by the power of
    rows*cols reference elements at the origin.
    """
    integrals, ref = element_field_integrals(geom, z, tol=tol)
    num = float(np.sum(np.abs(integrals) ** 2))
    return num / (geom.num_elements * geom.element_area * ref)


def gain_focal_plane(geom: ArrayGeometry, focal_distance: float,
                     x_r, y_r):
    """Normalized gain in the focal plane, closed form (separable sinc^2)."""
    if not (focal_distance > 0 and math.isfinite(focal_distance)):
        raise ValueError("focal distance must be finite and positive")
    m, n = geom.rows, geom.cols
    d = geom.element_diagonal
    lam = geom.wavelength
    ax = n / math.sqrt(2.0) * d * np.asarray(x_r) / (lam * focal_distance)
    ay = m / math.sqrt(2.0) * d * np.asarray(y_r) / (lam * focal_distance)
    return sinc(ax) ** 2 * sinc(ay) ** 2


def beam_width_3db(geom: ArrayGeometry, focal_distance: float) -> float:
    """3 dB beam width along x in the focal plane."""
    if not (focal_distance > 0 and math.isfinite(focal_distance)):
        raise ValueError("focal distance must be finite and positive")
    return 0.886 * math.sqrt(2.0) * geom.wavelength * focal_distance / (
        geom.cols * geom.element_diagonal)


def g_of_x(rows: int, cols: int, x):
    """Axial gain profile as a function of x = d_F / (8 z_eff); even in x."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.ones_like(ax)
    nz = ax > 0
    u_m = rows * np.sqrt(ax[nz])
    u_n = cols * np.sqrt(ax[nz])
    cm, sm = fresnel_cs(u_m)
    cn, sn = fresnel_cs(u_n)
    out[nz] = ((cm**2 + sm**2) * (cn**2 + sn**2)
               / (rows * cols * ax[nz]) ** 2)
    if out.ndim == 0:
        return float(out)
    return out


def gain_axial(geom: ArrayGeometry, focal_distance: float, z_r: float) -> float:
    """Normalized gain on the beam axis at distance z_r when focused at F.

    An infinite focal distance uses z_eff = z_r; z_r = F is the removable
    singularity with gain 1.
    """
    if z_r <= 0:
        raise ValueError("z_r must be positive")
    d_f = boundary_distances(geom).d_f
    if math.isinf(focal_distance):
        z_eff = z_r
    elif z_r == focal_distance:
        return 1.0
    else:
        z_eff = z_r * focal_distance / abs(z_r - focal_distance)
    return float(g_of_x(geom.rows, geom.cols, d_f / (8.0 * z_eff)))


def solve_a3db(rows: int, cols: int) -> float:
    """Half-gain value of x = d_F/(8 z_eff), found numerically.

    For a square array rows^2 * a3dB = 1.2422 (often rounded to 1.25).
    """
    scale = 2.0 / (rows**2 + cols**2)
    x_lo = 1e-6 * scale
    if g_of_x(rows, cols, x_lo) <= 0.5:
        raise ValueError("bracket assumption violated at the lower end")
    x_hi = 0.1 * scale
    while g_of_x(rows, cols, x_hi) >= 0.25:
        x_hi *= 1.3
        if x_hi > 1e6 * scale:
            raise ValueError("failed to bracket the half-gain point")
    return solve_scalar_root(
        lambda x: g_of_x(rows, cols, x) - 0.5, (x_lo, x_hi), tol=1e-18)


def beam_depth_3db(geom: ArrayGeometry, focal_distance: float,
                   a3db: Optional[float] = None) -> BeamMetrics:
    """3 dB depth interval and length for a beam focused at F.

    The depth is finite only for F < d_F / (8 a3dB). `a3db` defaults to the
    numerically exact half-gain parameter of this array shape.
    """
    if focal_distance <= 0:
        raise ValueError("focal distance must be positive")
    if a3db is None:
        a3db = solve_a3db(geom.rows, geom.cols)
    d_f = boundary_distances(geom).d_f
    f = focal_distance
    if math.isinf(f):
        z_lo = d_f / (8.0 * a3db)
        z_hi = math.inf
        bd = math.inf
        bw = math.inf
    else:
        z_lo = d_f * f / (d_f + 8.0 * a3db * f)
        if f < d_f / (8.0 * a3db):
            z_hi = d_f * f / (d_f - 8.0 * a3db * f)
            bd = 16.0 * a3db * d_f * f**2 / (d_f**2 - 64.0 * a3db**2 * f**2)
        else:
            z_hi = math.inf
            bd = math.inf
        bw = beam_width_3db(geom, f)
    return BeamMetrics(bw_3db=bw, bd_3db=bd, bd_interval=(z_lo, z_hi), a_3db=a3db)


def beam_depth_square(geom: ArrayGeometry, focal_distance: float) -> float:
    """Square-array closed-form 3 dB beam depth (rounded constant 10)."""
    if geom.rows != geom.cols:
        raise ValueError("square-array form requires rows == cols")
    if focal_distance <= 0:
        raise ValueError("focal distance must be positive")
    d_fa = boundary_distances(geom).d_fa
    f = focal_distance
    c = SQUARE_DEPTH_CONSTANT
    if math.isinf(f) or f >= d_fa / c:
        return math.inf
    return 2.0 * c * d_fa * f**2 / (d_fa**2 - c**2 * f**2)


def _pattern_row(geom: ArrayGeometry, w_conj: np.ndarray, x_grid: np.ndarray,
                 z: float) -> np.ndarray:
    centers = geom.element_centers()
    dx = centers[:, 0][:, None] - x_grid[None, :]
    dist = np.sqrt(dx * dx + centers[:, 1][:, None] ** 2 + z * z)
    h = np.exp(-2j * np.pi / geom.wavelength * dist)
    dots = w_conj @ h
    return np.abs(dots) ** 2 / geom.num_elements**2


def beam_pattern_map(geom: ArrayGeometry, focal_point, x_grid,
                     z_grid) -> np.ndarray:
    """Normalized gain |h(F)^H h(p)|^2 / (||h(F)||^2 ||h(p)||^2) on an
    (x, z) grid, using the per-element spherical-phase channel model.

    Returns an array of shape (len(z_grid), len(x_grid)). Rows are computed
    in parallel (NEARFIELD_WORKERS threads) with deterministic ordering.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    z_grid = np.asarray(z_grid, dtype=float)
    if np.any(z_grid <= 0):
        raise ValueError("grid must satisfy z > 0")
    h_f = fresnel_channel_vector(geom, focal_point)
    w_conj = np.conj(h_f.coefficients)
    workers = int(os.environ.get("NEARFIELD_WORKERS", os.cpu_count() or 1))
    if workers > 1 and len(z_grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(
                lambda z: _pattern_row(geom, w_conj, x_grid, z), z_grid))
    else:
        rows = [_pattern_row(geom, w_conj, x_grid, z) for z in z_grid]
    return np.vstack(rows)
