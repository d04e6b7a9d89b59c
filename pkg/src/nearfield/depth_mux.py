"""Depth-domain multi-user multiplexing: focal planning, channels,
zero-forcing, SINR."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .beam import solve_a3db
from .field import fresnel_channel_vector
from .geometry import ArrayGeometry
from .numerics import RankError
from .regions import boundary_distances

#: SINR cap for the degenerate interference-free, noise-free case.
SINR_CAP = 1e30

#: Condition-number threshold on the Gram matrix beyond which zero-forcing
#: is treated as non-existent (users not resolvable).
GRAM_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class FocalPlan:
    """Focal distances (descending, first may be inf) with contiguous,
    pairwise disjoint 3 dB depth intervals."""

    focal_points: Tuple[float, ...]
    intervals: Tuple[Tuple[float, float], ...]
    d_min: float


@dataclass(frozen=True)
class MultiUserChannel:
    """Downlink channel matrix; column k is user k's channel vector."""

    matrix: np.ndarray  # (num_elements, K)
    user_positions: Tuple[Tuple[float, float, float], ...]
    geometry: ArrayGeometry


def planning_depth_parameter(geom: ArrayGeometry, exact: bool = False) -> float:
    """Half-gain depth parameter used by the focal-point planner.

    The default is the rounded square-array convention, 2.5/(rows^2+cols^2),
    equivalent to 8*a3dB = 10*d_F/d_FA. It generates the canonical focal
    sequence d_FA/20, d_FA/40, ... With exact=True the numerically solved
    shape-dependent value is used instead (about 0.6% smaller for squares,
    substantially smaller for elongated arrays).
    """
    if exact:
        return solve_a3db(geom.rows, geom.cols)
    return 2.5 / (geom.rows**2 + geom.cols**2)


def plan_depth_focal_points(geom: ArrayGeometry, d_min: Optional[float] = None,
                            a3db: Optional[float] = None) -> FocalPlan:
    """Greedy far-to-near packing of focal points with contiguous 3 dB
    depth intervals.

    The first focal point is at infinity and covers [d_F/(8 a3dB), inf);
    each subsequent interval's upper endpoint equals the previous lower
    endpoint. Focal points below d_min are not admitted. d_min defaults to
    the geometry's d_B bound.
    """
    bounds = boundary_distances(geom)
    if d_min is None:
        d_min = bounds.d_b
    if d_min <= 0:
        raise ValueError("d_min must be positive")
    if d_min < bounds.d_b:
        warnings.warn("d_min below d_B: gain and interval approximations "
                      "degrade close to the array", stacklevel=2)
    if a3db is None:
        a3db = planning_depth_parameter(geom)
    inv_tau = bounds.d_f / (8.0 * a3db)  # first interval's lower endpoint

    focal_points: List[float] = [math.inf]
    intervals: List[Tuple[float, float]] = [(inv_tau, math.inf)]
    k = 2
    while True:
        f_k = inv_tau / (2.0 * (k - 1))
        # tolerate rounding when a focal point lands exactly on d_min
        if f_k < d_min * (1.0 - 1e-9):
            break
        focal_points.append(f_k)
        intervals.append((inv_tau / (2.0 * k - 1), inv_tau / (2.0 * k - 3)))
        k += 1
    return FocalPlan(focal_points=tuple(focal_points),
                     intervals=tuple(intervals), d_min=d_min)


def plan_user_positions(plan: FocalPlan,
                        geom: ArrayGeometry) -> List[Tuple[float, float, float]]:
    """On-axis user positions for a focal plan; the infinite focal point is
    represented by a user at z = d_FA (inside its interval)."""
    d_fa = boundary_distances(geom).d_fa
    positions = []
    for f in plan.focal_points:
        z = d_fa if math.isinf(f) else f
        positions.append((0.0, 0.0, z))
    return positions


def build_mu_channel(geom: ArrayGeometry, users: Sequence[Sequence[float]],
                     per_element_amplitude: bool = False) -> MultiUserChannel:
    """Channel matrix with one column per user.

    Column k carries the spherical-phase vector of user k scaled by
    sqrt(beta_k) with beta_k = (lambda / (4 pi d_k))^2 (uniform-gain
    approximation). With per_element_amplitude=True the free-space amplitude
    is evaluated per element instead.
    """
    users = [tuple(float(v) for v in u) for u in users]
    if len(set(users)) < len(users):
        warnings.warn("duplicate user positions give a rank-deficient channel",
                      stacklevel=2)
    lam = geom.wavelength
    centers = geom.element_centers()
    columns = []
    for user in users:
        if user[2] <= 0:
            raise ValueError("user z must be positive")
        h = fresnel_channel_vector(geom, user).coefficients
        if per_element_amplitude:
            dx = centers[:, 0] - user[0]
            dy = centers[:, 1] - user[1]
            dist = np.sqrt(dx * dx + dy * dy + user[2] ** 2)
            columns.append(lam / (4.0 * np.pi * dist) * h)
        else:
            d_k = math.sqrt(user[0] ** 2 + user[1] ** 2 + user[2] ** 2)
            columns.append(lam / (4.0 * np.pi * d_k) * h)
    return MultiUserChannel(matrix=np.column_stack(columns),
                            user_positions=tuple(users), geometry=geom)


def zf_precoder(h: np.ndarray, total_power: float = 1.0) -> np.ndarray:
    """Zero-forcing precoder W = alpha H (H^H H)^-1, scaled to the total
    power budget tr(W^H W) = total_power."""
    h = np.asarray(h)
    if total_power <= 0:
        raise ValueError("total_power must be positive")
    gram = h.conj().T @ h
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > GRAM_CONDITION_LIMIT:
        raise RankError(
            f"channel matrix is not full rank (Gram condition {cond:.3e})")
    w = h @ np.linalg.inv(gram)
    alpha = math.sqrt(total_power / float(np.sum(np.abs(w) ** 2)))
    return alpha * w


def matched_filter_precoder(h: np.ndarray, total_power: float = 1.0) -> np.ndarray:
    """Per-user matched filter (conjugate beamforming) with equal power."""
    h = np.asarray(h)
    k = h.shape[1]
    w = h / np.linalg.norm(h, axis=0, keepdims=True)
    return math.sqrt(total_power / k) * w


def evaluate_sinr(h: np.ndarray, w: np.ndarray, noise_power: float,
                  bandwidth: float = 1.0):
    """Per-user SINRs and the sum rate for a precoded downlink.

    SINR_k = |h_k^H w_k|^2 / (sum_{i != k} |h_k^H w_i|^2 + noise_power);
    sum rate = bandwidth * sum_k log2(1 + SINR_k). Noise-free,
    interference-free users get the SINR_CAP sentinel.
    """
    if noise_power < 0:
        raise ValueError("noise_power must be non-negative")
    cross = np.asarray(h).conj().T @ np.asarray(w)  # (K, K): h_k^H w_i
    signal = np.abs(np.diag(cross)) ** 2
    interference = np.sum(np.abs(cross) ** 2, axis=1) - signal
    denom = interference + noise_power
    with np.errstate(divide="ignore"):
        sinr = np.where(denom > 0, signal / np.where(denom > 0, denom, 1.0),
                        SINR_CAP)
    sinr = np.minimum(sinr, SINR_CAP)
    sum_rate = bandwidth * float(np.sum(np.log2(1.0 + sinr)))
    return sinr, sum_rate
