"""Electric-field models and channel coefficients for a planar array.

Two channel models coexist on purpose: a patch-integrated exact model for
on-axis sources (used to validate gain-vs-distance behavior) and a
per-element spherical-phase model for arbitrary focal/user positions (used
for beam maps and multi-user channels).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .geometry import ArrayGeometry
from .numerics import Rect, integrate_patch

FREE_SPACE_IMPEDANCE = 376.730313668  # ohms


def green_tensor(source, obs, wavelength: float) -> np.ndarray:
    """3x3 dyadic response of a point source at `source` observed at `obs`."""
    source = np.asarray(source, dtype=float)
    obs = np.asarray(obs, dtype=float)
    diff = obs - source
    d = float(np.linalg.norm(diff))
    if d == 0.0:
        raise ValueError("source and observation point coincide")
    lam = wavelength
    dhat = diff / d
    eye = np.eye(3)
    proj = eye - np.outer(dhat, dhat)
    proj3 = eye - 3.0 * np.outer(dhat, dhat)
    k_inv = lam / (2.0 * np.pi * d)
    prefactor = -1j * FREE_SPACE_IMPEDANCE * np.exp(-2j * np.pi * d / lam) / (2.0 * lam * d)
    return prefactor * (proj + 1j * k_inv * proj3 - k_inv**2 * proj3)


def efield_exact(x, y, z, wavelength: float):
    """Exact scalar field of an on-axis source at (0, 0, z), observed at
    (x, y, 0); normalized so the far-field on-axis amplitude is 1/(sqrt(4 pi) z)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(np.asarray(z) <= 0):
        raise ValueError("z must be positive")
    r2 = x * x + y * y + z * z
    amplitude = np.sqrt(z * (x * x + z * z)) / (np.sqrt(4.0 * np.pi) * r2**1.25)
    return amplitude * np.exp(-2j * np.pi / wavelength * np.sqrt(r2))


def efield_fresnel(x, y, z, wavelength: float):
    """Paraxial approximation of `efield_exact`: flat amplitude, quadratic phase."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(np.asarray(z) <= 0):
        raise ValueError("z must be positive")
    phase = -2j * np.pi / wavelength * (z + x * x / (2.0 * z) + y * y / (2.0 * z))
    return np.exp(phase) / (np.sqrt(4.0 * np.pi) * z)


@dataclass(frozen=True)
class ChannelVector:
    """Per-element complex channel coefficients, row-major (m, n) order."""

    coefficients: np.ndarray
    geometry: ArrayGeometry
    source_position: Tuple[float, float, float]

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.coefficients, self.coefficients).real)


def channel_coefficient(patch: Rect, source_z: float, wavelength: float,
                        tol: float = 1e-8) -> complex:
    """Patch-integrated coefficient sqrt(1/A) * integral of the exact field."""
    if source_z <= 0:
        raise ValueError("source_z must be positive")
    value = integrate_patch(
        lambda x, y: efield_exact(x, y, source_z, wavelength), patch, tol=tol
    )
    return value / math.sqrt(patch.area)


def _patch_integrals(geom: ArrayGeometry, z: float, order: int) -> np.ndarray:
    """Gauss integrals of the exact field over every element, vectorized."""
    s = geom.element_side
    centers = geom.element_centers()
    nodes, weights = leggauss(order)
    half = 0.5 * s
    # (elements, order) node coordinates per axis
    gx = centers[:, 0][:, None] + half * nodes[None, :]
    gy = centers[:, 1][:, None] + half * nodes[None, :]
    vals = efield_exact(gx[:, :, None], gy[:, None, :], z, geom.wavelength)
    w2 = half * half * np.multiply.outer(weights, weights)
    return np.einsum("eij,ij->e", vals, w2)


def _reference_intensity_integral(geom: ArrayGeometry, z: float, order: int) -> float:
    """Integral of |E|^2 over an element-sized patch centered at the origin."""
    s = geom.element_side
    nodes, weights = leggauss(order)
    half = 0.5 * s
    g = half * nodes
    vals = np.abs(efield_exact(g[:, None], g[None, :], z, geom.wavelength)) ** 2
    w2 = half * half * np.multiply.outer(weights, weights)
    return float(np.sum(vals * w2))


def element_field_integrals(geom: ArrayGeometry, z: float, tol: float = 1e-8):
    """Adaptive per-element field integrals and the reference |E|^2 integral.

    Doubles the Gauss order until every element integral and the reference
    are stable to the relative tolerance.
    """
    if z <= 0:
        raise ValueError("z must be positive")
    order = 4
    prev = _patch_integrals(geom, z, order)
    prev_ref = _reference_intensity_integral(geom, z, order)
    while order < 64:
        order *= 2
        cur = _patch_integrals(geom, z, order)
        cur_ref = _reference_intensity_integral(geom, z, order)
        scale = np.maximum(np.abs(cur), np.abs(prev)).max()
        if (np.abs(cur - prev).max() <= tol * scale
                and abs(cur_ref - prev_ref) <= tol * cur_ref):
            return cur, cur_ref
        prev, prev_ref = cur, cur_ref
    return prev, prev_ref


def channel_vector(geom: ArrayGeometry, source_z: float,
                   tol: float = 1e-8) -> ChannelVector:
    """Exact patch-integrated channel vector for an on-axis source."""
    integrals, _ = element_field_integrals(geom, source_z, tol=tol)
    coeffs = integrals / math.sqrt(geom.element_area)
    return ChannelVector(coefficients=coeffs, geometry=geom,
                         source_position=(0.0, 0.0, source_z))


def fresnel_channel_vector(geom: ArrayGeometry, point) -> ChannelVector:
    """Unit-amplitude channel vector with exact spherical per-element phases.

    The phase of element k is -(2 pi / lambda) * ||center_k - point||. The
    distance is accumulated as ||point|| plus a stably computed per-element
    difference, so phase *differences* across the aperture stay accurate at
    arbitrarily large distances. A point at infinite z gives the broadside
    plane-wave limit (all phases equal).
    """
    px, py, pz = (float(v) for v in point)
    if pz <= 0:
        raise ValueError("point must satisfy z > 0")
    centers = geom.element_centers()
    lam = geom.wavelength
    if math.isinf(pz):
        phases = np.zeros(geom.num_elements)
    else:
        r = math.sqrt(px * px + py * py + pz * pz)
        dx = centers[:, 0] - px
        dy = centers[:, 1] - py
        dist = np.sqrt(dx * dx + dy * dy + pz * pz)
        e_sq = centers[:, 0] ** 2 + centers[:, 1] ** 2
        # ||e - p|| - ||p||, cancellation-free
        delta = (e_sq - 2.0 * (centers[:, 0] * px + centers[:, 1] * py)) / (dist + r)
        phases = -2.0 * np.pi / lam * (math.fmod(r, lam) + delta)
    coeffs = np.exp(1j * phases)
    return ChannelVector(coefficients=coeffs, geometry=geom,
                         source_position=(px, py, pz))
