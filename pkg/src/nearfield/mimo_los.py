"""LOS SU-MIMO between broadside ULAs: channel synthesis, optimal spacing,
waterfilling capacity, sweep experiments, spatial degrees of freedom."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .numerics import hermitian_eig, solve_scalar_root, svd

SPEED_OF_LIGHT = 299792458.0  # m/s

GAIN_MODELS = ("isotropic", "directive")


@dataclass(frozen=True)
class RadioParams:
    """Link-level radio assumptions for the capacity experiments.

    bandwidth_fraction gives B = fraction * carrier frequency; set
    bandwidth_hz instead for a fixed bandwidth. Gain models: "isotropic"
    (G = 1) or "directive" (G = 1/lambda).
    """

    carrier_frequency: float
    power_over_noise_db: float
    bandwidth_fraction: float | None = 0.03
    bandwidth_hz: float | None = None
    tx_gain_model: str = "isotropic"
    rx_gain_model: str = "isotropic"

    def __post_init__(self):
        if self.carrier_frequency <= 0:
            raise ValueError("carrier_frequency must be positive")
        if (self.bandwidth_fraction is None) == (self.bandwidth_hz is None):
            raise ValueError("set exactly one of bandwidth_fraction / bandwidth_hz")
        for model in (self.tx_gain_model, self.rx_gain_model):
            if model not in GAIN_MODELS:
                raise ValueError(f"unknown gain model {model!r}")

    @property
    def power_over_noise(self) -> float:
        return 10.0 ** (self.power_over_noise_db / 10.0)

    def wavelength(self, frequency: float | None = None) -> float:
        return SPEED_OF_LIGHT / (frequency or self.carrier_frequency)

    def bandwidth(self, frequency: float | None = None) -> float:
        if self.bandwidth_hz is not None:
            return self.bandwidth_hz
        return self.bandwidth_fraction * (frequency or self.carrier_frequency)

    def gain_product(self, frequency: float | None = None) -> float:
        lam = self.wavelength(frequency)
        gain = 1.0
        for model in (self.tx_gain_model, self.rx_gain_model):
            gain *= (1.0 / lam) if model == "directive" else 1.0
        return gain


@dataclass(frozen=True)
class LosMimoLink:
    """LOS channel between two identical broadside ULAs."""

    num_antennas: int
    spacing: float
    distance: float
    wavelength: float
    h_exact: np.ndarray
    h_fresnel: np.ndarray
    beta: float


@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    powers: np.ndarray
    eigenvalues: np.ndarray
    k_used: int


def pair_distance(m, k, spacing: float, distance: float):
    """Distance between receive antenna m and transmit antenna k."""
    offset = (np.asarray(m) - np.asarray(k)) * spacing
    return np.sqrt(distance**2 + offset**2)


def build_los_mimo(num_antennas: int, spacing: float, distance: float,
                   wavelength: float, tx_gain: float = 1.0,
                   rx_gain: float = 1.0,
                   half_phase: bool = False) -> LosMimoLink:
    """Exact and Fresnel-approximate K x K LOS channel matrices.

    The exact matrix uses the full propagation phase 2 pi (d_mk - d)/lambda,
    which is the convention consistent with the Fresnel form
    exp(-j pi delta_mk / (d lambda)). half_phase=True switches to the
    halved-phase variant for compatibility checks.
    """
    if distance <= 0 or spacing <= 0 or wavelength <= 0:
        raise ValueError("distance, spacing, wavelength must be positive")
    k = num_antennas
    idx = np.arange(1, k + 1)
    d_mk = pair_distance(idx[:, None], idx[None, :], spacing, distance)
    beta_mk = tx_gain * rx_gain * (wavelength / (4.0 * np.pi * d_mk)) ** 2
    phase_scale = np.pi if half_phase else 2.0 * np.pi
    h_exact = np.sqrt(beta_mk) * np.exp(
        -1j * phase_scale * (d_mk - distance) / wavelength)
    beta = tx_gain * rx_gain * (wavelength / (4.0 * np.pi * distance)) ** 2
    delta = ((idx[:, None] - idx[None, :]) * spacing) ** 2
    h_fresnel = math.sqrt(beta) * np.exp(
        -1j * np.pi * delta / (distance * wavelength))
    return LosMimoLink(num_antennas=k, spacing=spacing, distance=distance,
                       wavelength=wavelength, h_exact=h_exact,
                       h_fresnel=h_fresnel, beta=beta)


def optimal_spacing(num_antennas: int, distance: float, wavelength: float) -> float:
    """Spacing that makes the Fresnel Gram matrix a scaled identity."""
    if num_antennas < 1 or distance <= 0 or wavelength <= 0:
        raise ValueError("inputs must be positive")
    return math.sqrt(wavelength * distance / num_antennas)


def offdiag_magnitude(num_antennas: int, spacing: float, distance: float,
                      wavelength: float, k: int, l: int,
                      beta: float | None = None) -> float:
    """|(k, l) off-diagonal entry| of the Fresnel Gram matrix, closed form
    (geometric series)."""
    if k == l:
        raise ValueError("k and l must differ")
    if beta is None:
        beta = (wavelength / (4.0 * np.pi * distance)) ** 2
    q = (l - k) * spacing**2 / (wavelength * distance)
    denom = 1.0 - np.exp(2j * np.pi * q)
    if abs(denom) < 1e-12:
        return beta * num_antennas
    num = 1.0 - np.exp(2j * np.pi * num_antennas * q)
    return beta * abs(num / denom)


def capacity_waterfilling(eigenvalues: Sequence[float], snr: float,
                          bandwidth: float = 1.0) -> CapacityResult:
    """Waterfilling over channel eigenvalues with unit total (fractional)
    power: p_i = max(0, mu - 1/(snr * lam_i)), sum p_i = 1."""
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam < 0):
        raise ValueError("eigenvalues must be non-negative")
    if snr <= 0 or bandwidth <= 0:
        raise ValueError("snr and bandwidth must be positive")
    if np.all(lam == 0):
        return CapacityResult(0.0, np.zeros_like(lam), lam, 0)
    order = np.argsort(lam)[::-1]
    lam_sorted = lam[order]
    inv = np.where(lam_sorted > 0, 1.0 / (snr * np.maximum(lam_sorted, 1e-300)),
                   np.inf)
    k_used = 0
    mu = 0.0
    for r in range(1, len(lam_sorted) + 1):
        if not np.isfinite(inv[r - 1]):
            break
        mu_r = (1.0 + np.sum(inv[:r])) / r
        if mu_r - inv[r - 1] > 0:
            k_used, mu = r, mu_r
        else:
            break
    powers_sorted = np.maximum(0.0, mu - inv[:k_used])
    powers = np.zeros_like(lam)
    powers[order[:k_used]] = powers_sorted
    capacity = bandwidth * float(
        np.sum(np.log2(1.0 + snr * lam * powers)))
    return CapacityResult(capacity=capacity, powers=powers, eigenvalues=lam,
                          k_used=k_used)


def equal_eigenvalue_capacity(num_streams: int, snr: float,
                              bandwidth: float = 1.0) -> float:
    """Capacity with equal eigenvalues and equal power split (closed form)."""
    return bandwidth * num_streams * math.log2(1.0 + snr)


@dataclass(frozen=True)
class BandwidthSweep:
    bandwidths: np.ndarray
    rates: np.ndarray
    rate_limit: float
    bandwidth_80pct: float


def capacity_bandwidth_sweep(power_over_noise: float, beta: float,
                             bandwidths: Sequence[float]) -> BandwidthSweep:
    """Single-stream rate B log2(1 + P beta/(B N0)) over a bandwidth range,
    plus the infinite-bandwidth limit and the 80%-of-limit bandwidth."""
    b = np.asarray(bandwidths, dtype=float)
    if b.size == 0 or np.any(b <= 0):
        raise ValueError("bandwidths must be positive and non-empty")
    s = power_over_noise * beta  # received power over N0, in Hz
    rates = b * np.log1p(s / b) / math.log(2.0)
    limit = math.log2(math.e) * s
    b80 = solve_scalar_root(
        lambda bb: bb * math.log2(1.0 + s / bb) - 0.8 * limit,
        (1e-3 * s, 1e3 * s), tol=1e-9 * s)
    return BandwidthSweep(bandwidths=b, rates=rates, rate_limit=limit,
                          bandwidth_80pct=b80)


def num_streams_for_area(area: float, distance: float, wavelength: float,
                         antenna_width: float) -> int:
    """Largest K >= 1 whose optimally spaced ULA fits the array side
    sqrt(area): sqrt(lambda d / K)(K-1) + antenna_width <= sqrt(area)."""
    if area <= 0 or distance <= 0:
        raise ValueError("area and distance must be positive")
    side = math.sqrt(area)
    k = 1
    while True:
        k_next = k + 1
        extent = math.sqrt(wavelength * distance / k_next) * (k_next - 1)
        if extent + antenna_width <= side:
            k = k_next
        else:
            return k


@dataclass(frozen=True)
class FrequencyPoint:
    frequency: float
    num_streams: int
    capacity: float


def capacity_frequency_sweep(area: float, distance: float,
                             frequencies: Sequence[float],
                             radio: RadioParams) -> list[FrequencyPoint]:
    """Capacity vs carrier frequency at fixed array area and distance.

    Per frequency: lambda = c/f, antenna width lambda/2, K from the area
    constraint, optimal spacing, B from the radio bandwidth rule, and
    capacity B K log2(1 + P beta/(B N0)).
    """
    freqs = np.asarray(frequencies, dtype=float)
    if freqs.size == 0:
        raise ValueError("frequency range is empty")
    points = []
    for f in freqs:
        lam = SPEED_OF_LIGHT / f
        k = num_streams_for_area(area, distance, lam, lam / 2.0)
        beta = radio.gain_product(f) * (lam / (4.0 * np.pi * distance)) ** 2
        b = radio.bandwidth(f)
        snr = radio.power_over_noise * beta / b
        points.append(FrequencyPoint(
            frequency=float(f), num_streams=k,
            capacity=equal_eigenvalue_capacity(k, snr, b)))
    return points


def spatial_dof(area: float, wavelength: float) -> float:
    """Orthogonal spatial channels resolvable by a planar aperture."""
    if area <= 0 or wavelength <= 0:
        raise ValueError("area and wavelength must be positive")
    return math.pi * area / wavelength**2


@dataclass(frozen=True)
class ModeAnalysis:
    eigenvalue_fractions: np.ndarray
    angles: np.ndarray
    patterns: np.ndarray  # (K, num_angles); |a(theta)^H v_k|^2


def mode_analysis(link: LosMimoLink, num_angles: int = 2048) -> ModeAnalysis:
    """Eigenvalue split of H^H H and far-field patterns of the right
    singular vectors (transmit beamforming modes)."""
    gram = link.h_exact.conj().T @ link.h_exact
    eigenvalues, _ = hermitian_eig(gram)
    fractions = eigenvalues / np.sum(eigenvalues)
    _, _, v = svd(link.h_exact)
    angles = np.linspace(-np.pi / 2.0, np.pi / 2.0, num_angles)
    k = link.num_antennas
    positions = np.arange(k) * link.spacing
    steering = np.exp(-2j * np.pi / link.wavelength
                      * np.outer(np.sin(angles), positions)) / math.sqrt(k)
    patterns = np.abs(steering.conj() @ v) ** 2  # (angles, modes)
    return ModeAnalysis(eigenvalue_fractions=fractions, angles=angles,
                        patterns=patterns.T)
