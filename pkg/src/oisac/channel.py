"""Lambertian light propagation and channel gains.

Everything here is a pure function of the scenario and a radiation
pattern.  With ``tx_intensity = 1`` the received intensity equals the
channel gain h, and in the vertical no-lens case it reduces to the
closed form A * H^2 / (pi * d^4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .geometry import SPEED_OF_LIGHT, Scenario


def lambert_mode(semi_angle):
    """Lambert mode number m0 for a half-power semi-angle."""
    if not 0 < semi_angle < math.pi / 2:
        raise ValueError("semi-angle must lie in (0, pi/2)")
    m0 = -1.0 / math.log2(math.cos(semi_angle))
    if m0 > 1e6:
        raise ValueError("semi-angle too small, Lambert mode diverges")
    return m0


@dataclass(frozen=True)
class RadiationPattern:
    """Angular intensity density R(phi) in 1/sr.

    ``cutoff`` is the hard support limit on the departure angle: the
    density is zero beyond it.  ``_phi`` / ``_values`` hold a lookup
    table for patterns defined numerically (lens beamforming); the
    Lambertian case is evaluated in closed form.
    """

    kind: str
    mode: float = 1.0
    cutoff: float = math.pi / 2
    _phi: np.ndarray = None
    _values: np.ndarray = None

    def evaluate(self, phi):
        phi = np.abs(np.asarray(phi, float))
        if self.kind == "lambertian":
            dens = (self.mode + 1) / (2 * math.pi) * np.cos(phi) ** self.mode
        else:
            dens = np.interp(phi, self._phi, self._values, right=0.0)
        return np.where(phi <= self.cutoff, np.maximum(dens, 0.0), 0.0)

    def hemisphere_power(self):
        """Integral of R(phi) over the emission hemisphere."""
        if self.kind == "lambertian":
            val, _ = integrate.quad(
                lambda p: float(self.evaluate(p)) * 2 * math.pi * math.sin(p),
                0.0,
                self.cutoff,
                limit=200,
            )
            return val
        # table-backed pattern: trapezoid on its own (piecewise-linear) grid
        return float(
            np.trapezoid(
                self._values * 2 * math.pi * np.sin(self._phi), self._phi
            )
        )


def lambertian_pattern(semi_angle=math.pi / 3) -> RadiationPattern:
    """Bare-LED Lambertian pattern, hard zero beyond the semi-angle."""
    return RadiationPattern(
        kind="lambertian", mode=lambert_mode(semi_angle), cutoff=semi_angle
    )


@dataclass(frozen=True)
class ChannelState:
    """Per-(O-AP, PD) gains and path lengths."""

    gains: np.ndarray  # (mu, kappa)
    distances: np.ndarray  # (mu, kappa)

    @property
    def delays(self):
        return self.distances / SPEED_OF_LIGHT


def _geometry(oap_pos, points, aim_point):
    """Distances, emission-angle cosines and arrival-angle cosines from
    one O-AP to an array of points (PD normals stay vertical)."""
    points = np.asarray(points, float)
    vec = points - oap_pos
    d = np.linalg.norm(vec, axis=-1)
    if aim_point is None:
        bore = np.array([0.0, 0.0, -1.0])
    else:
        bore = np.asarray(aim_point, float) - oap_pos
        bore = bore / np.linalg.norm(bore)
    cos_phi = (vec @ bore) / d
    cos_psi = -vec[..., 2] / d  # receiver normal is +z
    return d, cos_phi, cos_psi


def received_intensity(scenario: Scenario, pattern, oap_index, point, aim=None):
    """Intensity collected at ``point`` from one O-AP.

    ``aim=None`` keeps the O-AP facing straight down; otherwise its
    boresight passes through the aim point.  Hard zeros outside the
    pattern support and outside the PD field of view.
    """
    oap = scenario.oap_positions[oap_index]
    d, cos_phi, cos_psi = _geometry(oap, point, aim)
    phi = np.arccos(np.clip(cos_phi, -1.0, 1.0))
    psi_ok = cos_psi >= math.cos(scenario.fov)
    dens = pattern.evaluate(phi)
    out = scenario.tx_intensity * dens * scenario.pd_area * cos_psi / d**2
    return np.where(psi_ok & (cos_psi > 0), out, 0.0)


def superposed_intensity(scenario: Scenario, pattern, point, aim=None):
    """Sum of received_intensity over all O-APs (broadcastable points)."""
    total = 0.0
    for m in range(scenario.num_oaps):
        total = total + received_intensity(scenario, pattern, m, point, aim)
    return total


def reflected_intensity(scenario: Scenario, pattern, target, oap_index, aim=None):
    """Intensity reflected off the target that reaches camera ``oap_index``.

    The superposed illumination at the target is re-radiated with the
    reflectance and collected over the unit area; the reflection angle
    toward camera m equals that O-AP's departure angle.
    """
    illum = superposed_intensity(scenario, pattern, target, aim)
    oap = scenario.oap_positions[oap_index]
    d, cos_phi, _ = _geometry(oap, target, aim)
    cos_phi = np.clip(cos_phi, 0.0, 1.0)
    return illum * scenario.reflectance * scenario.pd_area * cos_phi / d**2


def compute_channel_state(scenario: Scenario, pattern, device_pos, aim=None):
    """Gains h_{m,k} and distances d_{m,k} for the device's PD array.

    Gains are normalized to unit transmit intensity (h = I_rx / I_tx);
    the transmit scale enters the modem through its power setting.
    """
    pds = scenario.pd_positions(device_pos)
    gains = np.zeros((scenario.num_oaps, scenario.pd_count))
    dists = np.zeros_like(gains)
    for m in range(scenario.num_oaps):
        rx = received_intensity(scenario, pattern, m, pds, aim)
        gains[m] = rx / scenario.tx_intensity
        dists[m] = np.linalg.norm(pds - scenario.oap_positions[m], axis=-1)
    return ChannelState(gains=gains, distances=dists)


def vertical_intensity_grid(oap_xy, X, Y, height, area_intensity):
    """Superposed floor intensity for vertically aimed bare-LED O-APs.

    Closed form of the Lambertian m0=1 channel, h = A*H^2/(pi*d^4),
    vectorized over a floor grid.  ``area_intensity`` is
    tx_intensity * pd_area; ``oap_xy`` is (mu, 2).

    This is the kernel behind both the coverage maps and the layout
    search; received_intensity reduces to it in the vertical case.
    """
    I = np.zeros(np.broadcast(X, Y).shape)
    h2 = height * height
    for x0, y0 in np.asarray(oap_xy, float):
        d2 = (X - x0) ** 2 + (Y - y0) ** 2 + h2
        I += area_intensity * h2 / (math.pi * d2 * d2)
    return I


def floor_intensity_map(scenario: Scenario, pattern, grid_n, aim=None, z=0.0):
    """Intensity of the superposed field sampled on a midpoint floor grid.

    Returns (xs, ys, I) with I[j, i] at (xs[i], ys[j]).
    """
    xs = _midpoints(scenario.room_w, grid_n)
    ys = _midpoints(scenario.room_l, grid_n)
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X, Y, np.full_like(X, z)], axis=-1)
    I = superposed_intensity(scenario, pattern, pts, aim)
    return xs, ys, I


def _midpoints(extent, n):
    step = extent / n
    return -extent / 2 + step * (np.arange(n) + 0.5)
