"""Collimating-lens synthesis and chromatic ray tracing.

The lens is represented by its normal field over the angle of emission
(AoE): at AoE phi the outward surface normal is proportional to
(n0 sin phi, n0 cos phi - 1), which collimates the peak wavelength
exactly.  Other wavelengths keep a residual angle of departure (AoD)
computed here both by an exact vector-Snell trace (the oracle) and by
the small-angle closed forms.  The chromatic residual broadens the
beamformed radiation pattern

    R*(phi) = int (1/pi) cos(c(lambda) phi) chi(lambda) dlambda,
    c(lambda) = (n(lambda) - 1) lambda / (n(lambda) (lambda - lambda0)),

where c(lambda) * phi is the AoE whose residual lands at AoD phi; the
integrand is zeroed when that AoE falls outside the emission cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import RadiationPattern, _midpoints


class TotalInternalReflectionError(ValueError):
    pass


class QuadratureError(ArithmeticError):
    """Spectral quadrature failed to converge to the requested tolerance."""


# ---------------------------------------------------------------------------
# spectrum and dispersion models


@dataclass(frozen=True)
class Spectrum:
    """Normalized spectral density chi(lambda) on a wavelength grid."""

    lam: np.ndarray
    chi: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, float)
        chi = np.asarray(self.chi, float)
        if np.any(chi < 0):
            raise ValueError("spectral density must be nonnegative")
        norm = np.trapezoid(chi, lam)
        if norm <= 0:
            raise ValueError("spectrum has zero power")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "chi", chi / norm)


def gaussian_spectrum(peak=450e-9, fwhm=10e-9, num=20001) -> Spectrum:
    """Truncated Gaussian line shape, support peak +/- 3 FWHM."""
    sigma = fwhm / (2 * math.sqrt(2 * math.log(2)))
    lam = np.linspace(peak - 3 * fwhm, peak + 3 * fwhm, num)
    chi = np.exp(-0.5 * ((lam - peak) / sigma) ** 2)
    return Spectrum(lam=lam, chi=chi)


@dataclass(frozen=True)
class DispersionModel:
    """Refractive index n(lambda), anchored at the peak wavelength."""

    kind: str
    lam0: float
    n0: float
    cauchy_b: float = 0.0

    def n(self, lam):
        lam = np.asarray(lam, float)
        if self.kind == "inverse_wavelength":
            return self.n0 * self.lam0 / lam
        if self.kind == "cauchy":
            a = self.n0 - self.cauchy_b / self.lam0**2
            return a + self.cauchy_b / lam**2
        raise ValueError(f"unknown dispersion kind {self.kind!r}")


def inverse_wavelength_dispersion(n0=1.4, lam0=450e-9) -> DispersionModel:
    """Literal n(lambda) ∝ 1/lambda anchored at n(lam0) = n0."""
    return DispersionModel(kind="inverse_wavelength", lam0=lam0, n0=n0)


def cauchy_dispersion(n0=1.4, lam0=450e-9, b=5e-15) -> DispersionModel:
    return DispersionModel(kind="cauchy", lam0=lam0, n0=n0, cauchy_b=b)


# ---------------------------------------------------------------------------
# ray tracing


def snell_refract(direction, normal, n_in, n_out):
    """Refract a unit 2-vector across an interface with outward ``normal``.

    Returns the outgoing unit vector; raises on total internal
    reflection.  The normal may point to either side of the surface.
    """
    if n_in <= 0 or n_out <= 0:
        raise ValueError("refractive indices must be positive")
    d = np.asarray(direction, float)
    nv = np.asarray(normal, float)
    d = d / np.linalg.norm(d)
    nv = nv / np.linalg.norm(nv)
    if d @ nv > 0:  # orient normal against the incident ray
        nv = -nv
    cos_i = -(d @ nv)
    eta = n_in / n_out
    sin_t2 = eta**2 * (1 - cos_i**2)
    if sin_t2 > 1:
        raise TotalInternalReflectionError(
            f"sin(theta_t) = {math.sqrt(sin_t2):.4f} > 1"
        )
    return eta * d + (eta * cos_i - math.sqrt(1 - sin_t2)) * nv


def lemma1_normal(phi, n0):
    """Unit outward lens normal collimating the peak wavelength at AoE phi."""
    v = np.array([n0 * math.sin(phi), n0 * math.cos(phi) - 1.0])
    return v / np.linalg.norm(v)


def collimation_limit(n0):
    """Largest AoE the normal field can collimate (grazing exit beyond)."""
    return math.acos(1.0 / n0)


def trace_exact_aod(phi, lam, dispersion: DispersionModel):
    """Exact AoD of wavelength ``lam`` for a source ray at AoE ``phi``.

    Vector-Snell trace through the lens surface whose normal is the
    collimating field for the dispersion model's peak wavelength.
    """
    limit = collimation_limit(dispersion.n0)
    if abs(phi) > limit + 1e-12:
        raise ValueError(
            f"AoE {phi:.4f} beyond the collimation domain {limit:.4f}"
        )
    sign = 1.0 if phi >= 0 else -1.0
    phi = abs(phi)
    d_in = np.array([math.sin(phi), math.cos(phi)])
    nrm = lemma1_normal(phi, dispersion.n0)
    d_out = snell_refract(d_in, nrm, float(dispersion.n(lam)), 1.0)
    return sign * math.atan2(d_out[0], d_out[1])


def lemma2_aod_approx(phi, lam, dispersion: DispersionModel, form="appendix"):
    """Small-angle closed forms for the residual AoD.

    ``lemma`` uses the index at the traced wavelength,
    ``appendix`` the index at the peak wavelength (the derived one).
    """
    lam0 = dispersion.lam0
    if form == "lemma":
        n = float(dispersion.n(lam))
        return n / (n - 1) * (lam - lam0) / lam * phi
    if form == "appendix":
        n0 = dispersion.n0
        return n0 * (lam - lam0) / ((n0 - 1) * lam) * phi
    raise ValueError(f"unknown form {form!r}")


def compression_coefficient(lam, dispersion: DispersionModel):
    """c(lambda): AoE per unit AoD after collimation (diverges at lam0)."""
    lam = np.asarray(lam, float)
    n = dispersion.n(lam)
    return (n - 1) * lam / (n * (lam - dispersion.lam0))


# ---------------------------------------------------------------------------
# beamformed radiation pattern


def beamformed_pattern(
    spectrum: Spectrum,
    dispersion: DispersionModel,
    semi_angle=math.pi / 3,
    num_phi=2048,
    rtol=1e-5,
) -> RadiationPattern:
    """Effective radiation pattern of a collimated chromatic source.

    For each AoD the integrand maps back to the emitting AoE via the
    compression coefficient and takes the Lambertian source density
    there, zeroed outside the emission cone (the printed closed form
    ignores that cap).  Evaluated on a dense wavelength grid; a
    half-resolution check guards the quadrature.
    """
    from scipy.optimize import brentq

    cap = min(semi_angle, collimation_limit(dispersion.n0))
    lam0 = dispersion.lam0
    lam_min, lam_max = float(spectrum.lam[0]), float(spectrum.lam[-1])
    tiny = (lam_max - lam0) * 1e-12
    phis = np.linspace(0.0, semi_angle, num_phi)

    def absc(lam):
        return abs(float(compression_coefficient(lam, dispersion)))

    def segment(phi, num):
        """Wavelength intervals whose AoE |c(lam) phi| fits in the cone.

        |c| falls monotonically moving away from the lam0 pole on either
        side, so each side contributes at most one interval anchored at
        the outer spectrum edge.
        """
        thr = cap / phi
        pieces = []
        # geometric spacing in |lam - lam0|: the integrand's curvature
        # scales with the distance to the pole
        if lam0 - tiny > lam_min and absc(lam_min) <= thr:
            hi = brentq(lambda l: absc(l) - thr, lam_min, lam0 - tiny)
            offs = np.geomspace(lam0 - hi, lam0 - lam_min, num)
            pieces.append(lam0 - offs[::-1])
        if lam0 + tiny < lam_max and absc(lam_max) <= thr:
            lo = brentq(lambda l: absc(l) - thr, lam0 + tiny, lam_max)
            pieces.append(lam0 + np.geomspace(lo - lam0, lam_max - lam0, num))
        return pieces

    def value(phi, num=2049):
        if phi == 0.0:
            return 1.0 / math.pi
        total = 0.0
        for lam in segment(phi, num):
            chi = np.interp(lam, spectrum.lam, spectrum.chi)
            arg = compression_coefficient(lam, dispersion) * phi
            total += np.trapezoid(np.cos(arg) * chi / math.pi, lam)
        return total

    vals = np.array([value(p) for p in phis])
    coarse = np.array([value(p, num=1025) for p in phis])
    if np.max(np.abs(vals - coarse)) > rtol * max(vals.max(), 1e-30):
        raise QuadratureError("spectral quadrature did not converge")
    return RadiationPattern(
        kind="beamformed", cutoff=float(phis[-1]), _phi=phis, _values=vals
    )


def normalized_pattern(pattern: RadiationPattern) -> RadiationPattern:
    """Rescale a pattern so its hemisphere integral is 1.

    The printed beamformed pattern is not a conserved-power density (it
    drops the AoE->AoD Jacobian); rescaling restores the interpretation
    that the lens redirects the source power rather than destroying it.
    """
    power = pattern.hemisphere_power()
    if power <= 0:
        raise ValueError("pattern carries no power")
    return RadiationPattern(
        kind=pattern.kind,
        mode=pattern.mode,
        cutoff=pattern.cutoff,
        _phi=pattern._phi,
        _values=None if pattern._values is None else pattern._values / power,
    )


# ---------------------------------------------------------------------------
# concentration metric


def intensity_concentration(
    scenario,
    pattern,
    target_w,
    target_l,
    target_center=(0.0, 0.0, 0.0),
    aim=None,
    grid_n=1024,
):
    """Fraction of the floor-integrated intensity landing on the target.

    The floor irradiance from each O-AP is R(phi) cos(psi) / d^2 with
    phi measured from the boresight (vertical, or through ``aim``);
    collection-side cutoffs do not apply to raw power on the floor.
    """
    xs = _midpoints(scenario.room_w, grid_n)
    ys = _midpoints(scenario.room_l, grid_n)
    X, Y = np.meshgrid(xs, ys)
    total = np.zeros_like(X)
    for m in range(scenario.num_oaps):
        oap = scenario.oap_positions[m]
        dx, dy, dz = X - oap[0], Y - oap[1], -oap[2]
        d = np.sqrt(dx**2 + dy**2 + dz**2)
        if aim is None:
            bore = np.array([0.0, 0.0, -1.0])
        else:
            bore = np.asarray(aim, float) - oap
            bore = bore / np.linalg.norm(bore)
        cos_phi = (dx * bore[0] + dy * bore[1] + dz * bore[2]) / d
        phi = np.arccos(np.clip(cos_phi, -1.0, 1.0))
        cos_psi = -dz / d
        total += pattern.evaluate(phi) * cos_psi / d**2
    cx, cy = target_center[0], target_center[1]
    mask = (np.abs(X - cx) <= target_w / 2) & (np.abs(Y - cy) <= target_l / 2)
    denom = float(total.sum())
    if denom <= 0:
        return 0.0
    return float(total[mask].sum()) / denom
