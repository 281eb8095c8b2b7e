"""Klein-Nishina scattering written as a pair of Kraus-type operators.

All cross sections are in units of r0^2 per photon (r0 == 1).  ``visibility``,
``envelope`` and ``k_out`` accept numpy arrays.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import qcore
from .errors import DimMismatch
from .kinematics import Direction, ScatterGeometry, amplitude_matrix, scattering_angle


def k_out(k_in, theta):
    """Energy of the scattered photon."""
    return 1.0 / (1.0 - np.cos(theta) + 1.0 / k_in)


def gamma(k_in, theta):
    ratio = k_out(k_in, theta) / k_in
    return 1.0 / ratio + ratio


def visibility(k_in, theta):
    """Interference contrast multiplying the polarization-dependent term."""
    s2 = np.sin(theta) ** 2
    return s2 / (gamma(k_in, theta) - s2)


def envelope(k_in, theta):
    """Polarization-independent angular shape of the cross section."""
    ratio = k_out(k_in, theta) / k_in
    return ratio ** 2 * (gamma(k_in, theta) - np.sin(theta) ** 2)


def optimal_angle(k_in):
    """Scattering angle maximizing the visibility at energy ``k_in``, and the maximum."""
    res = minimize_scalar(lambda t: -visibility(k_in, t), bounds=(1e-6, np.pi - 1e-6),
                          method="bounded", options={"xatol": 1e-12})
    return float(res.x), float(-res.fun)


def max_visibility(k_in):
    return optimal_angle(k_in)[1]


@dataclass(frozen=True)
class KrausPair:
    k1: np.ndarray
    k2: np.ndarray
    geometry: ScatterGeometry

    @property
    def operators(self):
        return (self.k1, self.k2)

    def response(self):
        """``K1^dag K1 + K2^dag K2``; not the identity, since the energy ratio is factored out."""
        return qcore.dagger(self.k1) @ self.k1 + qcore.dagger(self.k2) @ self.k2


@dataclass(frozen=True)
class CrossSectionPoint:
    value: float
    envelope: float
    probability_part: float


def kraus_pair(g):
    theta = scattering_angle(g)
    # gamma >= 2 always; the clip only absorbs rounding at theta == 0
    g_minus_2 = max(float(gamma(g.k_in, theta)) - 2.0, 0.0)
    k1 = np.sqrt(g_minus_2) * qcore.I2
    k2 = np.sqrt(2.0) * amplitude_matrix(g)
    return KrausPair(k1, k2, g)


def normalized_effect(g):
    """Detection operator of one vertex with the envelope divided out.

    Equals ``(I - V m.sigma) / 2`` for a unit vector ``m`` in the (y, z)
    plane of the Bloch sphere, so effects at azimuths ``phi`` and
    ``phi + pi/2`` add up to the identity.
    """
    theta = scattering_angle(g)
    ratio = k_out(g.k_in, theta) / g.k_in
    return 0.5 * ratio ** 2 * kraus_pair(g).response() / envelope(g.k_in, theta)


def _single_geometry(k_in, theta, phi):
    return ScatterGeometry(k_in, Direction(0.0, 0.0), Direction(theta, phi))


def sigma_single(rho, k_in, theta, phi):
    """Single-photon cross section in closed form.

    ``phi`` is the angle between the scattering plane and the plane of the
    H/V basis.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimMismatch(f"single-photon state must be 2x2, got {rho.shape}")
    lin = (rho[0, 0] - rho[1, 1]).real
    circ = 2.0 * rho[0, 1].imag
    prob = 0.5 * (1.0 - visibility(k_in, theta) * (lin * np.cos(2 * phi) + circ * np.sin(2 * phi)))
    env = float(envelope(k_in, theta))
    return CrossSectionPoint(env * float(prob), env, float(prob))


def sigma_single_kraus(rho, k_in, theta, phi):
    """Single-photon cross section as a trace over the two Kraus operators."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimMismatch(f"single-photon state must be 2x2, got {rho.shape}")
    g = _single_geometry(k_in, theta, phi)
    kp = kraus_pair(g)
    ratio = k_out(k_in, theta) / k_in
    tr = sum(np.trace(k @ rho @ qcore.dagger(k)) for k in kp.operators).real
    value = 0.5 * ratio ** 2 * tr
    env = float(envelope(k_in, theta))
    return CrossSectionPoint(float(value), env, float(value / env))


def sigma_multi(rho, geoms, frame_phi=0.0):
    """Joint cross section of ``z`` photons, each scattered once.

    Sums the trace over all ``2**z`` tensor products of Kraus operators.
    ``frame_phi`` is added to the azimuth of every incoming direction: it
    sets the common reference frame in which the H/V basis is defined.
    """
    geoms = list(geoms)
    z = len(geoms)
    rho = np.asarray(rho, dtype=complex)
    if z not in (2, 3):
        raise DimMismatch(f"two or three photons supported, got {z}")
    if rho.shape != (2 ** z, 2 ** z):
        raise DimMismatch(f"{z} photons need a {2 ** z}x{2 ** z} state, got {rho.shape}")
    if frame_phi:
        geoms = [ScatterGeometry(g.k_in, Direction(g.dir_in.theta, g.dir_in.phi + frame_phi), g.dir_out)
                 for g in geoms]
    pairs = [kraus_pair(g) for g in geoms]
    prefactor = 1.0
    env = 1.0
    for g in geoms:
        theta = scattering_angle(g)
        prefactor *= 0.5 * (k_out(g.k_in, theta) / g.k_in) ** 2
        env *= float(envelope(g.k_in, theta))
    total = 0.0
    for idx in np.ndindex(*(2,) * z):
        k = qcore.tensor(*(pairs[i].operators[j] for i, j in enumerate(idx)))
        total += np.trace(k @ rho @ qcore.dagger(k)).real
    value = prefactor * total
    return CrossSectionPoint(float(value), env, float(value / env))


def back_to_back(k_in, theta_a, phi_a, theta_b, phi_b, k_in_b=None):
    """Geometries of two photons emitted back to back along the z axis.

    Photon a arrives along +z and photon b along -z; ``theta_a``/``theta_b``
    are the Compton scattering angles and ``phi_a``/``phi_b`` the azimuths
    of the outgoing photons.  Azimuths are measured against the frame passed
    to :func:`sigma_multi` as ``frame_phi``.
    """
    k_in_b = k_in if k_in_b is None else k_in_b
    g_a = ScatterGeometry(k_in, Direction(0.0, 0.0), Direction(theta_a, phi_a))
    g_b = ScatterGeometry(k_in_b, Direction(np.pi, np.pi), Direction(np.pi - theta_b, phi_b))
    return [g_a, g_b]


def two_photon_effects(k_a, theta_a, phi_a, k_b, theta_b, phi_b, frame_phi=0.0):
    """Normalized detection operators of the two back-to-back vertices."""
    g_a, g_b = back_to_back(k_a, theta_a, phi_a, theta_b, phi_b, k_in_b=k_b)
    g_a = ScatterGeometry(g_a.k_in, Direction(0.0, frame_phi), g_a.dir_out)
    g_b = ScatterGeometry(g_b.k_in, Direction(np.pi, np.pi + frame_phi), g_b.dir_out)
    return normalized_effect(g_a), normalized_effect(g_b)


# Closed forms for back-to-back pairs.  Used as oracles against sigma_multi.

def bell_closed_form(kind, k_in, theta_a, phi_a, theta_b, phi_b, frame_phi=0.0):
    """Two-photon cross section of a linear-basis Bell state, closed form.

    The inner sign is ``-alpha`` for both families: psi+ and phi+ depend
    only on ``phi_a - phi_b``.
    """
    va, vb = visibility(k_in, theta_a), visibility(k_in, theta_b)
    fa, fb = envelope(k_in, theta_a), envelope(k_in, theta_b)
    da, db = phi_a - frame_phi, phi_b - frame_phi
    if kind == "psi+":
        prob = 1 - va * vb * np.cos(2 * (da - db))
    elif kind == "psi-":
        prob = 1 - va * vb * np.cos(2 * (da + db))
    elif kind == "phi+":
        prob = 1 + va * vb * np.cos(2 * (da - db))
    elif kind == "phi-":
        prob = 1 + va * vb * np.cos(2 * (da + db))
    else:
        raise ValueError(f"unknown Bell state {kind!r}")
    return float(fa * fb * 0.25 * prob)


def product_closed_form(labels, k_in, theta_a, phi_a, theta_b, phi_b, frame_phi=0.0):
    """Two-photon cross section of ``|HH>, |HV>, |VH>`` or ``|VV>``, closed form."""
    sign = {"H": -1.0, "V": 1.0}
    sa, sb = sign[labels[0]], sign[labels[1]]
    va, vb = visibility(k_in, theta_a), visibility(k_in, theta_b)
    fa, fb = envelope(k_in, theta_a), envelope(k_in, theta_b)
    pa = 1 + sa * va * np.cos(2 * (phi_a - frame_phi))
    pb = 1 + sb * vb * np.cos(2 * (phi_b - frame_phi))
    return float(fa * fb * 0.25 * pa * pb)
