"""Photon directions, polarization vectors and the Klein-Nishina amplitudes.

Energies are in units of the electron rest energy (511 keV == 1), angles in
radians.  The global phase of the polarization vectors is fixed to zero.
"""
from dataclasses import dataclass

import numpy as np

from .errors import BadLambda

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class Direction:
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta <= np.pi + 1e-12):
            raise ValueError(f"polar angle {self.theta} outside [0, pi]")
        object.__setattr__(self, "theta", float(min(max(self.theta, 0.0), np.pi)))
        object.__setattr__(self, "phi", float(np.mod(self.phi, TWO_PI)))

    def unit(self):
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])


@dataclass(frozen=True)
class ScatterGeometry:
    """One Compton vertex: incoming energy plus incoming and outgoing directions."""

    k_in: float
    dir_in: Direction
    dir_out: Direction

    def __post_init__(self):
        if not self.k_in > 0:
            raise ValueError(f"incoming energy must be positive, got {self.k_in}")

    def rotated(self, dphi):
        """The same vertex after a rotation by ``dphi`` about the z axis."""
        return ScatterGeometry(
            self.k_in,
            Direction(self.dir_in.theta, self.dir_in.phi + dphi),
            Direction(self.dir_out.theta, self.dir_out.phi + dphi),
        )


def pol_vector(direction, lam):
    """Circular polarization vector for helicity ``lam`` (+1 or -1)."""
    if lam not in (1, -1):
        raise BadLambda(f"helicity must be +1 or -1, got {lam!r}")
    th, ph = direction.theta, direction.phi
    ct, st, cp, sp = np.cos(th), np.sin(th), np.cos(ph), np.sin(ph)
    return np.array([
        -lam * ct * cp + 1j * sp,
        -lam * ct * sp - 1j * cp,
        lam * st,
    ]) / np.sqrt(2)


def linear_pol_vectors(direction):
    """``(eps_H, eps_V)`` built as equal superpositions of the helicity states.

    eps_V has no z component for any direction.
    """
    ep, em = pol_vector(direction, 1), pol_vector(direction, -1)
    return (ep - em) / np.sqrt(2), (ep + em) / np.sqrt(2)


def scattering_angle(g):
    """Angle between incoming and outgoing direction, via a clamped arccos."""
    c = float(np.dot(g.dir_in.unit(), g.dir_out.unit()))
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def amplitudes(g):
    """The four linear-basis amplitudes ``(f_HH, f_HV, f_VH, f_VV)``.

    ``f_XY`` is the amplitude for incoming polarization Y to leave as X.  The
    outgoing V vector carries an extra sign relative to
    :func:`linear_pol_vectors`, so that in the scattering plane
    ``f_HH = cos(Theta)`` and ``f_VV = -1``.
    """
    th, ph = g.dir_in.theta, g.dir_in.phi
    thp, php = g.dir_out.theta, g.dir_out.phi
    d = ph - php
    f_hh = np.cos(thp) * np.cos(th) * np.cos(d) + np.sin(thp) * np.sin(th)
    f_vh = 1j * np.cos(th) * np.sin(d)
    f_hv = -1j * np.cos(thp) * np.sin(d)
    f_vv = -np.cos(d)
    return complex(f_hh), complex(f_hv), complex(f_vh), complex(f_vv)


def amplitude_matrix(g):
    """Amplitudes arranged as ``[[f_HH, f_HV], [f_VH, f_VV]]``."""
    f_hh, f_hv, f_vh, f_vv = amplitudes(g)
    return np.array([[f_hh, f_hv], [f_vh, f_vv]])


def f_hh_closed_form(g):
    """Magnitude of f_HH from the square-root expression in cos(Theta)."""
    th, thp = g.dir_in.theta, g.dir_out.theta
    d = g.dir_in.phi - g.dir_out.phi
    c = np.cos(scattering_angle(g))
    val = c * c - 0.5 * (np.cos(2 * th) + np.cos(2 * thp)) * np.sin(d) ** 2
    return float(np.sqrt(max(val, 0.0)))
