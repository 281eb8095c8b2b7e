"""Two-photon polarization states and the entanglement measures used to certify them.

Vectors use the computational ordering ``|HH>, |HV>, |VH>, |VV>``.
"""
import re
from dataclasses import dataclass

import numpy as np

from . import qcore
from .errors import BadStateSpec, BadWeight

S2 = 1.0 / np.sqrt(2.0)

# single-photon states; R, L follow |H> = (|R> - |L>)/sqrt2, i|V> = (|R> + |L>)/sqrt2
SINGLE = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": S2 * np.array([1, 1], dtype=complex),
    "A": S2 * np.array([1, -1], dtype=complex),
    "R": S2 * np.array([1, 1j], dtype=complex),
    "L": S2 * np.array([-1, 1j], dtype=complex),
}

# columns are the two basis vectors, in the order used for Bell labels
BASES = {
    "lin": np.column_stack([SINGLE["H"], SINGLE["V"]]),
    "circ": np.column_stack([SINGLE["R"], SINGLE["L"]]),
    "diag": np.column_stack([SINGLE["D"], SINGLE["A"]]),
}

BELL_KINDS = ("psi+", "psi-", "phi+", "phi-")

# single-photon action of parity, |lambda> -> -|-lambda>; sigma_z in the H/V basis
PARITY_1 = qcore.SZ.copy()


@dataclass(frozen=True)
class BellLabel:
    kind: str
    basis: str = "lin"

    def __post_init__(self):
        if self.kind not in BELL_KINDS:
            raise BadStateSpec(f"unknown Bell state {self.kind!r}")
        if self.basis not in BASES:
            raise BadStateSpec(f"unknown basis {self.basis!r}")


def _bell_coefficients(kind):
    c = {
        "psi+": [0, 1, 1, 0],
        "psi-": [0, 1, -1, 0],
        "phi+": [1, 0, 0, 1],
        "phi-": [1, 0, 0, -1],
    }[kind]
    return S2 * np.array(c, dtype=complex)


def bell(kind, basis="lin"):
    """Bell state ``kind`` written in ``basis``, returned in H/V components."""
    if isinstance(kind, BellLabel):
        kind, basis = kind.kind, kind.basis
    label = BellLabel(kind, basis)
    u = BASES[label.basis]
    return np.kron(u, u) @ _bell_coefficients(label.kind)


def to_basis(psi, basis):
    """Components of a two-photon vector in the product basis ``basis``."""
    u = BASES[basis]
    return qcore.dagger(np.kron(u, u)) @ np.asarray(psi, dtype=complex)


def from_basis(coeffs, basis):
    u = BASES[basis]
    return np.kron(u, u) @ np.asarray(coeffs, dtype=complex)


def identify_bell(psi, basis="lin", tol=1e-12):
    """Name of the Bell state equal to ``psi`` up to phase in ``basis``, or None."""
    for kind in BELL_KINDS:
        if qcore.same_up_to_phase(psi, bell(kind, basis), tol=tol):
            return kind
    return None


def product(labels):
    """Product state from single-photon letters, e.g. ``"HV"`` or ``"RD"``."""
    try:
        vecs = [SINGLE[c] for c in labels]
    except KeyError as exc:
        raise BadStateSpec(f"unknown single-photon state {exc.args[0]!r}") from None
    return qcore.tensor(*vecs)


def separable_basis():
    return [product(s) for s in ("HH", "HV", "VH", "VV")]


def isotropic(p):
    if not 0.0 <= p <= 1.0:
        raise BadWeight(f"isotropic weight must lie in [0, 1], got {p}")
    return (1 - p) / 4 * np.eye(4, dtype=complex) + p * qcore.projector(bell("psi+"))


@dataclass(frozen=True)
class OrthoReduced:
    """Two-photon marginal of the symmetric three-photon decay at spin mixing ``p``."""

    p: float
    rho: np.ndarray
    p_plus: float
    p_minus: float
    c: tuple  # (c_plus, c_minus), the |HH> coefficients of the unnormalized partners


def ortho_reduced(p):
    if not 0.0 <= p <= 1.0:
        raise BadWeight(f"spin-mixing weight must lie in [0, 1], got {p}")
    root = np.sqrt(25.0 + 64.0 * p * (p - 1.0))
    p_plus, p_minus = (5 + root) / 12, (5 - root) / 12
    rho = qcore.projector(bell("psi+")) / 6
    cs = []
    for w, sgn in ((p_plus, 1.0), (p_minus, -1.0)):
        c = (8 * (p - 0.5) + sgn * root) / 3
        vec = np.array([c, 0, 0, 1], dtype=complex) / np.sqrt(1 + c * c)
        rho = rho + w * qcore.projector(vec)
        cs.append(float(c))
    return OrthoReduced(float(p), rho, float(p_plus), float(p_minus), tuple(cs))


# sigma_y x sigma_y; the spin-flipped state is (Y x Y) rho^* (Y x Y)
SPIN_FLIP = np.kron(qcore.SY, qcore.SY)


def concurrence(rho):
    """Wootters concurrence.

    The spin-flip spectrum is taken as the singular values of ``X^T (Y x Y) X``
    with ``rho = X X^dag``.  This avoids square roots of eigenvalues, which
    amplify rounding noise for rank-deficient states.
    """
    rho = np.asarray(rho, dtype=complex)
    qcore.eigvals_hermitian(rho)  # raises NotHermitian
    w, v = np.linalg.eigh(0.5 * (rho + qcore.dagger(rho)))
    w = np.where(w > 1e-14, w, 0.0)
    x = v * np.sqrt(w)
    sv = np.linalg.svd(x.T @ SPIN_FLIP @ x, compute_uv=False)
    return float(max(0.0, sv[0] - sv[1] - sv[2] - sv[3]))


def negativity(rho):
    ev = qcore.eigvals_hermitian(qcore.partial_transpose(rho, 1))
    return float(-ev[ev < 0].sum())


def is_ppt(rho, tol=1e-9):
    return bool(qcore.eigvals_hermitian(qcore.partial_transpose(rho, 1))[-1] >= -tol)


def parity(psi):
    """Apply the two-photon parity operator."""
    return np.kron(PARITY_1, PARITY_1) @ np.asarray(psi, dtype=complex)


def to_common_frame(psi):
    """Re-express photon b's helicity states in photon a's frame.

    Photon b propagates along -z, so its R and L become -L and -R.
    """
    return np.kron(qcore.I2, PARITY_1) @ np.asarray(psi, dtype=complex)


def bose_exchange(psi):
    """Swap photon labels together with momenta (which reverses both helicities)."""
    return np.kron(PARITY_1, PARITY_1) @ qcore.SWAP @ np.asarray(psi, dtype=complex)


def bose_parity_states():
    """Bose-symmetric two-photon states of definite parity, keyed by the eigenvalue."""
    return {+1: bell("psi+", "circ"), -1: bell("psi-", "circ")}


# ---------------------------------------------------------------- spec strings

_MIX_SPLIT = re.compile(r"\+(?=\s*[0-9.eE-]+\s*\*)")


def parse_state(spec):
    """Density matrix from a spec such as ``bell:psi+:lin``, ``iso:0.5``,
    ``ortho:0.5``, ``prod:HV`` or ``mix:0.5*prod:HV+0.5*prod:VH``.
    """
    spec = spec.strip()
    head, _, rest = spec.partition(":")
    try:
        if head == "bell":
            kind, _, basis = rest.partition(":")
            return qcore.projector(bell(kind, basis or "lin"))
        if head == "iso":
            return isotropic(float(rest))
        if head == "ortho":
            return ortho_reduced(float(rest)).rho
        if head == "prod":
            if len(rest) != 2:
                raise BadStateSpec(f"product state needs two letters, got {rest!r}")
            return qcore.projector(product(rest))
        if head == "mix":
            return _parse_mix(rest)
    except ValueError as exc:
        if isinstance(exc, (BadStateSpec, BadWeight)):
            raise
        raise BadStateSpec(f"malformed state spec {spec!r}: {exc}") from None
    raise BadStateSpec(f"unknown state family {head!r} in {spec!r}")


def _parse_mix(body):
    terms = _MIX_SPLIT.split(body)
    rho = np.zeros((4, 4), dtype=complex)
    total = 0.0
    for term in terms:
        w, star, sub = term.partition("*")
        if not star:
            raise BadStateSpec(f"mixture term {term!r} lacks a weight")
        w = float(w)
        if w < 0:
            raise BadWeight(f"negative mixture weight {w}")
        rho += w * parse_state(sub)
        total += w
    if abs(total - 1.0) > 1e-9:
        raise BadWeight(f"mixture weights sum to {total}, expected 1")
    return rho
