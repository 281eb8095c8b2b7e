"""MUB and SIC entanglement witnesses, with and without Compton damping.

A measurement basis is a 2x2 unitary whose columns are the two outcome
vectors.  In the Compton setting every term reduces to ``1/2 (1 + Va Vb e)``
where ``e = a^T T b`` is a signed correlation of the state along the
measured Bloch axes ``a`` and ``b``.  The functions here work in that Bloch
form; :func:`compton_witness_kraus` evaluates the same quantity from joint
cross sections and serves as an independent route.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from . import channel, qcore
from .errors import BadCount, SizeMismatch, Unsupported
from .states import BASES

# ------------------------------------------------------------------ bases


@dataclass(frozen=True)
class MubSet:
    bases: tuple

    def __post_init__(self):
        bases = tuple(qcore.check_unitary(b) for b in self.bases)
        if not 1 <= len(bases) <= 3:
            raise SizeMismatch(f"a qubit has at most 3 mutually unbiased bases, got {len(bases)}")
        for i in range(len(bases)):
            for j in range(i + 1, len(bases)):
                overlaps = np.abs(qcore.dagger(bases[i]) @ bases[j]) ** 2
                if np.max(np.abs(overlaps - 0.5)) > 1e-10:
                    raise ValueError(f"bases {i} and {j} are not unbiased")
        object.__setattr__(self, "bases", bases)

    @property
    def m(self):
        return len(self.bases)


def standard_mubs(m=3):
    """Eigenbases of sigma_z, sigma_x and sigma_y (linear, diagonal, circular)."""
    return MubSet(tuple(BASES[k] for k in ("lin", "diag", "circ")[:m]))


def _pair_probabilities(rho, basis_a, basis_b):
    u = np.kron(basis_a, basis_b)
    return np.real(np.diag(qcore.dagger(u) @ rho @ u)).reshape(2, 2)


def correlation(rho, basis_a, basis_b):
    """``P(a1, b1) + P(a2, b2)`` with the outcome pairing given by column order."""
    p = _pair_probabilities(np.asarray(rho, dtype=complex), basis_a, basis_b)
    return float(p[0, 0] + p[1, 1])


def mub_witness(rho, mubs_a, mubs_b, optimize_labels=True):
    """Sum of correlations over paired bases.

    With ``optimize_labels`` each term takes the better of the two outcome
    pairings, which for a normalized state is ``max(C, 1 - C)``.
    """
    if mubs_a.m != mubs_b.m:
        raise SizeMismatch(f"sides use {mubs_a.m} and {mubs_b.m} bases")
    total = 0.0
    for ua, ub in zip(mubs_a.bases, mubs_b.bases):
        c = correlation(rho, ua, ub)
        total += max(c, 1.0 - c) if optimize_labels else c
    return total


def mub_bounds(visibility_product, m=3):
    """``(sep_lo, sep_hi, ent_lo, ent_hi)`` for the complete three-basis witness."""
    if m != 3:
        raise Unsupported(f"closed-form bounds are given for m = 3 only, got {m}")
    return mub_bounds_any(visibility_product, m)


def mub_bounds_any(visibility_product, m):
    """Bounds for ``m`` in 1..3 bases: SEP ``(m -+ v)/2``, ENT ``(m -+ m v)/2``."""
    if m not in (1, 2, 3):
        raise Unsupported(f"m must be 1, 2 or 3, got {m}")
    v = float(visibility_product)
    return 0.5 * (m - v), 0.5 * (m + v), 0.5 * (m - m * v), 0.5 * (m + m * v)


# ------------------------------------------------------------------ reports


@dataclass
class WitnessReport:
    value: float
    n_settings: int
    params: tuple
    sep_lo: float
    sep_hi: float
    ent_lo: float
    ent_hi: float
    mode: str = ""
    visibilities: tuple = ()
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if not (self.sep_lo <= self.sep_hi and self.ent_lo <= self.ent_hi):
            raise ValueError("bounds are not ordered")
        if not (self.ent_lo <= self.sep_lo + 1e-9 and self.sep_hi <= self.ent_hi + 1e-9):
            raise ValueError("separable band must lie inside the entangled band")

    @property
    def verdict(self):
        return "ENTANGLED" if self.value > self.sep_hi else "INCONCLUSIVE"

    def to_dict(self):
        return {
            "value": self.value,
            "n_settings": self.n_settings,
            "params": [float(x) for x in self.params],
            "sep_lo": self.sep_lo,
            "sep_hi": self.sep_hi,
            "ent_lo": self.ent_lo,
            "ent_hi": self.ent_hi,
            "mode": self.mode,
            "visibilities": [float(v) for v in self.visibilities],
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


# ------------------------------------------------------------------ optimizer


def optimize_local_unitaries(objective, n_restarts=64, seed=0, n_params=6, tol=1e-10,
                             maxiter=None):
    """Maximize ``objective(params)`` by Nelder-Mead from seeded random starts.

    Starts are drawn uniformly from ``[0, 2 pi)^n_params``.  The best restart
    wins; on exact ties the lowest restart index is kept.
    """
    rng = np.random.default_rng(seed)
    starts = rng.uniform(0.0, 2 * np.pi, size=(n_restarts, n_params))
    maxiter = maxiter or 400 * n_params
    best_val, best_x = -np.inf, None
    for x0 in starts:
        res = minimize(lambda p: -objective(p), x0, method="Nelder-Mead",
                       options={"xatol": tol, "fatol": tol, "maxiter": maxiter, "maxfev": maxiter})
        val = -float(res.fun)
        if val > best_val:
            best_val, best_x = val, np.asarray(res.x)
    return best_val, tuple(float(x) for x in best_x)


def _minimize_objective(objective, **kw):
    val, x = optimize_local_unitaries(lambda p: -objective(p), **kw)
    return -val, x


# ------------------------------------------------------------------ Compton MUB witness

H_ROT = np.array([[1, -1], [1, 1]], dtype=complex) / np.sqrt(2)
S_ROT = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])

# local rotations applied before the H/V-type Compton measurement, one pair per term
COMPTON_TRIPLE = (
    (qcore.I2, qcore.I2),
    (H_ROT, H_ROT),
    (S_ROT, S_ROT.conj()),
)


def measured_axis(u):
    """Bloch axis of ``u^dag sigma_z u``: the observable read out after rotating by ``u``."""
    m = qcore.dagger(u) @ qcore.SZ @ u
    return np.array([m[0, 1].real, -m[0, 1].imag, m[0, 0].real])


def _axes(w, side):
    return np.array([measured_axis(pair[side] @ w) for pair in COMPTON_TRIPLE])


def so3_euler(alpha, beta, gamma):
    """Bloch-sphere rotation of :func:`qcore.su2` with the same angles."""
    ca, sa, cb, sb, cg, sg = np.cos(alpha), np.sin(alpha), np.cos(beta), np.sin(beta), np.cos(gamma), np.sin(gamma)
    rz_a = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]])
    ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]])
    rz_g = np.array([[cg, -sg, 0], [sg, cg, 0], [0, 0, 1]])
    return rz_a @ ry @ rz_g


TRIPLE_AXES_A = _axes(qcore.I2, 0)
TRIPLE_AXES_B = _axes(qcore.I2, 1)


def _signed_terms(T, axes_a, axes_b):
    return np.einsum("ki,ij,kj->k", axes_a, T, axes_b)


def _effective_tensor(rho, enforce_bose):
    _, _, T = qcore.bloch_data(rho)
    # label-and-momentum swap turns T into its transpose; settings stay on their arms
    return 0.5 * (T + T.T) if enforce_bose else T


def _damped_sum(terms, v):
    return float(np.sum(0.5 * (1.0 + v * np.abs(terms))))


def compton_i3(rho, va, vb, params=None, enforce_bose=False):
    """Damped three-term witness for one choice of common local unitaries.

    ``params`` holds Euler angles ``(wa..., wb...)``; None means identity.
    """
    T = _effective_tensor(np.asarray(rho, dtype=complex), enforce_bose)
    p = np.zeros(6) if params is None else np.asarray(params, dtype=float)
    wa, wb = qcore.su2(*p[:3]), qcore.su2(*p[3:6])
    return _damped_sum(_signed_terms(T, _axes(wa, 0), _axes(wb, 1)), va * vb)


def _visibilities(k_a, k_b, theta_a, theta_b, ideal):
    if ideal:
        return 1.0, 1.0
    return float(channel.visibility(k_a, theta_a)), float(channel.visibility(k_b, theta_b))


def default_settings(enforce_bose):
    return "mub" if enforce_bose else "free"


def mub_witness_compton(rho, k_a=1.0, k_b=1.0, theta_a=None, theta_b=None, enforce_bose=False,
                        settings=None, ideal=False, optimize=True, n_restarts=64, seed=0):
    """Compton-damped three-basis witness maximized over local unitaries.

    ``settings="mub"`` applies one common unitary per side before the fixed
    rotation triple, so the three measured axes stay mutually unbiased.
    ``settings="free"`` lets every term pick its own axes.  The latter is not
    bounded by the separable band for every separable state; the report
    carries a note saying so.
    """
    rho = qcore.check_density(rho)
    if theta_a is None:
        theta_a = channel.optimal_angle(k_a)[0]
    if theta_b is None:
        theta_b = channel.optimal_angle(k_b)[0]
    settings = settings or default_settings(enforce_bose)
    va, vb = _visibilities(k_a, k_b, theta_a, theta_b, ideal)
    v = va * vb
    T = _effective_tensor(rho, enforce_bose)
    notes = []
    if not optimize:
        value, params = compton_i3(rho, va, vb, None, enforce_bose), (0.0,) * 6
    elif settings == "mub":
        def obj(p):
            # u^dag (n.sigma) u = (R^T n).sigma, so the rotated axes are R^T c_k
            m = so3_euler(*p[:3]) @ T @ so3_euler(*p[3:]).T
            return _damped_sum(_signed_terms(m, TRIPLE_AXES_A, TRIPLE_AXES_B), v)
        value, params = optimize_local_unitaries(obj, n_restarts=n_restarts, seed=seed)
    elif settings == "free":
        # terms are independent, so the joint maximum is the sum of per-term maxima
        value, params = 0.0, ()
        for k in range(3):
            def obj(p, k=k):
                a = so3_euler(*p[:3]).T @ TRIPLE_AXES_A[k]
                b = so3_euler(*p[3:]).T @ TRIPLE_AXES_B[k]
                return 0.5 * (1.0 + v * abs(a @ T @ b))
            val, x = optimize_local_unitaries(obj, n_restarts=max(1, n_restarts // 3), seed=seed + k)
            value += val
            params += x
        notes.append("free settings: per-term axes need not be unbiased; "
                     "the separable band is guaranteed only for settings='mub'")
    else:
        raise ValueError(f"settings must be 'mub' or 'free', got {settings!r}")
    sep_lo, sep_hi, ent_lo, ent_hi = mub_bounds(v, 3)
    return WitnessReport(float(value), 3, tuple(params), sep_lo, sep_hi, ent_lo, ent_hi,
                         mode=settings + ("+bose" if enforce_bose else ""),
                         visibilities=(va, vb), notes=notes)


def _product_tensor(p):
    ra = np.array([np.sin(p[0]) * np.cos(p[1]), np.sin(p[0]) * np.sin(p[1]), np.cos(p[0])])
    rb = np.array([np.sin(p[2]) * np.cos(p[3]), np.sin(p[2]) * np.sin(p[3]), np.cos(p[2])])
    return ra, rb


def product_state(params):
    """Pure product state from Bloch angles ``(theta_a, phi_a, theta_b, phi_b)``."""
    def qubit(t, f):
        return np.array([np.cos(t / 2), np.exp(1j * f) * np.sin(t / 2)])
    return np.kron(qubit(params[0], params[1]), qubit(params[2], params[3]))


def separable_max_compton(k_a=1.0, k_b=1.0, theta_a=None, theta_b=None, enforce_bose=False,
                          ideal=False, n_restarts=64, seed=0):
    """Largest three-basis witness reached by pure product states (mub settings).

    Local unitaries act on product states as a change of product state, so
    four Bloch angles with the fixed rotation triple cover the whole set.
    """
    if theta_a is None:
        theta_a = channel.optimal_angle(k_a)[0]
    if theta_b is None:
        theta_b = channel.optimal_angle(k_b)[0]
    va, vb = _visibilities(k_a, k_b, theta_a, theta_b, ideal)
    v = va * vb
    def obj(p):
        ra, rb = _product_tensor(p)
        T = np.outer(ra, rb)
        if enforce_bose:
            T = 0.5 * (T + T.T)
        return _damped_sum(_signed_terms(T, TRIPLE_AXES_A, TRIPLE_AXES_B), v)

    value, params = optimize_local_unitaries(obj, n_restarts=n_restarts, seed=seed, n_params=4)
    sep_lo, sep_hi, ent_lo, ent_hi = mub_bounds(v, 3)
    return WitnessReport(value, 3, params, sep_lo, sep_hi, ent_lo, ent_hi,
                         mode="separable-mub" + ("+bose" if enforce_bose else ""),
                         visibilities=(va, vb))


# ------------------------------------------------------------------ Kraus route


def compton_witness_kraus(rho, k_a, theta_a, k_b, theta_b, params=None, frame_phi=0.0,
                          b_polar="scattering"):
    """Three-term witness built from joint cross sections of the rotated state.

    Each correlation is ``(s00 + s11) / (s00 + s01 + s10 + s11)`` with
    ``sij`` the two-photon cross section at azimuths ``i, j`` in {0, 90} deg
    relative to ``frame_phi``.  With ``b_polar="detector"`` photon b's outgoing
    polar angle is taken as ``theta_b`` measured from +z instead of from its own
    direction of flight, so its Compton angle becomes ``pi - theta_b``.
    """
    rho = np.asarray(rho, dtype=complex)
    p = np.zeros(6) if params is None else np.asarray(params, dtype=float)
    wa, wb = qcore.su2(*p[:3]), qcore.su2(*p[3:6])
    if b_polar == "scattering":
        tb = theta_b
    elif b_polar == "detector":
        tb = np.pi - theta_b
    else:
        raise ValueError(f"b_polar must be 'scattering' or 'detector', got {b_polar!r}")
    total = 0.0
    for ta_rot, tb_rot in COMPTON_TRIPLE:
        u = np.kron(ta_rot @ wa, tb_rot @ wb)
        r = u @ rho @ qcore.dagger(u)
        s = np.zeros((2, 2))
        for i in range(2):
            for j in range(2):
                geoms = channel.back_to_back(k_a, theta_a, frame_phi + i * np.pi / 2,
                                             tb, frame_phi + j * np.pi / 2, k_in_b=k_b)
                s[i, j] = channel.sigma_multi(r, geoms, frame_phi=frame_phi).value
        c = (s[0, 0] + s[1, 1]) / s.sum()
        total += max(c, 1.0 - c)
    return float(total)


def bose_readings(k_in=1.0, theta=None):
    """Ideal-state optimum under the two readings of photon b's polar angle."""
    if theta is None:
        theta = channel.optimal_angle(k_in)[0]
    psi = qcore.projector(np.array([0, 1, 1, 0]) / np.sqrt(2))
    return {
        "scattering_frame": compton_witness_kraus(psi, k_in, theta, k_in, theta),
        "detector_frame": compton_witness_kraus(psi, k_in, theta, k_in, theta, b_polar="detector"),
        "theta": float(theta),
    }


# ------------------------------------------------------------------ SIC witness

_OMEGA = np.exp(1j * np.pi / 3)  # (-1)^(1/3)
SIC_UNITARIES = (
    qcore.I2,
    np.array([[1, np.sqrt(2)], [np.sqrt(2), -1]], dtype=complex) / np.sqrt(3),
    np.array([[1, np.sqrt(2)], [-_OMEGA * np.sqrt(2), _OMEGA]], dtype=complex) / np.sqrt(3),
    np.array([[1, np.sqrt(2)], [_OMEGA ** 2 * np.sqrt(2), -_OMEGA ** 2]], dtype=complex) / np.sqrt(3),
)

SIC_PREFACTOR = 1.5
SIC_LOWER = (0.0, 0.0, 0.4, 1.0)
# separable upper bounds for m_tilde = 1..4; only m_tilde = 2 differs between sources
SIC_UPPER_M2_TEXT = ((1 + np.sqrt(3)) / 3) ** 2
SIC_UPPER_M2_TABLE = ((1 + np.sqrt(3)) / 2) ** 2


def sic_upper_bounds(source="table"):
    """Separable upper bounds for ``m_tilde = 1..4``.

    ``source="table"`` is the value the product-state brute force reproduces;
    ``"text"`` is the smaller quoted figure, which lies below the
    maximally entangled value and so cannot be a separable ceiling.
    """
    if source not in ("table", "text"):
        raise ValueError(f"source must be 'table' or 'text', got {source!r}")
    m2 = SIC_UPPER_M2_TABLE if source == "table" else SIC_UPPER_M2_TEXT
    return (1.5, m2, 2.0, 2.0)


@dataclass(frozen=True)
class SicSet:
    seed: np.ndarray
    states: tuple

    def __post_init__(self):
        if len(self.states) != 4:
            raise BadCount(f"a qubit SIC has 4 states, got {len(self.states)}")
        for i in range(4):
            for j in range(i + 1, 4):
                ov = abs(np.vdot(self.states[i], self.states[j])) ** 2
                if abs(ov - 1 / 3) > 1e-10:
                    raise ValueError(f"SIC states {i}, {j} overlap {ov:.12g}, expected 1/3")


def sic_set(seed=None):
    """Tetrahedron generated from ``seed`` by the fixed unitaries, in the seed's frame.

    The unitaries act on ``|H>``; a frame unitary taking ``|H>`` to the seed is
    applied afterwards so that the first state is the seed itself.
    """
    seed = np.array([1, 0], dtype=complex) if seed is None else qcore.check_pure(seed, tol=1e-10)
    a, b = seed
    frame = np.array([[a, -np.conj(b)], [b, np.conj(a)]])
    h = np.array([1, 0], dtype=complex)
    return SicSet(seed, tuple(frame @ u @ h for u in SIC_UNITARIES))


def _sic_axes(sics, m_tilde, conjugate):
    if m_tilde not in (1, 2, 3, 4):
        raise BadCount(f"m_tilde must be 1..4, got {m_tilde}")
    a_axes, b_axes = [], []
    for s in sics.states[:m_tilde]:
        n = qcore.bloch_vector(qcore.projector(s))
        a_axes.append(n)
        # sigma_z (P or P^*) sigma_z; conjugation flips y, the sigma_z sandwich flips x and y
        b_axes.append(np.array([-n[0], n[1], n[2]]) if conjugate else np.array([-n[0], -n[1], n[2]]))
    return np.array(a_axes), np.array(b_axes)


def sic_operator(sics, m_tilde, va=1.0, vb=1.0, conjugate=True):
    """The witness operator, with each projector damped to ``V P + (1 - V) I/2``."""
    if m_tilde not in (1, 2, 3, 4):
        raise BadCount(f"m_tilde must be 1..4, got {m_tilde}")
    out = np.zeros((4, 4), dtype=complex)
    for s in sics.states[:m_tilde]:
        p = qcore.projector(s)
        q = qcore.SZ @ (p.conj() if conjugate else p) @ qcore.SZ
        out += np.kron(va * p + (1 - va) * qcore.I2 / 2, vb * q + (1 - vb) * qcore.I2 / 2)
    return SIC_PREFACTOR * out


def sic_witness(rho, sics=None, m_tilde=4, va=1.0, vb=1.0, conjugate=True):
    """SIC witness value, computed from the Bloch data of ``rho``."""
    sics = sics or sic_set()
    ax_a, ax_b = _sic_axes(sics, m_tilde, conjugate)
    r_a, r_b, T = qcore.bloch_data(np.asarray(rho, dtype=complex))
    terms = 1 + va * ax_a @ r_a + vb * ax_b @ r_b + va * vb * np.einsum("ki,ij,kj->k", ax_a, T, ax_b)
    return float(SIC_PREFACTOR * 0.25 * np.sum(terms))


def sic_spectrum_range(m_tilde, va=1.0, vb=1.0, conjugate=True):
    """Extreme eigenvalues of the witness operator: its range over all states."""
    ev = qcore.eigvals_hermitian(sic_operator(sic_set(), m_tilde, va, vb, conjugate))
    return float(ev[-1]), float(ev[0])


def sic_entangled_range(m_tilde, va=1.0, vb=1.0, conjugate=True, n_restarts=32, seed=0):
    """Min and max of the SIC witness over all maximally entangled states."""
    sics = sic_set()
    op = sic_operator(sics, m_tilde, va, vb, conjugate)
    psi = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)

    def obj(p):
        x = np.kron(qcore.su2(*p[:3]), qcore.su2(*p[3:])) @ psi
        return np.vdot(x, op @ x).real

    lo, _ = _minimize_objective(obj, n_restarts=n_restarts, seed=seed)
    hi, _ = optimize_local_unitaries(obj, n_restarts=n_restarts, seed=seed)
    return lo, hi


def sic_separable_range(m_tilde, va=1.0, vb=1.0, conjugate=True, n_samples=100_000,
                        n_polish=32, seed=0):
    """Min and max of the SIC witness over pure product states, by brute force.

    ``n_samples`` random product states (four Bloch angles) are evaluated in
    one vectorized pass; the ``n_polish`` best at each end are refined by
    Nelder-Mead.
    """
    sics = sic_set()
    ax_a, ax_b = _sic_axes(sics, m_tilde, conjugate)
    rng = np.random.default_rng(seed)
    # uniform on the sphere: cos(theta) uniform
    t = np.arccos(rng.uniform(-1, 1, size=(n_samples, 2)))
    f = rng.uniform(0, 2 * np.pi, size=(n_samples, 2))
    pts = np.column_stack([t[:, 0], f[:, 0], t[:, 1], f[:, 1]])

    def values(p):
        p = np.atleast_2d(p)
        ra = np.stack([np.sin(p[:, 0]) * np.cos(p[:, 1]), np.sin(p[:, 0]) * np.sin(p[:, 1]),
                       np.cos(p[:, 0])], axis=1)
        rb = np.stack([np.sin(p[:, 2]) * np.cos(p[:, 3]), np.sin(p[:, 2]) * np.sin(p[:, 3]),
                       np.cos(p[:, 2])], axis=1)
        fa = 0.5 * (1 + va * ra @ ax_a.T)
        fb = 0.5 * (1 + vb * rb @ ax_b.T)
        return SIC_PREFACTOR * np.sum(fa * fb, axis=1)

    vals = values(pts)
    order = np.argsort(vals)
    out = []
    for sign, idx in ((1.0, order[:n_polish]), (-1.0, order[::-1][:n_polish])):
        best = np.inf
        for x0 in pts[idx]:
            res = minimize(lambda p: sign * values(p)[0], x0, method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
            best = min(best, res.fun)
        out.append(sign * best)
    return float(out[0]), float(out[1])


# ------------------------------------------------------------------ thresholds and CHSH

TARGET_V2 = {"ent": 1.0 / 3.0, "tel": 2.0 / 3.0, "chsh": 1.0 / np.sqrt(2.0)}
KEV_PER_UNIT = 511.0


def protocol_thresholds():
    """Energies below which ``max V^2`` exceeds 1/3, 2/3 and 1/sqrt2 (equal arms).

    Returns ``(k_ent, k_tel, k_chsh)`` in units of the electron rest energy.
    """
    out = []
    for key in ("ent", "tel", "chsh"):
        target = TARGET_V2[key]
        out.append(brentq(lambda k: channel.max_visibility(k) ** 2 - target, 1e-3, 20.0, xtol=1e-12))
    return tuple(out)


def chsh_value(rho):
    """Maximal CHSH expectation, ``2 sqrt(l1 + l2)`` from the two largest eigenvalues of ``T^T T``."""
    rho = np.asarray(rho, dtype=complex)
    qcore.eigvals_hermitian(rho)  # raises NotHermitian
    _, _, T = qcore.bloch_data(rho)
    lam = np.sort(np.linalg.eigvalsh(T.T @ T))[::-1]
    return float(2.0 * np.sqrt(max(lam[0] + lam[1], 0.0)))
