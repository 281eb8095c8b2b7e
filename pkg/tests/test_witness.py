import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compton_witness import channel, qcore, states, witness
from compton_witness.errors import BadCount, SizeMismatch, Unsupported

from conftest import random_density, random_pure, random_unitary, seeds

V1 = channel.max_visibility(1.0)


def random_separable(rng, n_terms=3):
    w = rng.dirichlet(np.ones(n_terms))
    return sum(wi * np.kron(random_density(rng, 2), random_density(rng, 2)) for wi in w)


def test_standard_mubs_unbiased():
    m = witness.standard_mubs()
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.allclose(np.abs(m.bases[i].conj().T @ m.bases[j]) ** 2, 0.5)
    with pytest.raises(ValueError):
        witness.MubSet((states.BASES["lin"], np.eye(2)))


@given(seeds)
def test_random_mubs_stay_unbiased_under_unitaries(seed):
    u = random_unitary(np.random.default_rng(seed))
    m = witness.MubSet(tuple(u @ b for b in witness.standard_mubs().bases))
    assert m.m == 3


@given(st.floats(0.0, 1.0))
def test_ideal_mub_witness_on_isotropic(p):
    m = witness.standard_mubs()
    # every basis correlates (or anticorrelates) with probability (1 + p) / 2
    assert witness.mub_witness(states.isotropic(p), m, m) == pytest.approx(1.5 * (1 + p), abs=1e-12)


@given(seeds)
def test_ideal_mub_witness_separable_ceiling(seed):
    rng = np.random.default_rng(seed)
    m = witness.standard_mubs()
    assert witness.mub_witness(random_separable(rng), m, m) <= 2.0 + 1e-12


def test_mub_errors():
    with pytest.raises(SizeMismatch):
        witness.mub_witness(np.eye(4) / 4, witness.standard_mubs(2), witness.standard_mubs(3))
    with pytest.raises(Unsupported):
        witness.mub_bounds(0.5, m=2)
    assert witness.mub_bounds_any(0.5, 2) == (0.75, 1.25, 0.5, 1.5)


def test_report_validation():
    with pytest.raises(ValueError):
        witness.WitnessReport(1.0, 3, (), 1.5, 1.0, 0.0, 3.0)
    with pytest.raises(ValueError):
        witness.WitnessReport(1.0, 3, (), 0.5, 2.5, 1.0, 2.0)
    r = witness.WitnessReport(2.2, 3, (), 1.26, 1.74, 0.78, 2.22)
    assert r.verdict == "ENTANGLED" and r.to_dict()["verdict"] == "ENTANGLED"


@given(seeds)
def test_compton_i3_within_entangled_band(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng)
    v = rng.uniform(0, 1)
    val = witness.compton_i3(rho, v, 1.0, rng.uniform(0, 2 * np.pi, 6))
    lo, hi = witness.mub_bounds(v)[2:]
    assert lo - 1e-12 <= val <= hi + 1e-12


@given(seeds)
def test_mub_settings_respect_separable_band(seed):
    rng = np.random.default_rng(seed)
    rho = random_separable(rng)
    v = rng.uniform(0, 1)
    sep_lo, sep_hi = witness.mub_bounds(v)[:2]
    for bose in (False, True):
        val = witness.compton_i3(rho, v, 1.0, rng.uniform(0, 2 * np.pi, 6), enforce_bose=bose)
        assert sep_lo - 1e-12 <= val <= sep_hi + 1e-12


def test_measured_axes_are_orthonormal():
    for axes in (witness.TRIPLE_AXES_A, witness.TRIPLE_AXES_B):
        assert np.allclose(axes @ axes.T, np.eye(3))


@given(seeds)
def test_so3_euler_matches_su2_adjoint(seed):
    p = np.random.default_rng(seed).uniform(0, 2 * np.pi, 3)
    u, r = qcore.su2(*p), witness.so3_euler(*p)
    for i, s in enumerate(qcore.PAULI):
        rotated = u @ s @ qcore.dagger(u)
        assert np.allclose(rotated, sum(r[j, i] * qcore.PAULI[j] for j in range(3)))


@settings(max_examples=15)
@given(seeds, st.floats(0.0, 2 * np.pi))
def test_kraus_route_equals_bloch_route_in_any_frame(seed, frame):
    rng = np.random.default_rng(seed)
    rho = random_density(rng)
    params = rng.uniform(0, 2 * np.pi, 6)
    t = channel.optimal_angle(1.0)[0]
    bloch = witness.compton_i3(rho, V1, V1, params)
    assert witness.compton_witness_kraus(rho, 1.0, t, 1.0, t, params, frame_phi=frame) == pytest.approx(bloch, abs=1e-12)


@pytest.mark.parametrize("chi", [0.3, 1.1, 2.5])
def test_optimized_witness_invariant_under_common_frame_rotation(chi):
    # rotating the polarization frame of both photons is a local unitary
    rot = qcore.su2(0.0, 0.0, 2 * chi)
    u = np.kron(rot, rot.conj())
    rho = states.ortho_reduced(0.3).rho
    base = witness.mub_witness_compton(rho, settings="mub", n_restarts=12).value
    turned = witness.mub_witness_compton(u @ rho @ qcore.dagger(u), settings="mub", n_restarts=12).value
    assert turned == pytest.approx(base, abs=1e-6)


def test_optimizer_is_deterministic():
    f = lambda p: -np.sum(np.sin(p) ** 2)
    assert witness.optimize_local_unitaries(f, 4, seed=3) == witness.optimize_local_unitaries(f, 4, seed=3)


def test_product_state_parametrization(rng):
    p = rng.uniform(0, np.pi, 4)
    psi = witness.product_state(p)
    qcore.check_pure(psi)
    assert states.concurrence(qcore.projector(psi)) == pytest.approx(0.0, abs=1e-9)


def test_free_mode_note_and_bose_readings():
    rep = witness.mub_witness_compton(qcore.projector(states.bell("psi+")), n_restarts=6)
    assert rep.mode == "free" and rep.notes
    r = witness.bose_readings()
    assert r["scattering_frame"] == pytest.approx(1.5 * (1 + V1 ** 2), abs=1e-12)
    assert r["detector_frame"] < r["scattering_frame"]


# ------------------------------------------------------------------ SIC


@given(seeds)
def test_sic_overlaps(seed):
    s = witness.sic_set(random_pure(np.random.default_rng(seed), 2))
    for i in range(4):
        for j in range(i + 1, 4):
            assert abs(np.vdot(s.states[i], s.states[j])) ** 2 == pytest.approx(1 / 3, abs=1e-12)
    axes = np.array([qcore.bloch_vector(qcore.projector(x)) for x in s.states])
    assert np.allclose(axes.sum(axis=0), 0.0, atol=1e-12)
    assert np.allclose(s.states[0], s.seed)


def test_sic_count_errors():
    s = witness.sic_set()
    with pytest.raises(BadCount):
        witness.SicSet(s.seed, s.states[:3])
    with pytest.raises(BadCount):
        witness.sic_witness(np.eye(4) / 4, m_tilde=5)


@given(seeds, st.integers(1, 4), st.booleans())
def test_sic_bloch_form_equals_operator_trace(seed, m, conj):
    rng = np.random.default_rng(seed)
    rho = random_density(rng)
    va, vb = rng.uniform(0, 1, 2)
    sics = witness.sic_set()
    op = witness.sic_operator(sics, m, va, vb, conj)
    assert witness.sic_witness(rho, sics, m, va, vb, conj) == pytest.approx(np.trace(op @ rho).real, abs=1e-12)


def test_sic_ideal_spectrum():
    assert witness.sic_spectrum_range(4) == pytest.approx((1.0, 3.0), abs=1e-12)
    # without conjugation the sum is not maximized by psi+
    assert witness.sic_spectrum_range(4, conjugate=False) == pytest.approx((0.0, 2.0), abs=1e-12)
    assert witness.sic_upper_bounds("text")[1] < 1.5 < witness.sic_upper_bounds("table")[1]


# ------------------------------------------------------------------ thresholds and CHSH


def test_threshold_residuals():
    for k, key in zip(witness.protocol_thresholds(), ("ent", "tel", "chsh")):
        assert channel.max_visibility(k) ** 2 == pytest.approx(witness.TARGET_V2[key], abs=1e-10)


@given(st.floats(0.0, 1.0))
def test_chsh_isotropic(p):
    assert witness.chsh_value(states.isotropic(p)) == pytest.approx(2 * np.sqrt(2) * p, abs=1e-12)


def test_chsh_products_classical(rng):
    for _ in range(20):
        assert witness.chsh_value(random_separable(rng)) <= 2 + 1e-12
