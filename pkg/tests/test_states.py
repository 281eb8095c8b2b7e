import numpy as np
import pytest
from hypothesis import given, strategies as st

from compton_witness import qcore, states
from compton_witness.errors import BadStateSpec, BadWeight

from conftest import random_pure, seeds

unit = st.floats(0.0, 1.0, allow_nan=False)


def test_single_photon_relations():
    s = states.SINGLE
    assert np.allclose(s["H"], (s["R"] - s["L"]) / np.sqrt(2))
    assert np.allclose(1j * s["V"], (s["R"] + s["L"]) / np.sqrt(2))
    for b in states.BASES.values():
        qcore.check_unitary(b)


@pytest.mark.parametrize("basis", sorted(states.BASES))
def test_bell_states_orthonormal_and_identified(basis):
    vecs = [states.bell(k, basis) for k in states.BELL_KINDS]
    gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
    assert np.allclose(gram, np.eye(4))
    for k, v in zip(states.BELL_KINDS, vecs):
        assert states.identify_bell(v, basis) == k
        assert np.allclose(states.from_basis(states.to_basis(v, basis), basis), v)


def test_bell_label_validation():
    with pytest.raises(BadStateSpec):
        states.bell("chi+")
    with pytest.raises(BadStateSpec):
        states.bell("psi+", "spiral")


@given(seeds)
def test_pure_concurrence_matches_determinant_formula(seed):
    psi = random_pure(np.random.default_rng(seed), 4)
    expected = 2 * abs(psi[0] * psi[3] - psi[1] * psi[2])
    assert states.concurrence(qcore.projector(psi)) == pytest.approx(expected, abs=1e-9)


@given(unit)
def test_isotropic_measures(p):
    rho = states.isotropic(p)
    qcore.check_density(rho)
    assert states.concurrence(rho) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-9)
    assert states.negativity(rho) == pytest.approx(max(0.0, (3 * p - 1) / 4), abs=1e-12)


def test_ppt_boundary_of_isotropic():
    assert states.is_ppt(states.isotropic(1 / 3))
    assert states.concurrence(states.isotropic(1 / 3)) == pytest.approx(0.0, abs=1e-12)
    assert not states.is_ppt(states.isotropic(1 / 3 + 1e-6), tol=1e-12)
    assert states.is_ppt(states.isotropic(1 / 3 - 1e-6), tol=1e-12)
    with pytest.raises(BadWeight):
        states.isotropic(1.2)


@given(unit)
def test_ortho_reduced_is_a_state(p):
    o = states.ortho_reduced(p)
    qcore.check_density(o.rho, trace_tol=1e-12)
    assert o.p_plus + o.p_minus == pytest.approx(5 / 6)
    assert not states.is_ppt(o.rho)


def test_products_are_separable():
    for v in states.separable_basis():
        assert states.concurrence(qcore.projector(v)) == pytest.approx(0.0, abs=1e-12)


def test_parity_and_bose_symmetry():
    for eig, psi in states.bose_parity_states().items():
        assert np.allclose(states.parity(psi), eig * psi)
        assert np.allclose(states.bose_exchange(psi), psi)
    # common-frame relabeling flips photon b's helicity
    r, l = states.SINGLE["R"], states.SINGLE["L"]
    assert np.allclose(states.to_common_frame(np.kron(r, r)), -np.kron(r, l))


@pytest.mark.parametrize("spec,expected", [
    ("bell:psi+:lin", qcore.projector(states.bell("psi+"))),
    ("bell:phi-", qcore.projector(states.bell("phi-"))),
    ("iso:0.25", states.isotropic(0.25)),
    ("prod:HV", qcore.projector(states.product("HV"))),
    ("mix:0.5*prod:HV+0.5*prod:VH",
     0.5 * qcore.projector(states.product("HV")) + 0.5 * qcore.projector(states.product("VH"))),
    ("mix:0.3*bell:psi+:circ + 0.7*iso:1e-1",
     0.3 * qcore.projector(states.bell("psi+", "circ")) + 0.7 * states.isotropic(0.1)),
])
def test_parse_state(spec, expected):
    assert np.allclose(states.parse_state(spec), expected)


@pytest.mark.parametrize("spec,exc", [
    ("nope:1", BadStateSpec), ("iso:x", BadStateSpec), ("prod:HVH", BadStateSpec),
    ("prod:HQ", BadStateSpec), ("mix:0.5*prod:HV+0.4*prod:VH", BadWeight),
    ("mix:prod:HV", BadStateSpec), ("iso:2", BadWeight),
])
def test_parse_state_errors(spec, exc):
    with pytest.raises(exc):
        states.parse_state(spec)
