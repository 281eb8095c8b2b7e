import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from compton_witness import channel, montecarlo as mc
from compton_witness.errors import BadConfig, InsufficientStatistics


def quad_visibility(k, window):
    """F sin-weighted mean visibility over a polar window, by adaptive quadrature."""
    w = lambda t: channel.envelope(k, t) * np.sin(t)
    num = integrate.quad(lambda t: w(t) * channel.visibility(k, t), *window)[0]
    return num / integrate.quad(w, *window)[0]


@pytest.fixture(scope="module")
def psi_run():
    cfg = mc.RunConfig(n_events=600_000, seed=11)
    return cfg, mc.sample_events(cfg)


def test_counter_uniform_properties():
    ids = np.arange(200_000)
    u = mc.counter_uniform(5, ids, 0)
    assert 0.0 < u.min() and u.max() < 1.0
    assert stats.kstest(u, "uniform").pvalue > 1e-3
    # independent streams for different draws, seeds and ids
    assert abs(np.corrcoef(u, mc.counter_uniform(5, ids, 1))[0, 1]) < 0.01
    assert abs(np.corrcoef(u, mc.counter_uniform(6, ids, 0))[0, 1]) < 0.01
    assert np.array_equal(mc.counter_uniform(5, ids[1000:1010], 0), u[1000:1010])


def test_sampling_independent_of_chunking_and_threads(monkeypatch):
    a = mc.sample_events(mc.RunConfig(n_events=5000, seed=3, chunk_size=5000))
    monkeypatch.setenv(mc.THREADS_ENV, "1")
    b = mc.sample_events(mc.RunConfig(n_events=5000, seed=3, chunk_size=777))
    for name in mc.CSV_HEADER:
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = mc.sample_events(mc.RunConfig(n_events=5000, seed=4))
    assert not np.array_equal(a.phi_a, c.phi_a)


def test_theta_follows_envelope():
    cfg = mc.RunConfig(state="iso:0", n_events=50_000, seed=1, theta_window_a=(0.2, 2.9), rotations="none")
    ev = mc.sample_events(cfg)
    w = lambda t: channel.envelope(1.0, t) * np.sin(t)
    norm = integrate.quad(w, 0.2, 2.9)[0]
    cdf = np.vectorize(lambda x: integrate.quad(w, 0.2, x)[0] / norm)
    assert stats.kstest(ev.theta_a, cdf).pvalue > 1e-3


def test_unpolarized_azimuths_flat():
    cfg = mc.RunConfig(state="iso:0", n_events=100_000, seed=0, rotations="none")
    ev = mc.sample_events(cfg)
    for phi in (ev.phi_a, ev.phi_b):
        h = np.histogram(phi, bins=36, range=(0, 2 * np.pi))[0]
        assert stats.chisquare(h).pvalue > 0.01


def test_product_state_azimuth_shape():
    cfg = mc.RunConfig(state="prod:HV", n_events=200_000, seed=4, rotations="none")
    ev = mc.sample_events(cfg)
    edges = np.linspace(0, 2 * np.pi, 37)
    for phi, sign, win in ((ev.phi_a, -1, cfg.theta_window_a), (ev.phi_b, 1, cfg.theta_window_b)):
        v = quad_visibility(1.0, win)
        # integral of 1 + s v cos(2 phi) over each bin
        p = np.diff(edges + 0.5 * sign * v * np.sin(2 * edges))
        h = np.histogram(phi, bins=edges)[0]
        assert stats.chisquare(h, p / p.sum() * h.sum()).pvalue > 0.01


def test_expected_witness_matches_closed_form():
    cfg = mc.RunConfig()
    va = quad_visibility(1.0, cfg.theta_window_a)
    w = cfg.window_width
    assert mc.expected_witness(cfg) == pytest.approx(1.5 * (1 + (va * np.sin(w) / w) ** 2), abs=1e-9)
    assert mc.window_visibility(1.0, cfg.theta_window_a) == pytest.approx(va, abs=1e-12)


def test_estimate_and_error_scaling(psi_run):
    cfg, ev = psi_run
    est = mc.estimate_witness(ev, cfg)
    exp = mc.expected_witness(cfg)
    assert abs(est.report.value - exp) < 4 * est.sigma
    small = mc.estimate_witness(_head(ev, 300_000), cfg)
    assert small.sigma / est.sigma == pytest.approx(np.sqrt(2.0), rel=0.1)


def _head(ev, n):
    cols = {k: v[:n] for k, v in ev.columns().items()}
    return mc.EventBatch(**cols, k_in_a=ev.k_in_a, k_in_b=ev.k_in_b, seed=ev.seed)


def test_smearing(psi_run):
    cfg, ev = psi_run
    same = mc.smear(ev, 0.0)
    assert np.array_equal(same.phi_a, ev.phi_a) and same.phi_a is not ev.phi_a
    # smearing pushes polar angles out of the narrow default windows; analyze over all of them
    cfg = mc.RunConfig(n_events=cfg.n_events, seed=cfg.seed, theta_window_a=(0, np.pi), theta_window_b=(0, np.pi))
    base = mc.estimate_witness(ev, cfg)
    blurred = mc.estimate_witness(mc.smear(ev, 10.0, seed=1), cfg)
    assert blurred.report.value < base.report.value
    # at 90 deg the cos(2 phi) harmonic is suppressed by exp(-2 sigma^2) ~ 0.007
    flat = mc.estimate_witness(mc.smear(ev, 90.0, seed=1), cfg)
    assert abs(flat.report.value - 1.5) < 4 * flat.sigma + 0.02
    with pytest.raises(ValueError):
        mc.smear(ev, -1.0)


def test_insufficient_statistics():
    cfg = mc.RunConfig(n_events=2000, seed=0)
    with pytest.raises(InsufficientStatistics):
        mc.estimate_witness(mc.sample_events(cfg), cfg)


def test_csv_round_trip(tmp_path):
    cfg = mc.RunConfig(state="ortho:0.5", n_events=500, seed=9, k_a=2 / 3, k_b=2 / 3)
    ev = mc.sample_events(cfg)
    path = tmp_path / "ev.csv"
    mc.write_events(path, ev, cfg)
    back, cfg2 = mc.read_events(path)
    assert cfg2 == cfg
    for name in mc.CSV_HEADER:
        assert np.array_equal(getattr(back, name), getattr(ev, name))
    rec = next(iter(back))
    assert rec.seed_lineage == (9, 0)
    (tmp_path / "ev.json").unlink()
    with pytest.raises(BadConfig):
        mc.read_events(path)


@pytest.mark.parametrize("kw", [
    dict(n_events=0), dict(k_a=-1.0), dict(theta_window_a=(1.0, 0.5)), dict(n_bins=10),
    dict(rotations="some"), dict(seed=-1), dict(state="bell:xx"),
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        mc.RunConfig(**kw)


def test_estimate_needs_triple():
    cfg = mc.RunConfig(n_events=100, rotations="none")
    with pytest.raises(BadConfig):
        mc.estimate_witness(mc.sample_events(cfg), cfg)


@settings(max_examples=25)
@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(0, 1), st.floats(0, 1))
def test_azimuth_density_bounded_by_envelope(pa, pb, va, vb):
    rng = np.random.default_rng(int(1e6 * pa))
    from conftest import random_density
    from compton_witness import qcore
    ra, rb, T = qcore.bloch_data(random_density(rng))
    d = mc.azimuth_density(np.array([pa]), np.array([pb]), va, vb, ra, rb, T)[0]
    assert -1e-12 <= d <= 0.25 * (1 + va) * (1 + vb) + 1e-12
