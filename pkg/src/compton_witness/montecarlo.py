"""Event generation for back-to-back Compton pairs and witness estimation from events.

Every random number is a pure function of ``(seed, event_id, draw)``, so any
event can be regenerated on its own and chunks can be produced in parallel.

With ``rotations="triple"`` event ``i`` is drawn from the source state after
the local rotation pair ``i % 3`` of :data:`witness.COMPTON_TRIPLE`: the
three mutually unbiased settings are realized by rotating the state, while
the Compton vertices always read out the H/V-type observable.
"""
import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtri

from . import channel, qcore
from .errors import BadConfig, InsufficientStatistics
from .states import parse_state
from .witness import COMPTON_TRIPLE, WitnessReport, mub_bounds

CSV_HEADER = ("event_id", "theta_a", "phi_a", "kout_a", "theta_b", "phi_b", "kout_b")
MIN_WINDOW_COUNT = 100
THETA_GRID = 2048
ENVELOPE_MARGIN = 1.01
THREADS_ENV = "COMPTON_WITNESS_THREADS"


# ------------------------------------------------------------------ configuration


@dataclass
class RunConfig:
    state: str = "bell:psi+:lin"
    n_events: int = 100_000
    seed: int = 0
    k_a: float = 1.0
    k_b: float = 1.0
    theta_window_a: tuple = None  # radians; None means optimal angle +- 2 deg
    theta_window_b: tuple = None
    n_bins: int = 36
    frame_phi: float = 0.0
    rotations: str = "triple"
    chunk_size: int = 200_000

    def __post_init__(self):
        if self.theta_window_a is None:
            self.theta_window_a = default_window(self.k_a)
        if self.theta_window_b is None:
            self.theta_window_b = default_window(self.k_b)
        self.theta_window_a = tuple(float(x) for x in self.theta_window_a)
        self.theta_window_b = tuple(float(x) for x in self.theta_window_b)
        self.validate()

    def validate(self):
        if int(self.n_events) != self.n_events or self.n_events < 1:
            raise BadConfig(f"n_events must be a positive integer, got {self.n_events}")
        if not (self.k_a > 0 and self.k_b > 0):
            raise BadConfig("photon energies must be positive")
        for name in ("theta_window_a", "theta_window_b"):
            lo, hi = getattr(self, name)
            if not 0.0 <= lo < hi <= np.pi:
                raise BadConfig(f"{name} must satisfy 0 <= lo < hi <= pi, got ({lo}, {hi})")
        if self.n_bins < 4 or self.n_bins % 4:
            raise BadConfig(f"n_bins must be a positive multiple of 4, got {self.n_bins}")
        if self.rotations not in ("triple", "none"):
            raise BadConfig(f"rotations must be 'triple' or 'none', got {self.rotations!r}")
        if self.chunk_size < 1:
            raise BadConfig("chunk_size must be positive")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise BadConfig(f"seed must be a non-negative integer, got {self.seed!r}")
        parse_state(self.state)

    @property
    def window_width(self):
        """Azimuth window width, one histogram bin of the full circle."""
        return 2 * np.pi / self.n_bins

    def to_dict(self):
        d = asdict(self)
        d["theta_window_a"] = list(self.theta_window_a)
        d["theta_window_b"] = list(self.theta_window_b)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


def default_window(k_in, half_width_deg=2.0):
    t = channel.optimal_angle(k_in)[0]
    h = np.radians(half_width_deg)
    return (max(0.0, t - h), min(np.pi, t + h))


# ------------------------------------------------------------------ counter-based RNG

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
SMEAR_SALT = 0x5EED5EED


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def counter_uniform(seed, event_ids, draw):
    """Uniform variates in (0, 1), one per event id, for draw index ``draw``."""
    with np.errstate(over="ignore"):
        key = _mix64(np.asarray([seed], dtype=np.uint64) + _GOLDEN)
        ids = np.asarray(event_ids, dtype=np.uint64)
        h = _mix64(ids * _GOLDEN + key)
        h = _mix64(h ^ (np.uint64(draw) * _M2 + _GOLDEN))
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


# ------------------------------------------------------------------ events


@dataclass(frozen=True)
class EventRecord:
    event_id: int
    theta_a: float
    phi_a: float
    k_in_a: float
    kout_a: float
    theta_b: float
    phi_b: float
    k_in_b: float
    kout_b: float
    seed_lineage: tuple


@dataclass
class EventBatch:
    """Column store of sampled events; iterating yields :class:`EventRecord`."""

    event_id: np.ndarray
    theta_a: np.ndarray
    phi_a: np.ndarray
    kout_a: np.ndarray
    theta_b: np.ndarray
    phi_b: np.ndarray
    kout_b: np.ndarray
    k_in_a: float
    k_in_b: float
    seed: int

    def __len__(self):
        return len(self.event_id)

    def __iter__(self):
        for i in range(len(self)):
            yield EventRecord(int(self.event_id[i]), float(self.theta_a[i]), float(self.phi_a[i]),
                              self.k_in_a, float(self.kout_a[i]), float(self.theta_b[i]),
                              float(self.phi_b[i]), self.k_in_b, float(self.kout_b[i]),
                              (self.seed, int(self.event_id[i])))

    def columns(self):
        return {name: getattr(self, name) for name in CSV_HEADER}

    @classmethod
    def concat(cls, parts):
        first = parts[0]
        cols = {name: np.concatenate([getattr(p, name) for p in parts]) for name in CSV_HEADER}
        return cls(**cols, k_in_a=first.k_in_a, k_in_b=first.k_in_b, seed=first.seed)


class _ThetaSampler:
    """Inverse-CDF sampler of ``F(theta) sin(theta)`` on a window, from a tabulated grid."""

    def __init__(self, k_in, window):
        self.grid = np.linspace(window[0], window[1], THETA_GRID)
        dens = channel.envelope(k_in, self.grid) * np.sin(self.grid)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(self.grid))])
        self.cdf = cdf / cdf[-1]

    def __call__(self, u):
        return np.interp(u, self.cdf, self.grid)


def _states_per_setting(rho, rotations):
    if rotations == "none":
        return [rho]
    out = []
    for ua, ub in COMPTON_TRIPLE:
        u = np.kron(ua, ub)
        out.append(u @ rho @ qcore.dagger(u))
    return out


def _bloch_per_setting(rho, rotations):
    return [qcore.bloch_data(r) for r in _states_per_setting(rho, rotations)]


def _measured_axes(phi_a, phi_b, frame_phi):
    """Bloch axes of the two vertex effects; see :func:`channel.normalized_effect`."""
    da = 2 * (phi_a - frame_phi)
    db = 2 * (phi_b - frame_phi)
    zero = np.zeros_like(da)
    m_a = np.stack([zero, -np.sin(da), np.cos(da)], axis=-1)
    m_b = np.stack([zero, np.sin(db), np.cos(db)], axis=-1)
    return m_a, m_b


def azimuth_density(phi_a, phi_b, va, vb, r_a, r_b, T, frame_phi=0.0):
    """Normalized azimuthal probability ``tr[(E_a x E_b) rho]`` in Bloch form."""
    m_a, m_b = _measured_axes(phi_a, phi_b, frame_phi)
    return 0.25 * (1.0 - va * (m_a @ r_a) - vb * (m_b @ r_b)
                   + va * vb * np.einsum("ni,ij,nj->n", m_a, T, m_b))


def _sample_chunk(cfg, bloch, samplers, start, stop):
    ids = np.arange(start, stop, dtype=np.uint64)
    seed = int(cfg.seed)
    th_a = samplers[0](counter_uniform(seed, ids, 0))
    th_b = samplers[1](counter_uniform(seed, ids, 1))
    va = channel.visibility(cfg.k_a, th_a)
    vb = channel.visibility(cfg.k_b, th_b)
    setting = (ids % np.uint64(len(bloch))).astype(int)
    ra = np.array([b[0] for b in bloch])[setting]
    rb = np.array([b[1] for b in bloch])[setting]
    T = np.array([b[2] for b in bloch])[setting]
    # tr[(E_a x E_b) rho] <= lambda_max(E_a) lambda_max(E_b)
    bound = 0.25 * (1 + va) * (1 + vb) * ENVELOPE_MARGIN
    phi_a = np.full(len(ids), np.nan)
    phi_b = np.full(len(ids), np.nan)
    todo = np.arange(len(ids))
    j = 0  # candidate index; candidate j of every event uses draws 2+3j, 3+3j, 4+3j
    while todo.size:
        sub = ids[todo]
        pa = 2 * np.pi * counter_uniform(seed, sub, 2 + 3 * j)
        pb = 2 * np.pi * counter_uniform(seed, sub, 3 + 3 * j)
        u = counter_uniform(seed, sub, 4 + 3 * j)
        m_a, m_b = _measured_axes(pa, pb, cfg.frame_phi)
        g = 0.25 * (1.0 - va[todo] * np.einsum("ni,ni->n", m_a, ra[todo])
                    - vb[todo] * np.einsum("ni,ni->n", m_b, rb[todo])
                    + va[todo] * vb[todo] * np.einsum("ni,nij,nj->n", m_a, T[todo], m_b))
        ok = u * bound[todo] < g
        phi_a[todo[ok]] = pa[ok]
        phi_b[todo[ok]] = pb[ok]
        todo = todo[~ok]
        j += 1
    return EventBatch(ids.astype(np.int64), th_a, phi_a, channel.k_out(cfg.k_a, th_a), th_b, phi_b,
                      channel.k_out(cfg.k_b, th_b), float(cfg.k_a), float(cfg.k_b), seed)


def _n_threads():
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError:
        raise BadConfig(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def sample_events(cfg):
    """Sample ``cfg.n_events`` events; identical output for identical ``cfg``."""
    cfg.validate()
    rho = qcore.check_density(parse_state(cfg.state))
    bloch = _bloch_per_setting(rho, cfg.rotations)
    samplers = (_ThetaSampler(cfg.k_a, cfg.theta_window_a), _ThetaSampler(cfg.k_b, cfg.theta_window_b))
    bounds = [(s, min(s + cfg.chunk_size, cfg.n_events)) for s in range(0, cfg.n_events, cfg.chunk_size)]
    with ThreadPoolExecutor(max_workers=_n_threads()) as pool:
        parts = list(pool.map(lambda b: _sample_chunk(cfg, bloch, samplers, *b), bounds))
    return EventBatch.concat(parts)


def smear(events, sigma_deg, seed=0):
    """Gaussian angular resolution: every angle gets independent noise of ``sigma_deg``.

    Polar angles are clipped to [0, pi], azimuths wrapped to [0, 2 pi), and
    the outgoing energies recomputed.
    """
    if sigma_deg < 0:
        raise ValueError(f"sigma_deg must be non-negative, got {sigma_deg}")
    if sigma_deg == 0:
        return EventBatch(**{n: np.array(getattr(events, n)) for n in CSV_HEADER},
                          k_in_a=events.k_in_a, k_in_b=events.k_in_b, seed=events.seed)
    sig = np.radians(sigma_deg)
    ids = np.asarray(events.event_id, dtype=np.uint64)
    key = int(seed) ^ SMEAR_SALT

    def noise(draw):
        return sig * ndtri(counter_uniform(key, ids, draw))

    th_a = np.clip(events.theta_a + noise(0), 0.0, np.pi)
    th_b = np.clip(events.theta_b + noise(2), 0.0, np.pi)
    return EventBatch(
        np.array(events.event_id), th_a, np.mod(events.phi_a + noise(1), 2 * np.pi),
        channel.k_out(events.k_in_a, th_a), th_b, np.mod(events.phi_b + noise(3), 2 * np.pi),
        channel.k_out(events.k_in_b, th_b), events.k_in_a, events.k_in_b, events.seed)


# ------------------------------------------------------------------ estimation

# window centres in degrees for the two pairs that add to the correlation and the two that do not
SAME = ((0, 0), (90, 90))
CROSS = ((0, 90), (90, 0))


def _in_window(phi, centre, width, frame_phi):
    # effects are pi-periodic in the azimuth, so fold before comparing
    d = np.mod(phi - frame_phi - centre + np.pi / 2, np.pi) - np.pi / 2
    return np.abs(d) < width / 2


def _in_theta(events, cfg):
    lo_a, hi_a = cfg.theta_window_a
    lo_b, hi_b = cfg.theta_window_b
    return ((events.theta_a >= lo_a) & (events.theta_a <= hi_a)
            & (events.theta_b >= lo_b) & (events.theta_b <= hi_b))


def window_counts(events, cfg, mask=None):
    """Counts ``{(ca, cb): n}`` for the four window pairs of one setting."""
    sel = _in_theta(events, cfg) if mask is None else mask & _in_theta(events, cfg)
    w = cfg.window_width
    out = {}
    for ca, cb in SAME + CROSS:
        m = (sel & _in_window(events.phi_a, np.radians(ca), w, cfg.frame_phi)
             & _in_window(events.phi_b, np.radians(cb), w, cfg.frame_phi))
        out[(ca, cb)] = int(np.count_nonzero(m))
    return out


def _correlation_from_counts(counts):
    low = [k for k, n in counts.items() if n < MIN_WINDOW_COUNT]
    if low:
        raise InsufficientStatistics(
            f"azimuth windows {low} hold fewer than {MIN_WINDOW_COUNT} events")
    same = sum(counts[k] for k in SAME)
    total = same + sum(counts[k] for k in CROSS)
    c = same / total
    # binomial error of the ratio, equal to propagated Poisson errors on the counts
    return max(c, 1.0 - c), float(np.sqrt(c * (1 - c) / total)), total


@dataclass
class WitnessEstimate:
    report: WitnessReport
    sigma: float
    correlations: tuple
    correlation_sigmas: tuple
    window_totals: tuple

    def to_dict(self):
        d = self.report.to_dict()
        d.update(sigma=self.sigma, correlations=list(self.correlations),
                 correlation_sigmas=list(self.correlation_sigmas),
                 window_totals=list(self.window_totals))
        return d


def estimate_witness(events, cfg):
    """Three-setting witness estimate with its 1 sigma statistical error.

    Window pairs are symmetric under exchanging the two arms, so the
    label-swapped configuration contributes to the same counts.
    """
    if cfg.rotations != "triple":
        raise BadConfig("estimating the witness needs rotations='triple'")
    setting = np.asarray(events.event_id) % 3
    cs, sig, tot = [], [], []
    for k in range(3):
        c, s, n = _correlation_from_counts(window_counts(events, cfg, setting == k))
        cs.append(c)
        sig.append(s)
        tot.append(n)
    va, vb = window_visibility(cfg.k_a, cfg.theta_window_a), window_visibility(cfg.k_b, cfg.theta_window_b)
    sep_lo, sep_hi, ent_lo, ent_hi = mub_bounds(va * vb, 3)
    report = WitnessReport(float(sum(cs)), 3, (), sep_lo, sep_hi, ent_lo, ent_hi,
                           mode="events", visibilities=(va, vb))
    return WitnessEstimate(report, float(np.sqrt(np.sum(np.square(sig)))), tuple(cs), tuple(sig), tuple(tot))


def window_visibility(k_in, window, n=64):
    """Visibility averaged over a polar window with weight ``F sin``."""
    x, w = leggauss(n)
    lo, hi = window
    t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    wt = w * channel.envelope(k_in, t) * np.sin(t)
    return float(np.sum(wt * channel.visibility(k_in, t)) / np.sum(wt))


# ------------------------------------------------------------------ quadrature oracles


def _gl(lo, hi, n):
    x, w = leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def _sigma_weighted(rho, cfg, ta, tb, pa, pb):
    geoms = channel.back_to_back(cfg.k_a, ta, pa, tb, pb, k_in_b=cfg.k_b)
    return channel.sigma_multi(rho, geoms, frame_phi=cfg.frame_phi).value * np.sin(ta) * np.sin(tb)


def expected_witness(cfg, n_theta=4, n_phi=4):
    """Window-averaged witness by Gauss-Legendre quadrature of :func:`channel.sigma_multi`."""
    rho = parse_state(cfg.state)
    ta, wa = _gl(*cfg.theta_window_a, n_theta)
    tb, wb = _gl(*cfg.theta_window_b, n_theta)
    half = cfg.window_width / 2
    total = 0.0
    for r in _states_per_setting(rho, "triple"):
        counts = {}
        for ca, cb in SAME + CROSS:
            pa, wpa = _gl(cfg.frame_phi + np.radians(ca) - half, cfg.frame_phi + np.radians(ca) + half, n_phi)
            pb, wpb = _gl(cfg.frame_phi + np.radians(cb) - half, cfg.frame_phi + np.radians(cb) + half, n_phi)
            acc = 0.0
            for i, j in np.ndindex(n_theta, n_theta):
                for m, n in np.ndindex(n_phi, n_phi):
                    acc += wa[i] * wb[j] * wpa[m] * wpb[n] * _sigma_weighted(r, cfg, ta[i], tb[j], pa[m], pb[n])
            counts[(ca, cb)] = acc
        same = sum(counts[k] for k in SAME)
        c = same / (same + sum(counts[k] for k in CROSS))
        total += max(c, 1 - c)
    return float(total)


def dphi_histogram(events, cfg, mask=None):
    """Histogram of ``(phi_a - phi_b) mod 2 pi`` in ``cfg.n_bins`` bins."""
    d = np.mod(events.phi_a - events.phi_b, 2 * np.pi)
    if mask is not None:
        d = d[mask]
    return np.histogram(d, bins=cfg.n_bins, range=(0.0, 2 * np.pi))[0]


def expected_dphi(cfg, rho=None, n_theta=4, n_phi=8, n_bin=3):
    """Bin probabilities of the Delta phi histogram, by quadrature of the Kraus route."""
    rho = parse_state(cfg.state) if rho is None else rho
    ta, wa = _gl(*cfg.theta_window_a, n_theta)
    tb, wb = _gl(*cfg.theta_window_b, n_theta)
    # integrands are trigonometric polynomials of degree 2 in phi_b: equispaced nodes are exact
    pb = np.arange(n_phi) * 2 * np.pi / n_phi
    edges = np.linspace(0, 2 * np.pi, cfg.n_bins + 1)
    out = np.zeros(cfg.n_bins)
    for b in range(cfg.n_bins):
        dd, wd = _gl(edges[b], edges[b + 1], n_bin)
        acc = 0.0
        for i, j in np.ndindex(n_theta, n_theta):
            for d, w in zip(dd, wd):
                for p in pb:
                    acc += wa[i] * wb[j] * w * _sigma_weighted(rho, cfg, ta[i], tb[j], p + d, p)
        out[b] = acc
    return out / out.sum()


# ------------------------------------------------------------------ files


def sidecar_path(path):
    return Path(path).with_suffix(".json")


def write_events(path, events, cfg):
    path = Path(path)
    cols = events.columns()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i in range(len(events)):
            w.writerow([str(int(cols["event_id"][i]))] + [f"{cols[n][i]:.17g}" for n in CSV_HEADER[1:]])
    meta = {"format": "compton-witness-events/1", "config": cfg.to_dict()}
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_events(path, cfg=None):
    """Read an event CSV; the run configuration comes from the sidecar unless given."""
    path = Path(path)
    if cfg is None:
        side = sidecar_path(path)
        if not side.exists():
            raise BadConfig(f"no run metadata next to {path} (expected {side})")
        cfg = RunConfig.from_dict(json.loads(side.read_text())["config"])
    with path.open(newline="") as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        if header != CSV_HEADER:
            raise BadConfig(f"unexpected CSV header {header}")
        rows = np.array([[float(x) for x in row] for row in r], dtype=float).reshape(-1, len(CSV_HEADER))
    cols = {n: rows[:, i] for i, n in enumerate(CSV_HEADER)}
    cols["event_id"] = cols["event_id"].astype(np.int64)
    return EventBatch(**cols, k_in_a=float(cfg.k_a), k_in_b=float(cfg.k_b), seed=int(cfg.seed)), cfg
