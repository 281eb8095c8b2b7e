"""Command-line front end: scans, witness reports, thresholds and Monte Carlo runs.

Exit codes: 0 success, 2 usage or configuration error, 3 too few events.
"""
import argparse
import csv
import json
import re
import sys

import numpy as np

from . import channel, montecarlo, qcore, states, witness
from .errors import ComptonWitnessError, InsufficientStatistics

KEV = witness.KEV_PER_UNIT
EXIT_USAGE = 2
EXIT_STATS = 3


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ value parsing


def parse_angle(text):
    """Degrees by default; ``deg`` or ``rad`` suffixes are accepted. Returns radians."""
    t = str(text).strip().lower()
    try:
        if t.endswith("rad"):
            return float(t[:-3])
        if t.endswith("deg"):
            t = t[:-3]
        return float(np.radians(float(t)))
    except ValueError:
        raise UsageError(f"bad angle {text!r}") from None


def parse_energy(text):
    """Units of 511 keV, or keV with a ``keV`` suffix."""
    t = str(text).strip()
    try:
        if t.lower().endswith("kev"):
            k = float(t[:-3]) / KEV
        else:
            k = float(t)
    except ValueError:
        raise UsageError(f"bad energy {text!r}") from None
    if not k > 0:
        raise UsageError(f"energy must be positive, got {text!r}")
    return k


def is_range(text):
    return text is not None and ":" in str(text)


def parse_range(text, scalar, default_step):
    """``start:stop[:step]``, stop inclusive.  A unit suffix at the end applies to all parts."""
    t = str(text).strip()
    m = re.match(r"^(.*?)([a-zA-Z]+)$", t)
    suffix = ""
    if m and ":" in m.group(1):
        t, suffix = m.group(1), m.group(2)
    parts = t.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"range must be start:stop[:step], got {text!r}")
    vals = [scalar(p if re.search(r"[a-zA-Z]$", p) else p + suffix) for p in parts]
    start, stop = vals[0], vals[1]
    step = vals[2] if len(vals) == 3 else default_step
    if not step > 0 or stop < start:
        raise UsageError(f"empty range {text!r}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


# ------------------------------------------------------------------ scan


SCAN_VARS = ("theta", "energy", "phi", "dphi")


def cmd_scan(args, out):
    ranged = [v for v in SCAN_VARS if is_range(getattr(args, v))]
    if len(ranged) != 1:
        raise UsageError("exactly one of --theta, --energy, --phi, --dphi must be a range")
    var = ranged[0]
    q = args.quantity
    allowed = {"visibility": {"theta", "energy"}, "envelope": {"theta", "energy"},
               "sigma-single": {"theta", "energy", "phi"}, "sigma-multi": {"theta", "energy", "dphi"}}
    if var not in allowed[q]:
        raise UsageError(f"{q} cannot be scanned over {var}")

    if var == "energy":
        grid = parse_range(args.energy, parse_energy, 0.01)
    else:
        grid = parse_range(getattr(args, var), parse_angle, np.radians(1.0))

    def fixed(name, parser, default):
        raw = getattr(args, name)
        return parser(raw) if raw is not None else default

    w = csv.writer(out, lineterminator="\n")
    label = "energy" if var == "energy" else f"{var}_deg"
    if q in ("visibility", "envelope"):
        w.writerow([label, q])
    else:
        w.writerow([label, "value", "envelope", "probability_part"])
    fn = {"visibility": channel.visibility, "envelope": channel.envelope}.get(q)
    rho = None
    if q == "sigma-single":
        rho = qcore.projector(states.SINGLE[_single_letter(args.state or "H")])
    elif q == "sigma-multi":
        rho = qcore.check_density(states.parse_state(args.state or "bell:psi+:lin"))
    frame = parse_angle(args.frame_phi) if args.frame_phi is not None else 0.0

    for x in grid:
        k = x if var == "energy" else fixed("energy", parse_energy, 1.0)
        theta = x if var == "theta" else fixed("theta", parse_angle, None)
        if theta is None:
            theta = channel.optimal_angle(k)[0]
        shown = f"{x:.10g}" if var == "energy" else f"{np.degrees(x):.10g}"
        if fn is not None:
            w.writerow([shown, f"{float(fn(k, theta)):.12g}"])
            continue
        if q == "sigma-single":
            phi = x if var == "phi" else fixed("phi", parse_angle, 0.0)
            pt = channel.sigma_single(rho, k, theta, phi)
        else:
            dphi = x if var == "dphi" else fixed("dphi", parse_angle, 0.0)
            geoms = channel.back_to_back(k, theta, frame + dphi, theta, frame)
            pt = channel.sigma_multi(rho, geoms, frame_phi=frame)
        w.writerow([shown, f"{pt.value:.12g}", f"{pt.envelope:.12g}", f"{pt.probability_part:.12g}"])
    return 0


def _single_letter(s):
    if s not in states.SINGLE:
        raise UsageError(f"sigma-single takes one of {sorted(states.SINGLE)}, got {s!r}")
    return s


# ------------------------------------------------------------------ witness


SIC_NOTE = ("m_tilde=2 separable upper bound: the smaller quoted value ((1+sqrt3)/3)^2 = {text:.4f} lies below "
            "the maximally entangled value 1.5; the larger value ((1+sqrt3)/2)^2 = {table:.4f} is what "
            "product-state brute force reaches, and is used here")


def cmd_witness(args, out):
    rho = qcore.check_density(states.parse_state(args.state))
    k_a = parse_energy(args.energy)
    k_b = parse_energy(args.energy_b) if args.energy_b is not None else k_a
    ta = parse_angle(args.theta_a) if args.theta_a is not None else channel.optimal_angle(k_a)[0]
    tb = parse_angle(args.theta_b) if args.theta_b is not None else channel.optimal_angle(k_b)[0]
    if args.sic is not None:
        report = _sic_report(rho, args, k_a, k_b, ta, tb)
    else:
        report = witness.mub_witness_compton(
            rho, k_a, k_b, ta, tb, enforce_bose=args.bose, settings=args.settings, ideal=args.ideal,
            optimize=args.optimize, n_restarts=args.restarts, seed=args.seed)
    d = report.to_dict()
    d.update(state=args.state, energy_a=k_a, energy_b=k_b,
             theta_a_deg=float(np.degrees(ta)), theta_b_deg=float(np.degrees(tb)))
    json.dump(d, out, indent=2, sort_keys=True)
    out.write("\n")
    return 0


def _sic_report(rho, args, k_a, k_b, ta, tb):
    m = args.sic
    if m not in (1, 2, 3, 4):
        raise UsageError(f"--sic takes 1..4, got {m}")
    va, vb = (1.0, 1.0) if args.ideal else (float(channel.visibility(k_a, ta)), float(channel.visibility(k_b, tb)))
    conj = args.sic_convention == "conjugate"
    op = witness.sic_operator(witness.sic_set(), m, va, vb, conj)
    if args.optimize:
        def obj(p):
            u = np.kron(qcore.su2(*p[:3]), qcore.su2(*p[3:]))
            return float(np.trace(op @ u @ rho @ qcore.dagger(u)).real)
        value, params = witness.optimize_local_unitaries(obj, n_restarts=args.restarts, seed=args.seed)
    else:
        value, params = witness.sic_witness(rho, None, m, va, vb, conj), ()
    sep_lo, sep_hi = witness.sic_separable_range(m, va, vb, conj, seed=args.seed)
    ent_lo, ent_hi = witness.sic_spectrum_range(m, va, vb, conj)
    notes = []
    if m == 2:
        notes.append(SIC_NOTE.format(text=witness.SIC_UPPER_M2_TEXT, table=witness.SIC_UPPER_M2_TABLE))
    return witness.WitnessReport(float(value), m, params, sep_lo, sep_hi, ent_lo, ent_hi,
                                 mode=f"sic-{args.sic_convention}", visibilities=(va, vb), notes=notes)


# ------------------------------------------------------------------ thresholds


def cmd_thresholds(args, out):
    k_ent, k_tel, k_chsh = witness.protocol_thresholds()
    d = {"k_ent": k_ent, "k_tel": k_tel, "k_chsh": k_chsh,
         "kev_ent": KEV * k_ent, "kev_tel": KEV * k_tel, "kev_chsh": KEV * k_chsh}
    json.dump(d, out, indent=2, sort_keys=True)
    out.write("\n")
    return 0


# ------------------------------------------------------------------ Monte Carlo


def _window(text):
    if text is None:
        return None
    g = str(text).strip()
    if ":" not in g:
        raise UsageError(f"window must be lo:hi, got {text!r}")
    lo, hi = g.split(":", 1)
    if re.search(r"[a-zA-Z]$", hi) and not re.search(r"[a-zA-Z]$", lo):
        lo += re.search(r"[a-zA-Z]+$", hi).group(0)
    return (parse_angle(lo), parse_angle(hi))


def cmd_mc_generate(args, out):
    k_a = parse_energy(args.energy)
    k_b = parse_energy(args.energy_b) if args.energy_b is not None else k_a
    cfg = montecarlo.RunConfig(
        state=args.state, n_events=args.n, seed=args.seed, k_a=k_a, k_b=k_b,
        theta_window_a=_window(args.theta_window_a), theta_window_b=_window(args.theta_window_b),
        n_bins=args.bins, frame_phi=parse_angle(args.frame_phi), rotations=args.rotations)
    events = montecarlo.sample_events(cfg)
    if args.smear:
        events = montecarlo.smear(events, args.smear, seed=args.seed)
    montecarlo.write_events(args.out, events, cfg)
    json.dump({"events": len(events), "out": str(args.out),
               "metadata": str(montecarlo.sidecar_path(args.out))}, out, sort_keys=True)
    out.write("\n")
    return 0


def cmd_mc_analyze(args, out):
    events, cfg = montecarlo.read_events(args.events)
    est = montecarlo.estimate_witness(events, cfg)
    d = est.to_dict()
    if args.expected:
        exp = montecarlo.expected_witness(cfg)
        d.update(expected=exp, pull=(est.report.value - exp) / est.sigma)
    json.dump(d, out, indent=2, sort_keys=True)
    out.write("\n")
    return 0


# ------------------------------------------------------------------ parser


def build_parser():
    p = argparse.ArgumentParser(prog="compton-witness", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file with option defaults; command-line flags win")
    sub = p.add_subparsers(dest="command", required=True)
    parsers = {}

    s = sub.add_parser("scan", help="tabulate a channel quantity as CSV")
    s.add_argument("quantity", choices=["visibility", "envelope", "sigma-single", "sigma-multi"])
    s.add_argument("--theta", help="scattering angle or range, degrees (e.g. 0:180:0.01deg)")
    s.add_argument("--energy", help="photon energy or range (1 or 511keV)")
    s.add_argument("--phi", help="single-photon azimuth or range, degrees")
    s.add_argument("--dphi", help="azimuth difference phi_a - phi_b or range, degrees")
    s.add_argument("--state", help="state spec (letter H/V/D/A/R/L for sigma-single)")
    s.add_argument("--frame-phi", help="reference azimuth of the H/V frame, degrees")
    s.set_defaults(func=cmd_scan)
    parsers["scan"] = s

    w = sub.add_parser("witness", help="evaluate the MUB or SIC witness, JSON report")
    w.add_argument("--state", required=True)
    w.add_argument("--energy", default="1")
    w.add_argument("--energy-b")
    w.add_argument("--theta-a", help="Compton angle of photon a, degrees (default: visibility optimum)")
    w.add_argument("--theta-b")
    w.add_argument("--optimize", action=argparse.BooleanOptionalAction, default=True)
    w.add_argument("--bose", action="store_true", help="symmetrize under photon exchange")
    w.add_argument("--settings", choices=["mub", "free"],
                   help="common or per-term local unitaries (default: mub with --bose, else free)")
    w.add_argument("--ideal", action="store_true", help="unit visibility on both arms")
    w.add_argument("--sic", type=int, metavar="M", help="use the SIC witness with M states")
    w.add_argument("--sic-convention", choices=["conjugate", "plain"], default="conjugate")
    w.add_argument("--restarts", type=int, default=64)
    w.add_argument("--seed", type=int, default=0)
    w.set_defaults(func=cmd_witness)
    parsers["witness"] = w

    t = sub.add_parser("thresholds", help="energies below which the protocols succeed")
    t.set_defaults(func=cmd_thresholds)
    parsers["thresholds"] = t

    mc = sub.add_parser("mc", help="Monte Carlo event generation and analysis")
    mcs = mc.add_subparsers(dest="mc_command", required=True)
    g = mcs.add_parser("generate", help="sample events to CSV plus a JSON sidecar")
    g.add_argument("--state", default="bell:psi+:lin")
    g.add_argument("--n", type=int, default=100_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--energy", default="1")
    g.add_argument("--energy-b")
    g.add_argument("--theta-window-a", help="lo:hi in degrees (default: optimum +- 2 deg)")
    g.add_argument("--theta-window-b")
    g.add_argument("--bins", type=int, default=36)
    g.add_argument("--frame-phi", default="0")
    g.add_argument("--rotations", choices=["triple", "none"], default="triple")
    g.add_argument("--smear", type=float, default=0.0, help="angular resolution, degrees")
    g.add_argument("--out", default="events.csv")
    g.set_defaults(func=cmd_mc_generate)
    parsers["mc generate"] = g
    a = mcs.add_parser("analyze", help="estimate the witness from an event file")
    a.add_argument("events")
    a.add_argument("--expected", action=argparse.BooleanOptionalAction, default=True,
                   help="also compute the window-averaged analytic value")
    a.set_defaults(func=cmd_mc_analyze)
    parsers["mc analyze"] = a
    return p, parsers


def _command_key(argv):
    words = [a for a in argv if not a.startswith("-")]
    for i, w in enumerate(words):
        if w in ("scan", "witness", "thresholds"):
            return w
        if w == "mc" and i + 1 < len(words):
            return f"mc {words[i + 1]}"
    return None


def _apply_config(parser, parsers, argv):
    # only --config is read here: required flags may come from the file itself
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    key = _command_key(argv)
    if not known.config or key not in parsers:
        return
    try:
        with open(known.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    if not isinstance(cfg, dict):
        parser.error("config must be a JSON object")
    target = parsers[key]
    dests = {a.dest for a in target._actions}
    unknown = set(cfg.keys()) - dests
    if unknown:
        parser.error(f"unknown config keys for {key}: {sorted(unknown)}")
    for action in target._actions:
        if action.dest in cfg and action.required:
            action.required = False
    target.set_defaults(**cfg)


def main(argv=None, out=None):
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, parsers = build_parser()
    _apply_config(parser, parsers, argv)
    args = parser.parse_args(argv)
    if getattr(args, "settings", "unset") is None:
        args.settings = witness.default_settings(args.bose)
    try:
        return args.func(args, out)
    except InsufficientStatistics as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATS
    except (UsageError, ComptonWitnessError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
