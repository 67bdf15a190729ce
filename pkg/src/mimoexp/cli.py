"""Command-line front end.

Exit status: 0 success, 1 bad input (arguments, matrix files, invalid
channel), 2 domain error (e.g. rate at or above capacity), 3 numerical
failure or a failed Monte Carlo validation.
"""

import argparse
import csv
import io
import itertools
import json
import math
import sys

import numpy as np

from .channel import ChannelSpec
from .errors import DomainError, NumericalError, ValidationError
from .exponent import cutoff_rate, ergodic_capacity, log_zeta
from .linalg import HermitianPD
from .montecarlo import McConfig, mc_capacity, mc_cutoff_rate, mc_zeta
from .optimizer import default_rho_grid, exponent_at_rate, tradeoff_curve
from .planner import exponential_zeta, length_table, table_to_records, CSV_COLUMNS
from .spectra import exponential_correlation

__all__ = ["main", "build_parser", "load_correlation_file"]

LN2 = math.log(2.0)
VALIDATE_RHOS = (0.25, 0.5, 0.75, 1.0)
VALIDATE_BETA_FRACTIONS = (0.5, 0.8, 1.0)
Z_LIMIT = 3.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def load_correlation_file(path):
    """Read a correlation matrix from JSON ``{"dim": d, "entries": [[re, im], ...]}``.

    Entries are row-major.  The result must be Hermitian positive definite
    with unit diagonal.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read file ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(doc, dict) or "dim" not in doc or "entries" not in doc:
        raise ValidationError(f'{path}: expected an object with "dim" and "entries"')
    d = doc["dim"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ValidationError(f"{path}: dim must be a positive integer")
    entries = doc["entries"]
    if not isinstance(entries, list) or len(entries) != d * d:
        raise ValidationError(f"{path}: expected {d * d} entries for dim {d}")
    a = np.empty((d, d), dtype=complex)
    for k, e in enumerate(entries):
        i, j = divmod(k, d)
        ok = (isinstance(e, list) and len(e) == 2
              and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in e))
        if not ok or not all(math.isfinite(x) for x in e):
            raise ValidationError(
                f"{path}: entry at row {i + 1}, column {j + 1} must be a finite [re, im] pair"
            )
        a[i, j] = complex(e[0], e[1])
    try:
        m = HermitianPD(a)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    bad = np.flatnonzero(np.abs(np.diag(m.matrix) - 1.0) > 1e-12)
    if bad.size:
        raise ValidationError(f"{path}: diagonal entry {bad[0] + 1} is not 1 (unit diagonal required)")
    return m


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _add_channel_args(p):
    g = p.add_argument_group("channel")
    g.add_argument("--nt", type=int, help="transmit antennas")
    g.add_argument("--nr", type=int, help="receive antennas")
    g.add_argument("--nc", type=_int_list, default=[1], help="coherence time(s), comma list")
    g.add_argument("--snr-db", type=_float_list, required=True, help="SNR(s) in dB, comma list")
    g.add_argument("--zt", type=_float_list, help="transmit exponential correlation(s)")
    g.add_argument("--zr", type=_float_list, help="receive exponential correlation(s)")
    g.add_argument("--zeta", type=_float_list, help="common correlation(s), sets both ends")
    g.add_argument("--phi-t", metavar="FILE", help="transmit correlation matrix file")
    g.add_argument("--phi-r", metavar="FILE", help="receive correlation matrix file")


def _add_output_args(p, bits=True):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", metavar="PATH", help="write here instead of stdout")
    if bits:
        p.add_argument("--bits", action="store_true", help="report rates in bits/symbol")


def _add_mc_args(p, default_samples):
    p.add_argument("--samples", type=int, default=default_samples)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--proposal-scale", type=float, default=None,
                   help="enable defensive importance sampling with this entry variance")


def build_parser():
    p = _Parser(prog="mimoexp", description=(
        "Error exponents, capacity, cutoff rate and codeword lengths for "
        "correlated block-fading MIMO channels."))
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("capacity", help="ergodic capacity")
    _add_channel_args(c)
    _add_output_args(c)

    c = sub.add_parser("cutoff", help="cutoff rate")
    _add_channel_args(c)
    _add_output_args(c)

    c = sub.add_parser("curve", help="reliability-rate curve")
    _add_channel_args(c)
    _add_output_args(c)
    c.add_argument("--grid-size", type=int, default=41, help="number of rho samples")
    c.add_argument("--rates", type=_float_list,
                   help="evaluate the exponent at these rates instead of the rho samples")

    c = sub.add_parser("length", help="required codeword length")
    _add_channel_args(c)
    _add_output_args(c, bits=False)
    r = c.add_mutually_exclusive_group()
    r.add_argument("--rate-bits", type=float, default=None, help="rate in bits/symbol (default 8)")
    r.add_argument("--rate", type=float, default=None, help="rate in nats/symbol")
    c.add_argument("--pe", type=float, default=1e-6, help="target error probability")

    c = sub.add_parser("validate", help="closed form against Monte Carlo")
    _add_channel_args(c)
    _add_output_args(c, bits=False)
    _add_mc_args(c, 10**5)
    return p


def _specs(args):
    files = args.phi_t is not None or args.phi_r is not None
    inline = any(x is not None for x in (args.zt, args.zr, args.zeta))
    if files and inline:
        raise ValidationError("give correlation either inline (--zt/--zr/--zeta) or as files, not both")
    if args.zeta is not None and (args.zt is not None or args.zr is not None):
        raise ValidationError("--zeta cannot be combined with --zt/--zr")
    for g in args.snr_db:
        if not math.isfinite(g):
            raise ValidationError("SNR must be finite")
    phi_t = load_correlation_file(args.phi_t) if args.phi_t else None
    phi_r = load_correlation_file(args.phi_r) if args.phi_r else None
    n_t = args.nt if args.nt is not None else (phi_t.dim if phi_t else None)
    n_r = args.nr if args.nr is not None else (phi_r.dim if phi_r else None)
    if n_t is None or n_r is None:
        raise ValidationError("antenna counts are required (--nt and --nr)")
    if phi_t is not None and phi_t.dim != n_t:
        raise ValidationError(f"--phi-t matrix is {phi_t.dim}x{phi_t.dim}, expected {n_t}x{n_t}")
    if phi_r is not None and phi_r.dim != n_r:
        raise ValidationError(f"--phi-r matrix is {phi_r.dim}x{phi_r.dim}, expected {n_r}x{n_r}")

    if files:
        pairs = [(phi_t, phi_r)]
    elif args.zeta is not None:
        pairs = [(exponential_correlation(n_t, z), exponential_correlation(n_r, z)) for z in args.zeta]
    else:
        zts = args.zt if args.zt is not None else [0.0]
        zrs = args.zr if args.zr is not None else [0.0]
        pairs = [(exponential_correlation(n_t, a), exponential_correlation(n_r, b))
                 for a, b in itertools.product(zts, zrs)]
    out = []
    for (pt, pr), nc, g in itertools.product(pairs, args.nc, args.snr_db):
        spec = ChannelSpec(n_t=n_t, n_r=n_r, n_c=nc, gamma=10.0 ** (g / 10.0),
                           phi_t=pt, phi_r=pr, label=f"spec{len(out) + 1}")
        out.append((spec, g))
    return out


def _num(x):
    return repr(float(x))


def _channel_fields(spec, snr_db):
    zt, zr = exponential_zeta(spec.phi_t.matrix), exponential_zeta(spec.phi_r.matrix)
    return {
        "spec-id": spec.label,
        "nT": spec.n_t,
        "nR": spec.n_r,
        "Nc": spec.n_c,
        "gamma_dB": _num(snr_db),
        "zetaT": "" if zt is None else _num(zt),
        "zetaR": "" if zr is None else _num(zr),
    }


def _unit(args):
    return "bits/symbol" if getattr(args, "bits", False) else "nats/symbol"


def _scale(args):
    return 1.0 / LN2 if getattr(args, "bits", False) else 1.0


def _cmd_capacity(args, specs):
    rows = []
    for s, snr in specs:
        rec = _channel_fields(s, snr)
        rec["capacity"] = _num(ergodic_capacity(s) * _scale(args))
        rec["unit"] = _unit(args)
        rows.append(rec)
    return rows, 0


def _cmd_cutoff(args, specs):
    rows = []
    for s, snr in specs:
        rec = _channel_fields(s, snr)
        rec["cutoff_rate"] = _num(cutoff_rate(s) * _scale(args))
        rec["unit"] = _unit(args)
        rows.append(rec)
    return rows, 0


def _cmd_curve(args, specs):
    if args.grid_size < 2:
        raise ValidationError("--grid-size must be at least 2")
    k = _scale(args)
    rows = []
    for s, snr in specs:
        base = _channel_fields(s, snr)
        curve = tradeoff_curve(s, default_rho_grid(args.grid_size))
        summary = {
            "capacity": _num(curve.capacity * k),
            "critical_rate": _num(curve.critical_rate * k),
            "cutoff_rate": _num(curve.cutoff_rate * k),
            "zero_rate_exponent": _num(curve.zero_rate_exponent * k),
        }
        if args.rates is None:
            for p in curve.points:
                rows.append({**base, "rho": _num(p.rho), "beta": _num(p.beta_star),
                             "e0": _num(p.e0 * k), "rate": _num(p.rate * k),
                             "exponent": _num(p.exponent * k), **summary, "unit": _unit(args)})
        else:
            for r in args.rates:
                nats = r / k
                e = exponent_at_rate(curve, nats) if 0.0 <= nats < curve.capacity else None
                rows.append({**base, "rho": "", "beta": "", "e0": "", "rate": _num(r),
                             "exponent": "-" if e is None else _num(e * k),
                             **summary, "unit": _unit(args)})
    return rows, 0


def _cmd_length(args, specs):
    if args.rate is not None:
        rate = args.rate
    else:
        rate = (8.0 if args.rate_bits is None else args.rate_bits) * LN2
    table = length_table([s for s, _ in specs], rate, args.pe)
    recs = table_to_records(table, rate, args.pe)
    for (_, snr), rec in zip(specs, recs):
        rec["gamma_dB"] = _num(snr)
    return recs, 0


def _cmd_validate(args, specs):
    cfg = McConfig(samples=args.samples, seed=args.seed, proposal_scale=args.proposal_scale)
    rows = []
    worst = 0.0
    for s, snr in specs:
        base = _channel_fields(s, snr)

        def add(quantity, rho, beta, closed, est):
            nonlocal worst
            z = est.z_score(closed)
            worst = max(worst, abs(z))
            rows.append({**base, "quantity": quantity, "rho": _num(rho), "beta": _num(beta),
                         "closed_form": _num(closed), "mc_mean": _num(est.mean),
                         "mc_std_err": _num(est.std_err), "z_score": _num(z),
                         "samples": est.samples, "seed": est.seed,
                         "pass": "yes" if abs(z) <= Z_LIMIT else "no"})

        for rho in VALIDATE_RHOS:
            for f in VALIDATE_BETA_FRACTIONS:
                beta = f * s.n_t
                add("zeta", rho, beta, math.exp(log_zeta(s, rho, beta)), mc_zeta(s, rho, beta, cfg))
        add("capacity", 0.0, s.n_t, ergodic_capacity(s), mc_capacity(s, cfg))
        add("cutoff_rate", 1.0, s.n_t, cutoff_rate(s), mc_cutoff_rate(s, cfg))
    return rows, (0 if worst <= Z_LIMIT else 3)


_COMMANDS = {
    "capacity": _cmd_capacity,
    "cutoff": _cmd_cutoff,
    "curve": _cmd_curve,
    "length": _cmd_length,
    "validate": _cmd_validate,
}


def _serialize(rows, fmt, columns=None):
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    fields = list(columns) if columns else (list(rows[0].keys()) if rows else [])
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def run(argv=None, stdout=None, stderr=None):
    """Parse ``argv``, run the command, write output; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        specs = _specs(args)
        rows, status = _COMMANDS[args.command](args, specs)
        cols = CSV_COLUMNS if args.command == "length" else None
        text = _serialize(rows, args.format, cols)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return status
    except ValidationError as exc:
        print(f"mimoexp: error: {exc}", file=stderr)
        return 1
    except DomainError as exc:
        print(f"mimoexp: domain error: {exc}", file=stderr)
        return 2
    except NumericalError as exc:
        print(f"mimoexp: numerical error: {exc}", file=stderr)
        return 3
    except OSError as exc:
        print(f"mimoexp: error: {exc}", file=stderr)
        return 1


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
