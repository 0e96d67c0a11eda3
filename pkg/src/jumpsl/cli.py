"""Command-line front end.

Subcommands: eigs, spectral-data, weyl, asym-check, gauge, two-spectra,
fit, contour-count.  Configs use the JSON problem schema; outputs are
CSV/JSON tables written atomically.  Exit status: 0 success, 1 validation
or config error, 2 numerical failure.  JUMPSL_THREADS (positive integer)
caps internal parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import asymptotics, inverse, weyl
from .errors import ConfigParseError, JumpSLError, NumericalError, ValidationError
from .problem import gauge_transform, load_problem, problem_to_dict, save_problem
from .spectrum import (
    SpectralData,
    _atomic_write,
    _fmt,
    char_delta,
    count_zeros_contour,
    eigenvalues,
    export_csv,
    export_json,
    spectral_data,
)

__all__ = ["main"]

_HINTS = {
    "ConfigParseError": "check the JSON config against the documented schema",
    "JumpOrderError": "jump points must be strictly increasing inside (0, pi)",
    "JumpSignError": "each jump needs a*b > 0",
    "BoundaryConstraintError": "eigenparameter data must satisfy r1 > 0 and r2 > 0",
    "MissedEigenvalueError": "increase --count head-room or loosen the scan",
    "ContourTooCloseError": "shift the contour away from eigenvalues",
    "InterlacingError": "primary and secondary spectra must interlace",
    "NonconvergenceError": "try a closer initial guess or wider bounds",
    "PoleError": "evaluation point coincides with an eigenvalue",
}


def _apply_thread_cap():
    raw = os.environ.get("JUMPSL_THREADS")
    if raw is None:
        return
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ConfigParseError(
            f"JUMPSL_THREADS must be a positive integer, got {raw!r}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, str(n))


def _emit(text, out_path):
    if out_path:
        _atomic_write(out_path, text)
    else:
        sys.stdout.write(text)


def _parse_floats(csv_text):
    return [float(t) for t in csv_text.split(",") if t.strip()]


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="jumpsl",
        description="Forward and inverse spectral solver for Sturm-Liouville "
                    "problems with interior transmission conditions.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="problem config (JSON)")
        p.add_argument("-o", "--output", default=None,
                       help="output path (default: stdout)")
        return p

    p = add("eigs", "lowest eigenvalues as CSV")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--no-verify", action="store_true",
                   help="skip the contour certification")

    p = add("spectral-data", "eigenvalues with gamma_n and beta_n as CSV")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--no-verify", action="store_true")
    p.add_argument("--json", action="store_true", dest="as_json")

    p = add("weyl", "sample the Weyl m-function along a lambda line")
    p.add_argument("--grid", required=True,
                   help="START:STOP:NUM for the real part of lambda")
    p.add_argument("--imag", type=float, default=0.0,
                   help="imaginary part of lambda (default 0)")

    p = add("asym-check", "exact vs asymptotic Delta comparison table")
    p.add_argument("--rho", required=True,
                   help="comma-separated rho values, e.g. 40,80")

    p = add("gauge", "emit the gauge-normalized config (w preserved)")

    p = add("two-spectra", "recover m(lambda) from two truncated spectra")
    p.add_argument("--count", type=int, required=True,
                   help="eigenvalues per spectrum")
    p.add_argument("--lam", required=True,
                   help="comma-separated negative lambda evaluation points")
    p.add_argument("--truncation", type=int, default=None)

    p = add("fit", "inverse fit from a fit-spec JSON")
    p.add_argument("fitspec", help="fit definition (JSON)")

    p = add("contour-count", "argument-principle zero count in a rectangle")
    p.add_argument("--rect", required=True,
                   help="re_min,re_max,im_min,im_max")
    return ap


# ----------------------------------------------------------------------
# subcommand bodies
# ----------------------------------------------------------------------

def _cmd_eigs(args):
    p = load_problem(args.config)
    sd = eigenvalues(p, args.count, verify=not args.no_verify)
    _emit_spectral(sd, args, as_json=False)


def _cmd_spectral_data(args):
    p = load_problem(args.config)
    sd = eigenvalues(p, args.count, verify=not args.no_verify)
    sd = spectral_data(p, sd)
    _emit_spectral(sd, args, as_json=args.as_json)


def _emit_spectral(sd: SpectralData, args, as_json):
    if args.output:
        (export_json if as_json else export_csv)(sd, args.output)
        return
    import tempfile
    fd, tmp = tempfile.mkstemp()
    os.close(fd)
    try:
        (export_json if as_json else export_csv)(sd, tmp)
        with open(tmp) as fh:
            sys.stdout.write(fh.read())
    finally:
        os.unlink(tmp)


def _cmd_weyl(args):
    p = load_problem(args.config)
    try:
        start, stop, num = args.grid.split(":")
        grid = np.linspace(float(start), float(stop), int(num))
    except ValueError:
        raise ConfigParseError(f"--grid expects START:STOP:NUM, got {args.grid!r}")
    samples = [weyl.weyl_m(p, complex(re, args.imag)) for re in grid]
    lines = ["re_lambda,im_lambda,re_m,im_m"]
    for s in samples:
        lam, m = complex(s.lam), complex(s.m)
        lines.append(",".join([_fmt(lam.real), _fmt(lam.imag),
                               _fmt(m.real), _fmt(m.imag)]))
    _emit("\n".join(lines) + "\n", args.output)


def _cmd_asym_check(args):
    p = load_problem(args.config)
    rhos = _parse_floats(args.rho)
    power = 5 if p.variant == "eigenparameter" else 1
    lines = ["rho,exact_delta,asymptotic_delta,scaled_error"]
    scaled = []
    for r in rhos:
        exact = char_delta(p, r * r).real
        asym = complex(asymptotics.asymptotic_eval(p, "delta", None, r)).real
        err = abs(exact - asym) / abs(r) ** power
        scaled.append(err)
        lines.append(",".join([_fmt(r), _fmt(exact), _fmt(asym), _fmt(err)]))
    if len(rhos) == 2 and scaled[0] != 0.0:
        lines.append(f"# scaled_error_ratio,{_fmt(scaled[1] / scaled[0])}")
    _emit("\n".join(lines) + "\n", args.output)


def _cmd_gauge(args):
    p = load_problem(args.config)
    g = gauge_transform(p)
    data = problem_to_dict(g)
    data["note"] = ("gauge-normalized transmission coefficients: every "
                    "a_i b_i = 1, so w == 1 identically")
    _emit(json.dumps(data, indent=2) + "\n", args.output)


def _cmd_two_spectra(args):
    p = load_problem(args.config)
    prim = eigenvalues(p, args.count)
    sec = weyl.secondary_spectrum(p, args.count)
    ts = weyl.TwoSpectra(primary=prim, secondary=sec)
    lines = ["lambda,m_two_spectra,m_direct"]
    for lam in _parse_floats(args.lam):
        approx = weyl.m_from_two_spectra(ts, lam, n_terms=args.truncation)
        direct = weyl.weyl_m(p, lam, prim).m.real
        lines.append(",".join([_fmt(lam), _fmt(approx), _fmt(direct)]))
    _emit("\n".join(lines) + "\n", args.output)


def _cmd_fit(args):
    template = load_problem(args.config)
    fs = inverse.load_fitspec(args.fitspec, template)
    result = inverse.fit(fs)
    data = {
        "converged": result.converged,
        "residual_norm": result.norm,
        "nfev": result.nfev,
        "message": result.message,
        "parameters": {tok: val for tok, val in
                       zip([t for t, w in inverse._token_slots(fs)
                            for _ in range(w)], result.params.tolist())},
        "problem": problem_to_dict(result.problem),
    }
    _emit(json.dumps(data, indent=2) + "\n", args.output)
    if not result.converged:
        raise NumericalError(f"fit did not converge: {result.message}")


def _cmd_contour_count(args):
    p = load_problem(args.config)
    rect = _parse_floats(args.rect)
    if len(rect) != 4:
        raise ConfigParseError("--rect expects re_min,re_max,im_min,im_max")
    n = count_zeros_contour(p, tuple(rect))
    _emit(f"zeros_inside,{n}\n", args.output)


_DISPATCH = {
    "eigs": _cmd_eigs,
    "spectral-data": _cmd_spectral_data,
    "weyl": _cmd_weyl,
    "asym-check": _cmd_asym_check,
    "gauge": _cmd_gauge,
    "two-spectra": _cmd_two_spectra,
    "fit": _cmd_fit,
    "contour-count": _cmd_contour_count,
}


def main(argv=None) -> int:
    try:
        _apply_thread_cap()
        try:
            args = _build_parser().parse_args(argv)
        except SystemExit as exc:
            # argparse exits 2 on usage errors; remap to the validation code
            return 0 if exc.code in (0, None) else 1
        _DISPATCH[args.subcommand](args)
        return 0
    except NumericalError as exc:
        _report(exc)
        return 2
    except (ValidationError, OSError) as exc:
        _report(exc)
        return 1


def _report(exc):
    name = type(exc).__name__
    hint = _HINTS.get(name)
    line = f"jumpsl: {name}: {exc}"
    if hint:
        line += f" (hint: {hint})"
    print(line, file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
