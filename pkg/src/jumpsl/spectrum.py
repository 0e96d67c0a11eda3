"""Characteristic function Delta, eigenvalues, and spectral data.

Delta(lambda) = -w(pi) L2(phi(lambda)) is evaluated from the forward
solution through the batch transfer kernels, so scans over many lambda are
vectorized and, for piecewise-constant potentials, exact.  Its
lambda-derivative comes from the variational system, never from finite
differences.

Eigenvalues are located by a sign-change scan on the real axis (the scan
floor extends below zero), refined by bisection in the scan parameter, and
optionally certified by an argument-principle contour count.

Sign convention: the derivative identity at an eigenvalue reads

    dDelta/dlambda(lambda_n) = + beta_n / gamma_n

with gamma_n the reciprocal squared norm of phi(., lambda_n) and beta_n
the coupling coefficient psi = beta_n phi.  The plus sign is forced by the
residue structure of the Weyl function (its residue at lambda_n is
-gamma_n) and is adjudicated numerically on the free problem in the test
suite; see README for the discussion.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from .asymptotics import eigenvalue_guesses
from .errors import (
    ContourTooCloseError,
    DomainError,
    MissedEigenvalueError,
    ToleranceError,
)
from .problem import PI, ValidatedProblem
from .propagation import (
    CPM_DENSITY,
    SpectralPoint,
    fundamental_solution,
    modified_wronskian,
    propagate_endpoints_batch,
)
from .quadrature import weighted_norm_sq

__all__ = [
    "EigenRecord",
    "SpectralData",
    "char_delta",
    "char_delta_derivative",
    "char_delta_forms",
    "delta_batch",
    "lambda_floor",
    "eigenvalues",
    "count_zeros_contour",
    "spectral_data",
    "export_csv",
    "export_json",
    "load_csv",
]


@dataclass(frozen=True)
class EigenRecord:
    """One indexed eigenvalue with its spectral coefficients."""

    n: int
    lam: float
    rho: complex            # real >= 0, or positive-imaginary for lam < 0
    gamma: float | None
    beta: float | None
    certification: str      # "bracketed" | "contour-verified"


@dataclass(frozen=True)
class SpectralData:
    """Ordered eigenvalue records plus a problem fingerprint."""

    records: tuple
    fingerprint: str
    variant: str

    def __post_init__(self):
        for i, rec in enumerate(self.records):
            if rec.n != i:
                raise ValueError("record indices must be contiguous from 0")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def lambdas(self):
        return np.array([r.lam for r in self.records])

    @property
    def gammas(self):
        return np.array([r.gamma if r.gamma is not None else np.nan
                         for r in self.records])

    @property
    def betas(self):
        return np.array([r.beta if r.beta is not None else np.nan
                         for r in self.records])


# ----------------------------------------------------------------------
# characteristic function
# ----------------------------------------------------------------------

def _left_init_batch(problem, lam, left):
    """Cauchy data at 0 (and its lambda-derivative) for the scanned family."""
    bc = problem.boundary
    if left == "spec":
        if problem.variant == "robin":
            return (1.0, -bc.h), (0.0, 0.0)
        return (lam - bc.h2, bc.h3 - lam * bc.h1), (1.0, -bc.h1)
    if left == "dirichlet":
        return (0.0, 1.0), (0.0, 0.0)
    if isinstance(left, tuple) and left[0] == "robin":
        return (1.0, -left[1]), (0.0, 0.0)
    raise ValueError(f"unknown left boundary override {left!r}")


def _l2_of(problem, lam, y, yp, u=None, up=None):
    """Signed L2 functional at pi such that Delta = sign * w(pi) * L2(phi).

    The sign is chosen so that Delta equals the modified Wronskian
    W(phi, psi) = L1(psi) in both variants: -1 for Robin, +1 for the
    eigenparameter variant (whose lambda-affine initial data flip the
    Wronskian's relation to L2).  This keeps the derivative identity
    dDelta/dlambda(lambda_n) = +beta_n/gamma_n and the residue structure
    of the Weyl function uniform across variants.
    """
    bc = problem.boundary
    if problem.variant == "robin":
        val = -(yp + bc.H * y)
        dval = None if u is None else -(up + bc.H * u)
    else:
        r2fun = yp + bc.H1 * y
        val = lam * r2fun - bc.H2 * yp - bc.H3 * y
        dval = None if u is None else (
            r2fun + lam * (up + bc.H1 * u) - bc.H2 * up - bc.H3 * u
        )
    return val, dval


def delta_batch(problem, lam, derivative=False, left="spec",
                cpm_density=CPM_DENSITY):
    """Delta (and optionally dDelta/dlambda) over an array of lambda."""
    lam = np.asarray(lam, dtype=complex)
    (y0, yp0), (du0, dup0) = _left_init_batch(problem, lam, left)
    if derivative:
        y, yp, u, up = propagate_endpoints_batch(
            problem, lam, y0, yp0, derivative=True, du0=du0, dup0=dup0,
            cpm_density=cpm_density)
        l2, dl2 = _l2_of(problem, lam, y, yp, u, up)
        return problem.w_end * l2, problem.w_end * dl2
    y, yp = propagate_endpoints_batch(problem, lam, y0, yp0,
                                      cpm_density=cpm_density)
    l2, _ = _l2_of(problem, lam, y, yp)
    return problem.w_end * l2


def char_delta(problem, lam, left="spec"):
    """Delta(lambda) = W(phi, psi), evaluated from the forward solution."""
    return complex(delta_batch(problem, np.array([lam]), left=left)[0])


def char_delta_derivative(problem, lam):
    """dDelta/dlambda via the variational system."""
    _, dd = delta_batch(problem, np.array([lam]), derivative=True)
    return complex(dd[0])


def char_delta_forms(problem, lam):
    """The three Delta formulas: -w(pi) L2(phi), L1(psi), W(phi, psi).

    Their pairwise agreement is the cross-check mode of the Delta
    evaluation; W is sampled at an interior cell midpoint.
    """
    d1 = char_delta(problem, lam)
    lam_arr = np.array([complex(lam)])
    bc = problem.boundary
    if problem.variant == "robin":
        y0, yp0 = 1.0, -bc.H
    else:
        y0, yp0 = bc.H2 - lam, lam * bc.H1 - bc.H3
    y, yp = propagate_endpoints_batch(problem, lam_arr, y0, yp0, backward=True)
    y, yp = complex(y[0]), complex(yp[0])
    if problem.variant == "robin":
        d2 = yp + bc.h * y
    else:
        d2 = lam * (yp + bc.h1 * y) - bc.h2 * yp - bc.h3 * y
    sp = SpectralPoint.from_lambda(lam)
    phi = fundamental_solution(problem, "phi", sp)
    psi = fundamental_solution(problem, "psi", sp)
    piece = problem.pieces[len(problem.pieces) // 2]
    xmid = 0.5 * (piece.xl + piece.xr)
    d3 = complex(modified_wronskian(problem, phi, psi, xmid))
    return d1, complex(d2), d3


# ----------------------------------------------------------------------
# eigenvalue location
# ----------------------------------------------------------------------

def lambda_floor(problem):
    """Scan floor for negative eigenvalues (completeness is contour-checked).

    Attractive boundary data produce bound states near -h^2, so the
    magnitudes of the boundary constants enter the bound alongside the
    potential and the jump c-terms.
    """
    s = 1.0 + problem.max_abs_q()
    bc = problem.boundary
    if problem.variant == "robin":
        s += max(abs(bc.h), abs(bc.H))
    else:
        s += max(abs(v) for v in (bc.h1, bc.h2, bc.h3, bc.H1, bc.H2, bc.H3))
    if problem.jumps:
        s += sum(abs(j.c) for j in problem.jumps) / min(1.0, problem.min_node_gap())
    return -(s * s)


def _scan_lambda(s):
    """Scan parameter to lambda: s < 0 maps to -s^2, s >= 0 to s^2."""
    return s * np.abs(s)


def _root_scan(problem, count, left, cpm_density, step_neg=0.05, step_pos=0.02):
    guesses = eigenvalue_guesses(
        problem, count + 2,
        trig="cos" if left == "dirichlet" else "sin")
    rho_max = guesses[-1] + 0.75
    floor = lambda_floor(problem)
    s_neg = np.arange(-math.sqrt(-floor) - step_neg, 0.0, step_neg)
    s_pos = np.arange(0.0, rho_max + step_pos, step_pos)
    s_grid = np.concatenate([s_neg, s_pos])
    vals = delta_batch(problem, _scan_lambda(s_grid), left=left,
                       cpm_density=cpm_density).real
    roots_s = _roots_from_grid(problem, s_grid, vals, left, cpm_density)
    return np.sort(_scan_lambda(np.asarray(roots_s))), floor


def _roots_from_grid(problem, s_grid, vals, left, cpm_density, refine_depth=1):
    roots = []
    brackets = []
    for i in range(len(s_grid) - 1):
        if vals[i] == 0.0:
            if not roots or abs(s_grid[i] - roots[-1]) > 1e-12:
                roots.append(float(s_grid[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            brackets.append((s_grid[i], s_grid[i + 1]))
    if vals[-1] == 0.0:
        roots.append(float(s_grid[-1]))
    # a local minimum of |Delta| without a sign change may hide a close pair
    if refine_depth > 0:
        av = np.abs(vals)
        for i in range(1, len(s_grid) - 1):
            if av[i] < av[i - 1] and av[i] < av[i + 1] \
                    and vals[i - 1] * vals[i] > 0.0 and vals[i] * vals[i + 1] > 0.0 \
                    and av[i] < 1e-3 * max(av[i - 1], av[i + 1]):
                fine = np.linspace(s_grid[i - 1], s_grid[i + 1], 65)
                fvals = delta_batch(problem, _scan_lambda(fine), left=left,
                                    cpm_density=cpm_density).real
                roots.extend(_roots_from_grid(problem, fine, fvals, left,
                                              cpm_density, refine_depth - 1))
    if brackets:
        lo = np.array([b[0] for b in brackets])
        hi = np.array([b[1] for b in brackets])
        flo = delta_batch(problem, _scan_lambda(lo), left=left,
                          cpm_density=cpm_density).real
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            fmid = delta_batch(problem, _scan_lambda(mid), left=left,
                               cpm_density=cpm_density).real
            go_right = np.sign(fmid) == np.sign(flo)
            exact = fmid == 0.0
            lo = np.where(go_right & ~exact, mid, lo)
            flo = np.where(go_right & ~exact, fmid, flo)
            hi = np.where(~go_right & ~exact, mid, hi)
            lo = np.where(exact, mid, lo)
            hi = np.where(exact, mid, hi)
            if np.all(hi - lo < 1e-14):
                break
        roots.extend((0.5 * (lo + hi)).tolist())
    return sorted(set(roots))


def eigenvalues(problem, count, verify=True, left="spec",
                cpm_density=CPM_DENSITY) -> SpectralData:
    """The lowest ``count`` eigenvalues, bracketed and bisection-refined.

    With ``verify`` the count is certified against an argument-principle
    contour; a mismatch triggers one refined re-scan before raising
    MissedEigenvalueError.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    roots, floor = _root_scan(problem, count, left, cpm_density)
    if len(roots) < count:
        roots, floor = _root_scan(problem, count, left, cpm_density,
                                  step_neg=0.0125, step_pos=0.005)
    if len(roots) < count:
        raise MissedEigenvalueError(
            f"found only {len(roots)} of {count} requested eigenvalues")
    lams = roots[:count]

    # simplicity check: nonzero derivative at every root
    _, dvals = delta_batch(problem, lams, derivative=True, left=left,
                           cpm_density=cpm_density)
    if np.any(dvals == 0.0):
        raise ToleranceError("vanishing Delta derivative at a located root")

    certification = "bracketed"
    if verify:
        if len(roots) > count:
            upper = 0.5 * (roots[count - 1] + roots[count])
        else:
            upper = lams[-1] + max(1.0, 2.0 * math.sqrt(abs(lams[-1])) + 1.0)
        n_inside = count_zeros_contour(
            problem, (floor - 0.5, upper, -1.0, 1.0), left=left,
            cpm_density=cpm_density)
        if n_inside != count:
            raise MissedEigenvalueError(
                f"contour count {n_inside} disagrees with {count} "
                f"bracketed eigenvalues")
        certification = "contour-verified"

    records = tuple(
        EigenRecord(n=i, lam=float(lam),
                    rho=complex(np.sqrt(complex(lam))),
                    gamma=None, beta=None, certification=certification)
        for i, lam in enumerate(lams)
    )
    return SpectralData(records=records, fingerprint=problem.fingerprint(),
                        variant=problem.variant)


def count_zeros_contour(problem, rectangle, left="spec",
                        cpm_density=CPM_DENSITY, max_points=40000):
    """Winding number of Delta around a rectangle in the lambda plane."""
    re_min, re_max, im_min, im_max = rectangle
    if re_min >= re_max or im_min >= im_max:
        raise DomainError("degenerate contour rectangle")
    corners = [complex(re_min, im_min), complex(re_max, im_min),
               complex(re_max, im_max), complex(re_min, im_max),
               complex(re_min, im_min)]

    def _u(x):
        # phase of Delta advances ~ pi * d(sqrt(lambda)) along the real
        # direction, so horizontal edges are sampled uniformly in
        # sign(x) sqrt(|x|) to keep phase steps bounded
        return math.copysign(math.sqrt(abs(x)), x)

    pts = []
    for c0, c1 in zip(corners, corners[1:]):
        if c0.imag == c1.imag:
            u0, u1 = _u(c0.real), _u(c1.real)
            n = max(48, int(math.ceil(8.0 * abs(u1 - u0))))
            us = np.linspace(u0, u1, n, endpoint=False)
            xs = np.sign(us) * us ** 2
            pts.extend(xs + 1j * c0.imag)
        else:
            n = max(48, int(math.ceil(8.0 * abs(c1.imag - c0.imag))))
            pts.extend(c0 + (c1 - c0) * np.linspace(0.0, 1.0, n,
                                                    endpoint=False))
    pts.append(corners[0])
    pts = np.array(pts)
    vals = delta_batch(problem, pts, left=left, cpm_density=cpm_density)
    scale = np.median(np.abs(vals))
    for _ in range(40):
        if np.any(np.abs(vals) < 1e-10 * max(scale, 1e-280)):
            raise ContourTooCloseError("Delta nearly vanishes on the contour")
        dphase = np.angle(vals[1:] / vals[:-1])
        bad = np.flatnonzero(np.abs(dphase) > 0.5 * math.pi)
        if len(bad) == 0:
            winding = float(np.sum(dphase)) / (2.0 * math.pi)
            return int(round(winding))
        if len(pts) + len(bad) > max_points:
            raise ContourTooCloseError("contour refinement exhausted")
        mids = 0.5 * (pts[bad] + pts[bad + 1])
        mvals = delta_batch(problem, mids, left=left, cpm_density=cpm_density)
        pts = np.insert(pts, bad + 1, mids)
        vals = np.insert(vals, bad + 1, mvals)
    raise ContourTooCloseError("contour refinement did not settle")


# ----------------------------------------------------------------------
# norming constants and coupling coefficients
# ----------------------------------------------------------------------

def spectral_data(problem, eigs, rtol=1e-9, engine="auto") -> SpectralData:
    """Fill gamma_n and beta_n for certified eigenvalues.

    gamma_n is the reciprocal squared weighted norm of phi(., lambda_n);
    in the eigenparameter variant the norm additionally carries the
    (w(0)/r1) R1(phi)^2 + (w(pi)/r2) R2(phi)^2 boundary terms.  beta_n is
    psi(0, lambda_n) (Robin) or (psi'(0) + h1 psi(0))/r1 (eigenparameter).
    """
    if isinstance(eigs, SpectralData):
        records = eigs.records
    else:
        records = tuple(
            EigenRecord(n=i, lam=float(l), rho=complex(np.sqrt(complex(l))),
                        gamma=None, beta=None, certification="bracketed")
            for i, l in enumerate(eigs))
    bc = problem.boundary
    out = []
    for rec in records:
        sp = SpectralPoint.from_lambda(rec.lam)
        phi = fundamental_solution(problem, "phi", sp, engine=engine)
        norm2 = weighted_norm_sq(problem, phi, rtol=rtol)
        psi = fundamental_solution(problem, "psi", sp, engine=engine)
        y0, yp0 = psi.state0
        if problem.variant == "robin":
            beta = float(np.real(y0))
        else:
            r1_phi = phi.state0[1] + bc.h1 * phi.state0[0]
            r2_phi = phi.state_pi[1] + bc.H1 * phi.state_pi[0]
            norm2 += (problem.weights[0] / bc.r1) * float(np.real(r1_phi)) ** 2
            norm2 += (problem.w_end / bc.r2) * float(np.real(r2_phi)) ** 2
            beta = float(np.real(yp0 + bc.h1 * y0)) / bc.r1
        if norm2 <= 0.0:
            raise ToleranceError(f"nonpositive squared norm at lambda={rec.lam}")
        out.append(replace(rec, gamma=1.0 / norm2, beta=beta))
    return SpectralData(records=tuple(out), fingerprint=problem.fingerprint(),
                        variant=problem.variant)


# ----------------------------------------------------------------------
# export / import
# ----------------------------------------------------------------------

def _fmt(v):
    return f"{v:.17g}"


def _fmt_rho(rho):
    rho = complex(rho)
    if rho.imag == 0.0:
        return _fmt(rho.real)
    return f"{rho.real:.17g}{rho.imag:+.17g}j"


def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".jumpsl-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def export_csv(sd: SpectralData, path):
    """CSV export: n,lambda,rho,gamma,beta,certification (+variant for
    eigenparameter problems)."""
    eig = sd.variant == "eigenparameter"
    header = "n,lambda,rho,gamma,beta,certification" + (",variant" if eig else "")
    lines = [header]
    for rec in sd.records:
        fields = [str(rec.n), _fmt(rec.lam), _fmt_rho(rec.rho),
                  "" if rec.gamma is None else _fmt(rec.gamma),
                  "" if rec.beta is None else _fmt(rec.beta),
                  rec.certification]
        if eig:
            fields.append(sd.variant)
        lines.append(",".join(fields))
    _atomic_write(path, "\n".join(lines) + "\n")


def export_json(sd: SpectralData, path):
    data = {
        "fingerprint": sd.fingerprint,
        "variant": sd.variant,
        "records": [
            {"n": r.n, "lambda": r.lam, "rho": _fmt_rho(r.rho),
             "gamma": r.gamma, "beta": r.beta,
             "certification": r.certification}
            for r in sd.records
        ],
    }
    _atomic_write(path, json.dumps(data, indent=2) + "\n")


def load_csv(path) -> SpectralData:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split(",")
    variant = "robin"
    records = []
    for ln in lines[1:]:
        fields = dict(zip(header, ln.split(",")))
        if "variant" in fields and fields["variant"]:
            variant = fields["variant"]
        records.append(EigenRecord(
            n=int(fields["n"]),
            lam=float(fields["lambda"]),
            rho=complex(fields["rho"]),
            gamma=float(fields["gamma"]) if fields.get("gamma") else None,
            beta=float(fields["beta"]) if fields.get("beta") else None,
            certification=fields.get("certification", "bracketed"),
        ))
    return SpectralData(records=tuple(records), fingerprint="", variant=variant)
