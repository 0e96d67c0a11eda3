"""Propagation of -y'' + q y = lambda y across segments and jumps.

Three propagation kernels, chosen per integration cell:

* exact transfer matrices for cells where q is constant (entire in lambda,
  valid for any complex lambda, machine-precision accurate);
* an adaptive high-order one-step method (DOP853, rtol 1e-12) with dense
  output for non-constant q at moderate |rho|;
* a fixed-grid midpoint transfer ladder ("cpm") that freezes q at substep
  midpoints; its local error is uniform in |rho|, which is what the
  high-energy comparisons need, and its grid is parameter independent,
  which is what the inverse iteration needs.

All kernels broadcast over arrays of lambda; the batch entry point
:func:`propagate_endpoints_batch` is what the spectrum module builds its
characteristic-function scans on.

The lambda-derivative of a solution is propagated through the variational
system u'' = (q - lambda) u - y with the analytic derivative of the
constant-q transfer matrix (no finite differences).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, MismatchError, ToleranceError
from .problem import PI, Piece, ValidatedProblem

__all__ = [
    "SpectralPoint",
    "StateVector",
    "PiecewiseSolution",
    "apply_jump",
    "propagate_interval",
    "fundamental_solution",
    "initial_state",
    "modified_wronskian",
    "propagate_endpoints_batch",
]

#: above this |rho| the adaptive integrator is replaced by the midpoint ladder
RHO_SWITCH = 60.0
#: midpoint-ladder substeps per unit length
CPM_DENSITY = 160
#: tolerances for the adaptive integrator
IVP_RTOL = 1e-12
IVP_ATOL = 1e-12


@dataclass(frozen=True)
class SpectralPoint:
    """lambda together with its principal square root rho and tau = Im rho."""

    lam: complex
    rho: complex
    tau: float

    @classmethod
    def from_lambda(cls, lam):
        lam = complex(lam)
        rho = np.sqrt(complex(lam))  # principal branch: Re rho >= 0, cut on (-inf, 0)
        return cls(lam=lam, rho=complex(rho), tau=float(rho.imag))

    @classmethod
    def from_rho(cls, rho):
        rho = complex(rho)
        return cls(lam=rho * rho, rho=rho, tau=float(rho.imag))


class StateVector(NamedTuple):
    """Cauchy data (y, y') at position x."""

    y: complex
    yp: complex
    x: float


# ----------------------------------------------------------------------
# transfer-matrix kernels (entire functions of w = (lambda - q) h^2)
# ----------------------------------------------------------------------

def _cs(w):
    """C(w) = cos(sqrt w) and S(w) = sin(sqrt w)/sqrt w, entire in w."""
    w = np.asarray(w, dtype=complex)
    C = np.empty_like(w)
    S = np.empty_like(w)
    small = np.abs(w) < 1e-6
    ws = w[small]
    C[small] = 1.0 + ws * (-0.5 + ws * (1.0 / 24.0 - ws / 720.0))
    S[small] = 1.0 + ws * (-1.0 / 6.0 + ws * (1.0 / 120.0 - ws / 5040.0))
    z = np.sqrt(w[~small])
    C[~small] = np.cos(z)
    S[~small] = np.sin(z) / z
    return C, S


def _cs_d(w):
    """C, S and D = (C - S)/(2 w) = dS/dw, with a series near w = 0."""
    w = np.asarray(w, dtype=complex)
    C, S = _cs(w)
    D = np.empty_like(w)
    small = np.abs(w) < 1e-3
    ws = w[small]
    D[small] = -1.0 / 6.0 + ws * (1.0 / 60.0 + ws * (-1.0 / 1680.0 + ws / 90720.0))
    D[~small] = (C[~small] - S[~small]) / (2.0 * w[~small])
    return C, S, D


def _step(h, lam, q, y, yp):
    """Advance (y, y') by h through constant potential q (any sign of h)."""
    kq = lam - q
    w = kq * (h * h)
    C, S = _cs(w)
    return C * y + (h * S) * yp, -(kq * h * S) * y + C * yp


def _step_var(h, lam, q, y, yp, u, up):
    """Advance (y, y', u, u') with u the lambda-derivative of y."""
    kq = lam - q
    w = kq * (h * h)
    C, S, D = _cs_d(w)
    hS = h * S
    t21 = -kq * hS
    y2 = C * y + hS * yp
    yp2 = t21 * y + C * yp
    # dT/dlambda, computed analytically from dC/dw and dS/dw
    d11 = -0.5 * h * h * S
    d12 = h * h * h * D
    d21 = -0.5 * h * (C + S)
    u2 = C * u + hS * up + d11 * y + d12 * yp
    up2 = t21 * u + C * up + d21 * y + d11 * yp
    return y2, yp2, u2, up2


def _cpm_substeps(piece_or_len, density=CPM_DENSITY):
    length = piece_or_len.length if isinstance(piece_or_len, Piece) else piece_or_len
    return max(32, int(math.ceil(abs(length) * density)))


def _prop_cpm(qfun, lam, y, yp, x0, x1, n, u=None, up=None, collect=None):
    """Midpoint transfer ladder from x0 to x1 in n equal substeps."""
    h = (x1 - x0) / n
    xs = x0 + h * np.arange(n)
    qm = np.asarray(qfun(xs + 0.5 * h), dtype=float)
    for i in range(n):
        if collect is not None:
            collect(x0 + i * h, y, yp)
        if u is None:
            y, yp = _step(h, lam, float(qm[i]), y, yp)
        else:
            y, yp, u, up = _step_var(h, lam, float(qm[i]), y, yp, u, up)
    if collect is not None:
        collect(x1, y, yp)
    if u is None:
        return y, yp
    return y, yp, u, up


def _prop_ivp(qfun, lam, y, yp, x0, x1, with_der=False, dense=False):
    """Adaptive DOP853 propagation; optionally with the variational system."""
    from scipy.integrate import solve_ivp

    if with_der:
        def rhs(x, s):
            qv = qfun(x)
            return [s[1], (qv - lam) * s[0], s[3], (qv - lam) * s[2] - s[0]]
        s0 = np.array([y, yp, 0.0, 0.0], dtype=complex)
    else:
        def rhs(x, s):
            qv = qfun(x)
            return [s[1], (qv - lam) * s[0]]
        s0 = np.array([y, yp], dtype=complex)
    sol = solve_ivp(rhs, (x0, x1), s0, method="DOP853",
                    rtol=IVP_RTOL, atol=IVP_ATOL, dense_output=dense)
    if not sol.success:
        raise ToleranceError(f"DOP853 failed on [{x0}, {x1}]: {sol.message}")
    return sol


# ----------------------------------------------------------------------
# jumps
# ----------------------------------------------------------------------

def apply_jump(jump, state, inverse=False):
    """Map Cauchy data across a transmission condition.

    Forward: (y, y') at d- to (a y, b y' + c y) at d+.  Inverse mode solves
    the same two linear equations for the left data (a != 0 is guaranteed
    by validation).
    """
    if isinstance(state, StateVector):
        y, yp, x = state.y, state.yp, state.x
        yn, ypn = _jump_arrays(jump, y, yp, inverse)
        return StateVector(yn, ypn, x)
    y, yp = state
    return _jump_arrays(jump, y, yp, inverse)


def _jump_arrays(jump, y, yp, inverse=False):
    if not inverse:
        return jump.a * y, jump.b * yp + jump.c * y
    y_left = y / jump.a
    return y_left, (yp - jump.c * y_left) / jump.b


# ----------------------------------------------------------------------
# single-interval propagation (public contract)
# ----------------------------------------------------------------------

def propagate_interval(q, sp, state, x_from, x_to, engine="auto"):
    """Propagate Cauchy data across a jump-free interval.

    ``q`` may be a float (constant potential), a callable q(x), or a
    :class:`Piece`; with a Piece the interval is checked against the cell
    bounds and a DomainError is raised if it straddles an interior node.
    """
    if isinstance(q, Piece):
        if not (q.xl <= min(x_from, x_to) and max(x_from, x_to) <= q.xr):
            raise DomainError(
                f"[{x_from}, {x_to}] is not inside the cell [{q.xl}, {q.xr}]"
            )
        q_const, qfun = q.q_const, q.qfun
    elif callable(q):
        q_const, qfun = None, q
    else:
        q_const, qfun = float(q), None

    lam = sp.lam
    y, yp = complex(state.y), complex(state.yp)
    if x_to == x_from:
        return StateVector(y, yp, x_to)
    if q_const is not None:
        y2, yp2 = _step(x_to - x_from, lam, q_const, y, yp)
    elif engine == "cpm" or (engine == "auto" and abs(sp.rho) > RHO_SWITCH):
        n = _cpm_substeps(abs(x_to - x_from))
        y2, yp2 = _prop_cpm(qfun, lam, y, yp, x_from, x_to, n)
    else:
        sol = _prop_ivp(qfun, lam, y, yp, x_from, x_to)
        y2, yp2 = sol.y[0][-1], sol.y[1][-1]
    return StateVector(complex(y2), complex(yp2), x_to)


# ----------------------------------------------------------------------
# piecewise solutions with dense output
# ----------------------------------------------------------------------

class _PieceSol:
    """Dense-output record for one integration cell."""

    __slots__ = ("xl", "xr", "segment", "mode", "qc", "qfun", "y0", "yp0",
                 "xs", "ys", "yps", "interp")

    def __init__(self, piece, mode, y0, yp0, xs=None, ys=None, yps=None, interp=None):
        self.xl = piece.xl
        self.xr = piece.xr
        self.segment = piece.segment
        self.mode = mode            # "const" | "cpm" | "ivp"
        self.qc = piece.q_const
        self.qfun = piece.qfun
        self.y0 = y0                # state entering at xl (right limit)
        self.yp0 = yp0
        self.xs = xs
        self.ys = ys
        self.yps = yps
        self.interp = interp

    def eval(self, x, lam):
        x = np.asarray(x, dtype=float)
        if self.mode == "const":
            return _step(x - self.xl, lam, self.qc, self.y0, self.yp0)
        if self.mode == "ivp":
            vals = self.interp(x)
            return vals[0], vals[1]
        # cpm: one midpoint substep from the nearest stored node to the left
        idx = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, len(self.xs) - 1)
        xn = self.xs[idx]
        h = x - xn
        qm = np.asarray(self.qfun(xn + 0.5 * h), dtype=float)
        return _step(h, lam, qm, self.ys[idx], self.yps[idx])


class PiecewiseSolution:
    """A solution branch (phi, psi, chi, ...) evaluable anywhere on [0, pi].

    Satisfies its defining initial conditions exactly as stored and the
    transmission conditions at every jump point by construction; one-sided
    limits at interior nodes are selected with ``side``.
    """

    def __init__(self, problem, kind, sp, piece_sols, state0, state_pi,
                 dstate0=None, dstate_pi=None):
        self.problem = problem
        self.kind = kind
        self.sp = sp
        self._pieces = piece_sols
        self._edges = np.array([ps.xl for ps in piece_sols] + [piece_sols[-1].xr])
        self.state0 = state0          # (y, y') at 0
        self.state_pi = state_pi      # (y, y') at pi
        self.dstate0 = dstate0        # lambda-derivative states, when requested
        self.dstate_pi = dstate_pi

    @property
    def lam(self):
        return self.sp.lam

    def eval(self, x, side="+"):
        """Return (y, y') at x; vectorized, with one-sided limits at nodes."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(x < 0.0) or np.any(x > PI):
            raise DomainError("evaluation point outside [0, pi]")
        idx = np.searchsorted(self._edges, x, side="left" if side == "-" else "right") - 1
        idx = np.clip(idx, 0, len(self._pieces) - 1)
        y = np.empty(x.shape, dtype=complex)
        yp = np.empty(x.shape, dtype=complex)
        for i in np.unique(idx):
            sel = idx == i
            yi, ypi = self._pieces[i].eval(x[sel], self.sp.lam)
            y[sel] = yi
            yp[sel] = ypi
        if scalar:
            return complex(y[0]), complex(yp[0])
        return y, yp

    def value(self, x, side="+"):
        return self.eval(x, side)[0]

    def derivative(self, x, side="+"):
        return self.eval(x, side)[1]


def initial_state(problem, kind, lam):
    """Defining Cauchy data of phi, chi (at 0) or psi (at pi) per variant."""
    bc = problem.boundary
    if problem.variant == "robin":
        if kind == "phi":
            return (1.0, -bc.h), (0.0, 0.0)
        if kind == "chi":
            return (0.0, 1.0), (0.0, 0.0)
        if kind == "psi":
            return (1.0, -bc.H), (0.0, 0.0)
    else:
        if kind == "phi":
            return (lam - bc.h2, bc.h3 - lam * bc.h1), (1.0, -bc.h1)
        if kind == "chi":
            return (-1.0 / bc.r1, bc.h1 / bc.r1), (0.0, 0.0)
        if kind == "psi":
            return (bc.H2 - lam, lam * bc.H1 - bc.H3), (-1.0, bc.H1)
    raise ValueError(f"unknown solution kind {kind!r}")


def fundamental_solution(problem, kind, sp, engine="auto", left_init=None):
    """Build phi, psi or chi at the given spectral point with dense output.

    phi and chi propagate forward from 0 applying jumps left to right; psi
    propagates backward from pi solving the jump equations for the left
    data.  ``left_init`` overrides the Cauchy data at 0 (used for secondary
    spectra with a modified left boundary condition).
    """
    lam = sp.lam
    if left_init is not None and kind == "psi":
        raise ValueError("left_init only applies to forward solutions")
    init, _ = initial_state(problem, kind, lam)
    if left_init is not None:
        init = left_init
    if kind == "psi":
        return _build_backward(problem, kind, sp, init, engine)
    return _build_forward(problem, kind, sp, init, engine)


def _piece_mode(piece, sp, engine):
    if piece.q_const is not None:
        return "const"
    if engine == "cpm":
        return "cpm"
    if engine == "adaptive":
        return "ivp"
    return "ivp" if abs(sp.rho) <= RHO_SWITCH else "cpm"


def _build_forward(problem, kind, sp, init, engine):
    lam = sp.lam
    y, yp = complex(init[0]), complex(init[1])
    state0 = (y, yp)
    piece_sols = []
    for i, piece in enumerate(problem.pieces):
        mode = _piece_mode(piece, sp, engine)
        if mode == "const":
            ps = _PieceSol(piece, "const", y, yp)
            y, yp = _step(piece.length, lam, piece.q_const, y, yp)
        elif mode == "cpm":
            n = _cpm_substeps(piece)
            nodes_x, nodes_y, nodes_yp = [], [], []

            def collect(x, cy, cyp, _x=nodes_x, _y=nodes_y, _yp=nodes_yp):
                _x.append(x), _y.append(cy), _yp.append(cyp)

            y, yp = _prop_cpm(piece.qfun, lam, y, yp, piece.xl, piece.xr, n,
                              collect=collect)
            ps = _PieceSol(piece, "cpm", nodes_y[0], nodes_yp[0],
                           xs=np.array(nodes_x), ys=np.array(nodes_y, dtype=complex),
                           yps=np.array(nodes_yp, dtype=complex))
        else:
            sol = _prop_ivp(piece.qfun, lam, y, yp, piece.xl, piece.xr, dense=True)
            ps = _PieceSol(piece, "ivp", y, yp, interp=sol.sol)
            y, yp = complex(sol.y[0][-1]), complex(sol.y[1][-1])
        piece_sols.append(ps)
        jump = problem.jump_after_piece[i]
        if jump is not None:
            y, yp = _jump_arrays(jump, y, yp)
    return PiecewiseSolution(problem, kind, sp, piece_sols, state0, (y, yp))


def _build_backward(problem, kind, sp, init, engine):
    lam = sp.lam
    y, yp = complex(init[0]), complex(init[1])
    state_pi = (y, yp)
    piece_sols = [None] * len(problem.pieces)
    for i in range(len(problem.pieces) - 1, -1, -1):
        piece = problem.pieces[i]
        mode = _piece_mode(piece, sp, engine)
        if mode == "const":
            y, yp = _step(-piece.length, lam, piece.q_const, y, yp)
            piece_sols[i] = _PieceSol(piece, "const", y, yp)
        elif mode == "cpm":
            n = _cpm_substeps(piece)
            nodes_x, nodes_y, nodes_yp = [], [], []

            def collect(x, cy, cyp, _x=nodes_x, _y=nodes_y, _yp=nodes_yp):
                _x.append(x), _y.append(cy), _yp.append(cyp)

            y, yp = _prop_cpm(piece.qfun, lam, y, yp, piece.xr, piece.xl, n,
                              collect=collect)
            order = np.argsort(nodes_x)
            piece_sols[i] = _PieceSol(
                piece, "cpm", y, yp,
                xs=np.array(nodes_x)[order],
                ys=np.array(nodes_y, dtype=complex)[order],
                yps=np.array(nodes_yp, dtype=complex)[order])
        else:
            sol = _prop_ivp(piece.qfun, lam, y, yp, piece.xr, piece.xl, dense=True)
            y, yp = complex(sol.y[0][-1]), complex(sol.y[1][-1])
            piece_sols[i] = _PieceSol(piece, "ivp", y, yp, interp=sol.sol)
        if i > 0 and problem.jump_after_piece[i - 1] is not None:
            y, yp = _jump_arrays(problem.jump_after_piece[i - 1], y, yp, inverse=True)
    return PiecewiseSolution(problem, kind, sp, piece_sols, (y, yp), state_pi)


def modified_wronskian(problem, u, v, x, side="+"):
    """w(x) (u v' - u' v); constant in x for two solutions at the same lambda."""
    if abs(u.sp.lam - v.sp.lam) > 1e-14 * max(1.0, abs(u.sp.lam)):
        raise MismatchError(
            f"Wronskian of solutions at different lambda: {u.sp.lam} vs {v.sp.lam}"
        )
    uy, uyp = u.eval(x, side)
    vy, vyp = v.eval(x, side)
    w = problem.weight_at(float(np.atleast_1d(x)[0]), side) if np.ndim(x) == 0 \
        else np.array([problem.weight_at(t, side) for t in np.atleast_1d(x)])
    return w * (uy * vyp - uyp * vy)


# ----------------------------------------------------------------------
# batch propagation over lambda arrays (no dense output)
# ----------------------------------------------------------------------

def propagate_endpoints_batch(problem, lam, y0, yp0, derivative=False,
                              backward=False, du0=None, dup0=None,
                              cpm_density=CPM_DENSITY):
    """Propagate Cauchy data for a whole array of lambda at once.

    Non-constant cells use the midpoint ladder irrespective of |rho| so
    that the result is a smooth, grid-consistent function of lambda (this
    is what root bracketing and the inverse iteration require).  Constant
    cells are exact.  Returns the (y, y') arrays at the far endpoint, plus
    the variational (u, u') arrays when ``derivative`` is set.
    """
    lam = np.asarray(lam, dtype=complex)
    y = np.broadcast_to(np.asarray(y0, dtype=complex), lam.shape).copy()
    yp = np.broadcast_to(np.asarray(yp0, dtype=complex), lam.shape).copy()
    if derivative:
        u = np.zeros(lam.shape, dtype=complex) if du0 is None \
            else np.broadcast_to(np.asarray(du0, dtype=complex), lam.shape).copy()
        up = np.zeros(lam.shape, dtype=complex) if dup0 is None \
            else np.broadcast_to(np.asarray(dup0, dtype=complex), lam.shape).copy()

    pieces = problem.pieces
    order = range(len(pieces) - 1, -1, -1) if backward else range(len(pieces))
    for i in order:
        piece = pieces[i]
        if backward and problem.jump_after_piece[i] is not None:
            jump = problem.jump_after_piece[i]
            y, yp = _jump_arrays(jump, y, yp, inverse=True)
            if derivative:
                u, up = _jump_arrays(jump, u, up, inverse=True)
        h_total = -piece.length if backward else piece.length
        x_from, x_to = (piece.xr, piece.xl) if backward else (piece.xl, piece.xr)
        if piece.q_const is not None:
            steps = [(h_total, piece.q_const)]
        else:
            n = max(32, int(math.ceil(piece.length * cpm_density)))
            h = h_total / n
            xs = x_from + h * np.arange(n)
            qm = np.asarray(piece.qfun(xs + 0.5 * h), dtype=float)
            steps = [(h, float(qm[k])) for k in range(n)]
        for h, qc in steps:
            if derivative:
                y, yp, u, up = _step_var(h, lam, qc, y, yp, u, up)
            else:
                y, yp = _step(h, lam, qc, y, yp)
        if not backward and problem.jump_after_piece[i] is not None:
            jump = problem.jump_after_piece[i]
            y, yp = _jump_arrays(jump, y, yp)
            if derivative:
                u, up = _jump_arrays(jump, u, up)
    if derivative:
        return y, yp, u, up
    return y, yp
