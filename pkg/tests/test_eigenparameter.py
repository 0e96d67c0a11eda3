import math

import numpy as np
import pytest

from jumpsl import (
    MismatchError,
    VariantError,
    VectorState,
    boundary_functionals,
    char_delta_derivative,
    eigenvalues,
    gamma_sum_partial,
    spectral_data,
    vector_norm_sq,
    weyl_m,
)
from jumpsl.propagation import SpectralPoint, fundamental_solution
from jumpsl.quadrature import weighted_abs_norm_sq

PI = math.pi


def test_boundary_functionals_values(eig_desk):
    # R1(y) = y'(0) + h1 y(0), R1'(y) = h2 y'(0) + h3 y(0), similarly at pi,
    # with h = (0, 0, 1) and H = (1, 2, 1)
    sp = SpectralPoint.from_lambda(2.7)
    sol = fundamental_solution(eig_desk, "phi", sp)
    bf = boundary_functionals(eig_desk, sol)
    y0, yp0 = sol.state0
    ypi, yppi = sol.state_pi
    assert bf.r1 == yp0
    assert bf.r1_prime == y0
    assert bf.r2 == yppi + ypi
    assert bf.r2_prime == 2.0 * yppi + ypi


def test_variant_gating(free, eig_desk):
    sp = SpectralPoint.from_lambda(1.0)
    sol = fundamental_solution(free, "phi", sp)
    with pytest.raises(VariantError):
        boundary_functionals(free, sol)
    with pytest.raises(VariantError):
        vector_norm_sq(free, sol)
    sd = spectral_data(free, eigenvalues(free, 3, verify=False))
    with pytest.raises(VariantError):
        gamma_sum_partial(sd)


def test_vector_state_consistency(eig_desk):
    sp = SpectralPoint.from_lambda(3.1)
    sol = fundamental_solution(eig_desk, "phi", sp)
    vs = VectorState.from_solution(eig_desk, sol)
    bf = boundary_functionals(eig_desk, sol)
    assert vs.f1 == bf.r1
    assert vs.f2 == bf.r2
    assert vs.sol is sol


def test_vector_norm_decomposition(eig_desk):
    sp = SpectralPoint.from_lambda(4.2)
    sol = fundamental_solution(eig_desk, "phi", sp)
    vs = VectorState.from_solution(eig_desk, sol)
    total = vector_norm_sq(eig_desk, vs)
    interior = weighted_abs_norm_sq(eig_desk, sol)
    bc = eig_desk.boundary
    expect = interior + eig_desk.weights[0] / bc.r1 * abs(vs.f1) ** 2 \
        + eig_desk.w_end / bc.r2 * abs(vs.f2) ** 2
    assert total == pytest.approx(expect, rel=1e-12)
    # independent Simpson quadrature of |phi|^2 w for the interior part
    xs = np.linspace(0.0, PI, 2001)
    y = np.array([sol.eval(float(x))[0] for x in xs])
    w = np.array([eig_desk.weight_at(float(x)) for x in xs])
    from scipy.integrate import simpson
    assert interior == pytest.approx(simpson(np.abs(y) ** 2 * w, x=xs),
                                     rel=1e-8)


def test_gamma_sum_converges_to_inverse_r1(eig_desk):
    sd = spectral_data(eig_desk, eigenvalues(eig_desk, 50, verify=False))
    partial = gamma_sum_partial(sd)
    assert np.all(np.diff(partial) > 0)       # gammas positive
    assert partial[-1] == pytest.approx(1.0 / eig_desk.boundary.r1, abs=2e-3)
    bad = spectral_data(eig_desk, eigenvalues(eig_desk, 3, verify=False))
    rec = bad.records[0]
    from jumpsl.spectrum import EigenRecord, SpectralData
    broken = SpectralData(
        records=(EigenRecord(rec.n, rec.lam, rec.rho, float("nan"),
                             rec.beta, rec.certification),)
        + bad.records[1:],
        fingerprint=bad.fingerprint, variant=bad.variant)
    with pytest.raises(MismatchError):
        gamma_sum_partial(broken)


def test_derivative_identity_vector_norm(eig_desk):
    # Delta'(lambda_n) = beta_n / gamma_n where 1/gamma_n is the full
    # vector norm of phi(., lambda_n), boundary terms included
    sd = spectral_data(eig_desk, eigenvalues(eig_desk, 8, verify=False))
    for r in sd.records:
        sp = SpectralPoint.from_lambda(r.lam)
        phi = fundamental_solution(eig_desk, "phi", sp)
        norm = vector_norm_sq(eig_desk, VectorState.from_solution(eig_desk, phi))
        dd = char_delta_derivative(eig_desk, r.lam)
        assert dd == pytest.approx(r.beta * norm, rel=1e-6)


def test_m_eigenparameter_asymptote(eig_desk):
    # m(lambda) ~ -1/(r1 lambda); error decays faster than 1/lambda
    r1 = eig_desk.boundary.r1
    for t in (10.0, 20.0, 40.0):
        lam = -t * t
        m = weyl_m(eig_desk, lam).m
        assert abs(m + 1.0 / (r1 * lam)) * abs(lam) ** 1.4 < 1.0


def test_herglotz_eigenparameter(eig_desk):
    for re in (-10.0, 0.5, 15.0):
        for im in (-2.0, 0.5, 6.0):
            m = weyl_m(eig_desk, complex(re, im)).m
            assert m.imag * im > 0
