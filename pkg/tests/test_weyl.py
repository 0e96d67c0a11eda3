import math

import numpy as np
import pytest

from jumpsl import (
    DomainError,
    InterlacingError,
    PoleError,
    SpectralData,
    TwoSpectra,
    eigenvalues,
    m_from_two_spectra,
    numerical_residue,
    partial_fraction_m,
    secondary_spectrum,
    spectral_data,
    weyl_m,
    weyl_theta,
)
from jumpsl.quadrature import weighted_abs_norm_sq
from jumpsl.spectrum import EigenRecord
from jumpsl.weyl import export_m_samples

PI = math.pi
COTH_PI = 1.0037418731973213


def test_free_m_closed_form(free):
    assert weyl_m(free, -1.0).m == pytest.approx(COTH_PI, rel=1e-12)
    # m(lambda) = -cos(rho pi)/(rho sin(rho pi))
    lam = 2.3 + 0.7j
    rho = np.sqrt(complex(lam))
    expect = -np.cos(rho * PI) / (rho * np.sin(rho * PI))
    assert weyl_m(free, lam).m == pytest.approx(complex(expect), rel=1e-12)


def test_m_large_negative_asymptote(free):
    # |m - 1/sqrt(-lambda)| * |lambda| stays bounded along lambda = -t^2
    for t in (5.0, 10.0, 20.0):
        lam = -t * t
        err = abs(weyl_m(free, lam).m - 1.0 / math.sqrt(-lam)) * abs(lam)
        assert err < 1.0


def test_herglotz_positivity_grid(generic):
    res = [r for r in np.linspace(-20, 20, 7)]
    ims = [-8.0, -4.0, -1.0, -0.5, 0.5, 4.0, 8.0]
    for re in res:
        for im in ims:
            m = weyl_m(generic, complex(re, im)).m
            assert m.imag * im > 0


def test_pole_error(free):
    sd = eigenvalues(free, 5)
    with pytest.raises(PoleError):
        weyl_m(free, 4.0 + 1e-13, sd)
    with pytest.raises(PoleError):
        weyl_m(free, 1.0, sd)  # lambda_1 itself


def test_theta_consistency_and_theta0(free, generic):
    for p in (free, generic):
        xs = np.linspace(0.2, 3.0, 9)
        theta, theta_p, disc = weyl_theta(p, xs, -2.0 + 1.0j)
        assert disc < 1e-8
    ws = weyl_m(free, -3.0)
    assert ws.theta0 == pytest.approx(-ws.m, rel=1e-12)


def test_weyl_solution_wronskian(free):
    # W(phi, theta) = w(x)(phi theta' - phi' theta) = 1
    from jumpsl.propagation import SpectralPoint, fundamental_solution
    lam = -2.0 + 1.0j
    sp = SpectralPoint.from_lambda(lam)
    phi = fundamental_solution(free, "phi", sp)
    xs = np.array([0.4, 1.3, 2.8])
    theta, theta_p, _ = weyl_theta(free, xs, lam)
    y, yp = phi.eval(xs)
    w = np.array([free.weight_at(float(x)) for x in xs])
    assert np.allclose(w * (y * theta_p - yp * theta), 1.0, atol=1e-10)


def test_energy_identity_robin(generic):
    # Im m = Im lambda * ||theta||^2 with the weighted L2 norm
    from jumpsl.propagation import SpectralPoint, fundamental_solution
    for lam in (1.0 + 1.0j, -3.0 + 0.5j, 5.0 - 2.0j, 0.3 + 4.0j, -1.0 - 1.0j):
        ws = weyl_m(generic, lam)
        sp = SpectralPoint.from_lambda(lam)
        psi = fundamental_solution(generic, "psi", sp)
        norm2 = weighted_abs_norm_sq(generic, psi) / abs(ws.delta) ** 2
        assert ws.m.imag == pytest.approx(lam.imag * norm2, rel=1e-6)


def test_residues_equal_minus_gamma(free, one_jump):
    for p in (free, one_jump):
        sd = spectral_data(p, eigenvalues(p, 10, verify=False))
        for r in sd.records[:10]:
            res = numerical_residue(lambda z: weyl_m(p, z).m, r.lam,
                                    radius=1e-3 * max(1.0, abs(r.lam)))
            assert res.real == pytest.approx(-r.gamma, rel=1e-6)
            assert abs(res.imag) < 1e-9 * max(1.0, r.gamma)


def test_partial_fraction_free(free):
    # closed-form records: lambda_n = n^2, gamma_0 = 1/pi, gamma_n = 2/pi
    n = np.arange(200)
    records = tuple(
        EigenRecord(int(i), float(i * i), complex(float(i)),
                    (1.0 if i else 0.5) * 2.0 / PI, float((-1.0) ** i),
                    "bracketed")
        for i in n)
    sd = SpectralData(records=records, fingerprint="", variant="robin")
    approx = partial_fraction_m(sd, -1.0)
    assert abs(approx - COTH_PI) < 1e-2
    e100 = abs(partial_fraction_m(sd, -1.0, 100) - COTH_PI)
    e200 = abs(partial_fraction_m(sd, -1.0, 200) - COTH_PI)
    assert 1.5 <= e100 / e200 <= 2.5


def test_gamma_summability_tail(free):
    # sum gamma_n/(1 + lambda_n^0.6): solver gammas match the closed form,
    # and the closed-form tail increments shrink as N doubles
    sd = spectral_data(free, eigenvalues(free, 30, verify=False))
    n = np.arange(1, 2000)
    closed = 2.0 / PI / (1.0 + n ** 1.2)
    assert np.allclose(sd.gammas[1:], 2.0 / PI, atol=1e-10)
    inc1 = np.sum(closed[100:200])
    inc2 = np.sum(closed[200:400])
    inc3 = np.sum(closed[400:800])
    assert inc2 < inc1 and inc3 < inc2


def test_secondary_spectrum_free(free):
    sec = secondary_spectrum(free, 8)
    assert np.allclose(sec.lambdas, (np.arange(8) + 0.5) ** 2, atol=1e-8)


def test_two_spectra_free(free):
    prim = eigenvalues(free, 100, verify=False)
    sec = secondary_spectrum(free, 100, verify=False)
    ts = TwoSpectra(prim, sec)
    approx = m_from_two_spectra(ts, -1.0)
    assert abs(approx - COTH_PI) < 1e-2
    # calibration-depth stability
    a1 = m_from_two_spectra(ts, -1.0, lam_cal=-100.0)
    a2 = m_from_two_spectra(ts, -1.0, lam_cal=-200.0)
    assert abs(a1 - a2) < 1e-3


def test_two_spectra_domain_and_interlacing(free):
    prim = eigenvalues(free, 10, verify=False)
    sec = secondary_spectrum(free, 10, verify=False)
    ts = TwoSpectra(prim, sec)
    with pytest.raises(DomainError):
        m_from_two_spectra(ts, 1.0)
    with pytest.raises(DomainError):
        TwoSpectra(prim, sec, k=2.0)
    with pytest.raises(InterlacingError):
        TwoSpectra(sec, prim)   # swapped lists cannot interlace


def test_export_m_samples(tmp_path, free):
    samples = [weyl_m(free, complex(-2.0, t)) for t in (0.0, 1.0)]
    path = tmp_path / "m.csv"
    export_m_samples(samples, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "re_lambda,im_lambda,re_m,im_m"
    assert len(lines) == 3
    assert float(lines[1].split(",")[2]) == pytest.approx(samples[0].m.real)
