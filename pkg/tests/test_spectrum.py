import json
import math

import numpy as np
import pytest

from jumpsl import (
    ContourTooCloseError,
    ProblemSpec,
    RobinBC,
    SpectralData,
    char_delta,
    char_delta_derivative,
    char_delta_forms,
    constant_potential,
    count_zeros_contour,
    delta_batch,
    eigenvalues,
    export_csv,
    export_json,
    load_csv,
    spectral_data,
    validate,
)
from jumpsl.spectrum import EigenRecord, lambda_floor

PI = math.pi
INV_PI = 0.3183098861837907       # 1/pi
TWO_OVER_PI = 0.6366197723675814  # 2/pi


def test_free_delta_closed_form(free):
    for lam in (2.5, -3.0, 0.3, 1.7 + 0.4j):
        rho = np.sqrt(complex(lam))
        assert char_delta(free, lam) == pytest.approx(
            complex(rho * np.sin(rho * PI)), rel=1e-12)


def test_one_jump_delta_closed_form(one_jump):
    rng = np.random.default_rng(11)
    lams = np.concatenate([rng.uniform(-20, 60, 10),
                           rng.uniform(-20, 60, 10) + 1j * rng.uniform(-5, 5, 10)])
    for lam in lams:
        rho = np.sqrt(complex(lam))
        expect = 1.25 * rho * np.sin(rho * PI)
        assert char_delta(one_jump, complex(lam)) == pytest.approx(
            complex(expect), rel=1e-8)


def test_free_spectrum_exact(free):
    sd = spectral_data(free, eigenvalues(free, 20))
    assert np.allclose(sd.lambdas, np.arange(20) ** 2, atol=1e-8)
    assert sd.records[0].gamma == pytest.approx(INV_PI, abs=1e-8)
    assert np.allclose(sd.gammas[1:], TWO_OVER_PI, atol=1e-8)
    signs = np.sign(sd.betas)
    assert np.array_equal(signs, (-1.0) ** np.arange(20))
    assert np.allclose(np.abs(sd.betas), 1.0, atol=1e-8)


def test_one_jump_spectrum(one_jump):
    sd = eigenvalues(one_jump, 10)
    assert np.allclose(sd.lambdas, np.arange(10) ** 2, atol=1e-8)
    assert all(r.certification == "contour-verified" for r in sd.records)


def test_delta_forms_agree(generic, eig_desk):
    for p in (generic, eig_desk):
        for lam in (3.7 + 0.5j, -2.0, 12.3):
            d1, d2, d3 = char_delta_forms(p, lam)
            scale = max(1.0, abs(d1))
            assert abs(d1 - d2) < 1e-9 * scale
            assert abs(d1 - d3) < 1e-9 * scale


def test_derivative_identity(free, one_jump, generic, eig_desk):
    # dDelta/dlambda(lambda_n) = +beta_n/gamma_n, one global sign
    for p in (free, one_jump, generic, eig_desk):
        sd = spectral_data(p, eigenvalues(p, 10, verify=False))
        for r in sd.records:
            dd = char_delta_derivative(p, r.lam).real
            assert dd == pytest.approx(r.beta / r.gamma, rel=1e-6)


def test_derivative_matches_finite_difference(generic):
    lam = 5.234
    dd = char_delta_derivative(generic, lam)
    eps = 1e-6
    fd = (char_delta(generic, lam + eps) - char_delta(generic, lam - eps)) / (2 * eps)
    assert dd == pytest.approx(fd, rel=1e-7)


def test_negative_eigenvalue_found():
    # h = H = -2 admits the exact bound state y = e^{2x}, lambda = -4
    p = validate(ProblemSpec(constant_potential(0.0), RobinBC(-2.0, -2.0)))
    sd = eigenvalues(p, 3)
    assert sd.lambdas[0] == pytest.approx(-4.0, abs=1e-9)
    assert lambda_floor(p) < sd.lambdas[0]
    assert char_delta(p, sd.lambdas[0]).real == pytest.approx(0.0, abs=1e-7)


def test_scan_floor_respects_jumps(two_jump):
    floor = lambda_floor(two_jump)
    total_c = sum(abs(j.c) for j in two_jump.jumps)
    assert floor <= -(1.0 + 0.5 + total_c) ** 2 * 0.99


def test_contour_count_free(free):
    assert count_zeros_contour(free, (-0.5, 10.0, -1.0, 1.0)) == 4
    assert count_zeros_contour(free, (10.0, 30.0, -1.0, 1.0)) == 2
    assert count_zeros_contour(free, (40.0, 60.0, -1.0, 1.0)) == 1


def test_contour_too_close(free):
    # eigenvalue lambda = 1 sits on the contour edge
    with pytest.raises(ContourTooCloseError):
        count_zeros_contour(free, (1.0, 10.0, -1.0, 1.0))


def test_delta_batch_vectorized(generic):
    lams = np.array([1.0, 2.0 + 1.0j, -4.0])
    batch = delta_batch(generic, lams)
    for i, lam in enumerate(lams):
        assert batch[i] == pytest.approx(char_delta(generic, complex(lam)),
                                         rel=1e-12)


def test_csv_roundtrip(tmp_path, free):
    sd = spectral_data(free, eigenvalues(free, 5))
    path = tmp_path / "spec.csv"
    export_csv(sd, path)
    text = path.read_text()
    header = text.splitlines()[0]
    assert header == "n,lambda,rho,gamma,beta,certification"
    back = load_csv(path)
    assert np.allclose(back.lambdas, sd.lambdas, rtol=0, atol=0)
    assert np.allclose(back.gammas, sd.gammas, rtol=0, atol=0)
    assert back.records[2].certification == "contour-verified"


def test_csv_17_digits(tmp_path, free):
    records = (EigenRecord(0, 1.0 / 3.0, complex(math.sqrt(1.0 / 3.0)),
                           2.0 / 3.0, -1.0, "bracketed"),)
    sd = SpectralData(records=records, fingerprint="x", variant="robin")
    path = tmp_path / "one.csv"
    export_csv(sd, path)
    back = load_csv(path)
    assert back.records[0].lam == 1.0 / 3.0          # bit-exact round trip
    assert back.records[0].gamma == 2.0 / 3.0


def test_csv_eigenparameter_variant_column(tmp_path, eig_desk):
    sd = eigenvalues(eig_desk, 3, verify=False)
    path = tmp_path / "eig.csv"
    export_csv(sd, path)
    header = path.read_text().splitlines()[0]
    assert header.endswith(",variant")
    back = load_csv(path)
    assert back.variant == "eigenparameter"


def test_json_export(tmp_path, free):
    sd = spectral_data(free, eigenvalues(free, 3))
    path = tmp_path / "spec.json"
    export_json(sd, path)
    data = json.loads(path.read_text())
    assert data["variant"] == "robin"
    assert len(data["records"]) == 3
    assert data["records"][1]["lambda"] == pytest.approx(1.0, abs=1e-10)


def test_eigenvalue_residual_tolerance(free):
    # located roots satisfy |Delta| ~ 0 to bisection precision
    sd = eigenvalues(free, 8)
    for r in sd.records[1:]:
        rho = math.sqrt(r.lam)
        assert abs(rho - round(rho)) < 1e-10


def test_deterministic_outputs(generic):
    a = eigenvalues(generic, 6).lambdas
    b = eigenvalues(generic, 6).lambdas
    assert np.array_equal(a, b)
