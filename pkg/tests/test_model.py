import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crmorse.errors import EtaOutsideSet, NonDiagonalWeight, UnboundedSignatureSet
from crmorse.model import (
    ModelParams,
    bergman_trace,
    extremal_value,
    harmonic_element_sq,
    harmonic_norm_check,
    model_matrix,
    model_signature_set,
    phi_eta,
    substitution_check,
)
from crmorse.oracle import gaussian_norm_quadrature
from crmorse.pencil import HermitianForm, PencilInstance, local_density
from crmorse.verify import random_diagonal_model, random_model

R2 = math.sqrt(2)
seeds = st.integers(0, 2**32 - 1)
BASE = ModelParams((-1.0, 1.0), HermitianForm.identity(2))


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams((0.0, 1.0), HermitianForm.identity(2))
    with pytest.raises(ValueError):
        ModelParams((1.0,), HermitianForm.identity(2))
    p = ModelParams((-1, 1), np.eye(2), beta=3)
    assert p.beta == 3.0 and p.n == 3 and isinstance(p.mu, HermitianForm)


def test_beta_does_not_enter():
    a = ModelParams((-1.0, 1.0), HermitianForm.identity(2), beta=0.0)
    b = ModelParams((-1.0, 1.0), HermitianForm.identity(2), beta=7.5)
    assert extremal_value(a, 0) == extremal_value(b, 0)
    assert phi_eta([1, 1j], 0.2, a) == phi_eta([1, 1j], 0.2, b)


# phi_eta


def test_phi_at_origin():
    assert phi_eta([0, 0], 0.7, BASE) == 0.0


def test_phi_one_dimension():
    assert phi_eta([1], 0.0, ModelParams((1.0,), HermitianForm.identity(1))) == 1.0


def test_phi_hand_value():
    assert phi_eta([1, 1], 1 / R2, BASE) == pytest.approx(2.0, abs=1e-15)


def test_phi_vectorized_matches_pointwise(rng):
    z = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    batch = phi_eta(z, 0.3, BASE)
    assert np.allclose(batch, [phi_eta(w, 0.3, BASE) for w in z], rtol=1e-15)


# model_matrix


def test_model_matrix_at_zero_is_mu():
    assert model_matrix(0.0, BASE) is BASE.mu


@given(st.floats(-3, 3))
def test_model_matrix_diagonal(eta):
    np.testing.assert_allclose(model_matrix(eta, BASE).entries, np.diag([1 + R2 * eta, 1 - R2 * eta]), atol=1e-15)


def test_model_matrix_degenerate_point():
    p = ModelParams((2.0,), HermitianForm.diag([3.0]))
    assert abs(model_matrix(3 / (2 * R2), p).entries[0, 0]) <= 1e-15


# model_signature_set


def test_model_set_interval():
    s = model_signature_set(BASE, 0)
    assert s.intervals[0] == pytest.approx((-1 / R2, 1 / R2), abs=1e-14)


def test_model_set_mu_equals_lambda_empty():
    assert model_signature_set(ModelParams((-1.0, 1.0), HermitianForm.diag([-1, 1])), 0).is_empty


def test_model_set_definite_levi():
    with pytest.raises(UnboundedSignatureSet):
        model_signature_set(ModelParams((1.0, 1.0), HermitianForm.identity(2)), 0)


# bergman_trace


def test_trace_at_origin():
    assert bergman_trace([0, 0], 0.0, BASE, 0) == pytest.approx((2 * math.pi) ** -2, rel=1e-15)


def test_trace_outside_and_at_root():
    assert bergman_trace([0, 0], 2.0, BASE, 0) == 0.0
    assert bergman_trace([0, 0], 1 / R2, BASE, 0) == 0.0


@given(seeds, st.floats(-10, 10))
def test_trace_nonnegative_and_compact(seed, eta):
    rng = np.random.default_rng(seed)
    params, q = random_model(rng, 3)
    z = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert bergman_trace(z, eta, params, q) >= 0
    R = params.eta_pencil().root_bound
    assert bergman_trace(z, R + 0.01 + abs(eta), params, q) == 0.0
    assert bergman_trace(z, -R - 0.01 - abs(eta), params, q) == 0.0


# extremal_value and substitution_check


def test_extremal_fixture():
    assert extremal_value(BASE, 0) == pytest.approx((2 * math.pi) ** -3 * 4 / 3, rel=1e-14)


def test_extremal_empty():
    assert extremal_value(ModelParams((-1.0, 1.0), HermitianForm.diag([-1, 1])), 0) == 0.0


@given(seeds, st.integers(2, 5))
def test_extremal_equals_local_density(seed, dim):
    rng = np.random.default_rng(seed)
    params, q = random_model(rng, dim)
    want = local_density(PencilInstance(params.mu, HermitianForm.diag(params.lam)), q, dim + 1)
    got = extremal_value(params, q)
    assert got == pytest.approx(want, rel=1e-10, abs=1e-300)


@given(seeds, st.integers(2, 4))
def test_extremal_permutation_invariant(seed, dim):
    rng = np.random.default_rng(seed)
    params, q = random_model(rng, dim)
    perm = rng.permutation(dim)
    mu = params.mu.entries[np.ix_(perm, perm)]
    permuted = ModelParams(tuple(params.lam[i] for i in perm), HermitianForm(mu))
    assert extremal_value(permuted, q) == pytest.approx(extremal_value(params, q), rel=1e-10, abs=1e-300)


def test_substitution_fixture():
    m, p, d = substitution_check(BASE, 0)
    assert m == pytest.approx(4 / 3, rel=1e-14) and p == pytest.approx(4 / 3, rel=1e-14) and d <= 1e-10


def test_substitution_empty():
    assert substitution_check(ModelParams((-1.0, 1.0), HermitianForm.diag([-1, 1])), 0) == (0.0, 0.0, 0.0)


@given(seeds, st.integers(2, 5))
def test_substitution_random(seed, dim):
    rng = np.random.default_rng(seed)
    params, q = random_model(rng, dim)
    _, value, diff = substitution_check(params, q)
    assert diff <= 1e-10 * (1 + value)


# harmonic element


def test_harmonic_fixture_at_zero():
    quad, closed = harmonic_norm_check(BASE, 0, 0.0)
    # 2 pi |det M(0)| / I with I = 4/3
    assert closed == pytest.approx(3 * math.pi / 2, rel=1e-14)
    assert quad == pytest.approx(closed, rel=1e-10)


def test_harmonic_at_root_is_zero():
    assert harmonic_norm_check(BASE, 0, 1 / R2) == (0.0, 0.0)


def test_harmonic_dim3_q1():
    # q = 1 is admissible at dim 3 only for a definite Levi form
    params = ModelParams((1.0, 1.5, 2.0), HermitianForm.identity(3))
    sset = model_signature_set(params, 1)
    lo, hi = sset.intervals[0]
    assert (lo, hi) == pytest.approx((1 / (2 * R2), 1 / (1.5 * R2)), abs=1e-14)
    quad, closed = harmonic_norm_check(params, 1, (lo + hi) / 2)
    assert quad == pytest.approx(closed, rel=1e-6)


def test_harmonic_errors():
    with pytest.raises(EtaOutsideSet):
        harmonic_norm_check(BASE, 0, 3.0)
    full = ModelParams((-1.0, 1.0), HermitianForm(np.array([[1, 0.2], [0.2, 1]])))
    with pytest.raises(NonDiagonalWeight):
        harmonic_norm_check(full, 0, 0.0)


@given(seeds, st.integers(2, 3))
def test_harmonic_matches_gaussian_oracle(seed, dim):
    # the squared norm reduces to C0^2 det^2 * int exp(-|nu| |z|^2) dv, evaluated by the oracle
    rng = np.random.default_rng(seed)
    params, q = random_diagonal_model(rng, dim)
    lo, hi = model_signature_set(params, q).intervals[0]
    eta = (lo + hi) / 2
    nu = np.diag(params.mu.entries).real - R2 * eta * np.array(params.lam)
    scale = harmonic_element_sq(np.zeros(dim), eta, params, q)
    oracle = scale * gaussian_norm_quadrature(-np.abs(nu))
    quad, closed = harmonic_norm_check(params, q, eta)
    assert quad == pytest.approx(oracle, rel=1e-10)
    assert closed == pytest.approx(oracle, rel=1e-10)


def test_support_breakpoints_find_thin_sliver():
    from crmorse.verify import support_breakpoints

    # support [0.30001, 0.7] starts just past a scan point
    def f(x):
        return (x - 0.30001) * (0.7 - x) if 0.30001 < x < 0.7 else 0.0

    edges = support_breakpoints(f, 0.0, 1.0, n_grid=11)
    assert edges == pytest.approx([0.30001, 0.7], abs=1e-15)
    assert support_breakpoints(lambda x: 0.0, 0.0, 1.0) == []
