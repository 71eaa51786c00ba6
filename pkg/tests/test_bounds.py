import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crmorse.bounds import (
    EXCLUDED,
    global_integral,
    morse_report,
    pairwise_sum,
    sample_integrals,
    strong_morse_sums,
    weak_morse_coefficient,
    weyl_coefficient,
    worker_count,
)
from crmorse.errors import MixedSignature, UnboundedSignatureSet, YViolation
from crmorse.geometry import ManifoldSpec, PointSample, grauert_tube_spec, heisenberg_spec, trivialization_shift
from crmorse.pencil import PencilInstance
from crmorse.verify import random_hermitian

seeds = st.integers(0, 2**32 - 1)
HEIS = heisenberg_spec([-1, 1], [1, 1], 16)


def random_spec(rng, n_minus, n_plus, count=6):
    """Samples share a Levi form up to positive scaling, so the signature is uniform."""
    dim = n_minus + n_plus
    levi = np.diag([-1.0] * n_minus + [1.0] * n_plus)
    samples = []
    for i in range(count):
        L = rng.uniform(0.5, 2) * levi
        M = random_hermitian(rng, dim)
        samples.append(PointSample(f"s{i}", (float(i),), PencilInstance(M, L), rng.uniform(0.1, 2)))
    return ManifoldSpec("random", dim + 1, samples)


def test_pairwise_sum():
    assert pairwise_sum([]) == 0.0
    assert pairwise_sum([0.1] * 1000) == pytest.approx(100.0, rel=1e-14)
    assert pairwise_sum(iter([1.0, 2.0])) == 3.0


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("CRMORSE_THREADS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("CRMORSE_THREADS", "zero")
    assert worker_count() == 1
    monkeypatch.delenv("CRMORSE_THREADS")
    assert worker_count() == 1


# Heisenberg group


def test_heisenberg_q0():
    vol = 16 * math.pi**3
    assert global_integral(HEIS, 0) == pytest.approx(vol * 4 / 3, rel=1e-13)
    assert weak_morse_coefficient(HEIS, 0) == pytest.approx(8 / 3, rel=1e-13)
    assert weyl_coefficient(HEIS, 0) == weak_morse_coefficient(HEIS, 0)


def test_heisenberg_q1_excluded():
    with pytest.raises(UnboundedSignatureSet):
        weak_morse_coefficient(HEIS, 1)
    rep = morse_report(HEIS)
    assert rep.per_q_weak_coeff[1] == EXCLUDED and rep.per_q_integral[1] == EXCLUDED
    assert rep.y_status == {0: True, 1: False, 2: True}


def test_heisenberg_q2_empty():
    assert global_integral(HEIS, 2) == 0.0


def test_mu_equals_lambda_all_zero():
    spec = heisenberg_spec([-1, 1], [-1, 1], 8)
    rep = morse_report(spec)
    assert rep.per_q_weak_coeff[0] == 0.0 and rep.per_q_weak_coeff[2] == 0.0


def test_doubling_weights_doubles():
    doubled = ManifoldSpec(
        HEIS.name, HEIS.n, [PointSample(s.id, s.coords, s.pencil, 2 * s.dm_weight) for s in HEIS.samples]
    )
    assert global_integral(doubled, 0) == pytest.approx(2 * global_integral(HEIS, 0), rel=1e-14)


def test_constant_spec_sample_count():
    a = weak_morse_coefficient(heisenberg_spec([-1, 1], [1, 1], 10), 0)
    b = weak_morse_coefficient(heisenberg_spec([-1, 1], [1, 1], 100), 0)
    assert abs(b - a) <= 1e-6 * abs(a)


def test_mixed_signature_rejected():
    a = PointSample("a", (), PencilInstance(np.eye(2), np.diag([1.0, -1.0])), 1.0)
    b = PointSample("b", (), PencilInstance(np.eye(2), np.diag([1.0, 1.0])), 1.0)
    spec = ManifoldSpec("mixed", 3, [a, b])
    with pytest.raises(MixedSignature):
        global_integral(spec, 0)
    with pytest.raises(MixedSignature):
        morse_report(spec)


# strong Morse sums


def test_strong_lower_q0_is_coefficient():
    assert strong_morse_sums(HEIS, 0, "lower") == weak_morse_coefficient(HEIS, 0)


def test_strong_requires_every_degree():
    with pytest.raises(YViolation) as info:
        strong_morse_sums(HEIS, 1, "lower")
    assert info.value.j == 1
    with pytest.raises(YViolation) as info:
        strong_morse_sums(HEIS, 0, "upper")
    assert info.value.j == 1
    with pytest.raises(ValueError):
        strong_morse_sums(HEIS, 0, "sideways")


def test_report_strong_sums():
    rep = morse_report(HEIS)
    assert rep.strong_lower[0] == rep.per_q_weak_coeff[0]
    assert rep.strong_lower[1] == EXCLUDED and rep.strong_upper[0] == EXCLUDED
    assert rep.strong_upper[2] == rep.per_q_weak_coeff[2]


def test_strong_alternating_sum():
    # signature (2, 3): Y fails only at q = 2 and q = 3
    rng = np.random.default_rng(5)
    spec = random_spec(rng, 2, 3)
    rep = morse_report(spec)
    coeff = rep.per_q_weak_coeff
    assert rep.y_status[0] and rep.y_status[1] and not rep.y_status[2]
    assert rep.strong_lower[1] == pytest.approx(coeff[1] - coeff[0], rel=1e-14, abs=1e-300)
    assert strong_morse_sums(spec, 1, "lower") == pytest.approx(coeff[1] - coeff[0], rel=1e-14, abs=1e-300)
    assert rep.strong_upper[4] == pytest.approx(coeff[4] - coeff[5], rel=1e-14, abs=1e-300)


def test_bound_at_k():
    rep = morse_report(HEIS)
    out = rep.bound_at(10)
    assert out[0] == pytest.approx(8 / 3 * 1000, rel=1e-13) and out[1] == EXCLUDED


def test_report_per_sample_and_metadata():
    got = {}
    rep = morse_report(HEIS, per_sample=got)
    assert got[1] == EXCLUDED and len(got[0]) == 16
    assert pairwise_sum(got[0]) == rep.per_q_integral[0]
    assert rep.metadata["spec"] == HEIS.name and rep.metadata["n_samples"] == "16"


# invariants


@settings(max_examples=20)
@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_excluded_set_is_levi_signature(seed, n_minus, n_plus):
    spec = random_spec(np.random.default_rng(seed), n_minus, n_plus)
    rep = morse_report(spec)
    excluded = {q for q, c in rep.per_q_weak_coeff.items() if c == EXCLUDED}
    assert excluded == {n_minus, n_plus}


@settings(max_examples=20)
@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_coefficients_nonnegative(seed, n_minus, n_plus):
    spec = random_spec(np.random.default_rng(seed), n_minus, n_plus)
    for c in morse_report(spec).per_q_weak_coeff.values():
        assert c == EXCLUDED or c >= 0


@settings(max_examples=15)
@given(seeds, st.floats(-5, 5))
def test_global_trivialization_invariance(seed, t):
    spec = random_spec(np.random.default_rng(seed), 1, 2)
    shifted = ManifoldSpec(spec.name, spec.n, [trivialization_shift(s, t) for s in spec.samples])
    for q in (0, 3):
        a, b = global_integral(spec, q), global_integral(shifted, q)
        assert abs(b - a) <= 1e-9 * max(1.0, abs(a))


def test_thread_count_determinism():
    spec = grauert_tube_spec([-1, 1], [1, 1], points_per_axis=3)
    base = sample_integrals(spec, 0, workers=1)
    for w in (4, 16):
        assert sample_integrals(spec, 0, workers=w) == base
        assert global_integral(spec, 0, workers=w) == global_integral(spec, 0, workers=1)
