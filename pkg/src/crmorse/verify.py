"""Seeded property suites behind ``crmorse verify`` and the acceptance tests.

Each property returns a :class:`PropertyResult` holding the worst measured
error next to the tolerance it was held to, so a report shows how much
margin there is rather than a bare pass/fail.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import itertools
import math
import time

import numpy as np
from scipy import integrate

from .bounds import global_integral
from .errors import UnboundedSignatureSet
from .geometry import (
    bigness_hypothesis_check,
    grauert_tube_spec,
    restrict_curvature,
    trivialization_shift,
    y_condition,
    y_equiv_signature,
)
from .model import (
    ModelParams,
    bergman_trace,
    extremal_value,
    harmonic_norm_check,
    model_signature_set,
    substitution_check,
)
from .oracle import grid_intervals, grid_signature_scan
from .pencil import (
    HermitianForm,
    PencilInstance,
    integrate_abs_det,
    local_density,
    signature_set,
)

SUITES = ("pencil", "model", "geometry")
SHIFTS = (-5.0, -1.0, 0.3, 2.0, 5.0)


@dataclass
class PropertyResult:
    suite: str
    name: str
    passed: bool
    measured: float
    tolerance: float
    cases: int
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"{flag}  {self.suite}/{self.name}: cases={self.cases} "
            f"worst={self.measured:.3e} tol={self.tolerance:.1e}"
            + (f"  ({self.detail})" if self.detail else "")
        )


def rel_err(a: float, b: float) -> float:
    if a == b:
        return 0.0
    if not (math.isfinite(a) and math.isfinite(b)):
        return math.inf
    return abs(a - b) / max(abs(a), abs(b))


# instance generators


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_pencil(rng: np.random.Generator, dim: int) -> tuple[PencilInstance, int]:
    """A nondegenerate pencil of mixed Levi signature and an admissible ``q``.

    ``(M, L)`` is congruent to a diagonal pair plus a small Hermitian
    perturbation, which keeps nontrivial signature sets common; ``q`` is drawn
    from the admissible degrees that the diagonal part can reach.
    """
    n_minus = int(rng.integers(1, dim)) if dim > 1 else 0
    signs = np.array([-1.0] * n_minus + [1.0] * (dim - n_minus))
    J = signs * rng.uniform(0.5, 3.0, size=dim)
    D = rng.uniform(0.2, 2.0, size=dim)
    P = random_unitary(rng, dim) * rng.uniform(0.5, 2.0, size=dim)
    L = P.conj().T @ np.diag(J) @ P
    M = P.conj().T @ np.diag(D) @ P + 0.05 * random_hermitian(rng, dim)
    p = PencilInstance(M, L)
    reach = max(n_minus, dim - n_minus)
    qs = [q for q in range(reach + 1) if q not in p.levi_signature]
    return p, int(rng.choice(qs))


def random_diagonal_model(rng: np.random.Generator, dim: int) -> tuple[ModelParams, int]:
    """Diagonal model data with a nonempty signature set of admissible degree."""
    while True:
        n_minus = int(rng.integers(1, dim))
        lam = [-float(rng.uniform(0.5, 2.5)) for _ in range(n_minus)]
        lam += [float(rng.uniform(0.5, 2.5)) for _ in range(dim - n_minus)]
        mu = rng.uniform(0.3, 2.0, size=dim) * rng.choice([-1.0, 1.0], size=dim, p=[0.2, 0.8])
        params = ModelParams(tuple(lam), HermitianForm.diag(mu))
        qs = [q for q in range(dim + 1) if q not in (n_minus, dim - n_minus)]
        rng.shuffle(qs)
        for q in qs:
            if not model_signature_set(params, q).is_empty:
                return params, int(q)


def random_model(rng: np.random.Generator, dim: int) -> tuple[ModelParams, int]:
    """Model data with a full Hermitian ``mu``; the set may be empty."""
    n_minus = int(rng.integers(1, dim))
    lam = [-float(rng.uniform(0.5, 2.5)) for _ in range(n_minus)]
    lam += [float(rng.uniform(0.5, 2.5)) for _ in range(dim - n_minus)]
    mu = np.diag(rng.uniform(0.2, 2.0, size=dim)) + 0.3 * random_hermitian(rng, dim)
    params = ModelParams(tuple(lam), HermitianForm(mu))
    qs = [q for q in range(dim + 1) if q not in (n_minus, dim - n_minus)]
    return params, int(rng.choice(qs))


# pencil properties


def oracle_agreement(seed: int, n_instances: int = 200, n_points: int = 100_000) -> PropertyResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_edge = 0.0
    edge_ok = True
    t0 = time.perf_counter()
    for i in range(n_instances):
        dim = 2 + i % 4
        p, q = random_pencil(rng, dim)
        sset = signature_set(p, q)
        exact = integrate_abs_det(p, sset)
        scan = grid_signature_scan(p.M, p.L, q, n_points)
        worst = max(worst, rel_err(exact, scan.riemann_integral))
        runs = grid_intervals(scan, q)
        if len(runs) != len(sset.intervals):
            edge_ok = False
            continue
        for (a, b), (lo, hi) in zip(runs, sset.intervals):
            worst_edge = max(worst_edge, abs(a - lo) / scan.step, abs(b - hi) / scan.step)
    elapsed = time.perf_counter() - t0
    passed = worst <= 1e-3 and edge_ok and worst_edge <= 2.0
    detail = f"{elapsed:.1f}s, endpoint error {worst_edge:.2f} steps"
    if not edge_ok:
        detail += ", interval count mismatch"
    return PropertyResult("pencil", "oracle_agreement", passed, worst, 1e-3, n_instances, detail)


def pencil_fixtures(seed: int) -> PropertyResult:
    cases = [
        (np.diag([1.0, 1.0]), np.diag([1.0, -1.0]), 0, 4 / 3),
        (np.diag([2.0, 2.0]), np.diag([1.0, -1.0]), 0, 32 / 3),
        (np.diag([-1.0, 1.0]), np.diag([-1.0, 1.0]), 0, 0.0),
    ]
    worst = 0.0
    for M, L, q, want in cases:
        p = PencilInstance(M, L)
        got = integrate_abs_det(p, signature_set(p, q))
        worst = max(worst, abs(got - want))
    return PropertyResult("pencil", "pencil_fixtures", worst <= 1e-12, worst, 1e-12, len(cases))


def trivialization_invariance(seed: int, n_instances: int = 50) -> PropertyResult:
    """Density unchanged and endpoints moved by ``-t`` under ``M -> M + tL``."""
    rng = np.random.default_rng(seed)
    worst_density = 0.0
    worst_edge = 0.0
    structure_ok = True
    for i in range(n_instances):
        p, q = random_pencil(rng, 2 + i % 4)
        base = signature_set(p, q)
        d0 = local_density(p, q, p.dim + 1)
        for t in SHIFTS:
            shifted = p.shifted(t)
            s1 = signature_set(shifted, q)
            d1 = local_density(shifted, q, p.dim + 1)
            worst_density = max(worst_density, rel_err(d0, d1))
            if len(s1.intervals) != len(base.intervals):
                structure_ok = False
                continue
            for (a, b), (lo, hi) in zip(s1.intervals, base.intervals):
                worst_edge = max(worst_edge, abs(a - (lo - t)), abs(b - (hi - t)))
    passed = structure_ok and worst_density <= 1e-9 and worst_edge <= 1e-9
    detail = f"endpoint shift error {worst_edge:.2e} (tol 1e-9 abs)"
    if not structure_ok:
        detail += ", interval count changed"
    return PropertyResult(
        "pencil", "trivialization_invariance", passed, worst_density, 1e-9, n_instances * len(SHIFTS), detail
    )


def sylvester_invariance(seed: int, n_instances: int = 40) -> PropertyResult:
    """Congruence keeps the intervals and scales the integral by ``|det P|^2``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_edge = 0.0
    ok = True
    for i in range(n_instances):
        dim = 2 + i % 4
        p, q = random_pencil(rng, dim)
        P = random_unitary(rng, dim) @ np.diag(rng.uniform(0.7, 1.5, size=dim))
        pc = p.congruent(P)
        a, b = signature_set(p, q), signature_set(pc, q)
        if len(a.intervals) != len(b.intervals):
            ok = False
            continue
        for (x0, x1), (y0, y1) in zip(a.intervals, b.intervals):
            worst_edge = max(worst_edge, abs(x0 - y0), abs(x1 - y1))
        scale = abs(np.linalg.det(P)) ** 2
        worst = max(worst, rel_err(scale * integrate_abs_det(p, a), integrate_abs_det(pc, b)))
    passed = ok and worst <= 1e-8 and worst_edge <= 1e-8
    return PropertyResult(
        "pencil", "sylvester_invariance", passed, max(worst, worst_edge), 1e-8, n_instances
    )


# model properties


def substitution_identity(seed: int, n_instances: int = 100) -> PropertyResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_instances):
        params, q = random_model(rng, 2 + i % 4)
        model_value, pencil_value, diff = substitution_check(params, q)
        worst = max(worst, diff / (1 + abs(pencil_value)))
    fixture = substitution_check(ModelParams((-1.0, 1.0), HermitianForm.identity(2)), 0)
    fixture_err = max(abs(fixture[0] - 4 / 3), abs(fixture[1] - 4 / 3))
    passed = worst <= 1e-10 and fixture_err <= 1e-10
    return PropertyResult(
        "model", "substitution_identity", passed, worst, 1e-10, n_instances,
        f"4/3 fixture error {fixture_err:.1e}",
    )


def harmonic_norm(seed: int, per_dim: int = 20) -> PropertyResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    cases = 0
    for dim in (2, 3):
        for _ in range(per_dim):
            params, q = random_diagonal_model(rng, dim)
            sset = model_signature_set(params, q)
            lo, hi = sset.intervals[int(rng.integers(len(sset.intervals)))]
            eta = lo + (hi - lo) * float(rng.uniform(0.1, 0.9))
            quad, closed = harmonic_norm_check(params, q, eta)
            worst = max(worst, rel_err(quad, closed))
            cases += 1
    return PropertyResult("model", "harmonic_norm", worst <= 1e-6, worst, 1e-6, cases)


def support_breakpoints(f, a: float, b: float, n_grid: int = 4097) -> list[float]:
    """Points in ``(a, b)`` where ``f`` switches between zero and nonzero.

    Only ``f`` is evaluated: a uniform scan brackets each switch and
    bisection narrows it to rounding level.  A support piece that holds no
    scan point is not found.
    """
    xs = np.linspace(a, b, n_grid)
    on = np.array([f(x) != 0.0 for x in xs])
    out = []
    for k in np.flatnonzero(on[1:] != on[:-1]):
        lo, hi = float(xs[k]), float(xs[k + 1])
        left = on[k]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if (f(mid) != 0.0) == left:
                lo = mid
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    return out


def bergman_trace_consistency(seed: int, n_instances: int = 50) -> PropertyResult:
    """``sqrt2 * int bergman_trace(0, eta) d eta`` against ``2 pi * extremal_value``.

    The left side is adaptive quadrature over ``[-R-1, R+1]``.  It does not
    use the pencil roots; breakpoints come from scanning the trace itself,
    since fixed quadrature nodes can step over a thin sliver of support
    next to a panel edge.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_instances):
        params, q = random_model(rng, 2 + i % 3)
        R = params.eta_pencil().root_bound
        z0 = np.zeros(params.dim)

        def trace(e):
            return bergman_trace(z0, e, params, q)

        edges = support_breakpoints(trace, -R - 1, R + 1)
        val, _ = integrate.quad(
            trace,
            -R - 1,
            R + 1,
            points=edges or None,
            epsabs=0,
            epsrel=1e-12,
            limit=2000,
        )
        lhs = math.sqrt(2) * val
        rhs = 2 * math.pi * extremal_value(params, q)
        if rhs == 0:
            worst = max(worst, abs(lhs))
        else:
            worst = max(worst, rel_err(lhs, rhs))
    return PropertyResult("model", "bergman_trace_consistency", worst <= 1e-8, worst, 1e-8, n_instances)


# geometry properties


def y_equivalence(seed: int, max_dim: int = 8) -> PropertyResult:
    mismatches = 0
    cases = 0
    for d in range(1, max_dim + 1):
        for pattern in itertools.product((-1, 1), repeat=d):
            for q in range(d + 1):
                cases += 1
                if y_condition(pattern, q) != y_equiv_signature(pattern, q):
                    mismatches += 1
    return PropertyResult("geometry", "y_equivalence", mismatches == 0, mismatches, 0, cases)


def binomial_interval_integral(n_plus: int, n_minus: int) -> Fraction:
    """Exact ``int_{-1}^{1} (1+s)^n_plus (1-s)^n_minus ds`` by binomial expansion."""
    coeffs = [Fraction(0)] * (n_plus + n_minus + 1)
    for a in range(n_plus + 1):
        for b in range(n_minus + 1):
            coeffs[a + b] += math.comb(n_plus, a) * math.comb(n_minus, b) * (-1) ** b
    return sum((c * Fraction(2, k + 1) for k, c in enumerate(coeffs) if k % 2 == 0), Fraction(0))


def sign_patterns(seed: int, max_dim: int = 5) -> PropertyResult:
    """``mu = lam`` gives empty sets; ``mu = |lam|`` gives ``(-1, 1)`` in degree 0."""
    worst = 0.0
    failures = []
    cases = 0
    for d in range(1, max_dim + 1):
        for lam in itertools.product((-2, -1, 1, 2), repeat=d):
            cases += 1
            n_minus = sum(1 for x in lam if x < 0)
            n_plus = d - n_minus
            p = PencilInstance(np.diag(np.array(lam, float)), np.diag(np.array(lam, float)))
            for q in range(d + 1):
                try:
                    empty = signature_set(p, q).is_empty
                    unbounded = False
                except UnboundedSignatureSet:
                    empty, unbounded = True, True
                if unbounded != (q in (n_minus, n_plus)) or not empty:
                    failures.append(f"mu=lam={lam} q={q}")
            if n_minus == 0 or n_plus == 0:
                continue
            pa = PencilInstance(np.diag(np.abs(np.array(lam, float))), np.diag(np.array(lam, float)))
            sset = signature_set(pa, 0)
            if len(sset.intervals) != 1:
                failures.append(f"mu=|lam|={lam}: {len(sset.intervals)} intervals")
                continue
            lo, hi = sset.intervals[0]
            worst = max(worst, abs(lo + 1), abs(hi - 1))
            exact = float(math.prod(abs(x) for x in lam) * binomial_interval_integral(n_plus, n_minus))
            worst = max(worst, rel_err(integrate_abs_det(pa, sset), exact))
    passed = not failures and worst <= 1e-12
    return PropertyResult(
        "geometry", "sign_patterns", passed, worst, 1e-12, cases, "; ".join(failures[:3])
    )


def grauert_emptiness(seed: int) -> PropertyResult:
    cases = 0
    failures = []
    for lam in ((-1, 1), (-1, 2), (-2, -1, 1), (-1, 1, 1)):
        spec = grauert_tube_spec(lam, lam, points_per_axis=3)
        n_minus = sum(1 for x in lam if x < 0)
        for q in range(len(lam) + 1):
            if q in (n_minus, len(lam) - n_minus):
                continue
            for s in spec.samples:
                cases += 1
                if not signature_set(s.pencil, q).is_empty:
                    failures.append(f"lam={lam} q={q} sample={s.id}")
    return PropertyResult("geometry", "grauert_emptiness", not failures, len(failures), 0, cases)


def bigness_fixtures(seed: int) -> PropertyResult:
    good = bigness_hypothesis_check(HermitianForm.diag([-1, -1, 1, 1]), HermitianForm.identity(4))
    bad = bigness_hypothesis_check(HermitianForm.diag([-2, -1, 1, 1]), HermitianForm.identity(4))
    few = bigness_hypothesis_check(HermitianForm.diag([-1, 1]), HermitianForm.identity(2))
    checks = [
        good.hypotheses_satisfied,
        good.r1_empty is True,
        good.r0_nonempty is True,
        not bad.negative_pair_equal,
        not bad.hypotheses_satisfied,
        not few.two_of_each_sign,
    ]
    failed = sum(1 for c in checks if not c)
    return PropertyResult("geometry", "bigness_fixtures", failed == 0, failed, 0, len(checks))


def interlacing(seed: int, n_instances: int = 50) -> PropertyResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_instances):
        n = 2 + i % 5
        RL = HermitianForm(random_hermitian(rng, n))
        dr = rng.normal(size=n) + 1j * rng.normal(size=n)
        a = np.linalg.eigvalsh(RL.entries)
        b = np.linalg.eigvalsh(restrict_curvature(RL, dr).entries)
        # a_k <= b_k <= a_{k+1}
        worst = max(worst, float(np.max(a[:-1] - b)), float(np.max(b - a[1:])), 0.0)
    return PropertyResult("geometry", "interlacing", worst <= 1e-9, worst, 1e-9, n_instances)


def trivialization_global(seed: int) -> PropertyResult:
    spec = grauert_tube_spec((-1, 1), (1, 1), points_per_axis=3)
    base = global_integral(spec, 0)
    worst = 0.0
    for t in SHIFTS:
        shifted = type(spec)(spec.name, spec.n, [trivialization_shift(s, t) for s in spec.samples], spec.metadata)
        worst = max(worst, rel_err(base, global_integral(shifted, 0)))
    return PropertyResult("geometry", "trivialization_global", worst <= 1e-9, worst, 1e-9, len(SHIFTS))


PROPERTIES = {
    "pencil": [pencil_fixtures, oracle_agreement, trivialization_invariance, sylvester_invariance],
    "model": [substitution_identity, harmonic_norm, bergman_trace_consistency],
    "geometry": [
        y_equivalence,
        sign_patterns,
        grauert_emptiness,
        bigness_fixtures,
        interlacing,
        trivialization_global,
    ],
}


def property_names(suite: str) -> list[str]:
    suites = SUITES if suite == "all" else (suite,)
    return [f"{s}/{fn.__name__}" for s in suites for fn in PROPERTIES[s]]


def run_suite(suite: str, seed: int, only: str | None = None):
    """Yield results in order; ``only`` restricts to one property name."""
    suites = SUITES if suite == "all" else (suite,)
    for s in suites:
        for fn in PROPERTIES[s]:
            if only is not None and fn.__name__ != only:
                continue
            yield fn(seed)
