"""Global Morse-bound coefficients.

For a sampled manifold the weak Morse coefficient of degree ``q`` is

    (2 pi)^{-n} sum_x dm(x) int over R_{x,q} of |det(M_x + s L_x)| ds,

which is also the leading coefficient of the small-eigenvalue Weyl law.
Strong Morse sums alternate these coefficients over ``j <= q`` or ``j >= q``.

Per-sample integrals may be computed on several threads (``CRMORSE_THREADS``);
they are reduced in sample order by pairwise summation, so the result does
not depend on the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os

from .errors import MixedSignature, UnboundedSignatureSet, YViolation
from .geometry import ManifoldSpec, y_condition
from .pencil import integrate_abs_det, signature_set

EXCLUDED = "excluded"


def worker_count() -> int:
    raw = os.environ.get("CRMORSE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pairwise_sum(values) -> float:
    """Fixed-order pairwise (cascade) summation."""
    values = list(values)
    if not values:
        return 0.0
    if len(values) <= 8:
        total = 0.0
        for v in values:
            total += v
        return total
    mid = len(values) // 2
    return pairwise_sum(values[:mid]) + pairwise_sum(values[mid:])


def uniform_signature(spec: ManifoldSpec) -> tuple[int, int]:
    sigs = {s.pencil.levi_signature for s in spec.samples}
    if len(sigs) != 1:
        raise MixedSignature(f"Levi signature varies over {spec.name}: {sorted(sigs)}")
    return sigs.pop()


def levi_eigs(spec: ManifoldSpec) -> list[int]:
    """Sign pattern of the (uniform) Levi form, enough to evaluate Y(q)."""
    n_minus, n_plus = uniform_signature(spec)
    return [-1] * n_minus + [1] * n_plus


def sample_integrals(spec: ManifoldSpec, q: int, workers: int | None = None) -> list[float]:
    """``dm_weight * int |det|`` for every sample, in sample order."""
    uniform_signature(spec)

    def one(sample):
        p = sample.pencil
        sset = signature_set(p, q)
        return 0.0 if sset.is_empty else sample.dm_weight * integrate_abs_det(p, sset)

    workers = workers or worker_count()
    if workers == 1:
        return [one(s) for s in spec.samples]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, spec.samples, chunksize=max(1, len(spec.samples) // (4 * workers))))


def global_integral(spec: ManifoldSpec, q: int, workers: int | None = None) -> float:
    return pairwise_sum(sample_integrals(spec, q, workers))


def weak_morse_coefficient(spec: ManifoldSpec, q: int, workers: int | None = None) -> float:
    """Coefficient of ``k^n`` in the weak Morse bound for ``dim H^q_b``.

    Raises :class:`UnboundedSignatureSet` when Y(q) fails; callers that
    tabulate all ``q`` record such degrees as excluded.
    """
    return global_integral(spec, q, workers) / (2 * math.pi) ** spec.n


def weyl_coefficient(spec: ManifoldSpec, q: int, workers: int | None = None) -> float:
    """Leading coefficient of the small-eigenvalue spectral-space dimension.

    Same value as :func:`weak_morse_coefficient`; there it bounds, here it is
    attained.
    """
    return weak_morse_coefficient(spec, q, workers)


def strong_morse_sums(spec: ManifoldSpec, q: int, direction: str = "lower", workers: int | None = None) -> float:
    """``sum_j (-1)^{q-j} coeff_j`` over ``j <= q`` (lower) or ``j >= q`` (upper)."""
    if direction not in ("lower", "upper"):
        raise ValueError(f"direction must be 'lower' or 'upper', got {direction!r}")
    eigs = levi_eigs(spec)
    js = range(0, q + 1) if direction == "lower" else range(q, spec.n)
    for j in js:
        if not y_condition(eigs, j):
            raise YViolation(j)
    return pairwise_sum((-1) ** (q - j) * weak_morse_coefficient(spec, j, workers) for j in js)


@dataclass
class MorseBoundReport:
    n: int
    q_range: list[int]
    per_q_integral: dict[int, float | str]
    per_q_weak_coeff: dict[int, float | str]
    strong_lower: dict[int, float | str]
    strong_upper: dict[int, float | str]
    y_status: dict[int, bool]
    metadata: dict[str, str] = field(default_factory=dict)

    def bound_at(self, k: float) -> dict[int, float | str]:
        """``coeff * k^n`` per degree."""
        return {
            q: (c if c == EXCLUDED else c * float(k) ** self.n) for q, c in self.per_q_weak_coeff.items()
        }


def morse_report(
    spec: ManifoldSpec, q_range=None, workers: int | None = None, per_sample: dict | None = None
) -> MorseBoundReport:
    """Tabulate every degree; pass a dict as ``per_sample`` to receive the per-sample values."""
    eigs = levi_eigs(spec)
    q_range = list(range(spec.n)) if q_range is None else list(q_range)
    all_q = range(spec.n)
    y = {q: y_condition(eigs, q) for q in all_q}

    integral: dict[int, float | str] = {}
    coeff: dict[int, float | str] = {}
    for q in all_q:
        if not y[q]:
            integral[q] = coeff[q] = EXCLUDED
            if per_sample is not None:
                per_sample[q] = EXCLUDED
            continue
        try:
            values = sample_integrals(spec, q, workers)
        except UnboundedSignatureSet:
            integral[q] = coeff[q] = EXCLUDED
            continue
        if per_sample is not None:
            per_sample[q] = values
        integral[q] = pairwise_sum(values)
        coeff[q] = integral[q] / (2 * math.pi) ** spec.n

    def alternating(q, js):
        if any(coeff[j] == EXCLUDED for j in js):
            return EXCLUDED
        return pairwise_sum((-1) ** (q - j) * coeff[j] for j in js)

    lower = {q: alternating(q, range(0, q + 1)) for q in q_range}
    upper = {q: alternating(q, range(q, spec.n)) for q in q_range}
    meta = dict(spec.metadata)
    meta.update({"spec": spec.name, "n_samples": str(len(spec.samples)), "integration": "lattice"})
    return MorseBoundReport(
        n=spec.n,
        q_range=q_range,
        per_q_integral={q: integral[q] for q in q_range},
        per_q_weak_coeff={q: coeff[q] for q in q_range},
        strong_lower=lower,
        strong_upper=upper,
        y_status={q: y[q] for q in q_range},
        metadata=meta,
    )
