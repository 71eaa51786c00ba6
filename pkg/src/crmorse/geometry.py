"""Sampled CR manifolds and pointwise hypothesis checks.

A :class:`ManifoldSpec` is a list of points, each carrying the pencil
``(M, L)`` and a volume weight, enough to integrate any pointwise functional
of the pencil over ``X``.  Two generators build the standard examples:

* :func:`heisenberg_spec` - the compact Heisenberg group ``(C^{n-1} x R)/~``
  with constant Levi form ``diag(lam)`` and bundle curvature ``diag(mu)``.
* :func:`grauert_tube_spec` - the unit circle bundle ``{|xi|^2 exp(sum lam_j
  |z_j|^2) = 1}`` over a flat torus, with Levi form ``diag(lam) / ||dr||``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import itertools
import math

import numpy as np

from .errors import (
    DegenerateLevi,
    LengthMismatch,
    NotPositiveDefinite,
    SignPatternViolation,
    UnboundedSignatureSet,
    ZeroEntry,
    ZeroGradient,
)
from .pencil import HermitianForm, PencilInstance, signature_set

# torus lattice sqrt(2 pi)(Z + iZ): one fundamental cell per complex coordinate
CELL = math.sqrt(2 * math.pi)
GRAUERT_METRIC = (
    "flat ambient metric with dz_j, dz_j-bar, dxi, dxi-bar orthonormal on the "
    "fundamental chart; ||dr|| = sqrt(2)|del r|; dm = 2^n e^{-S} ||dr|| dA(z) dt"
)


@dataclass(frozen=True)
class PointSample:
    id: str
    coords: tuple[float, ...]
    pencil: PencilInstance
    dm_weight: float

    def __post_init__(self):
        if not self.dm_weight > 0:
            raise ValueError(f"sample {self.id}: dm_weight must be positive, got {self.dm_weight}")


@dataclass(frozen=True)
class LeviSignature:
    n_minus: int
    n_plus: int


@dataclass(frozen=True)
class ManifoldSpec:
    name: str
    n: int
    samples: tuple[PointSample, ...]
    metadata: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if not self.samples:
            raise ValueError("a manifold spec needs at least one sample")
        for s in self.samples:
            if s.pencil.dim != self.n - 1:
                raise ValueError(f"sample {s.id} has pencil dim {s.pencil.dim}, expected {self.n - 1}")

    @property
    def total_volume(self) -> float:
        return math.fsum(s.dm_weight for s in self.samples)


def _signs(levi_eigs) -> tuple[int, int]:
    e = np.asarray(levi_eigs, dtype=float)
    if np.any(e == 0):
        raise DegenerateLevi(f"Levi eigenvalues must be nonzero, got {e.tolist()}")
    n_minus = int(np.count_nonzero(e < 0))
    return n_minus, len(e) - n_minus


def y_condition(levi_eigs, q: int) -> bool:
    """Condition Y(q) read off the definition.

    With ``n - 1 = len(levi_eigs)``: at least ``max(q+1, n-q)`` eigenvalues
    of one sign, or at least ``min(q+1, n-q)`` pairs of opposite sign.
    """
    n_minus, n_plus = _signs(levi_eigs)
    n = n_minus + n_plus + 1
    if not 0 <= q <= n - 1:
        raise ValueError(f"q={q} outside [0, {n - 1}]")
    same_sign = max(n_minus, n_plus) >= max(q + 1, n - q)
    pairs = min(n_minus, n_plus) >= min(q + 1, n - q)
    return same_sign or pairs


def y_equiv_signature(levi_eigs, q: int) -> bool:
    n_minus, n_plus = _signs(levi_eigs)
    return q not in (n_minus, n_plus)


def _lattice(dims: int, m: int, jitter_seed: int | None):
    """Midpoints of an ``m^dims`` grid on the unit cube, optionally jittered within cells."""
    base = (np.arange(m) + 0.5) / m
    pts = np.array(list(itertools.product(base, repeat=dims))) if dims else np.zeros((1, 0))
    if jitter_seed is not None:
        rng = np.random.default_rng(jitter_seed)
        pts = pts + rng.uniform(-0.5, 0.5, size=pts.shape) / m
    return pts


def _check_int_pair(lam, mu):
    if len(lam) != len(mu):
        raise LengthMismatch(f"lambda has {len(lam)} entries, mu has {len(mu)}")
    if len(lam) < 1:
        raise LengthMismatch("lambda and mu must be nonempty")
    if any(x == 0 for x in lam) or any(x == 0 for x in mu):
        raise ZeroEntry(f"entries must be nonzero: lambda={list(lam)}, mu={list(mu)}")


def heisenberg_volume_density(lam) -> float:
    """Riemannian volume density of the coordinates ``(x, theta)`` on ``CH_n``.

    The metric makes ``Z_j = d/dz_j - i lam_j conj(z_j) d/dtheta``, ``conj(Z_j)``
    and ``d/dtheta`` orthonormal.  Each real coordinate field is expanded in
    that frame and the square root of the Gram determinant is returned.  The
    frame change is unipotent, so the value does not depend on the point; it
    is evaluated at a generic point anyway.
    """
    d = len(lam)
    z = 0.37 + 0.21j + np.arange(d) * (0.13 - 0.29j)
    size = 2 * d + 1  # basis order: Z_1..Z_d, conj Z_1..conj Z_d, T
    cols = []
    for j in range(d):
        dz = np.zeros(size, complex)
        dz[j] = 1
        dz[-1] = 1j * lam[j] * np.conj(z[j])
        dzb = np.zeros(size, complex)
        dzb[d + j] = 1
        dzb[-1] = -1j * lam[j] * z[j]
        cols.append(dz + dzb)  # d/dx = d/dz + d/dz-bar
        cols.append(1j * (dz - dzb))  # d/dy = i (d/dz - d/dz-bar)
    t = np.zeros(size, complex)
    t[-1] = 1
    cols.append(t)
    V = np.stack(cols, axis=1)
    gram = (V.conj().T @ V).real
    return math.sqrt(np.linalg.det(gram))


def heisenberg_spec(lam, mu, n_samples: int, jitter_seed: int | None = None) -> ManifoldSpec:
    """Compact Heisenberg group with ``L = diag(lam)`` and ``M = diag(mu)`` everywhere.

    The fundamental domain is ``z_j in sqrt(2 pi)[0,1)^2``, ``theta in
    [0, pi)``.  Sample points follow a Kronecker sequence (coordinates are
    informational, the pencil is constant) and share the volume equally.
    """
    lam = [int(x) for x in lam]
    mu = [int(x) for x in mu]
    _check_int_pair(lam, mu)
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    d = len(lam)
    density = heisenberg_volume_density(lam)
    volume = density * (2 * math.pi) ** d * math.pi
    pencil = PencilInstance(HermitianForm.diag(mu), HermitianForm.diag(lam))

    # Kronecker sequence with square roots of primes as frequencies
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
    alpha = np.sqrt(primes[: 2 * d + 1]) % 1.0
    rng = np.random.default_rng(jitter_seed) if jitter_seed is not None else None
    extent = np.array([CELL] * (2 * d) + [math.pi])
    samples = []
    for i in range(n_samples):
        u = ((i + 0.5) * alpha) % 1.0
        if rng is not None:
            u = (u + rng.uniform(0, 1, size=u.shape)) % 1.0
        samples.append(PointSample(f"h{i}", tuple(float(v) for v in u * extent), pencil, volume / n_samples))
    meta = {
        "kind": "heisenberg",
        "lambda": ",".join(map(str, lam)),
        "mu": ",".join(map(str, mu)),
        "volume": repr(volume),
        "volume_density": repr(density),
        "metric": "Z_j, conj Z_j, d/dtheta orthonormal; density from Gram determinant of (d/dx, d/dtheta)",
        "samples": str(n_samples),
    }
    return ManifoldSpec("heisenberg", d + 1, samples, meta)


def grauert_dr_norm(z, lam) -> float:
    """``||dr||`` at the point of ``X`` over ``z`` for ``r = |xi|^2 exp(S) - 1``, ``S = sum lam_j |z_j|^2``.

    On ``X``: ``dr/dz_j = lam_j conj(z_j)`` and ``|dr/dxi|^2 = exp(S)``.
    """
    z = np.asarray(z, dtype=complex)
    lam = np.asarray(lam, dtype=float)
    S = float(np.dot(lam, np.abs(z) ** 2))
    grad_sq = float(np.dot(lam**2, np.abs(z) ** 2)) + math.exp(S)
    return math.sqrt(2 * grad_sq)


def grauert_volume_density(z, lam) -> float:
    """Induced volume on ``X`` per unit ``dA(z) dt`` (``t = arg xi``).

    Ambient volume is ``2^{n+1} dA(z) rho d rho dt``; with ``r = rho^2 e^S - 1``,
    ``d rho = dr / (2 rho e^S)`` and the coarea formula gives
    ``dsigma = ||dr|| 2^n e^{-S} dA(z) dt``.
    """
    z = np.asarray(z, dtype=complex)
    lam = np.asarray(lam, dtype=float)
    S = float(np.dot(lam, np.abs(z) ** 2))
    return 2 ** len(lam) * math.exp(-S) * grauert_dr_norm(z, lam)


def grauert_tube_spec(
    lam,
    mu,
    points_per_axis: int | None = None,
    n_samples: int | None = None,
    jitter_seed: int | None = None,
) -> ManifoldSpec:
    """Circle bundle of ``L*_lam`` over the flat torus, with ``M = diag(mu)``.

    The torus cell is centered, ``z_j in sqrt(2 pi)[-1/2, 1/2)^2``, which keeps
    ``exp(S)`` within ``exp(+-pi n_base)``.  The ``2 n_base`` real torus coordinates get ``points_per_axis`` midpoints
    each (or ``round(n_samples^(1/(2 n_base)))``).  The fiber angle carries one
    node of weight ``2 pi``: neither the pencil nor the density depends on it.
    The returned spec has ``n = n_base + 1``.
    """
    lam = [int(x) for x in lam]
    mu = [int(x) for x in mu]
    _check_int_pair(lam, mu)
    n_minus = sum(1 for x in lam if x < 0)
    if any(x > 0 for x in lam[:n_minus]) or any(x < 0 for x in lam[n_minus:]):
        raise SignPatternViolation(f"lambda must list negative entries first, got {lam}")
    nb = len(lam)
    if points_per_axis is None:
        if n_samples is None:
            raise ValueError("give points_per_axis or n_samples")
        points_per_axis = max(1, round(n_samples ** (1 / (2 * nb))))
    m = int(points_per_axis)

    unit = _lattice(2 * nb, m, jitter_seed)
    cell_area = (CELL / m) ** (2 * nb)
    Mform = HermitianForm.diag(mu)
    samples = []
    for i, u in enumerate(unit):
        x = (u - 0.5) * CELL
        z = x[0::2] + 1j * x[1::2]
        nrm = grauert_dr_norm(z, lam)
        L = HermitianForm.diag([v / nrm for v in lam])
        w = cell_area * 2 * math.pi * grauert_volume_density(z, lam)
        samples.append(PointSample(f"g{i}", tuple(float(v) for v in x) + (0.0,), PencilInstance(Mform, L), w))
    meta = {
        "kind": "grauert-tube",
        "lambda": ",".join(map(str, lam)),
        "mu": ",".join(map(str, mu)),
        "metric": GRAUERT_METRIC,
        "points_per_axis": str(m),
        "samples": str(len(samples)),
        "levi_identification": "L_p = diag(lambda)/||dr(p)|| on the n base directions",
        "values": "metric-relative",
    }
    return ManifoldSpec("grauert-tube", nb + 1, samples, meta)


def restrict_curvature(RL: HermitianForm, dr) -> HermitianForm:
    """Restrict ``RL`` to the kernel of ``v -> sum_j dr_j v_j``.

    The kernel basis comes from Gram-Schmidt on the standard basis projected
    off ``conj(dr)``, keeping the ``n - 1`` vectors with the largest residuals.
    """
    dr = np.asarray(dr, dtype=complex)
    nrm = np.linalg.norm(dr)
    if nrm == 0 or nrm < 1e-14 * max(1.0, RL.norm2):
        raise ZeroGradient("dr vanishes; the tangent space is not defined")
    w = dr.conj() / nrm
    n = len(dr)
    basis = []
    candidates = [np.eye(n, dtype=complex)[k] - w * np.vdot(w, np.eye(n)[k]) for k in range(n)]
    for _ in range(n - 1):
        best, best_norm = None, -1.0
        for c in candidates:
            r = c - sum(b * np.vdot(b, c) for b in basis) if basis else c
            rn = np.linalg.norm(r)
            if rn > best_norm:
                best, best_norm = r, rn
        basis.append(best / best_norm)
    U = np.stack(basis, axis=1)
    return RL.congruent(U)


@dataclass(frozen=True)
class BignessReport:
    relative_eigenvalues: tuple[float, ...]
    n_minus: int
    n_plus: int
    two_of_each_sign: bool
    negative_pair_equal: bool
    positive_pair_equal: bool
    r1_empty: bool | None
    r0_nonempty: bool | None

    @property
    def hypotheses_satisfied(self) -> bool:
        return self.two_of_each_sign and self.negative_pair_equal and self.positive_pair_equal

    @property
    def pattern_holds(self) -> bool:
        return bool(self.r1_empty) and bool(self.r0_nonempty)


def bigness_hypothesis_check(levi_X: HermitianForm, RL_X: HermitianForm, rtol: float = 1e-9) -> BignessReport:
    """Check the hypotheses of the bigness criterion in the embedded case.

    Levi eigenvalues are taken relative to ``RL_X = S S``: the spectrum of
    ``S^-1 levi S^-1``.  Negative ones are ordered by increasing modulus, then
    positive ones likewise; the multiplicity flags compare the first two of
    each group.  The signature sets of degree 0 and 1 for the pencil
    ``(RL_X, levi_X)`` are computed directly (``None`` when ``q`` is excluded).
    """
    ev_rl, V = np.linalg.eigh(RL_X.entries)
    if ev_rl.min() <= 0:
        raise NotPositiveDefinite(f"R^L restricted to X has eigenvalue {ev_rl.min():.3e}")
    s_inv = V @ np.diag(ev_rl**-0.5) @ V.conj().T
    rel = np.linalg.eigvalsh(s_inv @ levi_X.entries @ s_inv)
    neg = sorted((x for x in rel if x < 0), key=abs)
    pos = sorted((x for x in rel if x > 0), key=abs)
    if len(neg) + len(pos) != len(rel):
        raise DegenerateLevi("Levi form is degenerate")

    def close(a, b):
        return abs(a - b) <= rtol * max(abs(a), abs(b))

    p = PencilInstance(RL_X, levi_X)
    flags = {}
    for q in (0, 1):
        try:
            flags[q] = signature_set(p, q)
        except UnboundedSignatureSet:
            flags[q] = None
    return BignessReport(
        relative_eigenvalues=tuple(float(x) for x in neg + pos),
        n_minus=len(neg),
        n_plus=len(pos),
        two_of_each_sign=len(neg) >= 2 and len(pos) >= 2,
        negative_pair_equal=len(neg) >= 2 and close(neg[0], neg[1]),
        positive_pair_equal=len(pos) >= 2 and close(pos[0], pos[1]),
        r1_empty=None if flags[1] is None else flags[1].is_empty,
        r0_nonempty=None if flags[0] is None else flags[0].measure > 0,
    )


def trivialization_shift(sample: PointSample, t: float) -> PointSample:
    """Replace ``M`` by ``M + t L`` (a change of local trivializing section)."""
    if t == 0:
        return sample
    return replace(sample, pencil=sample.pencil.shifted(t))
