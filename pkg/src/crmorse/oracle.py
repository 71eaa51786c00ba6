"""Brute-force validators.

The grid scan never calls into the root finder, the determinant polynomial or
the interval integrator of :mod:`crmorse.pencil`; inertia and determinants are
recomputed from scratch with a batched LDL^H factorization so that agreement
between the two routes is evidence rather than tautology.  (``mc_integral``
checks the outer volume sum only and may borrow the analytic inner integral.)
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import roots_laguerre

from .errors import NonNegativeExponent, SingularLevi

# A pivot this small relative to the row scale means LDL^H without pivoting
# may be inaccurate; those grid points are redone with an eigensolver.
_PIVOT_RTOL = 1e-8
_ZERO_RTOL = 1e-12


@dataclass(frozen=True)
class GridScanResult:
    s_values: np.ndarray
    inertias: np.ndarray  # (n_points, 3): neg, zero, pos
    riemann_integral: float
    step: float


def _ldl_inertia_det(M: np.ndarray, L: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inertia and determinant of ``M + s L`` for every ``s`` in a grid.

    Unpivoted LDL^H on the lower triangle, vectorized over the grid (entry
    ``(i, j)`` is a length-``len(s)`` vector).  By Sylvester's law the signs of
    the pivots are the inertia and their product is the determinant.  Points
    with a tiny pivot are redone with ``eigvalsh``.
    """
    d = M.shape[0]
    n = len(s)
    A = [[M[i, j] + s * L[i, j] for j in range(i + 1)] for i in range(d)]
    scale = np.zeros(n)
    for i in range(d):
        for j in range(i + 1):
            np.maximum(scale, np.abs(A[i][j]), out=scale)
    scale[scale == 0] = 1.0

    piv = np.empty((d, n))
    bad = np.zeros(n, dtype=bool)
    for k in range(d):
        dk = A[k][k].real.copy()
        tiny = np.abs(dk) <= _PIVOT_RTOL * scale
        bad |= tiny
        dk[tiny] = 1.0
        piv[k] = dk
        ell = [A[i][k] / dk for i in range(k + 1, d)]
        for a, i in enumerate(range(k + 1, d)):
            for b, j in enumerate(range(k + 1, i + 1)):
                A[i][j] = A[i][j] - ell[a] * A[j][k].conj()

    det = piv.prod(axis=0)
    tol = _ZERO_RTOL * scale
    neg = (piv < -tol).sum(axis=0)
    pos = (piv > tol).sum(axis=0)
    if bad.any():
        H = M[None, :, :] + s[bad, None, None] * L[None, :, :]
        ev = np.linalg.eigvalsh(H)
        det[bad] = ev.prod(axis=1)
        t = tol[bad][:, None]
        neg[bad] = (ev < -t).sum(axis=1)
        pos[bad] = (ev > t).sum(axis=1)
    inert = np.stack([neg, d - neg - pos, pos], axis=1)
    return inert, det


def grid_signature_scan(M, L, q: int, n_points: int = 100_000) -> GridScanResult:
    """Scan ``s`` over a uniform grid on ``[-R-1, R+1]``.

    ``M`` and ``L`` are plain arrays (or anything with an ``entries`` array).
    The Riemann sum adds ``step * |det(M + sL)|`` at every grid point whose
    inertia is exactly ``(q, 0, dim - q)``.
    """
    if n_points < 1000:
        raise ValueError("n_points must be at least 1000")
    M = np.asarray(getattr(M, "entries", M), dtype=complex)
    L = np.asarray(getattr(L, "entries", L), dtype=complex)
    M = (M + M.conj().T) / 2
    L = (L + L.conj().T) / 2
    d = M.shape[0]
    sv_L = np.linalg.svd(L, compute_uv=False)
    if sv_L.min() < 1e-10 * sv_L.max():
        raise SingularLevi("Levi form is numerically singular")
    R = np.linalg.svd(M, compute_uv=False).max() / sv_L.min()

    s = np.linspace(-R - 1.0, R + 1.0, n_points)
    step = float(s[1] - s[0])
    inert, det = _ldl_inertia_det(M, L, s)
    hit = (inert[:, 0] == q) & (inert[:, 1] == 0) & (inert[:, 2] == d - q)
    total = step * math.fsum(np.abs(det[hit]))
    return GridScanResult(s, inert, float(total), step)


def grid_intervals(scan: GridScanResult, q: int) -> list[tuple[float, float]]:
    """Maximal runs of grid points with inertia ``(q, 0, dim - q)``.

    Each run is widened by half a step on both sides, so endpoints are within
    one step of the true roots.
    """
    d = int(scan.inertias[0].sum())
    hit = (scan.inertias[:, 0] == q) & (scan.inertias[:, 1] == 0) & (scan.inertias[:, 2] == d - q)
    edges = np.diff(np.concatenate([[0], hit.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    h = scan.step / 2
    return [(float(scan.s_values[a] - h), float(scan.s_values[b] + h)) for a, b in zip(starts, stops)]


def companion_roots(coefficients) -> np.ndarray:
    """Roots of a polynomial (coefficients lowest degree first) via its companion matrix."""
    c = np.trim_zeros(np.asarray(coefficients, dtype=complex), "b")
    deg = len(c) - 1
    if deg < 1:
        return np.array([], dtype=complex)
    comp = np.zeros((deg, deg), dtype=complex)
    comp[1:, :-1] = np.eye(deg - 1)
    comp[:, -1] = -c[:-1] / c[-1]
    return np.linalg.eigvals(comp)


def mc_integral(spec, q: int, n_draws: int, seed: int, inner: str = "analytic") -> tuple[float, float]:
    """Monte Carlo estimate of ``sum_i dm_i f_i`` over the samples of ``spec``.

    Sample indices are drawn uniformly, so ``N * mean(dm_i f_i)`` is unbiased
    for the lattice sum that :func:`crmorse.bounds.global_integral` computes by
    pairwise reduction.  ``f_i`` is the per-point signature-set integral, taken
    from the exact interval integrator (``inner="analytic"``) or from a
    20 000-point grid scan (``inner="grid"``).
    """
    if n_draws < 100:
        raise ValueError("n_draws must be at least 100")
    if inner not in ("analytic", "grid"):
        raise ValueError(f"unknown inner integrator {inner!r}")
    from .pencil import integrate_abs_det, signature_set

    rng = np.random.default_rng(seed)
    samples = spec.samples
    idx = rng.integers(0, len(samples), size=n_draws)
    cache: dict[int, float] = {}
    vals = np.empty(n_draws)
    for k, i in enumerate(idx):
        i = int(i)
        if i not in cache:
            p = samples[i].pencil
            if inner == "grid":
                f = grid_signature_scan(p.M, p.L, q, n_points=20_000).riemann_integral
            else:
                f = integrate_abs_det(p, signature_set(p, q))
            cache[i] = samples[i].dm_weight * f
        vals[k] = cache[i]
    n = len(samples)
    mean = float(np.mean(vals))
    spread = float(np.std(vals, ddof=1))
    if spread <= 1e-14 * abs(mean):
        spread = 0.0
    return n * mean, n * spread / math.sqrt(n_draws)


def gaussian_norm_quadrature(exponents, dim: int | None = None, n_nodes: int = 64) -> float:
    """``int exp(sum_j a_j |z_j|^2) dv(z)`` over ``C^dim`` with ``dv = 2^dim dx dy``.

    Tensor Gauss-Laguerre in ``u_j = |a_j| |z_j|^2`` per complex coordinate;
    the integrand is radial in each coordinate, so the angle contributes
    ``2 pi`` and ``dv`` contributes ``2 * (1/2) du``.
    """
    a = np.asarray(exponents, dtype=float)
    if dim is not None and len(a) != dim:
        raise ValueError(f"expected {dim} exponents, got {len(a)}")
    if np.any(a >= 0):
        raise NonNegativeExponent(f"all exponents must be negative, got {a.tolist()}")
    x, w = roots_laguerre(n_nodes)
    total = 1.0
    for aj in a:
        c = -aj
        u = x / c
        # weight e^{-x} absorbed: f(u) e^{x} with f = e^{a u}
        f = np.exp(aj * u + x)
        total *= 2 * np.pi * float(np.dot(w, f)) / c
    return total
