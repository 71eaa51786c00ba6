"""Hermitian pencils ``M + s L`` and their signature sets.

For a pair of Hermitian forms on the CR tangent space (the curvature-type
form ``M`` and the Levi form ``L``) the signature set for degree ``q`` is the
set of real ``s`` at which ``M + s L`` has exactly ``q`` negative and
``dim - q`` positive eigenvalues.  Between two consecutive real roots of
``det(M + s L)`` the inertia is constant, so the set is a finite union of open
intervals whose endpoints are roots.  When the Levi form is nondegenerate and
``q`` differs from both of its inertia counts, every such interval lies in
``[-R, R]`` with ``R = ||M||_2 / sigma_min(L)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as P

from .errors import (
    InconsistentInput,
    QOutOfRange,
    SingularLevi,
    UnboundedSignatureSet,
)

# Relative tolerances; see the module docstring of each routine for use.
LEVI_DEGENERACY_RTOL = 1e-10
INERTIA_RTOL = 1e-10
ROOT_MERGE_RTOL = 1e-8
# QZ returns a defective real double root as a conjugate pair with imaginary
# part ~ sqrt(eps); keeping near-real pairs only inserts harmless extra cuts.
ROOT_IMAG_RTOL = 1e-6
# Newton steps larger than this (relative to 1 + R) mean the start was not a root.
ROOT_POLISH_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class HermitianForm:
    """A Hermitian matrix in a fixed orthonormal frame.

    The constructor symmetrizes its input as ``(A + A^H) / 2``, which makes
    ``entries[j, t] == conj(entries[t, j])`` hold bit for bit.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
        h = (a + a.conj().T) / 2
        h.flags.writeable = False
        object.__setattr__(self, "entries", h)

    @classmethod
    def diag(cls, values) -> HermitianForm:
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def identity(cls, dim: int) -> HermitianForm:
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def norm2(self) -> float:
        return float(np.linalg.norm(self.entries, 2))

    def __add__(self, other: HermitianForm) -> HermitianForm:
        return HermitianForm(self.entries + other.entries)

    def __mul__(self, c: float) -> HermitianForm:
        return HermitianForm(float(c) * self.entries)

    __rmul__ = __mul__

    def congruent(self, p: np.ndarray) -> HermitianForm:
        """Return ``P^H H P``."""
        p = np.asarray(p, dtype=complex)
        return HermitianForm(p.conj().T @ self.entries @ p)

    def __eq__(self, other):
        if not isinstance(other, HermitianForm):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(
            np.array_equal(self.entries, other.entries)
        )

    def __hash__(self):
        return hash((self.entries.shape, self.entries.tobytes()))


def hermitian_eigenvalues(h: HermitianForm) -> np.ndarray:
    """Eigenvalues of ``h`` in ascending order."""
    return np.linalg.eigvalsh(h.entries)


def inertia(h: HermitianForm, tol: float | None = None) -> tuple[int, int, int]:
    """Counts of eigenvalues below ``-tol``, inside ``[-tol, tol]`` and above ``tol``.

    ``tol`` defaults to ``1e-10 * ||h||_2``.
    """
    if tol is None:
        tol = INERTIA_RTOL * h.norm2
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    ev = hermitian_eigenvalues(h)
    neg = int(np.count_nonzero(ev < -tol))
    pos = int(np.count_nonzero(ev > tol))
    return neg, h.dim - neg - pos, pos


@dataclass(frozen=True, eq=False)
class PencilInstance:
    """The pair ``(M, L)`` at one point; ``L`` must be nondegenerate."""

    M: HermitianForm
    L: HermitianForm

    def __post_init__(self):
        if not isinstance(self.M, HermitianForm):
            object.__setattr__(self, "M", HermitianForm(self.M))
        if not isinstance(self.L, HermitianForm):
            object.__setattr__(self, "L", HermitianForm(self.L))
        if self.M.dim != self.L.dim:
            raise ValueError(f"M is {self.M.dim}x{self.M.dim} but L is {self.L.dim}x{self.L.dim}")
        if self.sigma_min_L < LEVI_DEGENERACY_RTOL * self.L.norm2 or self.L.norm2 == 0:
            raise SingularLevi(
                f"sigma_min(L) = {self.sigma_min_L:.3e} below "
                f"{LEVI_DEGENERACY_RTOL:g} * ||L||_2 = {self.L.norm2:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.M.dim

    @cached_property
    def _levi_spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.L.entries)

    @property
    def sigma_min_L(self) -> float:
        return float(np.abs(self._levi_spectrum).min())

    @cached_property
    def levi_signature(self) -> tuple[int, int]:
        """``(n_minus, n_plus)`` of the Levi form."""
        n_minus = int(np.count_nonzero(self._levi_spectrum < 0))
        return n_minus, self.dim - n_minus

    @cached_property
    def root_bound(self) -> float:
        # M + sL singular => |s| sigma_min(L) <= ||M v|| <= ||M||_2
        return self.M.norm2 / self.sigma_min_L

    @cached_property
    def det_poly(self) -> DetPolynomial:
        return pencil_det_poly(self)

    def at(self, s: float) -> HermitianForm:
        return HermitianForm(self.M.entries + s * self.L.entries)

    def det(self, s):
        """``det(M + s L)`` for a scalar or a 1-d array of ``s``."""
        s_arr = np.asarray(s, dtype=float)
        H = self.M.entries + s_arr[..., None, None] * self.L.entries
        out = np.linalg.det(H).real
        return float(out) if out.ndim == 0 else out

    def inertias(self, s_values, tol: float | None = None) -> list[tuple[int, int, int]]:
        """Inertia of ``M + s L`` at each ``s``; ``tol`` defaults to ``1e-10 ||M + sL||_2``."""
        s_arr = np.asarray(s_values, dtype=float)
        ev = np.linalg.eigvalsh(self.M.entries + s_arr[:, None, None] * self.L.entries)
        if tol is None:
            t = INERTIA_RTOL * np.abs(ev).max(axis=1)
        else:
            t = np.full(len(s_arr), float(tol))
        neg = (ev < -t[:, None]).sum(axis=1)
        pos = (ev > t[:, None]).sum(axis=1)
        return [(int(a), self.dim - int(a) - int(b), int(b)) for a, b in zip(neg, pos)]

    def shifted(self, t: float) -> PencilInstance:
        """``(M + t L, L)``: the effect of changing the local trivialization."""
        return PencilInstance(self.M + t * self.L, self.L)

    def scaled(self, c: float) -> PencilInstance:
        return PencilInstance(c * self.M, c * self.L)

    def congruent(self, p: np.ndarray) -> PencilInstance:
        return PencilInstance(self.M.congruent(p), self.L.congruent(p))


@dataclass(frozen=True)
class DetPolynomial:
    """``det(M + s L)`` as power-basis coefficients, lowest degree first."""

    coefficients: tuple[float, ...]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @cached_property
    def _deriv(self) -> np.ndarray:
        return P.polyder(self.coefficients)

    @cached_property
    def _antideriv(self) -> np.ndarray:
        return P.polyint(self.coefficients)

    @cached_property
    def _abs_coeffs(self) -> np.ndarray:
        return np.abs(self.coefficients)

    def __call__(self, s):
        return P.polyval(s, self.coefficients)

    def derivative(self, s):
        return P.polyval(s, self._deriv)

    def antiderivative(self, s):
        return P.polyval(s, self._antideriv)

    def scale_at(self, s: float) -> float:
        """Size of the largest term at ``s``, the yardstick for residuals."""
        c = self._abs_coeffs
        return float(np.max(c * max(1.0, abs(s)) ** np.arange(len(c))))


def _chebyshev_nodes(k: int) -> np.ndarray:
    j = np.arange(k)
    return np.cos((2 * j + 1) * np.pi / (2 * k))


def pencil_det_poly(p: PencilInstance) -> DetPolynomial:
    """Interpolate ``det(M + s L)`` at ``dim + 1`` Chebyshev nodes in ``[-R, R]``.

    The Vandermonde system is solved in the scaled variable ``t = s / rho``
    (``rho = max(R, 1)``) and the coefficients are rescaled afterwards, which
    keeps the system well conditioned for every ``R``.
    """
    d = p.dim
    rho = max(p.root_bound, 1.0)
    t = _chebyshev_nodes(d + 1)
    values = p.det(rho * t)
    v = np.vander(t, d + 1, increasing=True)
    ct = np.linalg.solve(v, values)
    coeffs = ct / rho ** np.arange(d + 1)
    return DetPolynomial(tuple(float(c) for c in coeffs))


@dataclass(frozen=True)
class SignatureSet:
    """Disjoint open intervals on which ``M + s L`` has inertia ``(q, 0, dim - q)``.

    ``roots`` holds every real root of ``det(M + s L)`` (multiplicities
    collapsed); ``gap_inertias`` has one entry per gap of the real line cut at
    ``roots``, the first and last being the two outer rays.
    """

    q: int
    intervals: tuple[tuple[float, float], ...]
    roots: tuple[float, ...]
    bound: float
    gap_inertias: tuple[tuple[int, int, int], ...] = field(default=(), compare=False)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    def contains(self, s: float) -> bool:
        return any(lo < s < hi for lo, hi in self.intervals)

    def translated(self, t: float) -> SignatureSet:
        return SignatureSet(
            self.q,
            tuple((lo + t, hi + t) for lo, hi in self.intervals),
            tuple(r + t for r in self.roots),
            self.bound + abs(t),
            self.gap_inertias,
        )


def check_q(p: PencilInstance, q: int) -> None:
    """Raise unless ``q`` indexes a bounded signature set of ``p``."""
    if not 0 <= q <= p.dim:
        raise QOutOfRange(f"q={q} outside [0, {p.dim}]")
    n_minus, n_plus = p.levi_signature
    if q in (n_minus, n_plus):
        raise UnboundedSignatureSet(
            f"q={q} equals an inertia count of the Levi form "
            f"(n_minus={n_minus}, n_plus={n_plus}); the set contains a ray"
        )


def _merge_close(values: np.ndarray, gap: float) -> list[float]:
    merged: list[list[float]] = []
    for v in np.sort(values):
        if merged and v - merged[-1][-1] <= gap:
            merged[-1].append(float(v))
        else:
            merged.append([float(v)])
    return [float(np.mean(c)) for c in merged]


def real_roots(p: PencilInstance) -> list[float]:
    """Sorted real roots of ``det(M + s L)`` with multiplicities collapsed.

    Roots are the generalized eigenvalues of ``(M, -L)`` (QZ), which keeps
    semisimple multiple roots accurate to rounding.  Each is then Newton
    polished on the determinant itself, using
    ``d/ds log det(M + sL) = tr((M + sL)^-1 L)``; a step is kept only if it
    shrinks ``|det|``.  The power-basis polynomial is too cancellation-prone
    near clustered roots to polish against.
    """
    R = p.root_bound
    M, L = p.M.entries, p.L.entries
    w = scipy.linalg.eigvals(M, -L)
    w = w[np.isfinite(w)]
    cand = w.real[np.abs(w.imag) <= ROOT_IMAG_RTOL * (1 + R)]
    cand = np.clip(cand, -R, R)
    max_step = ROOT_POLISH_RTOL * (1 + R)

    polished = []
    for r in cand:
        r = float(r)
        H = M + r * L
        res = abs(np.linalg.det(H))
        for _ in range(4):
            try:
                g = np.trace(np.linalg.solve(H, L)).real
            except np.linalg.LinAlgError:
                break
            if not np.isfinite(g) or g == 0:
                break
            step = 1.0 / g
            if abs(step) > max_step:
                break
            H_new = M + (r - step) * L
            res_new = abs(np.linalg.det(H_new))
            if not res_new < res:
                break
            r, H, res = r - step, H_new, res_new
        polished.append(r)
    return _merge_close(np.array(polished), ROOT_MERGE_RTOL * (1 + R))


def signature_set(p: PencilInstance, q: int, tol: float | None = None) -> SignatureSet:
    """Signature set of degree ``q``.

    Inertia is sampled once per gap between consecutive roots (at the
    midpoint) and on the two outer rays at ``-(R+1)`` and ``R+1``; only
    bounded gaps can be collected.  ``tol`` is the inertia zero tolerance,
    relative to ``||M + sL||_2`` when omitted.
    """
    check_q(p, q)
    R = p.root_bound
    roots = real_roots(p)
    cuts = [-(R + 1.0), *roots, R + 1.0]
    probes = [-(R + 1.0)]
    probes += [(a + b) / 2 for a, b in zip(roots[:-1], roots[1:])]
    probes.append(R + 1.0)
    inertias = tuple(p.inertias(probes, tol))

    want = (q, 0, p.dim - q)
    intervals = []
    # gap k (1 <= k <= len(roots)-1) spans roots[k-1]..roots[k]
    for k in range(1, len(probes) - 1):
        if inertias[k] == want:
            lo, hi = cuts[k], cuts[k + 1]
            if intervals and intervals[-1][1] == lo:
                # spurious cut from a near-real complex pair
                intervals[-1] = (intervals[-1][0], hi)
            else:
                intervals.append((lo, hi))
    return SignatureSet(q, tuple(intervals), tuple(roots), R, inertias)


def _interval_integral(p: PencilInstance, lo: float, hi: float) -> float:
    """``int_lo^hi det(M + sL) ds`` exactly, in a basis local to the interval.

    ``det`` is interpolated at ``dim + 1`` Chebyshev nodes of ``[lo, hi]``
    by a polynomial in ``u = (s - c) / h``; its antiderivative over
    ``[-1, 1]`` is exact.  Working in ``u`` avoids the cancellation that the
    global power basis suffers on short intervals far from the origin.
    """
    d = p.dim
    c, h = (lo + hi) / 2, (hi - lo) / 2
    u = _chebyshev_nodes(d + 1)
    a = np.linalg.solve(np.vander(u, d + 1, increasing=True), p.det(c + h * u))
    k = np.arange(0, d + 1, 2)
    return float(h * np.dot(a[k], 2.0 / (k + 1)))


def integrate_abs_det(p: PencilInstance, sset: SignatureSet) -> float:
    """``sum over intervals of |int det(M + sL) ds|`` with an exact polynomial antiderivative.

    ``det`` keeps one sign on each interval, so the absolute value can be taken
    after integrating.
    """
    poly = p.det_poly
    for r in sset.roots:
        if abs(poly(r)) > 1e-7 * poly.scale_at(r):
            raise InconsistentInput(
                f"root {r!r} of the signature set does not annihilate det(M + sL) "
                f"(residual {abs(poly(r)):.3e}); set and pencil do not match"
            )
    total = 0.0
    for lo, hi in sset.intervals:
        total += abs(_interval_integral(p, lo, hi))
    return float(total)


def local_density(p: PencilInstance, q: int, n: int) -> float:
    """``(2 pi)^-n * int over the signature set of |det(M + s L)| ds``.

    ``n`` is the manifold parameter with ``dim X = 2n - 1``, so ``n = dim + 1``.
    """
    if n != p.dim + 1:
        raise ValueError(f"n must equal dim + 1 = {p.dim + 1}, got {n}")
    sset = signature_set(p, q)
    if sset.is_empty:
        return 0.0
    return integrate_abs_det(p, sset) / (2 * math.pi) ** n
