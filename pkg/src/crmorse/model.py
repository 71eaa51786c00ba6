"""Heisenberg-group model at a point.

The blow-up of the weight at ``p`` is the Gaussian weight

    Phi_eta(z) = -sqrt(2) eta sum_j lam_j |z_j|^2 + sum_{j,t} mu_{j,t} conj(z_j) z_t

on ``C^{n-1}``, whose complex Hessian is ``M(eta) = mu - sqrt(2) eta diag(lam)``.
The set of ``eta`` where ``M(eta)`` has inertia ``(q, 0, n-1-q)`` is the
signature set of the pencil ``(mu, -sqrt(2) diag(lam))`` in the variable
``eta``; under ``s = -sqrt(2) eta`` it becomes the signature set of
``(mu, diag(lam))``, and the measure ``dv(eta) = sqrt(2) d eta`` turns the
model integral into the pencil integral exactly.

Volume convention on ``C^{n-1}``: ``dv(z) = 2^{n-1} dx_1 ... dx_{2n-2}``, so
``int exp(-a |w|^2) dv(w) = 2 pi / a`` per coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.special import roots_laguerre

from .errors import EtaOutsideSet, NonDiagonalWeight
from .pencil import (
    HermitianForm,
    PencilInstance,
    SignatureSet,
    integrate_abs_det,
    signature_set,
)

SQRT2 = math.sqrt(2.0)
LAGUERRE_NODES = 64


@dataclass(frozen=True)
class ModelParams:
    """Levi eigenvalues ``lam``, weight Hessian ``mu`` and the ``theta`` coefficient ``beta``.

    ``beta`` is carried so a local expansion can be stored without loss; no
    computed quantity depends on it.
    """

    lam: tuple[float, ...]
    mu: HermitianForm
    beta: float = 0.0

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lam)
        if any(x == 0 for x in lam):
            raise ValueError(f"Levi eigenvalues must be nonzero, got {lam}")
        mu = self.mu if isinstance(self.mu, HermitianForm) else HermitianForm(self.mu)
        if mu.dim != len(lam):
            raise ValueError(f"mu is {mu.dim}x{mu.dim} but {len(lam)} Levi eigenvalues given")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def dim(self) -> int:
        return len(self.lam)

    @property
    def n(self) -> int:
        return self.dim + 1

    def eta_pencil(self) -> PencilInstance:
        return PencilInstance(self.mu, HermitianForm.diag([-SQRT2 * x for x in self.lam]))

    def s_pencil(self) -> PencilInstance:
        return PencilInstance(self.mu, HermitianForm.diag(self.lam))


def phi_eta(z, eta: float, params: ModelParams):
    """Model weight at ``z``; ``z`` may be one point or a stack ``(..., dim)``."""
    z = np.asarray(z, dtype=complex)
    lam = np.asarray(params.lam)
    # sum_{j,t} mu_{j,t} conj(z_j) z_t
    quad = np.einsum("...j,jt,...t->...", z.conj(), params.mu.entries, z).real
    val = -SQRT2 * eta * (np.abs(z) ** 2 @ lam) + quad
    return float(val) if val.ndim == 0 else val


def model_matrix(eta: float, params: ModelParams) -> HermitianForm:
    if eta == 0:
        return params.mu
    return HermitianForm(params.mu.entries - SQRT2 * eta * np.diag(params.lam))


@lru_cache(maxsize=256)
def model_signature_set(params: ModelParams, q: int) -> SignatureSet:
    """Set of ``eta`` at which the model matrix has inertia ``(q, 0, dim - q)``."""
    return signature_set(params.eta_pencil(), q)


def _eta_integral(params: ModelParams, q: int) -> float:
    """``int over R_q of |det M(eta)| dv(eta)`` with ``dv = sqrt(2) d eta``."""
    sset = model_signature_set(params, q)
    if sset.is_empty:
        return 0.0
    return SQRT2 * integrate_abs_det(params.eta_pencil(), sset)


def bergman_trace(z, eta: float, params: ModelParams, q: int) -> float:
    """Trace of the model Bergman kernel on the diagonal at ``z``.

    ``exp(Phi_eta(z)) (2 pi)^{-(n-1)} |det M(eta)|`` on the signature set and
    zero off it.
    """
    if not model_signature_set(params, q).contains(eta):
        return 0.0
    det = abs(float(np.linalg.det(model_matrix(eta, params).entries).real))
    return math.exp(phi_eta(z, eta, params)) * det / (2 * math.pi) ** params.dim


def extremal_value(params: ModelParams, q: int) -> float:
    """``(2 pi)^{-n} int over R_q of |det M(eta)| sqrt(2) d eta``."""
    return _eta_integral(params, q) / (2 * math.pi) ** params.n


def substitution_check(params: ModelParams, q: int) -> tuple[float, float, float]:
    """Model integral in ``eta`` versus pencil integral in ``s``, computed separately.

    Returns ``(model_value, pencil_value, |difference|)`` for the integrals
    without the ``(2 pi)^{-n}`` factor.
    """
    model_value = _eta_integral(params, q)
    p = params.s_pencil()
    sset = signature_set(p, q)
    pencil_value = 0.0 if sset.is_empty else integrate_abs_det(p, sset)
    return model_value, pencil_value, abs(model_value - pencil_value)


def harmonic_element_sq(z: np.ndarray, eta: float, params: ModelParams, q: int) -> np.ndarray:
    """``|alpha(z, eta)|^2`` for the explicit harmonic ``(0, q)``-form, diagonal ``mu`` only.

    ``alpha = C0 |det M(eta)| exp(sum over negative nu_j of nu_j |z_j|^2)
    d conj(z_{j1}) ^ ... ^ d conj(z_{jq})`` where ``nu_j = mu_jj - sqrt(2) eta
    lam_j`` and ``C0 = (2 pi)^{1 - n/2} I^{-1/2}``, ``I`` the model integral.
    The frame is orthonormal, so the form part has norm one.  ``z`` may be a
    stack of points with shape ``(..., dim)``.
    """
    return np.exp(_harmonic_log_sq(z, eta, params, q))


def _harmonic_log_sq(z, eta: float, params: ModelParams, q: int):
    """``log |alpha|^2``; ``-inf`` where ``det M(eta) = 0``."""
    nu = _diagonal_nu(params, eta)
    det = abs(float(np.prod(nu)))
    total = _eta_integral(params, q)
    c0_sq = (2 * math.pi) ** (2 - params.n) / total
    expo = np.abs(np.asarray(z)) ** 2 @ np.where(nu < 0, nu, 0.0)
    with np.errstate(divide="ignore"):
        return math.log(c0_sq) + 2 * np.log(det) + 2 * expo


def _diagonal_nu(params: ModelParams, eta: float) -> np.ndarray:
    mu = params.mu.entries
    if np.any(mu - np.diag(np.diag(mu)) != 0):
        raise NonDiagonalWeight("harmonic element is only implemented for diagonal mu")
    return np.diag(mu).real - SQRT2 * eta * np.asarray(params.lam)


def harmonic_norm_check(params: ModelParams, q: int, eta: float) -> tuple[float, float]:
    """Weighted norm of the harmonic element by quadrature and in closed form.

    Quadrature: ``int |alpha|^2 exp(-Phi_eta) dv(z)`` with radial Gauss-Laguerre
    (64 nodes) per complex coordinate, the integrand being evaluated from
    :func:`harmonic_element_sq` and :func:`phi_eta` at the nodes.  Closed form:
    ``2 pi |det M(eta)| / I``.  At a root of ``det M(eta)`` both are zero.
    """
    sset = model_signature_set(params, q)
    nu = _diagonal_nu(params, eta)
    tol = 1e-12 * (1 + float(np.abs(nu).max()))
    degenerate = bool(np.any(np.abs(nu) <= tol))
    if not sset.contains(eta):
        on_edge = degenerate and any(lo <= eta <= hi for lo, hi in sset.intervals)
        if on_edge:
            return 0.0, 0.0
        raise EtaOutsideSet(f"eta={eta!r} is not in the signature set of degree {q}")

    total = _eta_integral(params, q)
    closed = 2 * math.pi * abs(float(np.prod(nu))) / total

    x, w = roots_laguerre(LAGUERRE_NODES)
    scale = np.abs(nu)
    # per coordinate: u = |z_j|^2 = x / scale_j; dv(z_j) = 2 r dr dtheta = 2 pi du
    grids = np.meshgrid(*[x / c for c in scale], indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=-1)
    wgrid = np.ones(1)
    for c in scale:
        wgrid = np.multiply.outer(wgrid, 2 * math.pi * w / c).ravel()
    xsum = u @ scale  # undo the e^{-x} weight
    z = np.sqrt(u).astype(complex)
    # combine in the log domain: |alpha|^2 and exp(-Phi) under- and overflow separately
    log_f = _harmonic_log_sq(z, eta, params, q)
    phi = phi_eta(z, eta, params)
    quad = float(np.dot(wgrid, np.exp(log_f - phi + xsum)))
    return quad, closed
