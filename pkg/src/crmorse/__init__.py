"""Signature sets of Hermitian pencils and the Morse-bound integrals built on them."""

from .pencil import (
    DetPolynomial,
    HermitianForm,
    PencilInstance,
    SignatureSet,
    hermitian_eigenvalues,
    inertia,
    integrate_abs_det,
    local_density,
    pencil_det_poly,
    signature_set,
)

__version__ = "0.1.0"

__all__ = [
    "DetPolynomial",
    "HermitianForm",
    "PencilInstance",
    "SignatureSet",
    "__version__",
    "hermitian_eigenvalues",
    "inertia",
    "integrate_abs_det",
    "local_density",
    "pencil_det_poly",
    "signature_set",
]
