"""Optimal unambiguous discrimination of up to three pure states, with dual certificates."""
from .certificate import DualCertificate, VerificationReport, build_certificate, verify
from .ensemble import Ensemble, build_ensemble, ensemble_from_gram, example_states, phase_profile
from .errors import UnsupportedCase, UnsupportedComplexCase, ValidationError
from .oracle import OracleResult, brute_force, certify_with_duality
from .povm import Povm, build_povm
from .solver import Branch, Solution, solve

__all__ = [
    "Branch",
    "DualCertificate",
    "Ensemble",
    "OracleResult",
    "Povm",
    "Solution",
    "UnsupportedCase",
    "UnsupportedComplexCase",
    "ValidationError",
    "VerificationReport",
    "brute_force",
    "build_certificate",
    "build_ensemble",
    "build_povm",
    "certify_with_duality",
    "ensemble_from_gram",
    "example_states",
    "phase_profile",
    "solve",
    "verify",
]
