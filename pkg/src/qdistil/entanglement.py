"""Wootters concurrence machinery.

The spin-flipped state ``rho~ = (Y x Y) rho* (Y x Y)`` defines the four
concurrence eigenvalues: the descending square roots of the eigenvalues
of ``rho rho~``.  Their ratios are invariant under local filtering, which
is what lets filtered-protocol outputs be predicted from the spectrum of
the unfiltered base pair.
"""
from typing import NamedTuple

import numpy as np

from . import qstate
from .errors import NumericalBreakdown, ZeroSpectrum

_YY = np.kron(qstate.Y, qstate.Y)

IMAG_TOL = 1e-9
NEG_TOL = -1e-10


class ConcurrenceSpectrum(NamedTuple):
    lambdas: np.ndarray  # descending, non-negative
    concurrence: float  # max(0, l1 - l2 - l3 - l4)


def tilde(rho):
    """Spin-flip: (Y x Y) rho* (Y x Y), itself a valid density matrix."""
    return _YY @ rho.conj() @ _YY


def concurrence_spectrum(rho):
    """Concurrence eigenvalues of a two-qubit state, sorted descending.

    Computed from the (non-Hermitian, but real-spectrum) product
    ``rho rho~``; eigenvalue dust with imaginary part above 1e-9 or real
    part below -1e-10 raises NumericalBreakdown.
    """
    evals = np.linalg.eigvals(rho @ tilde(rho))
    if np.abs(evals.imag).max() > IMAG_TOL:
        raise NumericalBreakdown(f"complex eigenvalue dust {np.abs(evals.imag).max():.2e} in rho*rho~")
    re = evals.real
    if re.min() < NEG_TOL:
        raise NumericalBreakdown(f"negative eigenvalue {re.min():.2e} in rho*rho~")
    lambdas = np.sqrt(np.clip(re, 0, None))
    lambdas[::-1].sort()
    concurrence = max(0.0, lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3])
    return ConcurrenceSpectrum(lambdas, float(concurrence))


def ratio_signature(spectrum):
    """(l2/l1, l3/l1, l4/l1); preserved by any successful local filter.

    Raises ZeroSpectrum when all eigenvalues vanish.
    """
    lam = spectrum.lambdas
    if lam[0] <= 0:
        raise ZeroSpectrum("all concurrence eigenvalues are zero")
    return tuple(lam[1:] / lam[0])
