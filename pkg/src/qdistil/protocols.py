"""One-round distillation protocols.

Every protocol consumes two copies of a base pair and post-selects on
computational-basis measurements after bilateral CNOTs.  The filtered
protocols have closed-form outputs in terms of the concurrence
eigenvalues; ``bilateral_cnot_and_measure`` is the exact 16-dimensional
two-pair simulation that serves as their independent oracle.

Qubit register order for the two-pair space is (A1, B1, A2, B2): the
first pair is measured, the second pair (the CNOT controls) is kept.
"""
from dataclasses import dataclass

import numpy as np

from . import filtering, qstate
from .entanglement import concurrence_spectrum
from .errors import ZeroProbability

DEJMPS = "dejmps"
HORODECKI = "horodecki"
LOMM = "lomm"
ZINF = "zinf"
PROTOCOL_NAMES = (DEJMPS, HORODECKI, LOMM, ZINF)


def _cnot16(control, target):
    """CNOT embedded in the 4-qubit register (A1, B1, A2, B2)."""
    m = np.zeros((16, 16))
    for n in range(16):
        bits = [(n >> (3 - q)) & 1 for q in range(4)]
        if bits[control]:
            bits[target] ^= 1
        m[sum(b << (3 - q) for q, b in enumerate(bits)), n] = 1.0
    return m


_BILATERAL_CNOT = _cnot16(control=2, target=0) @ _cnot16(control=3, target=1)

# Contractions <xy|_(A1 B1) U for each measurement outcome: 4x16 maps from
# the joint space to the kept (A2, B2) pair.
_BRANCH = {}
for _x in (0, 1):
    for _y in (0, 1):
        k = np.zeros((4, 16))
        for _a2 in (0, 1):
            for _b2 in (0, 1):
                k[2 * _a2 + _b2, 8 * _x + 4 * _y + 2 * _a2 + _b2] = 1.0
        _BRANCH[f"{_x}{_y}"] = k @ _BILATERAL_CNOT


@dataclass(frozen=True)
class ProtocolOutcome:
    output_state: np.ndarray
    filter_prob: float  # per copy
    distil_prob: float
    overall_prob: float  # filter_prob**2 * distil_prob
    output_fidelity: float  # max diagonal Bell weight of the output


def _outcome(state, filter_prob, distil_prob):
    return ProtocolOutcome(
        output_state=state,
        filter_prob=float(filter_prob),
        distil_prob=float(distil_prob),
        overall_prob=float(filter_prob) ** 2 * float(distil_prob),
        output_fidelity=qstate.max_bell_weight(state),
    )


def bilateral_cnot_and_measure(pair1, pair2, keep=frozenset({"00", "11"})):
    """Exact two-pair distillation step.

    Forms the 16-dimensional product state, applies the bilateral CNOTs
    (second pair controls), measures the first pair in the computational
    basis and sums the branches named in ``keep`` (subset of {"00","11"}).
    Returns the normalized state of the kept pair and the total kept
    probability.  This is the oracle every closed-form path is tested
    against.
    """
    keep = set(keep)
    if not keep or not keep <= {"00", "11"}:
        raise ValueError(f"keep must be a nonempty subset of {{'00', '11'}}, got {keep!r}")
    joint = np.kron(pair1, pair2)
    out = np.zeros((4, 4), dtype=complex)
    for outcome in sorted(keep):
        k = _BRANCH[outcome]
        out += k @ joint @ k.conj().T
    p = out.trace().real
    if p <= 1e-15:
        raise ZeroProbability(f"kept branches have total probability {p:.2e}")
    return qstate.as_density(out / p), float(p)


def _canonically_arrange(rho):
    """Rotate so the correlation block is diagonal and the Bell weights
    sit in canonical order (largest on phi+, smallest on phi-)."""
    ua, ub = filtering._diagonalize_correlation(rho)
    rot = qstate.apply_local_unitary(rho, ua, ub)
    perm = filtering._ordering_permutation(qstate.bell_weights(rot))
    if perm != (0, 1, 2, 3):
        pa, pb = qstate.bell_permutation_unitary(perm)
        rot = qstate.apply_local_unitary(rot, pa, pb)
    return rot


def dejmps_round(rho):
    """Recurrence round: rotate, bilateral CNOT, keep matching outcomes.

    The pre-rotation diagonalizes the 3x3 correlation block of the
    R-matrix and interchanges Bell components so the largest weight sits
    on phi+ and the smallest on phi- (the fidelity-maximizing order for
    distillable inputs; ties resolve toward no interchange).
    """
    rho = qstate.as_density(rho)
    arranged = _canonically_arrange(rho)
    state, p = bilateral_cnot_and_measure(arranged, arranged, {"00", "11"})
    return _outcome(state, 1.0, p)


def _bell_diagonal_from_pairs(phi_pair, psi_pair):
    """Output of one post-selected round in terms of sector eigenvalue pairs."""
    a, b = phi_pair
    c, d = psi_pair
    weights = np.array([a * a + b * b, 2 * a * b, c * c + d * d, 2 * c * d])
    norm = weights.sum()
    rho = (
        weights[0] * qstate.BELL_PROJECTORS["phi+"]
        + weights[1] * qstate.BELL_PROJECTORS["phi-"]
        + weights[2] * qstate.BELL_PROJECTORS["psi+"]
        + weights[3] * qstate.BELL_PROJECTORS["psi-"]
    )
    return qstate.as_density(rho / norm), norm


def lomm_round(rho):
    """Filter both copies Bell-diagonal, then distill keeping {00, 11}.

    The filtered weights are the normalized concurrence eigenvalues of
    the input, arranged with the largest and smallest sharing the phi
    sector, so the closed-form output depends only on the spectrum:
    success probability ((l1+l4)^2 + (l2+l3)^2) / (sum l)^2 given the
    two filtered copies.

    Raises NotLoMMReducible for rank-deficient inputs.
    """
    rho = qstate.as_density(rho)
    nf = filtering.normal_form(rho)
    if nf.form != filtering.LOMM:
        from .errors import NotLoMMReducible

        raise NotLoMMReducible("base pair does not filter to Bell-diagonal form")
    lam = concurrence_spectrum(rho).lambdas
    p = lam / lam.sum()
    state, norm = _bell_diagonal_from_pairs((p[0], p[3]), (p[1], p[2]))
    return _outcome(state, nf.filter_prob, norm)


def zinf_round(rho, objective=filtering.MAX_PALL):
    """Filter both copies to Z-information form, distill keeping only {11}.

    Uses the filter parameters from optimize_zinf_filter; the output and
    post-selection probability follow in closed form from the sector
    concurrence eigenvalue pairs of the filtered state.  The success
    probability never exceeds 1/2 (a single kept outcome).
    """
    rho = qstate.as_density(rho)
    params = filtering.optimize_zinf_filter(rho, objective)
    _, sigma, pf = filtering.zinf_filter(rho, params)
    phi_pair, psi_pair = filtering.sector_lambdas(*filtering.zinf_state_params(sigma))
    state, norm = _bell_diagonal_from_pairs(phi_pair, psi_pair)
    return _outcome(state, pf, norm / 2)


def horodecki_round(rho):
    """Lift the fully entangled fraction above 1/2 by a one-sided filter
    on each copy, then run a recurrence round on the filtered pairs."""
    _, sigma, pf = filtering.horodecki_filter(rho)
    inner = dejmps_round(sigma)
    return ProtocolOutcome(
        output_state=inner.output_state,
        filter_prob=pf,
        distil_prob=inner.distil_prob,
        overall_prob=pf**2 * inner.distil_prob,
        output_fidelity=inner.output_fidelity,
    )


def protocol_round(name, rho, zinf_objective=filtering.MAX_PALL):
    """Run one round of a protocol selected by name."""
    if name == DEJMPS:
        return dejmps_round(rho)
    if name == HORODECKI:
        return horodecki_round(rho)
    if name == LOMM:
        return lomm_round(rho)
    if name == ZINF:
        return zinf_round(rho, zinf_objective)
    raise ValueError(f"unknown protocol {name!r}")
