"""Entanglement pumping with the Z-information filter folded into gates.

Instead of filtering the base pair with an ancilla-assisted POVM, each
pumping round interleaves two-qubit unitaries with post-selected
computational-basis measurements of the base-pair qubits; the identity

    <1|_A1 V_A |1><1|_A1 U_A  =  X_A2 <1|_A1 CX g_A1

shows one round emulates "filter, CNOT, keep the 1 outcome" exactly.
One round (M) injects local information into the pumped pair; the
trailing bit-flip reverses the preferred subspace so an even number of
rounds cancels it.  The even-round composite E = M o M acts as weighted
parity projections with sector dephasing,

    E(sigma) ~ mu+ P+ D+(sigma) P+  +  mu- P- D-(sigma) P-,

with (mu, q) determined by the sector concurrence eigenvalue pairs of
the filtered base pair.  All public results use this closed form; the
explicit gate pipeline is retained as the test/reporting oracle.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import filtering, qstate
from .errors import DegenerateChannel, NotUnitary, ZeroProbability

_I4 = np.eye(4, dtype=complex)
P_PLUS = (_I4 + np.kron(qstate.Z, qstate.Z)) / 2
P_MINUS = (_I4 - np.kron(qstate.Z, qstate.Z)) / 2
_Z_A = np.kron(qstate.Z, qstate.I2)

PLUS_PLUS = qstate.pure(np.kron([1, 1], [1, 1]))


@dataclass(frozen=True)
class FilterDecomposition:
    """Row decomposition g = |1> a0 <K0| + |0> a1 <K1| of each filter side.

    The kets are normalized but generally non-orthogonal; amplitudes are
    real non-negative (phases absorbed into the kets) and bounded by the
    filter's largest singular value.  ``degenerate`` flags a zero row,
    whose ket is an arbitrary placeholder.
    """

    alpha0: float
    alpha1: float
    beta0: float
    beta1: float
    ket_a0: np.ndarray
    ket_a1: np.ndarray
    ket_b0: np.ndarray
    ket_b1: np.ndarray
    degenerate: bool = False


def _row_decompose(row):
    norm = float(np.linalg.norm(row))
    if norm < 1e-300:
        return 0.0, qstate.KET0.copy(), True
    return norm, row.conj() / norm, False


def decompose_filter(f):
    """Decompose both sides of a local filter into measurement rows.

    alpha0/ket0 reproduce the <1| row and alpha1/ket1 the <0| row, the
    order in which they are consumed by the pumping unitaries.
    """
    fa, fb = f
    a0, ka0, d1 = _row_decompose(np.asarray(fa, dtype=complex)[1, :])
    a1, ka1, d2 = _row_decompose(np.asarray(fa, dtype=complex)[0, :])
    b0, kb0, d3 = _row_decompose(np.asarray(fb, dtype=complex)[1, :])
    b1, kb1, d4 = _row_decompose(np.asarray(fb, dtype=complex)[0, :])
    return FilterDecomposition(a0, a1, b0, b1, ka0, ka1, kb0, kb1, d1 or d2 or d3 or d4)


def reconstruct_filter(d):
    """Inverse of decompose_filter (exact up to rounding)."""
    fa = d.alpha0 * np.outer(qstate.KET1, d.ket_a0.conj()) + d.alpha1 * np.outer(
        qstate.KET0, d.ket_a1.conj()
    )
    fb = d.beta0 * np.outer(qstate.KET1, d.ket_b0.conj()) + d.beta1 * np.outer(
        qstate.KET0, d.ket_b1.conj()
    )
    return filtering.LocalFilter(fa, fb)


def orthogonal_ket(ket):
    """The ket orthogonal to a normalized 2-vector, phase-fixed so its
    first (else second) nonzero component is real non-negative."""
    v = np.array([-np.conj(ket[1]), np.conj(ket[0])], dtype=complex)
    anchor = v[0] if abs(v[0]) > 1e-12 else v[1]
    return v * (np.conj(anchor) / abs(anchor))


def w_unitary(c):
    """A deterministic one-qubit unitary with <1|W|1> = c.

    Completed by Gram-Schmidt with the (0, 0) entry real non-negative.
    Raises NotUnitary when |c| > 1.
    """
    c = complex(c)
    if abs(c) > 1 + 1e-12:
        raise NotUnitary(f"|c| = {abs(c)} exceeds 1")
    s = np.sqrt(max(0.0, 1.0 - abs(c) ** 2))
    phase = c / abs(c) if abs(c) > 0 else 1.0
    return np.array([[abs(c), s], [-s * phase, c]], dtype=complex)


def build_pump_unitaries(d):
    """The four two-qubit unitaries of one pumping round.

    Each acts on (base-pair qubit, pumped qubit) at one location:
    U maps the filter-row kets onto the measurement basis conditioned on
    the pumped qubit, and V re-prepares the measured qubit through
    W(alpha) while flipping the pumped qubit.
    """
    ua = np.kron(
        np.outer(qstate.KET1, d.ket_a0.conj()) + np.outer(qstate.KET0, orthogonal_ket(d.ket_a0).conj()),
        np.diag([1.0, 0.0]).astype(complex),
    ) + np.kron(
        np.outer(qstate.KET1, d.ket_a1.conj()) + np.outer(qstate.KET0, orthogonal_ket(d.ket_a1).conj()),
        np.diag([0.0, 1.0]).astype(complex),
    )
    ub = np.kron(
        np.outer(qstate.KET1, d.ket_b0.conj()) + np.outer(qstate.KET0, orthogonal_ket(d.ket_b0).conj()),
        np.diag([1.0, 0.0]).astype(complex),
    ) + np.kron(
        np.outer(qstate.KET1, d.ket_b1.conj()) + np.outer(qstate.KET0, orthogonal_ket(d.ket_b1).conj()),
        np.diag([0.0, 1.0]).astype(complex),
    )
    flip_up = np.outer(qstate.KET1, qstate.KET0)  # |1><0|
    flip_dn = np.outer(qstate.KET0, qstate.KET1)  # |0><1|
    va = np.kron(w_unitary(d.alpha0), flip_up) + np.kron(w_unitary(d.alpha1), flip_dn)
    vb = np.kron(w_unitary(d.beta0), flip_up) + np.kron(w_unitary(d.beta1), flip_dn)
    for u in (ua, ub, va, vb):
        if np.abs(u.conj().T @ u - _I4).max() > 1e-12:
            raise NotUnitary("pump unitary construction failed the unitarity check")
    return ua, ub, va, vb


class PumpChannel(NamedTuple):
    """Even-round pump operation (mu+, mu-, q+, q-).

    mu+- = (sum of the sector eigenvalue pair)^2 weight the parity
    sectors; q+- in [0, 1/2] are the sector dephasing rates.
    """

    mu_plus: float
    mu_minus: float
    q_plus: float
    q_minus: float


def channel_from_sector_pairs(phi_pair, psi_pair):
    a, b = phi_pair
    c, d = psi_pair
    mu_p = (a + b) ** 2
    mu_m = (c + d) ** 2
    q_p = 2 * a * b / mu_p if mu_p > 0 else 0.0
    q_m = 2 * c * d / mu_m if mu_m > 0 else 0.0
    return PumpChannel(float(mu_p), float(mu_m), float(q_p), float(q_m))


def pump_channel_from_state(rho, objective=filtering.MAX_PALL):
    """Closed-form pump channel for a base pair, using the same filter
    parameter choice as the corresponding one-round protocol."""
    params = filtering.optimize_zinf_filter(rho, objective)
    _, sigma, _ = filtering.zinf_filter(rho, params)
    phi_pair, psi_pair = filtering.sector_lambdas(*filtering.zinf_state_params(sigma))
    return channel_from_sector_pairs(phi_pair, psi_pair)


def apply_pump(sigma, ch, n):
    """n even-round pump applications in closed form.

    Returns the normalized output and the success probability
    tr(mu+^n P+ D+^n(sigma) P+ + mu-^n P- D-^n(sigma) P-), i.e. the
    post-selection probability given n filtered base-pair doublets.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    sigma = np.asarray(sigma, dtype=complex)
    kp = (1 - 2 * ch.q_plus) ** n
    km = (1 - 2 * ch.q_minus) ** n
    zsz = _Z_A @ sigma @ _Z_A
    dp = ((1 + kp) * sigma + (1 - kp) * zsz) / 2
    dm = ((1 + km) * sigma + (1 - km) * zsz) / 2
    out = ch.mu_plus**n * (P_PLUS @ dp @ P_PLUS) + ch.mu_minus**n * (P_MINUS @ dm @ P_MINUS)
    p = out.trace().real
    if p <= 1e-15:
        raise ZeroProbability(f"pump branch probability {p:.2e}")
    return qstate.as_density(out / p), float(p)


def jamiolkowski_fidelity(ch, n):
    """Fidelity of the n-fold pump channel's Choi state against a perfect
    even-parity projection:

        F = mu+^n / (mu+^n + mu-^n) * (1 + (1 - 2 q+)^n) / 2

    The second factor is the even-weight binomial sum of the sector
    dephasing; n = 1 reproduces the one-round filtered-protocol output
    fidelity, and q+ = 0 leaves only the sector-weight factor.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if ch.mu_plus <= 0 and ch.mu_minus <= 0:
        raise DegenerateChannel("both parity sectors have zero weight")
    sector = ch.mu_plus**n / (ch.mu_plus**n + ch.mu_minus**n)
    dephase = (1 + (1 - 2 * ch.q_plus) ** n) / 2
    return float(sector * dephase)


# ---------------------------------------------------------------------------
# Explicit gate-pipeline oracle.

def _embed(op4, qubits, n=4):
    """Embed a two-qubit operator on the given qubit pair of an n-qubit register."""
    full = np.eye(1, dtype=complex)
    rest = [q for q in range(n) if q not in qubits]
    order = list(qubits) + rest
    op = np.kron(op4, np.eye(2 ** (n - 2), dtype=complex))
    # permutation sending logical order back to register order
    src = {q: i for i, q in enumerate(order)}
    perm = np.zeros((2**n, 2**n))
    for idx in range(2**n):
        bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
        logical = [bits[order[i]] for i in range(n)]
        jdx = sum(b << (n - 1 - i) for i, b in enumerate(logical))
        perm[jdx, idx] = 1.0
    del full, src
    return perm.T @ op @ perm


_PROJ_11 = np.kron(
    np.kron(np.diag([0.0, 1.0]), np.diag([0.0, 1.0])), np.eye(4)
).astype(complex)


def _contract_11(joint16):
    """<11|_(A1 B1) . |11>_(A1 B1): the unnormalized kept 4x4 block."""
    return joint16.reshape(4, 4, 4, 4)[3, :, 3, :]


def m_operation(sigma, base_state, f):
    """One explicit pumping round M(sigma), unnormalized.

    Runs the actual gate sequence (U, measure |1>|1>, V, measure |1>|1>)
    on the joint (base pair, sigma) register for the filter ``f``; the
    trace of the result is the round's success probability.
    """
    d = decompose_filter(f)
    ua, ub, va, vb = build_pump_unitaries(d)
    u16 = _embed(ua, (0, 2)) @ _embed(ub, (1, 3))
    v16 = _embed(va, (0, 2)) @ _embed(vb, (1, 3))
    joint = np.kron(base_state, sigma)
    joint = u16 @ joint @ u16.conj().T
    joint = _PROJ_11 @ joint @ _PROJ_11
    joint = v16 @ joint @ v16.conj().T
    return _contract_11(joint)


def pump_oracle(sigma, base_state, f, n):
    """2n explicit M rounds; returns the normalized state and total
    success probability (filter successes included)."""
    state = np.asarray(sigma, dtype=complex)
    for _ in range(2 * n):
        state = m_operation(state, base_state, f)
    p = state.trace().real
    if p <= 1e-15:
        raise ZeroProbability(f"oracle pipeline probability {p:.2e}")
    return qstate.as_density(state / p), float(p)


def two_level_pump(rho, n1, n2, objective=filtering.MAX_PALL):
    """Two pumping levels seeded with |+,+>.

    Level 1 pumps |+,+> with the base pair for n1 even-round doublets,
    producing a Bell-diagonal resource with a suppressed smallest
    eigenvalue; level 2 uses that resource as the base pair (no filtering
    needed) to pump a fresh |+,+> for n2 doublets.  Returns the final
    state and the compound success probability p2 * p1^(2 n2) (each of
    the 2 n2 level-2 rounds consumes one level-1 output).
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("pumping level lengths must be at least 1")
    ch1 = pump_channel_from_state(rho, objective)
    s1, p1 = apply_pump(PLUS_PLUS, ch1, n1)
    ch2 = pump_channel_from_state(s1, objective)
    s2, p2 = apply_pump(PLUS_PLUS, ch2, n2)
    return s2, float(p2 * p1 ** (2 * n2))
