"""Exact two-qubit density-matrix arithmetic.

All states are 4x4 complex numpy arrays in the computational basis
|00>, |01>, |10>, |11> (first factor = qubit A, second = qubit B).
The four Bell states are

    |phi+> = (|00> + |11>)/sqrt(2)      |phi-> = (|00> - |11>)/sqrt(2)
    |psi+> = (|01> + |10>)/sqrt(2)      |psi-> = (|01> - |10>)/sqrt(2)

Correlations are often handled through the Hilbert-Schmidt coefficient
matrix ``R[i, j] = tr(rho (sigma_i x sigma_j))`` over the Pauli basis
``sigma_0..3 = (1, X, Y, Z)``; rows/columns 1..3 of its first column and
row are the local Bloch vectors of qubits A and B.
"""
import numpy as np

from .errors import NotPositive

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)

S_GATE = np.array([[1, 0], [0, 1j]], dtype=complex)
H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)

_s = 1 / np.sqrt(2)
BELL_KETS = {
    "phi+": np.array([_s, 0, 0, _s], dtype=complex),
    "phi-": np.array([_s, 0, 0, -_s], dtype=complex),
    "psi+": np.array([0, _s, _s, 0], dtype=complex),
    "psi-": np.array([0, _s, -_s, 0], dtype=complex),
}
BELL_PROJECTORS = {k: np.outer(v, v.conj()) for k, v in BELL_KETS.items()}

# Slot order used for Bell-diagonal weight vectors throughout the package.
BELL_ORDER = ("phi+", "psi-", "psi+", "phi-")

# Magic basis: maximally entangled states are exactly the real unit
# combinations of these columns (up to a global phase).
MAGIC_BASIS = np.column_stack(
    [
        BELL_KETS["phi+"],
        1j * BELL_KETS["phi-"],
        1j * BELL_KETS["psi+"],
        BELL_KETS["psi-"],
    ]
)

PSD_FLOOR = -1e-10
HERM_TOL = 1e-12
TRACE_TOL = 1e-12


def dagger(m):
    return m.conj().T


def kron2(a, b):
    return np.kron(a, b)


def as_density(m):
    """Validate and clean a candidate density matrix.

    Enforces Hermiticity and unit trace to 1e-12 and positive
    semidefiniteness down to an eigenvalue floor of -1e-10; eigenvalues
    in [-1e-10, 0) are clamped to zero and the state renormalized, so
    that roundoff from long chains of conjugations cannot accumulate
    into an invalid state.

    Raises
    ------
    ValueError
        If the matrix is not Hermitian or not unit trace within tolerance.
    NotPositive
        If an eigenvalue lies below the -1e-10 floor.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    if np.abs(m - dagger(m)).max() > HERM_TOL:
        raise ValueError("matrix is not Hermitian within 1e-12")
    m = (m + dagger(m)) / 2
    tr = m.trace().real
    if abs(tr - 1) > TRACE_TOL:
        raise ValueError(f"matrix trace {tr!r} is not 1 within 1e-12")
    vals = np.linalg.eigvalsh(m)
    if vals[0] < PSD_FLOOR:
        raise NotPositive(f"eigenvalue {vals[0]:.3e} below the {PSD_FLOOR} floor")
    if vals[0] < 0:
        vals, vecs = np.linalg.eigh(m)
        vals = np.clip(vals, 0, None)
        m = (vecs * vals) @ dagger(vecs)
        m = m / m.trace().real
    return m


def pure(ket):
    """Density matrix of a (normalized) state vector."""
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


def marginal_a(rho):
    return np.einsum("abcb->ac", rho.reshape(2, 2, 2, 2))


def marginal_b(rho):
    return np.einsum("abac->bc", rho.reshape(2, 2, 2, 2))


def to_rmatrix(rho):
    """Hilbert-Schmidt coefficient matrix R[i, j] = tr(rho (sigma_i x sigma_j)).

    The result is real 4x4 with R[0, 0] = 1; entries R[1:, 0] and
    R[0, 1:] are the Bloch vectors of qubits A and B.
    """
    r = np.empty((4, 4))
    for i, si in enumerate(PAULIS):
        for j, sj in enumerate(PAULIS):
            r[i, j] = np.trace(rho @ np.kron(si, sj)).real
    return r


def from_rmatrix(r):
    """Reconstruct the density matrix  rho = (1/4) sum_ij R[i,j] sigma_i x sigma_j.

    Raises NotPositive if the coefficients do not describe a physical state.
    """
    rho = np.zeros((4, 4), dtype=complex)
    for i, si in enumerate(PAULIS):
        for j, sj in enumerate(PAULIS):
            if r[i, j] != 0:
                rho += r[i, j] * np.kron(si, sj)
    return as_density(rho / 4)


def bloch_a(r):
    return np.array([r[1, 0], r[2, 0], r[3, 0]])


def bloch_b(r):
    return np.array([r[0, 1], r[0, 2], r[0, 3]])


def apply_local_unitary(rho, ua, ub):
    """Conjugate by a product unitary: (ua x ub) rho (ua x ub)^dagger."""
    u = np.kron(ua, ub)
    return u @ rho @ dagger(u)


def bloch_rotation(u):
    """Proper rotation O with O[i, j] = tr(sigma_i u sigma_j u^dagger)/2.

    Applying ``u`` to a qubit rotates its Bloch vector by ``O``; under
    ``ua x ub`` the full R-matrix maps to diag(1, O_A) R diag(1, O_B)^T.
    """
    o = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            o[i, j] = np.trace(PAULIS[i + 1] @ u @ PAULIS[j + 1] @ dagger(u)).real / 2
    return o


def rotation_to_unitary(o):
    """SU(2) element whose Bloch action equals the proper rotation ``o``.

    Uses the quaternion extraction of Shepperd (branch on the largest
    diagonal entry for numerical stability).  Raises ValueError for an
    improper rotation.
    """
    o = np.asarray(o, dtype=float)
    if abs(np.linalg.det(o) - 1) > 1e-9:
        raise ValueError("not a proper rotation (det != +1)")
    t = np.trace(o)
    candidates = [t, o[0, 0], o[1, 1], o[2, 2]]
    case = int(np.argmax(candidates))
    if case == 0:
        r = np.sqrt(1 + t)
        w = r / 2
        x = (o[2, 1] - o[1, 2]) / (2 * r)
        y = (o[0, 2] - o[2, 0]) / (2 * r)
        z = (o[1, 0] - o[0, 1]) / (2 * r)
    elif case == 1:
        r = np.sqrt(1 + o[0, 0] - o[1, 1] - o[2, 2])
        x = r / 2
        w = (o[2, 1] - o[1, 2]) / (2 * r)
        y = (o[0, 1] + o[1, 0]) / (2 * r)
        z = (o[0, 2] + o[2, 0]) / (2 * r)
    elif case == 2:
        r = np.sqrt(1 - o[0, 0] + o[1, 1] - o[2, 2])
        y = r / 2
        w = (o[0, 2] - o[2, 0]) / (2 * r)
        x = (o[0, 1] + o[1, 0]) / (2 * r)
        z = (o[1, 2] + o[2, 1]) / (2 * r)
    else:
        r = np.sqrt(1 - o[0, 0] - o[1, 1] + o[2, 2])
        z = r / 2
        w = (o[1, 0] - o[0, 1]) / (2 * r)
        x = (o[0, 2] + o[2, 0]) / (2 * r)
        y = (o[1, 2] + o[2, 1]) / (2 * r)
    return w * I2 - 1j * (x * X + y * Y + z * Z)


def fully_entangled_fraction(rho):
    """Maximum overlap of ``rho`` with any maximally entangled pure state.

    Computed exactly as the top eigenvalue of the real part of ``rho``
    expressed in the magic basis, where maximally entangled states are
    precisely the real unit vectors.  Always lies in [1/4, 1].
    """
    rho_magic = dagger(MAGIC_BASIS) @ rho @ MAGIC_BASIS
    return float(np.linalg.eigvalsh(rho_magic.real)[-1])


def bell_fidelity(rho, which):
    """Overlap <bell|rho|bell> for a Bell label in {"phi+","phi-","psi+","psi-"}."""
    try:
        ket = BELL_KETS[which]
    except KeyError:
        raise ValueError(f"unknown Bell label {which!r}") from None
    return float((ket.conj() @ rho @ ket).real)


def bell_weights(rho):
    """Diagonal Bell-basis weights of ``rho`` in BELL_ORDER."""
    return np.array([bell_fidelity(rho, lbl) for lbl in BELL_ORDER])


def max_bell_weight(rho):
    return float(bell_weights(rho).max())


def _bell_permutation_of(ua, ub):
    """Permutation p with (ua x ub)|bell_k> ~ |bell_p[k]>, or None."""
    u = np.kron(ua, ub)
    perm = []
    for k in BELL_ORDER:
        v = u @ BELL_KETS[k]
        hits = [j for j, l in enumerate(BELL_ORDER) if abs(BELL_KETS[l].conj() @ v) > 1 - 1e-9]
        if len(hits) != 1:
            return None
        perm.append(hits[0])
    return tuple(perm)


def _build_bell_catalog():
    # Breadth-first closure of a small generating set of local-unitary
    # pairs that permute the Bell projectors; all 24 permutations of the
    # four Bell states are reachable.
    gens = [
        (I2, I2),
        (X, I2),
        (Z, I2),
        (S_GATE, S_GATE),
        (H_GATE, H_GATE),
    ]
    catalog = {}
    frontier = [(I2, I2)]
    catalog[(0, 1, 2, 3)] = (I2, I2)
    while frontier and len(catalog) < 24:
        new_frontier = []
        for fa, fb in frontier:
            for ga, gb in gens:
                ua, ub = ga @ fa, gb @ fb
                perm = _bell_permutation_of(ua, ub)
                if perm is not None and perm not in catalog:
                    catalog[perm] = (ua, ub)
                    new_frontier.append((ua, ub))
        frontier = new_frontier
    if len(catalog) != 24:
        raise RuntimeError(f"Bell permutation catalog incomplete: {len(catalog)}/24")
    return catalog


BELL_PERMUTATION_CATALOG = _build_bell_catalog()


def bell_permutation_unitary(perm):
    """Local-unitary pair (ua, ub) realizing a Bell-projector permutation.

    ``perm[k] = j`` means the Bell state at slot ``k`` of BELL_ORDER is
    mapped onto slot ``j``.
    """
    perm = tuple(perm)
    if sorted(perm) != [0, 1, 2, 3]:
        raise ValueError(f"not a permutation of (0, 1, 2, 3): {perm!r}")
    return BELL_PERMUTATION_CATALOG[perm]
