"""Base-pair factories for the supported noise families."""
import numpy as np

from . import qstate
from .errors import BadWeights

THETA_MAX = np.pi / 4


def photon_loss_state(epsilon, g):
    """Pair damaged by photon loss mixed with a depolarizing admixture.

    rho = (1-eps)|psi+><psi+| + eps/(1+2G) |11><11|
          + G*eps/(1+2G) (|00><00| + |psi-><psi-|)

    ``g = 0`` is pure photon loss (rank-deficient under local filtering);
    ``g = 1`` is Bell-diagonal with no local information.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if not 0 <= g <= 1:
        raise ValueError(f"g must lie in [0, 1], got {g}")
    rho = (1 - epsilon) * qstate.BELL_PROJECTORS["psi+"].copy()
    rho[3, 3] += epsilon / (1 + 2 * g)
    rho[0, 0] += g * epsilon / (1 + 2 * g)
    rho += g * epsilon / (1 + 2 * g) * qstate.BELL_PROJECTORS["psi-"]
    return qstate.as_density(rho)


def amplitude_damping_kraus(gamma, theta):
    """Single-qubit relaxation Kraus pair in a basis tilted by ``theta``."""
    c, s = np.cos(theta), np.sin(theta)
    u = np.array([[c, s], [-s, c]], dtype=complex)  # cos(t) 1 + i sin(t) Y
    k1 = u @ np.diag([1.0, np.sqrt(1 - gamma)]).astype(complex) @ u.T
    k2 = u @ (np.sqrt(gamma) * np.array([[0, 1], [0, 0]], dtype=complex)) @ u.T
    return k1, k2


def amplitude_damped_state(gamma, theta, allow_wide_theta=False):
    """|psi+> pair after independent amplitude damping on both qubits.

    ``gamma`` is the relaxation probability and ``theta`` tilts the
    damping basis; theta is restricted to [0, pi/4] (the studied range)
    unless ``allow_wide_theta`` is set.
    """
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if not allow_wide_theta and not 0 <= theta <= THETA_MAX + 1e-12:
        raise ValueError(f"theta must lie in [0, pi/4], got {theta}")
    k1, k2 = amplitude_damping_kraus(gamma, theta)
    psi = qstate.BELL_PROJECTORS["psi+"]
    rho = np.zeros((4, 4), dtype=complex)
    for ka in (k1, k2):
        for kb in (k1, k2):
            op = np.kron(ka, kb)
            rho += op @ psi @ op.conj().T
    return qstate.as_density(rho)


def bell_diagonal_state(weights):
    """Mixture of the four Bell projectors, weights in the order
    (phi+, psi-, psi+, phi-)."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (4,):
        raise BadWeights(f"expected 4 weights, got shape {weights.shape}")
    if weights.min() < 0:
        raise BadWeights(f"negative weight {weights.min()}")
    if abs(weights.sum() - 1) > 1e-12:
        raise BadWeights(f"weights sum to {weights.sum()!r}, not 1")
    rho = np.zeros((4, 4), dtype=complex)
    for w, label in zip(weights, qstate.BELL_ORDER):
        rho += w * qstate.BELL_PROJECTORS[label]
    return qstate.as_density(rho)


def werner_state(p):
    """p |phi+><phi+| + (1-p)/4 * identity."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    w = (1 - p) / 4
    return bell_diagonal_state([p + w, w, w, w])


def make_state(family, **params):
    """Dispatch a noise-family name to its factory (used by sweeps)."""
    if family == "photon-loss":
        return photon_loss_state(params["eps"], params["g"])
    if family == "amp-damp":
        return amplitude_damped_state(params["gamma"], params["theta"])
    if family == "bell-diagonal":
        if "weights" in params:
            return bell_diagonal_state(params["weights"])
        f = params["fid"]
        rest = (1 - f) / 3
        return bell_diagonal_state([f, rest, rest, rest])
    raise ValueError(f"unknown noise family {family!r}")
