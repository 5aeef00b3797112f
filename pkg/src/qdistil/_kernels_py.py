"""Pure-Python (numpy) implementations of the hot kernels.

Two inner loops dominate bulk runs over many states and are therefore
also provided as a compiled extension (see qdistil._kernels /
qdistil.kernels): the marginal-whitening fixed point that computes the
local-filtering normal form, and the one-sided filter quality profile
used by the filter-parameter search.  Both implementations follow the
same arithmetic step for step so results agree to rounding.
"""
import numpy as np

WHITEN_OK = 0
WHITEN_SINGULAR_MARGINAL = 1
WHITEN_NO_CONVERGENCE = 2

# Polynomially-slow convergence betrays the rank-deficient class well
# before the iteration cap: deviations shrinking by less than
# _STALL_FACTOR over _STALL_WINDOW iterations cannot be the geometric
# contraction of a filterable state unless its contraction rate exceeds
# 0.99937 per step (far beyond every parameter regime swept here).
_STALL_WINDOW = 256
_STALL_FACTOR = 0.85


def _inv_sqrt_2x2(m00, m01, m11):
    """Inverse square root of a Hermitian PSD 2x2 [[m00, m01], [m01*, m11]]."""
    det = m00 * m11 - (m01.real * m01.real + m01.imag * m01.imag)
    s = np.sqrt(max(det, 0.0))
    tau = np.sqrt(m00 + m11 + 2 * s)
    denom = s * tau
    # adj(M + s I) / (s * tau)
    w00 = (m11 + s) / denom
    w11 = (m00 + s) / denom
    w01 = -m01 / denom
    return np.array([[w00, w01], [np.conj(w01), w11]], dtype=complex)


def whiten_loop(rho, tol=1e-13, max_iter=10000):
    """Drive both single-qubit marginals to 1/2 by repeated local filtering.

    Returns ``(fa, fb, iterations, status)`` where the composite filters
    satisfy state ~ (fa x fb) rho (fa x fb)^dagger at the final iterate
    (up to scale).  ``status`` is WHITEN_OK on convergence of both
    marginals to within ``tol`` of the maximally mixed state, and one of
    the failure codes when a marginal turns singular (eigenvalue below
    1e-13) or convergence stalls / exceeds ``max_iter`` -- both of which
    classify the input as rank-deficient under local filtering.
    """
    sigma = np.array(rho, dtype=complex)
    fa = np.eye(2, dtype=complex)
    fb = np.eye(2, dtype=complex)
    sig4 = sigma.reshape(2, 2, 2, 2)
    prev_dev = np.inf
    it = 0
    while it < max_iter:
        ma00 = (sig4[0, 0, 0, 0] + sig4[0, 1, 0, 1]).real
        ma01 = sig4[0, 0, 1, 0] + sig4[0, 1, 1, 1]
        ma11 = (sig4[1, 0, 1, 0] + sig4[1, 1, 1, 1]).real
        mb00 = (sig4[0, 0, 0, 0] + sig4[1, 0, 1, 0]).real
        mb01 = sig4[0, 0, 0, 1] + sig4[1, 0, 1, 1]
        mb11 = (sig4[0, 1, 0, 1] + sig4[1, 1, 1, 1]).real
        dev = max(
            abs(ma00 - 0.5), abs(ma11 - 0.5), abs(ma01),
            abs(mb00 - 0.5), abs(mb11 - 0.5), abs(mb01),
        )
        if dev < tol:
            return fa, fb, it, WHITEN_OK
        if it % _STALL_WINDOW == 0:
            if dev > _STALL_FACTOR * prev_dev:
                return fa, fb, it, WHITEN_NO_CONVERGENCE
            prev_dev = dev
        deta = ma00 * ma11 - (ma01.real**2 + ma01.imag**2)
        detb = mb00 * mb11 - (mb01.real**2 + mb01.imag**2)
        eig_min_a = 0.5 * (1.0 - np.sqrt(max(1.0 - 4.0 * deta, 0.0)))
        eig_min_b = 0.5 * (1.0 - np.sqrt(max(1.0 - 4.0 * detb, 0.0)))
        if eig_min_a < 1e-13 or eig_min_b < 1e-13:
            return fa, fb, it, WHITEN_SINGULAR_MARGINAL
        wa = _inv_sqrt_2x2(2 * ma00, 2 * ma01, 2 * ma11)
        wb = _inv_sqrt_2x2(2 * mb00, 2 * mb01, 2 * mb11)
        fa = wa @ fa
        fb = wb @ fb
        fa /= np.linalg.norm(fa)
        fb /= np.linalg.norm(fb)
        w = np.kron(wa, wb)
        sigma = w @ sigma @ w.conj().T
        sigma /= sigma.trace().real
        sig4 = sigma.reshape(2, 2, 2, 2)
        it += 1
    return fa, fb, it, WHITEN_NO_CONVERGENCE


def filter_profile(cs, r0, r1, absdet):
    """Per-side quality  phi(c) = c(1-c) / smax^2(diag(c, 1-c) K)  of the
    diagonal filter family, for a fixed 2x2 target matrix K described by
    its squared row norms ``r0``, ``r1`` and |det K| = ``absdet``.

    The overall two-copy success rate of a filtered distillation round
    factorizes into a product of one such profile per side, so scanning
    this function is the whole parameter search.
    """
    cs = np.asarray(cs, dtype=float)
    c1 = 1.0 - cs
    fro2 = cs * cs * r0 + c1 * c1 * r1
    det = cs * c1 * absdet
    gap = fro2 * fro2 - 4.0 * det * det
    smax2 = 0.5 * (fro2 + np.sqrt(np.clip(gap, 0.0, None)))
    out = np.zeros_like(cs)
    ok = smax2 > 0
    out[ok] = cs[ok] * c1[ok] / smax2[ok]
    return out
