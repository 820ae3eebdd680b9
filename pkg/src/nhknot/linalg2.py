"""Closed-form linear algebra for 2x2 complex matrices.

Every function accepts a single ``(2, 2)`` array or a batch of shape
``(..., 2, 2)`` and broadcasts over the leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

EPS_DEG = 1e-9
HERMITIAN_TOL = 1e-10

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_mat2(m) -> np.ndarray:
    """Coerce ``m`` to a complex array of 2x2 matrices, rejecting NaN/Inf."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim < 2 or arr.shape[-2:] != (2, 2):
        raise InvalidInputError(f"expected (..., 2, 2) matrices, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("matrix has non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def frobenius(m: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(m) ** 2, axis=(-2, -1)))


def trace2(m) -> np.ndarray:
    m = as_mat2(m)
    return m[..., 0, 0] + m[..., 1, 1]


def det2(m) -> np.ndarray:
    m = as_mat2(m)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def discriminant2(m) -> np.ndarray:
    """``trace**2/4 - det`` written without the cancellation of that form."""
    m = as_mat2(m)
    half_diff = 0.5 * (m[..., 0, 0] - m[..., 1, 1])
    return half_diff * half_diff + m[..., 0, 1] * m[..., 1, 0]


@dataclass(frozen=True)
class EigPair2:
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    discriminant: np.ndarray
    defective: np.ndarray
    degenerate: np.ndarray


def eig2(m, eps_deg: float = EPS_DEG) -> EigPair2:
    """Eigenvalues of 2x2 matrices from the characteristic quadratic.

    ``lambda_plus/minus = trace/2 +/- sqrt(disc)`` with the principal square
    root. A pair is *degenerate* when ``|sqrt(disc)|`` drops below
    ``eps_deg * (1 + ||m||_F)``; it is *defective* when additionally the
    traceless part of ``m`` is non-zero at that scale (Jordan block).
    """
    m = as_mat2(m)
    half_tr = 0.5 * (m[..., 0, 0] + m[..., 1, 1])
    disc = discriminant2(m)
    root = np.sqrt(disc)
    scale = eps_deg * (1.0 + frobenius(m))
    degenerate = np.abs(root) < scale
    traceless = m - half_tr[..., None, None] * SIGMA_0
    defective = degenerate & (frobenius(traceless) > scale)
    return EigPair2(
        lambda_plus=half_tr + root,
        lambda_minus=half_tr - root,
        discriminant=disc,
        defective=defective,
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class HermEig:
    """Ascending eigenvalues and phase-fixed eigenvectors (columns of ``u``)."""

    e1: np.ndarray
    e2: np.ndarray
    u: np.ndarray
    degenerate: np.ndarray


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    # second component real non-negative; fall back to the first one
    second = vec[..., 1]
    first = vec[..., 0]
    use_second = np.abs(second) >= 1e-12
    ref = np.where(use_second, second, first)
    mag = np.abs(ref)
    phase = np.where(mag > 0, np.conj(ref) / np.where(mag > 0, mag, 1.0), 1.0)
    return vec * phase[..., None]


def herm_eig(h, eps_deg: float = EPS_DEG) -> HermEig:
    """Eigendecomposition of Hermitian 2x2 matrices.

    Eigenvalues come back ascending. Each eigenvector is normalised and its
    phase fixed so that the second component is real and non-negative. At a
    degeneracy the eigenbasis is not unique; the identity is returned and
    ``degenerate`` is set.
    """
    h = as_mat2(h)
    norm = frobenius(h)
    if np.any(frobenius(h - dagger(h)) >= HERMITIAN_TOL * (1.0 + norm)):
        raise InvalidInputError("matrix is not Hermitian")
    h11 = h[..., 0, 0].real
    h22 = h[..., 1, 1].real
    h12 = h[..., 0, 1]
    h21 = np.conj(h12)
    mean = 0.5 * (h11 + h22)
    half = 0.5 * (h11 - h22)
    r = np.hypot(half, np.abs(h12))
    degenerate = 2.0 * r < eps_deg * (1.0 + norm)

    # upper eigenvector from whichever row avoids cancellation
    v_pos = np.where(
        (half >= 0)[..., None],
        np.stack([half + r, h21], axis=-1),
        np.stack([h12, r - half], axis=-1),
    )
    vnorm = np.sqrt(np.sum(np.abs(v_pos) ** 2, axis=-1))
    vnorm = np.where(vnorm > 0, vnorm, 1.0)
    v_pos = v_pos / vnorm[..., None]
    v_neg = np.stack([-np.conj(v_pos[..., 1]), np.conj(v_pos[..., 0])], axis=-1)

    u = np.stack([_fix_phase(v_neg), _fix_phase(v_pos)], axis=-1)
    u = np.where(degenerate[..., None, None], SIGMA_0, u)
    return HermEig(e1=mean - r, e2=mean + r, u=u, degenerate=degenerate)


def commutator_norm(m) -> np.ndarray:
    """``||M M^dagger - M^dagger M||_F``; zero exactly for normal matrices."""
    m = as_mat2(m)
    md = dagger(m)
    return frobenius(m @ md - md @ m)


def unitary_error(m) -> np.ndarray:
    """``||M^dagger M - I||_F``."""
    m = as_mat2(m)
    return frobenius(dagger(m) @ m - SIGMA_0)
