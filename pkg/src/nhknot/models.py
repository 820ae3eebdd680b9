"""Two-band SSH-family Bloch Hamiltonians.

``H(k) = dx(k) sigma_x + dy(k) sigma_y + mu * I`` with

    dx = t1 + (t2 + t3) cos k + t4 cos 2k
    dy = (t2 - t3) sin k + t4 sin 2k

``mu`` shifts the spectrum so both bands are non-negative, which lets the
eigenvalues double as squared singular values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInputError
from .linalg2 import SIGMA_0, SIGMA_X, SIGMA_Y

TWO_PI = 2.0 * math.pi
POSITIVITY_GRID = 4096
POSITIVITY_TOL = 1e-10
GAP_CLOSING_TOL = 1e-8

MODEL_NAMES = {
    "model-i": "model-i",
    "modeli": "model-i",
    "model_i": "model-i",
    "i": "model-i",
    "model-ii": "model-ii",
    "modelii": "model-ii",
    "model_ii": "model-ii",
    "ii": "model-ii",
}


def midpoint_grid(nk: int) -> np.ndarray:
    """``k_j = 2 pi (j + 1/2) / nk``; never lands on 0 or pi for even ``nk``."""
    return TWO_PI * (np.arange(nk) + 0.5) / nk


@dataclass(frozen=True)
class DVector:
    dx: np.ndarray
    dy: np.ndarray
    dz: np.ndarray


@dataclass(frozen=True)
class BlochModel:
    """Hopping amplitudes plus identity shift.

    ``k_sign`` selects the Fourier orientation: ``-1`` evaluates every
    k-dependent quantity at ``-k``, i.e. the transposed Bloch matrix. Same
    spectrum and Hermitian physics, mirrored momentum.
    """

    t1: float
    t2: float
    t3: float
    t4: float
    mu: float
    label: str = "custom"
    k_sign: int = 1

    def __post_init__(self):
        values = (self.t1, self.t2, self.t3, self.t4, self.mu)
        if not all(math.isfinite(float(v)) for v in values):
            raise InvalidInputError(f"non-finite model parameters {values}")
        if self.k_sign not in (1, -1):
            raise InvalidInputError("k_sign must be +1 or -1")
        low = min_lower_band(self)
        if low < -POSITIVITY_TOL:
            raise DomainError(f"lower band reaches {low:.3g} < 0; raise mu to at least {self.mu - low:.6g}")


def preset(name: str, omega: float, k_sign: int | None = None) -> BlochModel:
    """Named model at coupling ``omega > 0``.

    Model I: ``t = (1, w, 0, 0)``, ``mu = 1 + w``.
    Model II: ``t = (1, 1, 1, w)``, ``mu = 3 + w``.

    Model I defaults to ``k_sign = -1``: its published SVD factors (for every
    gauge, and the expansion around ``k = pi``) factor the Bloch matrix with
    ``1 + w e^{+ik}`` in the upper-right corner, so that is the orientation in
    which its knots are reproduced. Model II's published factors use the
    direct orientation. Pass ``k_sign`` to override.
    """
    key = MODEL_NAMES.get(str(name).strip().lower())
    if key is None:
        raise InvalidInputError(f"unknown model {name!r}; expected model-i or model-ii")
    omega = float(omega)
    if not math.isfinite(omega) or omega <= 0:
        raise DomainError(f"omega must be > 0, got {omega}")
    if key == "model-i":
        sign = -1 if k_sign is None else k_sign
        return BlochModel(1.0, omega, 0.0, 0.0, 1.0 + omega, label=key, k_sign=sign)
    sign = 1 if k_sign is None else k_sign
    return BlochModel(1.0, 1.0, 1.0, omega, 3.0 + omega, label=key, k_sign=sign)


def d_vector(m: BlochModel, k) -> DVector:
    q = m.k_sign * np.asarray(k, dtype=float)
    dx = m.t1 + (m.t2 + m.t3) * np.cos(q) + m.t4 * np.cos(2 * q)
    dy = (m.t2 - m.t3) * np.sin(q) + m.t4 * np.sin(2 * q)
    return DVector(dx=dx, dy=dy, dz=np.zeros_like(dx))


def offdiagonal(m: BlochModel, k) -> np.ndarray:
    """Lower off-diagonal element ``h21 = dx + i dy``."""
    d = d_vector(m, k)
    return d.dx + 1j * d.dy


def bloch_h(m: BlochModel, k) -> np.ndarray:
    d = d_vector(m, k)
    dx = np.asarray(d.dx)[..., None, None]
    dy = np.asarray(d.dy)[..., None, None]
    return dx * SIGMA_X + dy * SIGMA_Y + m.mu * SIGMA_0


def band_energies(m: BlochModel, k):
    """``(E-, E+) = mu -/+ |dx + i dy|``."""
    r = np.abs(offdiagonal(m, k))
    return m.mu - r, m.mu + r


def gap(m: BlochModel, k) -> np.ndarray:
    return 2.0 * np.abs(offdiagonal(m, k))


def golden_min(f, lo: float, hi: float, xtol: float = 1e-14, maxiter: int = 200) -> float:
    """Golden-section search for the minimiser of a unimodal ``f`` on ``[lo, hi]``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if b - a <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def min_lower_band(m: BlochModel) -> float:
    ks = midpoint_grid(POSITIVITY_GRID)
    q = np.abs(offdiagonal(m, ks))
    j = int(np.argmax(q))
    step = TWO_PI / POSITIVITY_GRID
    kbest = golden_min(lambda k: -float(np.abs(offdiagonal(m, k))), ks[j] - step, ks[j] + step)
    rmax = max(float(q[j]), float(np.abs(offdiagonal(m, kbest))))
    return m.mu - rmax


def find_gap_closings(m: BlochModel, nk: int = 1024) -> list[float]:
    """Momenta in ``[0, 2 pi)`` where the two bands touch.

    Local minima of the gap on an ``nk``-point seed grid are polished by
    golden-section search and kept when the refined gap is below 1e-8.
    """
    if nk < 64:
        raise DomainError("find_gap_closings needs nk >= 64")
    ks = TWO_PI * np.arange(nk) / nk
    g = gap(m, ks)
    left = np.roll(g, 1)
    right = np.roll(g, -1)
    seeds = np.nonzero((g <= left) & (g <= right))[0]
    step = TWO_PI / nk
    found: list[float] = []
    for j in seeds:
        k0 = golden_min(lambda k: float(gap(m, k)), ks[j] - step, ks[j] + step)
        if float(gap(m, k0)) < GAP_CLOSING_TOL:
            k0 = float(k0 % TWO_PI)
            if all(abs(k0 - f) > 1e-9 and abs(abs(k0 - f) - TWO_PI) > 1e-9 for f in found):
                found.append(k0)
    return sorted(found)
