"""Linearised Model I factor near ``(k = pi, omega = 1)`` and its lattice.

On each side of ``k = pi`` the sigma-x factor at ``omega = 1`` is approximated
by ``A_eff(k) = M sin k + C``. ``C`` differs between the two sides, which is
the finite jump behind the first-order knot transition. Fourier transforming
gives a two-sublattice chain with on-site block ``C`` and nearest-neighbour
hops ``+-M / 2i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePointError, DomainError, InvalidInputError
from .gauge import GaugeChoice, build_a
from .linalg2 import as_mat2, eig2, frobenius
from .models import TWO_PI, preset

PLUS = "plus"
MINUS = "minus"
OPEN = "open"
PERIODIC = "periodic"
LINEARIZATION_RANGE = 0.2

_C = {
    PLUS: np.array([[1j, -1j], [1, 1]], dtype=complex),
    MINUS: np.array([[-1j, 1j], [1, 1]], dtype=complex),
}
# published hopping blocks
_M_PUBLISHED = {
    PLUS: np.array([[-1 + 0.25j, -1 + 0.25j], [0.25, -0.25]], dtype=complex),
    MINUS: np.array([[-1 + 0.25j, 1 + 0.25j], [-0.25, 0.25]], dtype=complex),
}
# -dA/dk at k = pi +- 0, from the exact factor
_M_DERIVED = {
    PLUS: np.array([[0.5 + 0.25j, -0.5 + 0.25j], [0.25, -0.25]], dtype=complex),
    MINUS: np.array([[-0.5 + 0.25j, 0.5 + 0.25j], [-0.25, 0.25]], dtype=complex),
}


_SIDES = {"plus": PLUS, "+": PLUS, "plusbranch": PLUS, "minus": MINUS, "-": MINUS, "minusbranch": MINUS}


def _side(side: str) -> str:
    key = _SIDES.get(str(side).strip().lower())
    if key is None:
        raise InvalidInputError(f"side must be 'plus' or 'minus', got {side!r}")
    return key


@dataclass(frozen=True)
class EffectiveModel:
    side: str
    m: np.ndarray
    c: np.ndarray
    source: str = "published"

    @classmethod
    def published(cls, side: str) -> EffectiveModel:
        """Blocks exactly as printed alongside the expansion."""
        s = _side(side)
        return cls(s, _M_PUBLISHED[s].copy(), _C[s].copy(), "published")

    @classmethod
    def derived(cls, side: str) -> EffectiveModel:
        """Same ``C``; ``M`` recomputed as ``-dA/dk`` of the exact factor."""
        s = _side(side)
        return cls(s, _M_DERIVED[s].copy(), _C[s].copy(), "derived")

    @classmethod
    def for_k(cls, k: float, source: str = "published") -> EffectiveModel:
        if k == math.pi:
            raise DegeneratePointError("k = pi is the branch point; side is undefined", omega=1.0, k=k)
        side = PLUS if k > math.pi else MINUS
        return cls.derived(side) if source == "derived" else cls.published(side)


def eff_bloch(e: EffectiveModel, k) -> np.ndarray:
    """``M sin k + C``."""
    k = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k)):
        raise InvalidInputError("k must be finite")
    return np.sin(k)[..., None, None] * e.m + e.c


@dataclass(frozen=True)
class ChainOperator:
    """Block-tridiagonal lattice operator acting on ``2 * length`` sites.

    ``forward`` is the block ``(n + 1, n)`` and ``backward`` the block
    ``(n, n + 1)``. With the Bloch ansatz ``psi_n = e^{-ikn} u`` the symbol is
    ``C + forward e^{ik} + backward e^{-ik} = C + M sin k``.
    """

    length: int
    boundary: str
    onsite: np.ndarray
    forward: np.ndarray
    backward: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * self.length

    def matrix(self) -> np.ndarray:
        n = self.length
        shift = np.eye(n, k=-1)
        if self.boundary == PERIODIC:
            shift[0, n - 1] = 1.0
        return (
            np.kron(np.eye(n), self.onsite) + np.kron(shift, self.forward) + np.kron(shift.T, self.backward)
        )

    def symbol(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)[..., None, None]
        return self.onsite + self.forward * np.exp(1j * k) + self.backward * np.exp(-1j * k)

    def spectrum(self) -> np.ndarray:
        """Eigenvalues sorted by (real, imaginary) part."""
        vals = np.linalg.eigvals(self.matrix())
        return vals[np.lexsort((vals.imag, vals.real))]


def realspace_chain(e: EffectiveModel, length: int, boundary: str = PERIODIC) -> ChainOperator:
    if int(length) != length or length < 2:
        raise DomainError(f"chain length must be an integer >= 2, got {length!r}")
    b = str(boundary).strip().lower()
    if b not in (OPEN, PERIODIC):
        raise InvalidInputError(f"boundary must be 'open' or 'periodic', got {boundary!r}")
    hop = as_mat2(e.m) / 2j
    return ChainOperator(int(length), b, as_mat2(e.c).copy(), hop, -hop)


def bloch_union(e: EffectiveModel, length: int) -> np.ndarray:
    """Eigenvalues of ``eff_bloch`` at ``k_n = 2 pi n / length``, all ``n``."""
    ks = TWO_PI * np.arange(length) / length
    pair = eig2(eff_bloch(e, ks))
    vals = np.concatenate([pair.lambda_plus, pair.lambda_minus])
    return vals[np.lexsort((vals.imag, vals.real))]


def full_factor(k) -> np.ndarray:
    """Exact Model I sigma-x factor at ``omega = 1``."""
    return build_a(preset("model-i", 1.0), GaugeChoice("sigma-x"), k, omega=1.0)


def linearization_error(k: float, source: str = "published") -> float:
    """``||A(k, omega=1) - A_eff(k)||_F`` with the branch chosen by the side of pi."""
    k = float(k)
    if not math.isfinite(k):
        raise InvalidInputError("k must be finite")
    if abs(k - math.pi) > LINEARIZATION_RANGE + 1e-12:
        raise DomainError(f"|k - pi| must be <= {LINEARIZATION_RANGE}")
    e = EffectiveModel.for_k(k, source)
    return float(frobenius(full_factor(k) - eff_bloch(e, k)))


def branch_jump() -> float:
    """``||C_plus - C_minus||_F``."""
    return float(frobenius(_C[PLUS] - _C[MINUS]))
