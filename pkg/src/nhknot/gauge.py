"""SVD factorisation ``H = A A^dagger`` with ``A = U Sigma V^dagger``.

``U`` holds the eigenvectors of ``H`` (upper band first), ``Sigma`` the square
roots of the matching eigenvalues, and ``V`` is a free unitary taken from a
small gauge catalog. Every gauge yields a different non-Hermitian ``A`` with
the same ``A A^dagger``.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePointError, InvalidInputError
from .linalg2 import (
    EPS_DEG,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    as_mat2,
    dagger,
    frobenius,
    herm_eig,
)
from .models import BlochModel, bloch_h

GAUGE_KINDS = ("sigma-x", "sigma-y", "i-sigma-z", "k-dependent", "general")

_ALIASES = {
    "sigma-x": "sigma-x",
    "sigmax": "sigma-x",
    "paulix": "sigma-x",
    "sigma-y": "sigma-y",
    "sigmay": "sigma-y",
    "pauliy": "sigma-y",
    "i-sigma-z": "i-sigma-z",
    "isigmaz": "i-sigma-z",
    "ipauliz": "i-sigma-z",
    "k-dependent": "k-dependent",
    "kdependent": "k-dependent",
    "general": "general",
}


@dataclass(frozen=True)
class GaugeChoice:
    """Selection of the free unitary.

    For ``general`` the matrix is
    ``e^{i phi/2} [[e^{i alpha} cos t, e^{i beta} sin t], [-e^{-i beta} sin t, e^{-i alpha} cos t]]``
    with ``t = theta0 + theta1 * k``; ``theta1`` must be an integer so the
    gauge stays 2 pi periodic.
    """

    kind: str
    phi: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    theta0: float = 0.0
    theta1: int = 0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.strip().lower().replace("_", "-"))
        if kind is None:
            raise InvalidInputError(f"unknown gauge {self.kind!r}; choose from {GAUGE_KINDS}")
        object.__setattr__(self, "kind", kind)
        params = (self.phi, self.alpha, self.beta, self.theta0)
        if not all(math.isfinite(float(p)) for p in params):
            raise InvalidInputError("gauge parameters must be finite")
        if float(self.theta1) != int(self.theta1):
            raise InvalidInputError("theta1 must be an integer to keep V(k) 2pi-periodic")
        object.__setattr__(self, "theta1", int(self.theta1))

    @classmethod
    def parse(cls, text: str) -> GaugeChoice:
        """Parse ``sigma-x`` ... ``general:phi,alpha,beta,theta0,theta1``."""
        head, _, tail = text.strip().partition(":")
        if not tail:
            return cls(head)
        if _ALIASES.get(head.lower()) != "general":
            raise InvalidInputError(f"only the general gauge takes parameters: {text!r}")
        parts = [p.strip() for p in tail.split(",")]
        if len(parts) != 5:
            raise InvalidInputError("general gauge needs phi,alpha,beta,theta0,theta1")
        try:
            phi, alpha, beta, theta0 = (float(p) for p in parts[:4])
            theta1 = float(parts[4])
        except ValueError as exc:
            raise InvalidInputError(f"bad general gauge parameters {tail!r}") from exc
        return cls("general", phi, alpha, beta, theta0, theta1)

    @property
    def name(self) -> str:
        if self.kind != "general":
            return self.kind
        vals = (self.phi, self.alpha, self.beta, self.theta0)
        return "general:" + ",".join(repr(float(v)) for v in vals) + f",{self.theta1}"

    @property
    def is_constant(self) -> bool:
        return self.kind in ("sigma-x", "sigma-y", "i-sigma-z") or (
            self.kind == "general" and self.theta1 == 0
        )


CATALOG = (
    GaugeChoice("sigma-x"),
    GaugeChoice("sigma-y"),
    GaugeChoice("i-sigma-z"),
    GaugeChoice("k-dependent"),
)

# phi = pi/2, alpha = pi/3, beta = pi/6, theta = k + pi/4
FIGURE_GENERAL = GaugeChoice("general", math.pi / 2, math.pi / 3, math.pi / 6, math.pi / 4, 1)


def v_matrix(g: GaugeChoice, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    shape = k.shape + (2, 2)
    if g.kind == "sigma-x":
        return np.broadcast_to(SIGMA_X, shape).copy()
    if g.kind == "sigma-y":
        return np.broadcast_to(SIGMA_Y, shape).copy()
    if g.kind == "i-sigma-z":
        return np.broadcast_to(1j * SIGMA_Z, shape).copy()
    out = np.empty(shape, dtype=complex)
    if g.kind == "k-dependent":
        s, c, e = np.sin(k), np.cos(k), np.exp(-1j * k)
        out[..., 0, 0] = -1j * s
        out[..., 0, 1] = -1j * e * c
        out[..., 1, 0] = -1j * c
        out[..., 1, 1] = 1j * e * s
        return out
    theta = g.theta0 + g.theta1 * k
    c, s = np.cos(theta), np.sin(theta)
    pre = np.exp(0.5j * g.phi)
    out[..., 0, 0] = pre * np.exp(1j * g.alpha) * c
    out[..., 0, 1] = pre * np.exp(1j * g.beta) * s
    out[..., 1, 0] = -pre * np.exp(-1j * g.beta) * s
    out[..., 1, 1] = pre * np.exp(-1j * g.alpha) * c
    return out


@dataclass(frozen=True)
class SvdFactors:
    """``A = u @ diag(sigma) @ v^dagger``.

    Columns of ``u`` are ordered upper band first and ``sigma`` accordingly
    (``sqrt(E+)``, ``sqrt(E-)``); with ``V = sigma_x`` this puts the
    ``sqrt(E-)`` column first in ``A``.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    degenerate: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return (self.u * self.sigma[..., None, :]) @ dagger(self.v)


def _safe_offset(m: BlochModel, k0: float) -> float:
    delta = 1e-9
    while delta < 1.0:
        for cand in (k0 + delta, k0 - delta):
            if not bool(herm_eig(bloch_h(m, cand)).degenerate):
                return cand
        delta *= 2.0
    return k0 + 1.0


def svd_factors(m: BlochModel, g: GaugeChoice, k, omega: float | None = None) -> SvdFactors:
    k = np.asarray(k, dtype=float)
    eig = herm_eig(bloch_h(m, k), EPS_DEG)
    if np.any(eig.degenerate):
        bad = float(np.atleast_1d(k)[np.argmax(np.atleast_1d(eig.degenerate))])
        safe = _safe_offset(m, bad)
        raise DegeneratePointError(
            f"H is degenerate at k={bad!r}"
            + (f", omega={omega!r}" if omega is not None else "")
            + f"; nearest safe k is {safe!r}",
            omega=omega,
            k=bad,
            safe_k=safe,
        )
    u = eig.u[..., ::-1]
    # clip round-off below zero; E- vanishes exactly where the band touches 0
    sigma = np.sqrt(np.clip(np.stack([eig.e2, eig.e1], axis=-1), 0.0, None))
    return SvdFactors(u=u, sigma=sigma, v=v_matrix(g, k), degenerate=eig.degenerate)


def build_a(m: BlochModel, g: GaugeChoice, k, omega: float | None = None) -> np.ndarray:
    """Non-Hermitian factor ``A(k)`` with ``A A^dagger = H(k)``."""
    return svd_factors(m, g, k, omega=omega).a


def apply_gauge(a, g: GaugeChoice, k) -> np.ndarray:
    """Right-multiply by the gauge unitary: ``A' = A U(k)``; ``A' A'^dagger`` is unchanged."""
    return as_mat2(a) @ v_matrix(g, k)


def singular_values(a):
    """Ascending singular values ``(s1, s2)`` of 2x2 matrices in closed form."""
    a = as_mat2(a)
    fro2 = frobenius(a) ** 2
    adet = np.abs(a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0])
    root = np.sqrt(np.clip(fro2 * fro2 - 4.0 * adet * adet, 0.0, None))
    s2 = np.sqrt(0.5 * (fro2 + root))
    # small one from |det| = s1 * s2 to avoid cancellation
    s1 = np.where(s2 > 0, adet / np.where(s2 > 0, s2, 1.0), 0.0)
    return s1, s2


def a_map(
    m: BlochModel, g: GaugeChoice, post: GaugeChoice | None = None, omega: float | None = None
) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorised ``k -> A(k)``, optionally followed by a right gauge ``post``."""

    def sample(k):
        a = build_a(m, g, k, omega=omega)
        if post is not None:
            a = apply_gauge(a, post, k)
        return a

    return sample
