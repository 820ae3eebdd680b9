"""Winding numbers and eigenvalue braids over the Brillouin zone.

The non-Hermitian invariant is the winding of
``f(k) = det(A(k) - tr A(k)/2)`` around the origin, i.e. of the squared
eigenvalue splitting measured from the spectral centre. Its parity equals the
permutation the two eigenvalue strands undergo over one period, and
``|nu| = 0, 1, 2`` labels the unlink, unknot and Hopf link. For ``n`` bands the
reference point generalises to ``tr A / n``; only ``n = 2`` is implemented.

The Hermitian invariant is the winding of the chiral off-diagonal element
``h21 = dx + i dy``. Counter-clockwise is positive, ``k`` runs 0 -> 2 pi.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneracyError,
    DomainError,
    GaplessError,
    PrecisionError,
    SingularityError,
)
from .gauge import GaugeChoice, v_matrix
from .linalg2 import discriminant2, eig2, frobenius, herm_eig
from .models import (
    TWO_PI,
    BlochModel,
    bloch_h,
    find_gap_closings,
    gap,
    midpoint_grid,
    offdiagonal,
)

SINGULAR_TOL = 1e-12
MAX_POINTS = 2**20
MIN_STEP = 1e-13
# relative change of A per step that triggers local refinement
STEP_CHANGE = 0.25
# off-centre split keeps refined samples off k = 0, pi/2, pi exactly
SPLIT = 0.5 + (math.sqrt(5.0) - 2.0) / 20.0
COLLISION_TOL = 1e-10

AMap = Callable[[np.ndarray], np.ndarray]


def knot_label(nu: int) -> str:
    n = abs(int(nu))
    return {0: "unlink", 1: "unknot", 2: "hopf-link"}.get(n, f"other({n})")


@dataclass(frozen=True)
class KnotPhase:
    nu: int
    knot: str
    residual: float
    raw: float = 0.0
    samples: int = 0


@dataclass(frozen=True)
class HermitianPhase:
    nu_h: int
    residual: float
    raw: float = 0.0


def winding_integrand(a: np.ndarray) -> np.ndarray:
    """``det(A - tr(A)/2 I)``, which equals minus the discriminant."""
    return -discriminant2(a)


def _check_singular(ks: np.ndarray, f: np.ndarray) -> None:
    small = np.abs(f) < SINGULAR_TOL
    if np.any(small):
        k = float(ks[np.argmax(small)])
        raise SingularityError(
            f"eigenvalues collide with the spectral centre at k={k!r} (|f|={abs(f[np.argmax(small)]):.3g})",
            k=k,
        )


def _cyclic_steps(ks, a, f):
    k_next = np.roll(ks, -1)
    k_next[-1] += TWO_PI
    dphi = np.angle(np.roll(f, -1) / f)
    na = frobenius(a)
    da = frobenius(np.roll(a, -1, axis=0) - a)
    big = da > STEP_CHANGE * (1.0 + np.maximum(na, np.roll(na, -1)))
    return k_next - ks, dphi, big


def nh_winding(a_of_k: AMap, nk: int = 1024) -> KnotPhase:
    """Winding number of ``det(A - tr A / 2)`` over ``k`` in ``[0, 2 pi)``.

    Starts from the ``nk``-point midpoint grid and bisects any step whose phase
    increment reaches pi/2 or across which ``A`` itself changes by more than a
    quarter of its norm. The second test catches eigenbasis rotations confined
    to a window narrower than the grid, which the phase test alone misses.
    """
    if nk < 128:
        raise DomainError("nh_winding needs nk >= 128")
    ks = midpoint_grid(nk)
    a = np.asarray(a_of_k(ks))
    f = winding_integrand(a)
    _check_singular(ks, f)
    while True:
        h, dphi, big = _cyclic_steps(ks, a, f)
        bad = (np.abs(dphi) >= 0.5 * math.pi) | big
        if not np.any(bad):
            break
        if np.any(h[bad] < MIN_STEP):
            k = float(ks[bad][np.argmin(h[bad])])
            raise PrecisionError(f"winding integrand not resolved near k={k!r}")
        new_k = np.mod(ks[bad] + SPLIT * h[bad], TWO_PI)
        if ks.size + new_k.size > MAX_POINTS:
            raise PrecisionError(f"refinement exceeded {MAX_POINTS} points")
        new_a = np.asarray(a_of_k(new_k))
        new_f = winding_integrand(new_a)
        _check_singular(new_k, new_f)
        ks = np.concatenate([ks, new_k])
        order = np.argsort(ks, kind="stable")
        ks = ks[order]
        a = np.concatenate([a, new_a])[order]
        f = np.concatenate([f, new_f])[order]
    raw = float(np.sum(dphi) / TWO_PI)
    nu = round(raw)
    return KnotPhase(nu=nu, knot=knot_label(nu), residual=abs(raw - nu), raw=raw, samples=int(ks.size))


def hermitian_winding(m: BlochModel, nk: int = 4096) -> HermitianPhase:
    """Winding of ``dx + i dy``; raises :class:`GaplessError` if the gap closes."""
    closings = find_gap_closings(m, max(64, min(nk, 4096)))
    if closings:
        raise GaplessError(f"gap closes at k={closings}", closings)
    n = nk
    while True:
        ks = midpoint_grid(n)
        if np.any(gap(m, ks) <= 1e-8):
            raise GaplessError("gap below 1e-8 on the sampling grid")
        h = offdiagonal(m, ks)
        dphi = np.angle(np.roll(h, -1) / h)
        if np.all(np.abs(dphi) < 0.5 * math.pi):
            break
        n *= 2
        if n > MAX_POINTS:
            raise PrecisionError("Hermitian winding not resolved")
    raw = float(np.sum(dphi) / TWO_PI)
    nu = round(raw)
    return HermitianPhase(nu_h=nu, residual=abs(raw - nu), raw=raw)


def berry_phase(m: BlochModel, nk: int = 4096) -> float:
    """Discrete Berry (Zak) phase of the lower band in ``(-pi, pi]``.

    Gauge invariant Wilson loop; only defined modulo 2 pi, so it fixes the
    parity of the winding but cannot tell 0 from 2.
    """
    ks = midpoint_grid(nk)
    eig = herm_eig(bloch_h(m, ks))
    if np.any(eig.degenerate):
        raise GaplessError("degenerate bands on the Berry-phase grid")
    u = eig.u[..., 0]
    overlaps = np.sum(np.conj(u) * np.roll(u, -1, axis=0), axis=-1)
    return float(-np.angle(np.prod(overlaps / np.abs(overlaps))))


@dataclass(frozen=True)
class BraidData:
    k: np.ndarray
    tracks: np.ndarray
    permutation: str
    min_track_separation: float
    nu: int | None = None


def _match(lp, lm):
    prev_p, prev_m = np.roll(lp, 1), np.roll(lm, 1)
    keep = np.abs(lp - prev_p) + np.abs(lm - prev_m)
    swap = np.abs(lm - prev_p) + np.abs(lp - prev_m)
    flips = swap < keep - 1e-14
    flips[0] = False
    parity = np.cumsum(flips) % 2 == 1
    t1 = np.where(parity, lm, lp)
    t2 = np.where(parity, lp, lm)
    return t1, t2


def _discontinuities(t1, t2, perm_swap: bool) -> np.ndarray:
    """Indices of steps where a strand lands closer to the other strand."""
    n1 = np.roll(t1, -1)
    n2 = np.roll(t2, -1)
    if perm_swap:
        n1[-1], n2[-1] = t2[0], t1[0]
    ok1 = np.abs(n1 - t1) < np.abs(n2 - t1)
    ok2 = np.abs(n2 - t2) < np.abs(n1 - t2)
    return np.nonzero(~(ok1 & ok2))[0]


def extract_braid(a_of_k: AMap, nk: int = 1024, max_points: int = MAX_POINTS) -> BraidData:
    """Continuity-matched eigenvalue strands on a midpoint grid.

    ``nk`` doubles until every step keeps each strand closer to its own
    continuation than to the other strand's.
    """
    if nk < 256:
        raise DomainError("extract_braid needs nk >= 256")
    n = nk
    while True:
        ks = midpoint_grid(n)
        pair = eig2(a_of_k(ks))
        lp, lm = pair.lambda_plus, pair.lambda_minus
        sep = np.abs(lp - lm)
        j = int(np.argmin(sep))
        if sep[j] < COLLISION_TOL:
            raise DegeneracyError(
                f"eigenvalue strands collide at k={ks[j]!r} (separation {sep[j]:.3g})",
                k=float(ks[j]),
                separation=float(sep[j]),
            )
        t1, t2 = _match(lp, lm)
        stay = abs(t1[-1] - t1[0]) + abs(t2[-1] - t2[0])
        cross = abs(t1[-1] - t2[0]) + abs(t2[-1] - t1[0])
        swapped = cross < stay
        bad = _discontinuities(t1, t2, swapped)
        if bad.size == 0:
            break
        n *= 2
        if n > max_points:
            k_bad = float(ks[bad[0]])
            raise DegeneracyError(
                f"eigenvalue strands jump near k={k_bad!r}; not resolved with {n // 2} samples",
                k=k_bad,
                separation=float(sep[j]),
            )
    return BraidData(
        k=ks,
        tracks=np.stack([t1, t2]),
        permutation="swap" if swapped else "identity",
        min_track_separation=float(sep[j]),
    )


def gauge_knot(g: GaugeChoice, nk: int = 1024) -> KnotPhase:
    """Winding of the gauge unitary ``V(k)`` treated as a non-Hermitian matrix."""
    return nh_winding(lambda k: v_matrix(g, k), nk)
