"""Sweeps in the coupling ``omega``: knot changes, exceptional points, jumps.

A change of the non-Hermitian winding between two couplings is either
mediated by an exceptional point (eigenvalues and eigenvectors of ``A``
coalesce, the spectrum stays continuous) or is first order (no coalescence,
the eigenvalues jump by a finite amount).
"""

from __future__ import annotations

import itertools
import math
import os
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainError,
    GaplessError,
    InvalidInputError,
    NumericalError,
    UnclassifiedTransitionError,
)
from .gauge import GaugeChoice, a_map, apply_gauge, build_a
from .linalg2 import commutator_norm, discriminant2, eig2
from .models import TWO_PI, gap, golden_min, preset
from .topology import SPLIT, KnotPhase, hermitian_winding, nh_winding

EP_DISC_TOL = 1e-10
EP_DEFECT_TOL = 1e-6
EP_NORMALITY_TOL = 1e-6
EP_MERGE_TOL = 1e-6
NEWTON_TARGET = 1e-14
JUMP_THRESHOLD = 0.1
CONTINUITY_THRESHOLD = 1e-3
BISECTION_WIDTH = 1e-6
CRITICAL_GAP = 1e-4
MAX_SEEDS = 32

FIRST_ORDER = "first_order"
EP_MEDIATED = "ep_mediated"


def worker_count() -> int:
    """Thread cap from ``NHKNOT_THREADS`` (default: CPU count, at most 8)."""
    raw = os.environ.get("NHKNOT_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise InvalidInputError(f"NHKNOT_THREADS must be an integer, got {raw!r}") from exc
        if n < 1:
            raise InvalidInputError("NHKNOT_THREADS must be >= 1")
        return n
    return max(1, min(8, os.cpu_count() or 1))


def _pmap(fn, items):
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def annotate(exc: NumericalError, omega: float) -> NumericalError:
    exc.omega = omega
    exc.args = (f"omega={omega!r}: {exc.args[0] if exc.args else exc}",) + tuple(exc.args[1:])
    return exc


def a_function(family: str, g: GaugeChoice, post: GaugeChoice | None = None):
    """``(omega, k) -> A`` for a named model family, vectorised over ``k``."""

    def sample(omega: float, k):
        a = build_a(preset(family, omega), g, k, omega=omega)
        if post is not None:
            a = apply_gauge(a, post, k)
        return a

    return sample


def knot_at(family: str, g: GaugeChoice, omega: float, nk: int = 1024, post=None) -> KnotPhase:
    try:
        return nh_winding(a_map(preset(family, omega), g, post=post, omega=omega), nk)
    except NumericalError as exc:
        raise annotate(exc, omega) from None


def scan_omega(
    family: str,
    g: GaugeChoice,
    omega_grid: Sequence[float],
    nk: int = 1024,
    post: GaugeChoice | None = None,
) -> list[tuple[float, KnotPhase]]:
    """Winding number at each coupling of a strictly increasing positive grid."""
    grid = [float(w) for w in omega_grid]
    if not grid:
        raise InvalidInputError("omega grid is empty")
    if not all(math.isfinite(w) and w > 0 for w in grid):
        raise DomainError("omega grid must be finite and positive")
    if any(b <= a for a, b in itertools.pairwise(grid)):
        raise InvalidInputError("omega grid must be strictly increasing")
    phases = _pmap(lambda w: knot_at(family, g, w, nk, post), grid)
    return list(zip(grid, phases))


@dataclass(frozen=True)
class EPCandidate:
    omega: float
    k: float
    discriminant_abs: float
    defectiveness: float
    normality: float
    eigenvalue: complex = 0j

    @property
    def separation(self) -> float:
        return 2.0 * math.sqrt(self.discriminant_abs)

    @property
    def is_ep(self) -> bool:
        return (
            self.discriminant_abs < EP_DISC_TOL
            and self.defectiveness < EP_DEFECT_TOL
            and self.normality > EP_NORMALITY_TOL
        )

    @property
    def kind(self) -> str:
        return "ep" if self.is_ep else "ndp"

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "k": self.k,
            "residual": self.discriminant_abs,
            "defectiveness": self.defectiveness,
            "normality": self.normality,
            "kind": self.kind,
        }


def _disc(afn, omega: float, k: float) -> complex:
    return complex(discriminant2(afn(omega, k)))


def _newton(afn, omega: float, k: float, lo_w: float, max_iter: int = 60):
    """Drive ``disc(A(omega, k))`` to zero by damped Newton steps; returns (omega, k, |disc|)."""
    x = np.array([omega, k], dtype=float)
    f = _disc(afn, *x)
    for _ in range(max_iter):
        if abs(f) < NEWTON_TARGET:
            break
        h = 1e-7 * np.maximum(1.0, np.abs(x))
        if x[0] - h[0] <= lo_w:
            break
        jac = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h[j]
            d = (_disc(afn, *(x + e)) - _disc(afn, *(x - e))) / (2.0 * h[j])
            jac[:, j] = (d.real, d.imag)
        r = np.array([f.real, f.imag])
        if np.linalg.cond(jac) < 1e12:
            step = -np.linalg.solve(jac, r)
        else:
            # gradient of |disc|^2 when the Jacobian is near singular
            step = -(jac.T @ r)
        t = 1.0
        while t > 1e-6:
            cand = x + t * step
            if cand[0] > lo_w:
                try:
                    fc = _disc(afn, *cand)
                except (NumericalError, DomainError):
                    fc = None
                if fc is not None and abs(fc) < abs(f):
                    break
            t *= 0.5
        else:
            break
        x, f = cand, fc
    return float(x[0]), float(x[1]), abs(f)


def certify(afn, omega: float, k: float) -> EPCandidate:
    a = afn(omega, k)
    pair = eig2(a)
    lam = complex(0.5 * (a[0, 0] + a[1, 1]))
    smin = float(np.linalg.svd(a - lam * np.eye(2), compute_uv=False)[-1])
    return EPCandidate(
        omega=omega,
        k=k % TWO_PI,
        discriminant_abs=float(abs(pair.discriminant)),
        defectiveness=smin,
        normality=float(commutator_norm(a)),
        eigenvalue=lam,
    )


def _same_point(p: EPCandidate, q: EPCandidate) -> bool:
    dk = abs(p.k - q.k)
    dk = min(dk, TWO_PI - dk)
    return abs(p.omega - q.omega) < EP_MERGE_TOL and dk < EP_MERGE_TOL


def find_ep(
    family: str,
    g: GaugeChoice,
    omega_range: tuple[float, float],
    k_range: tuple[float, float] = (0.0, TWO_PI),
    n_omega: int = 64,
    n_k: int = 64,
    post: GaugeChoice | None = None,
    diagnostics: list | None = None,
) -> list[EPCandidate]:
    """Zeros of the eigenvalue discriminant of ``A(omega, k)`` in a box.

    Seeds are local minima of ``|disc|`` on a cell-centred grid. Each is
    polished by Newton's method and kept if it converges inside the box.
    Both exceptional points and non-defective degeneracies are returned;
    check :attr:`EPCandidate.is_ep`.
    """
    w0, w1 = (float(v) for v in omega_range)
    k0, k1 = (float(v) for v in k_range)
    if not all(math.isfinite(v) for v in (w0, w1, k0, k1)):
        raise InvalidInputError("search ranges must be finite")
    if not (0 < w0 < w1) or not (k0 < k1):
        raise DomainError("need 0 < omega_lo < omega_hi and k_lo < k_hi")
    if n_omega < 64 or n_k < 64:
        raise DomainError("coarse grid must be at least 64 x 64")
    afn = a_function(family, g, post)
    ws = w0 + (np.arange(n_omega) + 0.5) * (w1 - w0) / n_omega
    ks = k0 + (np.arange(n_k) + 0.5) * (k1 - k0) / n_k

    def row(w):
        try:
            return np.abs(discriminant2(afn(w, ks)))
        except NumericalError:
            out = np.empty(n_k)
            for j, k in enumerate(ks):
                try:
                    out[j] = abs(_disc(afn, w, k))
                except NumericalError:
                    out[j] = np.inf
            return out

    grid = np.array(_pmap(row, ws))
    pad = np.pad(grid, 1, constant_values=np.inf)
    is_min = np.ones_like(grid, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                nb = pad[1 + di : 1 + di + n_omega, 1 + dj : 1 + dj + n_k]
                is_min &= grid <= nb
    idx = np.argwhere(is_min & np.isfinite(grid))
    order = np.argsort(grid[is_min & np.isfinite(grid)], kind="stable")
    seeds = [tuple(idx[i]) for i in order[:MAX_SEEDS]]

    margin_w = 1e-9 * max(1.0, w1)
    found: list[EPCandidate] = []
    for i, j in seeds:
        try:
            w, k, res = _newton(afn, float(ws[i]), float(ks[j]), lo_w=0.5 * w0)
        except (NumericalError, DomainError) as exc:
            if diagnostics is not None:
                diagnostics.append({"seed": (float(ws[i]), float(ks[j])), "dropped": str(exc)})
            continue
        if res >= EP_DISC_TOL:
            if diagnostics is not None:
                diagnostics.append(
                    {"seed": (float(ws[i]), float(ks[j])), "dropped": f"no convergence, |disc|={res:.3g}"}
                )
            continue
        kk = k0 + ((k - k0) % TWO_PI) if k1 - k0 >= TWO_PI - 1e-12 else k
        if not (w0 - margin_w <= w <= w1 + margin_w and k0 - 1e-9 <= kk <= k1 + 1e-9):
            if diagnostics is not None:
                diagnostics.append({"seed": (float(ws[i]), float(ks[j])), "dropped": "left the box"})
            continue
        cand = certify(afn, w, kk)
        if not any(_same_point(cand, f) for f in found):
            found.append(cand)
    found.sort(key=lambda c: (c.omega, c.k))
    return found


@dataclass(frozen=True)
class JumpRecord:
    """Eigenvalues of ``A`` on both sides of ``omega_star`` at fixed ``k``.

    ``below[i]`` and ``above[i]`` hold the paired eigenvalues at offset
    ``deltas[i]``; ``jump`` is the zero-offset extrapolation of
    ``above - below`` from a fit in ``1, sqrt(delta), delta``.
    """

    omega_star: float
    k_star: float
    deltas: tuple
    below: np.ndarray
    above: np.ndarray
    jump: np.ndarray
    note: str = ""

    @property
    def max_jump(self) -> float:
        return float(np.max(np.abs(self.jump)))

    @property
    def is_jump(self) -> bool:
        return self.max_jump > JUMP_THRESHOLD

    def to_dict(self) -> dict:
        return {
            "omega_star": self.omega_star,
            "k_star": self.k_star,
            "deltas": list(self.deltas),
            "below": [[_cjson(z) for z in row] for row in self.below],
            "above": [[_cjson(z) for z in row] for row in self.above],
            "jump": [_cjson(z) for z in self.jump],
            "note": self.note,
        }


def _cjson(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag, "abs": abs(z)}


def _pair(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keep = abs(hi[0] - lo[0]) + abs(hi[1] - lo[1])
    swap = abs(hi[1] - lo[0]) + abs(hi[0] - lo[1])
    if swap < keep - 1e-14:
        hi = hi[::-1]
    order = np.lexsort((lo.imag, lo.real))
    return lo[order], hi[order]


def discontinuity(
    family: str,
    g: GaugeChoice,
    omega_star: float,
    k_star: float,
    delta: float = 1e-4,
    post: GaugeChoice | None = None,
) -> JumpRecord:
    """One-sided eigenvalue limits of ``A`` across ``omega_star`` at ``k_star``."""
    if not (0 < delta <= 0.1):
        raise DomainError("delta must lie in (0, 0.1]")
    if omega_star - delta <= 0:
        raise DomainError("omega_star - delta must stay positive")
    afn = a_function(family, g, post)
    deltas = (delta, delta / 2, delta / 4)
    note = ""
    k = float(k_star)

    def eigs(w, kk):
        p = eig2(afn(w, kk))
        return np.array([complex(p.lambda_plus), complex(p.lambda_minus)])

    for attempt in (k, k + 1e-9, k - 1e-9):
        try:
            rows = [(eigs(omega_star - d, attempt), eigs(omega_star + d, attempt)) for d in deltas]
        except NumericalError:
            continue
        if attempt != k:
            note = f"k_star shifted to {attempt!r} to avoid a degenerate point"
        k = attempt
        break
    else:
        raise DomainError(f"A is undefined near k={k_star!r} on both sides of omega={omega_star!r}")

    paired = [_pair(lo, hi) for lo, hi in rows]
    below = np.array([p[0] for p in paired])
    above = np.array([p[1] for p in paired])
    s = np.sqrt(np.array(deltas))
    basis = np.stack([np.ones(3), s, s * s], axis=1)
    coef = np.linalg.solve(basis, above - below)
    return JumpRecord(
        omega_star=float(omega_star),
        k_star=k,
        deltas=deltas,
        below=below,
        above=above,
        jump=coef[0],
        note=note,
    )


@dataclass
class TransitionReport:
    omega_star: float
    kind: str
    nu_below: int
    nu_above: int
    jump: np.ndarray
    ep_points: list[EPCandidate]
    herm_coincident: bool
    bracket: tuple[float, float] = (0.0, 0.0)
    critical_k: list[float] = field(default_factory=list)
    records: list[JumpRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "omega_star": self.omega_star,
            "kind": self.kind,
            "nu_below": self.nu_below,
            "nu_above": self.nu_above,
            "jump": [_cjson(z) for z in self.jump],
            "ep_points": [
                {"omega": p.omega, "k": p.k, "residual": p.discriminant_abs} for p in self.ep_points
            ],
            "herm_coincident": self.herm_coincident,
        }


def _critical_k(family: str, omega: float) -> list[float]:
    """Gap minima of ``H`` below ``CRITICAL_GAP`` at ``omega``."""
    m = preset(family, omega)
    n = 1024
    ks = TWO_PI * np.arange(n) / n
    gv = gap(m, ks)
    out = []
    for j in np.nonzero((gv <= np.roll(gv, 1)) & (gv <= np.roll(gv, -1)))[0]:
        step = TWO_PI / n
        k = golden_min(lambda x: float(gap(m, x)), ks[j] - step, ks[j] + step) % TWO_PI
        if float(gap(m, k)) < CRITICAL_GAP and all(abs(k - c) > 1e-6 for c in out):
            out.append(k)
    return sorted(out)


def _herm_phase(family: str, omega: float):
    try:
        return hermitian_winding(preset(family, omega)).nu_h
    except GaplessError:
        return None


def classify_transition(
    family: str,
    g: GaugeChoice,
    bracket: tuple[float, float],
    nk: int = 1024,
    post: GaugeChoice | None = None,
    width: float = BISECTION_WIDTH,
    delta: float = 1e-4,
) -> TransitionReport:
    """Locate and classify the knot change inside ``bracket``.

    Bisection on the winding narrows the change to ``width``. EPs are then
    searched near the estimate and eigenvalue jumps measured at every
    near-closing of the Hermitian gap and at every EP.
    """
    lo, hi = (float(v) for v in bracket)
    if not (0 < lo < hi):
        raise DomainError("bracket must satisfy 0 < lo < hi")
    nu_lo = knot_at(family, g, lo, nk, post).nu
    nu_hi = knot_at(family, g, hi, nk, post).nu
    if nu_lo == nu_hi:
        raise DomainError(f"winding is {nu_lo} at both ends of {bracket}; nothing to classify")
    herm_lo, herm_hi = _herm_phase(family, lo), _herm_phase(family, hi)

    while hi - lo > width:
        for frac in (SPLIT, 1.0 - SPLIT):
            mid = lo + frac * (hi - lo)
            try:
                nu_mid = knot_at(family, g, mid, nk, post).nu
                break
            except NumericalError as exc:
                last = exc
        else:
            raise last
        if nu_mid == nu_lo:
            lo = mid
        else:
            hi, nu_hi = mid, nu_mid
    omega_star = 0.5 * (lo + hi)

    diag: list = []
    window = 1e-3 * max(1.0, omega_star)
    eps = find_ep(
        family,
        g,
        (max(omega_star - window, 0.5 * omega_star), omega_star + window),
        post=post,
        diagnostics=diag,
    )
    near = 1e-4 * max(1.0, omega_star)
    ep_points = [p for p in eps if p.is_ep and abs(p.omega - omega_star) < near]
    critical = _critical_k(family, omega_star)

    records = []
    for k in critical:
        records.append(discontinuity(family, g, omega_star, k, delta, post))
    for p in ep_points:
        records.append(discontinuity(family, g, p.omega, p.k, delta, post))
    herm_coincident = herm_lo is None or herm_hi is None or herm_lo != herm_hi
    max_jump = max((r.max_jump for r in records), default=0.0)
    diagnostics = {
        "omega_star": omega_star,
        "bracket": (lo, hi),
        "nu": (nu_lo, nu_hi),
        "critical_k": critical,
        "ep_candidates": [p.to_dict() for p in eps],
        "max_jump": max_jump,
        "jumps": [r.to_dict() for r in records],
        "newton": diag,
    }
    if ep_points and records and max_jump < CONTINUITY_THRESHOLD:
        kind = EP_MEDIATED
    elif not ep_points and max_jump > JUMP_THRESHOLD:
        kind = FIRST_ORDER
    else:
        raise UnclassifiedTransitionError(
            f"inconsistent evidence at omega={omega_star!r}: {len(ep_points)} EPs, max jump {max_jump:.3g}",
            diagnostics,
        )
    best = max(records, key=lambda r: r.max_jump)
    return TransitionReport(
        omega_star=omega_star,
        kind=kind,
        nu_below=nu_lo,
        nu_above=nu_hi,
        jump=best.jump,
        ep_points=ep_points,
        herm_coincident=herm_coincident,
        bracket=(lo, hi),
        critical_k=critical,
        records=records,
    )
