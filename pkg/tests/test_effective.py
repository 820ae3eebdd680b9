import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from nhknot.effective import (
    MINUS,
    OPEN,
    PLUS,
    EffectiveModel,
    bloch_union,
    branch_jump,
    eff_bloch,
    full_factor,
    linearization_error,
    realspace_chain,
)
from nhknot.errors import DegeneratePointError, DomainError, InvalidInputError

OFFSETS = (0.01, 0.005, 0.0025)


def test_branch_blocks():
    p, m = EffectiveModel.published("plus"), EffectiveModel.published("minus")
    assert np.array_equal(p.c, [[1j, -1j], [1, 1]])
    assert np.array_equal(m.c, [[-1j, 1j], [1, 1]])
    assert np.array_equal(p.c - m.c, [[2j, -2j], [0, 0]])
    assert branch_jump() == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    assert EffectiveModel.derived("+").side == PLUS and EffectiveModel.derived("-").side == MINUS


def test_side_validation():
    with pytest.raises(InvalidInputError):
        EffectiveModel.published("left")


def test_for_k_picks_side_and_rejects_pi():
    assert EffectiveModel.for_k(math.pi + 0.1).side == PLUS
    assert EffectiveModel.for_k(math.pi - 0.1).side == MINUS
    with pytest.raises(DegeneratePointError):
        EffectiveModel.for_k(math.pi)


@pytest.mark.parametrize("side", [PLUS, MINUS])
def test_eff_bloch_at_pi_is_c(side):
    e = EffectiveModel.published(side)
    assert np.abs(eff_bloch(e, math.pi) - e.c).max() < 1e-15


@pytest.mark.parametrize("side,sign", [(PLUS, 1), (MINUS, -1)])
def test_c_is_one_sided_limit_of_exact_factor(side, sign):
    c = EffectiveModel.published(side).c
    assert np.abs(full_factor(math.pi + sign * 1e-6) - c).max() < 1e-5


@pytest.mark.parametrize("side,sign", [(PLUS, 1), (MINUS, -1)])
def test_derived_m_matches_finite_difference_oracle(side, sign):
    h = 1e-5
    a1 = full_factor(math.pi + sign * h)
    a2 = full_factor(math.pi + sign * 2 * h)
    # one-sided second-order derivative; sin k ~ -(k - pi) near pi
    deriv = sign * (4 * a1 - a2 - 3 * EffectiveModel.derived(side).c) / (2 * h)
    assert np.abs(-deriv - EffectiveModel.derived(side).m).max() < 1e-6


@pytest.mark.parametrize("side,sign", [(PLUS, 1), (MINUS, -1)])
def test_derived_error_quadratic(side, sign):
    for d in OFFSETS:
        assert linearization_error(math.pi + sign * d, "derived") < 5 * d**2


def test_published_top_rows_violate_quadratic_bound():
    # documented mismatch: the printed top-row hopping entries are not -dA/dk
    d = 0.01
    assert linearization_error(math.pi + d, "published") > 5 * d**2
    assert not np.allclose(EffectiveModel.published(PLUS).m, EffectiveModel.derived(PLUS).m)
    assert np.array_equal(EffectiveModel.published(PLUS).m[1], EffectiveModel.derived(PLUS).m[1])


@pytest.mark.parametrize("sign", [1, -1])
def test_halving_ratios(sign):
    def ratios(source):
        e = [linearization_error(math.pi + sign * d, source) for d in OFFSETS]
        return e[0] / e[1], e[1] / e[2]

    assert all(abs(r - 4) < 0.4 for r in ratios("derived"))
    assert all(abs(r - 2) < 0.2 for r in ratios("published"))


def test_linearization_error_grows_away_from_pi():
    ds = np.linspace(0.001, 0.2, 20)
    errs = [linearization_error(math.pi + d, "derived") for d in ds]
    assert np.all(np.diff(errs) > 0)


def test_linearization_error_domain():
    with pytest.raises(DegeneratePointError):
        linearization_error(math.pi)
    with pytest.raises(DomainError):
        linearization_error(math.pi + 0.3)
    linearization_error(math.pi + 0.2)
    with pytest.raises(InvalidInputError):
        linearization_error(math.nan)


def test_open_chain_smallest():
    e = EffectiveModel.published(PLUS)
    op = realspace_chain(e, 2, OPEN)
    mat = op.matrix()
    assert mat.shape == (4, 4)
    assert np.array_equal(mat[:2, :2], e.c) and np.array_equal(mat[2:, 2:], e.c)
    assert np.allclose(mat[2:, :2], e.m / 2j) and np.allclose(mat[:2, 2:], -e.m / 2j)
    big = realspace_chain(e, 4, OPEN).matrix()
    assert np.all(big[:2, 6:] == 0) and np.all(big[6:, :2] == 0)


def match_distance(a, b):
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()


@pytest.mark.parametrize("source", ["published", "derived"])
@pytest.mark.parametrize("side", [PLUS, MINUS])
def test_periodic_chain_matches_bloch_union(source, side):
    e = EffectiveModel.published(side) if source == "published" else EffectiveModel.derived(side)
    op = realspace_chain(e, 64)
    assert op.dim == 128
    assert match_distance(op.spectrum(), bloch_union(e, 64)) < 1e-9


def test_symbol_is_linearised_bloch_matrix():
    e = EffectiveModel.derived(MINUS)
    k = np.linspace(0, 2 * math.pi, 17)
    assert np.abs(realspace_chain(e, 8).symbol(k) - eff_bloch(e, k)).max() < 1e-14


def test_open_spectrum_differs_from_periodic():
    e = EffectiveModel.published(PLUS)
    assert match_distance(realspace_chain(e, 16, OPEN).spectrum(), realspace_chain(e, 16).spectrum()) > 1e-3


def test_chain_validation():
    e = EffectiveModel.published(PLUS)
    with pytest.raises(DomainError):
        realspace_chain(e, 1)
    with pytest.raises(DomainError):
        realspace_chain(e, 2.5)
    with pytest.raises(InvalidInputError):
        realspace_chain(e, 4, "twisted")
