import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import eigvals_dense

from nhknot.errors import InvalidInputError
from nhknot.gauge import FIGURE_GENERAL, v_matrix
from nhknot.linalg2 import (
    SIGMA_X,
    commutator_norm,
    det2,
    eig2,
    herm_eig,
    trace2,
    unitary_error,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
complex_entry = st.builds(complex, finite, finite)
mat2 = st.lists(complex_entry, min_size=4, max_size=4).map(lambda v: np.array(v).reshape(2, 2))


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_eig2_rotation_example():
    p = eig2(np.array([[1, -1], [1, 1]]))
    assert {complex(p.lambda_plus), complex(p.lambda_minus)} == {1 + 1j, 1 - 1j}
    assert not p.degenerate


def test_eig2_identity_is_degenerate_not_defective():
    p = eig2(np.eye(2))
    assert p.lambda_plus == p.lambda_minus == 1
    assert p.degenerate and not p.defective


def test_eig2_jordan_block_is_defective():
    p = eig2(np.array([[0, 1], [0, 0]]))
    assert p.lambda_plus == p.lambda_minus == 0
    assert p.degenerate and p.defective


def test_eig2_principal_branch_matches_trace_over_two_plus_root():
    m = np.array([[2, 3j], [1, -1]])
    p = eig2(m)
    half = 0.5 * (m[0, 0] + m[1, 1])
    assert complex(p.lambda_plus) == pytest.approx(half + np.sqrt(complex(p.discriminant)), abs=1e-15)


def test_eig2_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        eig2(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(InvalidInputError):
        eig2(np.zeros((3, 3)))


@given(mat2)
def test_eig2_vieta(m):
    p = eig2(m)
    scale = 1 + np.abs(m).max() ** 2
    assert abs(p.lambda_plus + p.lambda_minus - trace2(m)) <= 1e-10 * scale
    assert abs(p.lambda_plus * p.lambda_minus - det2(m)) <= 1e-10 * scale


@given(mat2)
def test_eig2_agrees_with_lapack(m):
    p = eig2(m)
    ours = np.array([complex(p.lambda_plus), complex(p.lambda_minus)])
    ref = eigvals_dense(m)
    scale = 1 + np.abs(m).max()
    best = min(np.abs(ours - ref).max(), np.abs(ours[::-1] - ref).max())
    # eigenvalues of a near-defective matrix are only sqrt(eps) accurate
    assert best <= 1e-6 * scale


def test_eig2_similarity_invariance(rng):
    for _ in range(1000):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        u = random_unitary(rng)
        a, b = eig2(m), eig2(u @ m @ u.conj().T)
        x = np.sort_complex(np.array([a.lambda_plus, a.lambda_minus]))
        y = np.sort_complex(np.array([b.lambda_plus, b.lambda_minus]))
        assert np.abs(x - y).max() < 1e-9


def test_herm_eig_rank_one_example():
    e = herm_eig(np.full((2, 2), 1.5))
    assert e.e1 == pytest.approx(0, abs=1e-15)
    assert e.e2 == pytest.approx(3)
    assert not e.degenerate


def test_herm_eig_degenerate_flag():
    assert herm_eig(np.eye(2)).degenerate
    e = herm_eig(2 * np.eye(2))
    assert (e.e1, e.e2) == (2, 2) and e.degenerate


def test_herm_eig_phase_gauge_second_component_real_nonnegative(rng):
    for _ in range(200):
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = z + z.conj().T
        u = herm_eig(h).u
        assert np.all(np.abs(u[1].imag) < 1e-15)
        assert np.all(u[1].real >= 0)


def test_herm_eig_phase_fallback_to_first_component():
    # diagonal H: an eigenvector has a zero second component
    u = herm_eig(np.diag([1.0, 3.0]).astype(complex)).u
    col = u[:, 0]
    assert abs(col[1]) < 1e-12
    assert col[0].imag == 0 and col[0].real > 0


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        herm_eig(np.array([[1, 2], [0, 1]]))


def test_herm_eig_reconstruction_random(rng):
    z = rng.normal(size=(1000, 2, 2)) + 1j * rng.normal(size=(1000, 2, 2))
    h = z + np.conj(np.swapaxes(z, -1, -2))
    e = herm_eig(h)
    rec = e.u @ (np.stack([e.e1, e.e2], -1)[..., None] * np.conj(np.swapaxes(e.u, -1, -2)))
    assert np.abs(rec - h).max() < 1e-10
    assert np.all(e.e1 <= e.e2)
    assert unitary_error(e.u).max() < 1e-10
    hu = h @ e.u
    assert np.abs(hu - e.u * np.stack([e.e1, e.e2], -1)[..., None, :]).max() < 1e-12 * (1 + np.abs(h).max())


def test_commutator_norm_examples():
    assert commutator_norm(SIGMA_X) == 0
    assert commutator_norm(np.array([[0, 1], [0, 0]])) == pytest.approx(math.sqrt(2))
    assert commutator_norm(np.array([[1, -1], [1, 1]])) == pytest.approx(0, abs=1e-15)


def test_commutator_norm_vanishes_on_hermitian_and_unitary(rng):
    for _ in range(500):
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = z + z.conj().T
        assert commutator_norm(h) <= 1e-12 * (1 + np.abs(h).max() ** 2)
        assert commutator_norm(random_unitary(rng)) <= 1e-12


def test_unitary_error_examples():
    assert unitary_error(SIGMA_X) == 0
    assert unitary_error(2 * np.eye(2)) == pytest.approx(3 * math.sqrt(2))
    assert unitary_error(v_matrix(FIGURE_GENERAL, 0.0)) < 1e-15
