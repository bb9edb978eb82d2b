import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from tomocheck.linalg import (NotHermitianError, UnsupportedDimensionError, eig_hermitian,
                              hermitian_part, partial_transpose, project_simplex,
                              singular_values_3x3, tensor)
from tomocheck.states import X, Y, Z, I2, bell_state, random_density_matrix

from conftest import random_hermitian


def test_eig_diagonal_examples():
    w, _ = eig_hermitian(Z)
    assert np.allclose(w, [1, -1])
    w, _ = eig_hermitian(0.5 * (I2 + 1.2 * Z))
    assert np.allclose(w, [1.1, -0.1])


@pytest.mark.parametrize("d", [1, 2, 4, 8])
def test_eig_reconstruction(rng, d):
    for _ in range(20):
        m = random_hermitian(rng, d)
        w, v = eig_hermitian(m)
        assert np.all(np.diff(w) <= 1e-14)
        assert np.linalg.norm((v * w) @ v.conj().T - m) <= 1e-10
        assert np.linalg.norm(v.conj().T @ v - np.eye(d)) <= 1e-10
        assert np.allclose(w, np.linalg.eigvalsh(m)[::-1], atol=1e-10)


def test_eig_degenerate_and_zero_pivots():
    m = np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex)
    m[0, 1] = m[1, 0] = 0.0
    w, v = eig_hermitian(m)
    assert np.allclose(w, [0.5, 0.5, 0, 0])
    w, v = eig_hermitian(np.ones((4, 4)))
    assert np.allclose(w, [4, 0, 0, 0], atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError, match="not Hermitian"):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_hermitian_part_symmetrizes_tiny_asymmetry():
    m = np.array([[1, 1e-14j], [0, 0]])
    h = hermitian_part(m)
    assert np.allclose(h, h.conj().T, atol=0)


def test_simplex_examples():
    assert np.allclose(project_simplex([0.3, 0.7]), [0.3, 0.7])
    assert np.allclose(project_simplex([1.1, -0.1]), [1.0, 0.0])
    assert np.allclose(project_simplex([0.5] * 4), [0.25] * 4)


def test_simplex_matches_grid_on_one_simplex():
    grid = np.linspace(0, 1, 100001)
    for v in ([1.1, -0.1], [0.2, 0.3], [3.0, -5.0], [-0.4, -0.1]):
        best = grid[np.argmin((grid - v[0]) ** 2 + (1 - grid - v[1]) ** 2)]
        assert abs(project_simplex(v)[0] - best) <= 1e-5


def test_simplex_errors():
    with pytest.raises(ValueError, match="empty"):
        project_simplex([])
    with pytest.raises(ValueError, match="non-finite"):
        project_simplex([np.nan, 1.0])


@settings(max_examples=200, deadline=None)
@given(arrays(float, st.integers(1, 8), elements=st.floats(-5, 5)))
def test_simplex_properties(v):
    p = project_simplex(v)
    assert abs(p.sum() - 1) < 1e-9
    assert np.all(p >= 0)
    assert np.allclose(project_simplex(p), p, atol=1e-12)
    # KKT: v - p is constant on the support and not larger off it
    r = v - p
    on = p > 1e-12
    assert np.ptp(r[on]) < 1e-9
    if np.any(~on):
        assert np.max(r[~on]) <= r[on][0] + 1e-9


def test_simplex_beats_random_simplex_points(rng):
    for _ in range(5):
        v = rng.normal(size=4)
        p = project_simplex(v)
        q = rng.dirichlet(np.ones(4), size=10000)
        assert np.linalg.norm(p - v) <= np.min(np.linalg.norm(q - v, axis=1)) + 1e-12


def test_tensor_examples():
    assert np.allclose(tensor(Z, Z), np.diag([1, -1, -1, 1]))
    assert np.allclose(tensor(I2, I2), np.eye(4))
    xy = tensor(X, Y)
    anti = np.fliplr(xy).diagonal()
    assert np.allclose(np.abs(anti), 1) and np.allclose(anti.real, 0)
    assert abs(np.trace(xy)) < 1e-15


def test_partial_transpose_examples(rng):
    assert np.allclose(partial_transpose(np.eye(4) / 4, 1), np.eye(4) / 4)
    assert np.isclose(np.linalg.eigvalsh(partial_transpose(bell_state(), 1))[0], -0.5)
    a = random_density_matrix(1, rng)
    b = random_density_matrix(1, rng)
    assert np.linalg.eigvalsh(partial_transpose(np.kron(a, b), 0))[0] >= -1e-12


def test_partial_transpose_properties(rng):
    for _ in range(20):
        rho = random_density_matrix(2, rng)
        for s in (0, 1):
            pt = partial_transpose(rho, s)
            assert np.isclose(np.trace(pt), 1)
            assert np.allclose(pt, pt.conj().T)
            assert np.allclose(partial_transpose(pt, s), rho)
    # explicit index check on qubit 1: <i1 i2| PT |j1 j2> = <i1 j2| rho |j1 i2>
    m = rng.normal(size=(4, 4))
    pt = partial_transpose(m, 1)
    assert pt[0 * 2 + 1, 1 * 2 + 0] == m[0 * 2 + 0, 1 * 2 + 1]


def test_partial_transpose_errors():
    with pytest.raises(UnsupportedDimensionError):
        partial_transpose(np.eye(8), 0)
    with pytest.raises(ValueError):
        partial_transpose(np.eye(4), 2)


def test_singular_values_examples(rng):
    assert np.allclose(singular_values_3x3(np.eye(3)), [1, 1, 1])
    mz = np.array([[1, 0, 0], [0, 1, 0], [0, 1, 0]], float)
    assert np.allclose(singular_values_3x3(mz), [np.sqrt(2), 1, 0])
    assert np.allclose(singular_values_3x3(np.diag([2, 0.5, 0.1])), [2, 0.5, 0.1])
    for _ in range(20):
        m = rng.normal(size=(3, 3))
        assert np.allclose(singular_values_3x3(m), np.linalg.svd(m, compute_uv=False), atol=1e-10)
