import numpy as np
from hypothesis import given, settings, strategies as st

from conftest import random_unit_trace_hermitian
from tomocheck.errors import MeasurementError, Misalignment, y_for_z, transform_bloch
from tomocheck.linalg import partial_transpose
from tomocheck.positivity import (VIOLATION_TOL, cofactor, constraint_values, det3, epsilons_ppt,
                                  min_eigenvalue, zeta1_single, zetas_arrays, zetas_two_qubit)
from tomocheck.states import (BlochMatrix, bell_state, bloch_from_state, maximally_mixed,
                              random_density_matrix, state_from_bloch)


def test_zeta1_examples():
    assert zeta1_single(np.zeros(3)) == -0.5
    assert abs(zeta1_single(np.array([0.6, 0, 0.8]))) < 1e-15
    # optimal purity-0.75 input for the Y-for-Z error lands on the sphere
    u = np.array([0, np.sqrt(0.5), 0])
    assert abs(zeta1_single(transform_bloch(y_for_z(), u))) < 1e-12


def test_cofactor_examples(rng):
    assert np.allclose(cofactor(np.eye(3)), np.eye(3))
    assert np.allclose(cofactor(np.diag([1, -1, 1.0])), np.diag([-1, 1, -1]))
    assert np.allclose(cofactor(np.diag([2, 3, 5.0])), np.diag([15, 10, 6]))
    for _ in range(100):
        r = rng.normal(size=(3, 3))
        assert np.allclose(r @ cofactor(r).T, det3(r) * np.eye(3), atol=1e-10)
        assert np.isclose(det3(r), np.linalg.det(r))


def test_zetas_examples():
    assert np.allclose(zetas_two_qubit(bloch_from_state(maximally_mixed(2))), [-3, -1, -1])
    assert np.allclose(zetas_two_qubit(bloch_from_state(bell_state())), 0, atol=1e-12)
    assert np.allclose(epsilons_ppt(bloch_from_state(maximally_mixed(2))), [-1, -1])
    assert np.isclose(epsilons_ppt(bloch_from_state(bell_state()))[0], 4)


def test_true_copy_product_zetas():
    u = np.array([0, np.sqrt(0.4), 0])   # purity 0.7 along the optimal direction
    ut = transform_bloch(y_for_z(), u)
    b = BlochMatrix(ut, u, np.outer(ut, u))
    assert np.allclose(zetas_two_qubit(b), [-1.48, -0.12, -0.0144], atol=1e-10)


def test_zetas_are_eigenvalue_polynomials(rng):
    for _ in range(200):
        h = random_unit_trace_hermitian(rng, 4)
        lam = np.linalg.eigvalsh(h)
        e2 = sum(lam[i] * lam[j] for i in range(4) for j in range(i + 1, 4))
        e3 = sum(lam[i] * lam[j] * lam[k] for i in range(4) for j in range(i + 1, 4) for k in range(j + 1, 4))
        z = zetas_two_qubit(bloch_from_state(h))
        assert np.allclose(z, [-8 * e2, -16 * e3, -256 * np.prod(lam)], atol=1e-9)


def test_zeta_set_characterizes_positivity(rng):
    """1000 random states plus 1000 random unit-trace Hermitian matrices."""
    tol = VIOLATION_TOL
    for _ in range(1000):
        c = constraint_values(random_density_matrix(2, rng))
        assert np.all(c.zetas <= 1e-9) and c.min_eigenvalue >= -1e-9 and not c.violated
    agree = 0
    for _ in range(1000):
        h = random_unit_trace_hermitian(rng, 4, spread=float(rng.uniform(0.05, 0.8)))
        c = constraint_values(h)
        assert (not c.violated) == (c.min_eigenvalue >= -tol) or abs(c.min_eigenvalue) < 1e-5
        agree += 1
    assert agree == 1000


def test_epsilons_equal_partial_transpose_zetas(rng):
    for _ in range(200):
        rho = random_density_matrix(2, rng)
        eps = epsilons_ppt(bloch_from_state(rho))
        z = zetas_two_qubit(bloch_from_state(partial_transpose(rho, 1)))
        assert np.allclose(eps, z[1:], atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_product_states_are_ppt(seed):
    rng = np.random.default_rng(seed)
    rho = np.kron(random_density_matrix(1, rng), random_density_matrix(1, rng))
    assert np.all(epsilons_ppt(bloch_from_state(rho)) <= 1e-9)


def test_min_eigenvalue_examples(rng):
    assert min_eigenvalue(random_density_matrix(2, rng)) >= -1e-10
    assert np.isclose(min_eigenvalue(state_from_bloch(np.array([0, 0, 1.2]))), -0.1)
    c = constraint_values(state_from_bloch(np.array([0, 0, 1.2])))
    assert c.zetas.shape == (1,) and c.violated


def test_batched_zetas(rng):
    bs = [bloch_from_state(random_density_matrix(2, rng)) for _ in range(5)]
    stacked = zetas_arrays(np.array([b.u for b in bs]), np.array([b.v for b in bs]), np.array([b.R for b in bs]))
    assert np.allclose(stacked, [zetas_two_qubit(b) for b in bs])


def test_erroneous_product_row():
    u = np.array([0, np.sqrt(0.4), 0])
    err = MeasurementError((Misalignment(y_for_z()), Misalignment(y_for_z())))
    b = transform_bloch(err, BlochMatrix(u, u, np.outer(u, u)))
    assert np.allclose(zetas_two_qubit(b), [-0.76, -0.04, -0.0016], atol=1e-10)
