import numpy as np
import pytest

from hdg_voigt.voigt import (PLANE_STRAIN, PLANE_STRESS, IncompressibleLimitError, MaterialError,
                             MaterialParams, NormalisationError, build_constitutive, check_gauss_identity,
                             check_stokes_identity, curl_matrix, expansion_matrices, msd_of, normal_matrix,
                             nrr_of, sym_sqrt, tangent_matrix, tensor_to_voigt, voigt_curl, voigt_strain,
                             voigt_to_tensor)

from oracles import random_polynomial


def test_sizes():
    assert (msd_of(2), msd_of(3), nrr_of(2), nrr_of(3)) == (3, 6, 1, 3)


def test_hooke_nu_zero_2d():
    D = build_constitutive(MaterialParams(1.0, 0.0), 2).D
    np.testing.assert_allclose(D, [[1, 0, 0], [0, 1, 0], [0, 0, 0.5]], atol=1e-15)


def test_hooke_plane_strain_quarter():
    c = build_constitutive(MaterialParams(1.0, 0.25, PLANE_STRAIN), 2)
    np.testing.assert_allclose(c.D, [[1.2, 0.4, 0], [0.4, 1.2, 0], [0, 0, 0.4]], atol=1e-14)
    w, V = np.linalg.eigh(c.D)
    np.testing.assert_allclose(c.Dhalf, (V * np.sqrt(w)) @ V.T, atol=1e-14)


def test_hooke_plane_stress():
    E, nu = 2.0, 0.3
    D = build_constitutive(MaterialParams(E, nu, PLANE_STRESS), 2).D
    ref = E / (1 - nu**2) * np.array([[1, nu, 0], [nu, 1, 0], [0, 0, (1 - nu) / 2]])
    np.testing.assert_allclose(D, ref, rtol=1e-14)


def test_hooke_3d_nu_zero():
    D = build_constitutive(MaterialParams(1.0, 0.0), 3).D
    np.testing.assert_allclose(D, np.diag([1, 1, 1, 0.5, 0.5, 0.5]), atol=1e-15)


@pytest.mark.parametrize("nu,err", [(0.5, IncompressibleLimitError), (0.7, IncompressibleLimitError),
                                    (-0.1, MaterialError)])
def test_material_range(nu, err):
    with pytest.raises(err):
        MaterialParams(1.0, nu)


def test_material_modulus_and_plane():
    with pytest.raises(MaterialError):
        MaterialParams(0.0, 0.3)
    with pytest.raises(MaterialError):
        MaterialParams(1.0, 0.3, "plane_wave")


def test_dhalf_squared_many(rng):
    for _ in range(100):
        E, nu = rng.uniform(0.1, 100.0), rng.uniform(0.0, 0.4999)
        for nsd in (2, 3):
            c = build_constitutive(MaterialParams(E, nu), nsd)
            assert np.linalg.norm(c.Dhalf @ c.Dhalf - c.D) <= 1e-12 * np.linalg.norm(c.D)
            assert np.allclose(c.Dhalf, c.Dhalf.T)
            assert np.linalg.eigvalsh(c.Dhalf).min() > 0


def test_sym_sqrt_rejects_indefinite():
    with pytest.raises(ValueError):
        sym_sqrt(np.diag([1.0, -1.0]))


def test_expansion_matrices_reproduce_symmetric_gradient(rng):
    g = rng.normal(size=(2, 2))
    eps = voigt_strain(g)
    np.testing.assert_allclose(eps, [g[0, 0], g[1, 1], g[0, 1] + g[1, 0]])
    g3 = rng.normal(size=(3, 3))
    np.testing.assert_allclose(voigt_strain(g3), [g3[0, 0], g3[1, 1], g3[2, 2], g3[0, 1] + g3[1, 0],
                                                  g3[0, 2] + g3[2, 0], g3[1, 2] + g3[2, 1]])
    assert expansion_matrices(3).shape == (3, 6, 3)


def test_normal_matrix_axis_aligned():
    s = np.array([1.0, 2.0, 3.0])   # s11, s22, s12
    np.testing.assert_allclose(normal_matrix([1.0, 0.0]).T @ s, [1.0, 3.0])
    np.testing.assert_allclose(normal_matrix([0.0, 1.0]).T @ s, [3.0, 2.0])
    np.testing.assert_array_equal(normal_matrix([1.0, 0.0]), expansion_matrices(2)[0])


@pytest.mark.parametrize("nsd", [2, 3])
def test_normal_matrix_contraction(rng, nsd):
    for _ in range(20):
        n = rng.normal(size=nsd)
        n /= np.linalg.norm(n)
        S = rng.normal(size=(nsd, nsd))
        S = S + S.T
        np.testing.assert_allclose(normal_matrix(n).T @ tensor_to_voigt(S), S @ n, atol=1e-13)


def test_normal_matrix_batched(rng):
    n = rng.normal(size=(4, 5, 2))
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    assert normal_matrix(n).shape == (4, 5, 3, 2)


def test_non_unit_normal_rejected():
    with pytest.raises(NormalisationError):
        normal_matrix([1.0, 1.0])
    with pytest.raises(NormalisationError):
        tangent_matrix([0.5, 0.0])


def test_tangent_matrix_2d(rng):
    np.testing.assert_allclose(tangent_matrix([1.0, 0.0])[:, 0], [0.0, -1.0])
    np.testing.assert_allclose(tangent_matrix([0.0, 1.0])[:, 0], [1.0, 0.0])
    for _ in range(20):
        n = rng.normal(size=2)
        n /= np.linalg.norm(n)
        assert abs(tangent_matrix(n)[:, 0] @ n) < 1e-15


def test_tangent_matrix_3d_is_cross_product(rng):
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    v = rng.normal(size=3)
    np.testing.assert_allclose(tangent_matrix(n) @ v, np.cross(n, v), atol=1e-15)


def test_curl_2d(rng):
    g = rng.normal(size=(2, 2))
    np.testing.assert_allclose(voigt_curl(g), [g[1, 0] - g[0, 1]])
    assert curl_matrix(3).shape == (3, 3, 3)


def test_curl_3d(rng):
    g = rng.normal(size=(3, 3))    # g[i, k] = dv_i/dx_k
    ref = [g[2, 1] - g[1, 2], g[0, 2] - g[2, 0], g[1, 0] - g[0, 1]]
    np.testing.assert_allclose(voigt_curl(g), ref)


def test_voigt_tensor_roundtrip(rng):
    S = rng.normal(size=(3, 3))
    S = S + S.T
    np.testing.assert_allclose(voigt_to_tensor(tensor_to_voigt(S)), S)


def test_rigid_motion_annihilated(rng):
    c = rng.normal()
    grad = np.broadcast_to(np.array([[0.0, -c], [c, 0.0]]), (50, 2, 2))
    # the translation (a, b) has zero gradient; the rotation c gives a skew gradient
    assert np.abs(voigt_strain(grad)).max() == 0.0
    assert voigt_curl(grad)[0, 0] == pytest.approx(2 * c)


def _stress_field(rng, degree):
    f, grad = random_polynomial(rng, degree, 3)

    def div(x):
        g = grad(x)       # g[..., a, k] = d s_a / dx_k
        return np.stack([g[..., 0, 0] + g[..., 2, 1], g[..., 2, 0] + g[..., 1, 1]], axis=-1)
    return f, div


def test_gauss_constant_fields():
    s = lambda x: np.ones(np.shape(x)[:-1] + (3,))
    d = lambda x: np.zeros(np.shape(x))
    v = lambda x: np.ones(np.shape(x))
    gv = lambda x: np.zeros(np.shape(x)[:-1] + (2, 2))
    assert check_gauss_identity(s, d, v, gv) < 1e-15


def test_gauss_random_polynomials(rng):
    for _ in range(10):
        s, ds = _stress_field(rng, int(rng.integers(1, 4)))
        v, gv = random_polynomial(rng, int(rng.integers(1, 5)), 2)
        assert check_gauss_identity(s, ds, v, gv) <= 1e-12


def test_stokes_rotation_field():
    v = lambda x: np.stack([-x[..., 1], x[..., 0]], axis=-1)
    gv = lambda x: np.broadcast_to(np.array([[0.0, -1.0], [1.0, 0.0]]), np.shape(x)[:-1] + (2, 2))
    assert check_stokes_identity(v, gv) < 1e-14


def test_stokes_random_polynomials(rng):
    for _ in range(10):
        v, gv = random_polynomial(rng, int(rng.integers(0, 5)), 2)
        assert check_stokes_identity(v, gv) <= 1e-12


def test_printed_tangent_is_clockwise():
    # on the right edge of the unit square the counter-clockwise tangent is (0, 1);
    # T(n) as printed points the other way, so the boundary term carries -T
    t = tangent_matrix(np.array([1.0, 0.0]))[:, 0]
    np.testing.assert_allclose(t, [0.0, -1.0])
