import math

import numpy as np
import pytest

from hdg_voigt.fespace import (InvertedElementError, UnsupportedElementError, lagrange_reference,
                               map_element, map_elements, quadrature)
from hdg_voigt.mesh import QUAD, TRI

from oracles import VandermondeBasis, random_element


def test_p1_triangle_basis():
    ref = lagrange_reference(TRI, 1)
    pts = np.array([[0.2, 0.3], [0.6, 0.1]])
    x, y = pts.T
    np.testing.assert_allclose(ref.eval(pts), np.stack([1 - x - y, x, y], -1), atol=1e-15)


def test_q1_centre_values():
    np.testing.assert_allclose(lagrange_reference(QUAD, 1).eval([[0.5, 0.5]]), 0.25)


@pytest.mark.parametrize("elem,k,n", [(TRI, 1, 3), (TRI, 2, 6), (TRI, 3, 10), (TRI, 4, 15),
                                      (QUAD, 1, 4), (QUAD, 2, 9), (QUAD, 3, 16), (QUAD, 4, 25)])
def test_dimension_kronecker_partition(elem, k, n, rng):
    ref = lagrange_reference(elem, k)
    assert ref.n_en == n
    np.testing.assert_allclose(ref.eval(ref.nodes), np.eye(n), atol=1e-14)
    pts = rng.uniform(size=(50, 2))
    if elem == TRI:
        pts = pts[pts.sum(1) <= 1]
    np.testing.assert_allclose(ref.eval(pts).sum(1), 1.0, atol=1e-14)
    np.testing.assert_allclose(ref.eval_grad(pts).sum(1), 0.0, atol=1e-12)


@pytest.mark.parametrize("elem", [TRI, QUAD])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_basis_matches_vandermonde_oracle(elem, k, rng):
    ref = lagrange_reference(elem, k)
    oracle = VandermondeBasis(elem, k, ref.nodes)
    for p in rng.uniform(0, 0.5, size=(10, 2)):
        np.testing.assert_allclose(ref.eval(p)[0], oracle(p), atol=1e-12)
        np.testing.assert_allclose(ref.eval_grad(p)[0], oracle.grad(p), atol=1e-11)


@pytest.mark.parametrize("elem", [TRI, QUAD])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_polynomial_reproduction(elem, k, rng):
    ref = lagrange_reference(elem, k)
    pows = [(i, j) for i in range(k + 1) for j in range(k + 1 - i)]
    c = rng.normal(size=len(pows))
    f = lambda p: sum(ci * p[:, 0]**i * p[:, 1]**j for ci, (i, j) in zip(c, pows))
    pts = rng.uniform(0, 0.5, size=(30, 2))
    np.testing.assert_allclose(ref.eval(pts) @ f(ref.nodes), f(pts), atol=1e-12)


@pytest.mark.parametrize("elem", [TRI, QUAD])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_trace_consistency(elem, k):
    ref = lagrange_reference(elem, k)
    for f in range(ref.n_fa):
        # element basis on face f equals the face basis on the face nodes, zero elsewhere
        restricted = ref.Nf[f]
        np.testing.assert_allclose(restricted[:, ref.face_nodes[f]], ref.face.N, atol=1e-14)
        others = np.setdiff1d(np.arange(ref.n_en), ref.face_nodes[f])
        assert np.abs(restricted[:, others]).max() < 1e-14


def test_face_basis():
    ref = lagrange_reference(TRI, 3)
    np.testing.assert_allclose(ref.face.eval(ref.face.nodes), np.eye(4), atol=1e-15)
    np.testing.assert_allclose(ref.face.N.sum(1), 1.0, atol=1e-15)


def test_quadrature_areas():
    assert quadrature(QUAD, 3).weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert quadrature(TRI, 3).weights.sum() == pytest.approx(0.5, abs=1e-15)
    assert quadrature("segment", 3).weights.sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("order", [1, 2, 5, 9, 12])
def test_quadrature_exactness(order):
    q = quadrature(QUAD, order)
    t = quadrature(TRI, order)
    for a in range(order + 1):
        for b in range(order + 1 - a):
            x, y = q.points.T
            assert (x**a * y**b) @ q.weights == pytest.approx(1 / ((a + 1) * (b + 1)), rel=1e-13)
            x, y = t.points.T
            exact = math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)
            assert (x**a * y**b) @ t.weights == pytest.approx(exact, rel=1e-12)


def test_quadrature_errors():
    with pytest.raises(UnsupportedElementError):
        quadrature("hexagon", 3)
    with pytest.raises(ValueError):
        quadrature(QUAD, 0)
    with pytest.raises(UnsupportedElementError):
        lagrange_reference(TRI, 5)
    with pytest.raises(UnsupportedElementError):
        lagrange_reference("pentagon", 1)


def test_identity_map():
    ref = lagrange_reference(QUAD, 2)
    g = map_element([[0, 0], [1, 0], [1, 1], [0, 1]], ref)
    np.testing.assert_allclose(g.J, np.broadcast_to(np.eye(2), g.J.shape), atol=1e-15)
    np.testing.assert_allclose(g.dN[0], ref.dN, atol=1e-14)


def test_scaled_square():
    ref = lagrange_reference(QUAD, 2)
    g = map_element([[0, 0], [2, 0], [2, 2], [0, 2]], ref)
    np.testing.assert_allclose(g.detJ, 4.0)
    np.testing.assert_allclose(g.dN[0], 0.5 * ref.dN, atol=1e-14)
    assert g.wdet.sum() == pytest.approx(4.0)


def test_affine_triangle_integral(rng):
    ref = lagrange_reference(TRI, 2)
    for _ in range(5):
        v = random_element(rng, "tri")
        g = map_element(v, ref)
        e1, e2 = v[1] - v[0], v[2] - v[0]
        A = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
        # integral of x1 x2 over a triangle from its vertices (exact for quadratics)
        s = v.sum(0)
        exact = A / 12 * (s[0] * s[1] + (v[:, 0] * v[:, 1]).sum())
        assert (g.x[0, :, 0] * g.x[0, :, 1]) @ g.wdet[0] == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize("elem", [TRI, QUAD])
def test_measure_normals_outward(elem, rng):
    ref = lagrange_reference(elem, 3)
    X = np.stack([random_element(rng, elem) for _ in range(10)])
    g = map_elements(X, ref)
    nv = X.shape[1]
    area = 0.5 * np.sum(X[..., 0] * np.roll(X[..., 1], -1, 1) - np.roll(X[..., 0], -1, 1) * X[..., 1], 1)
    np.testing.assert_allclose(g.wdet.sum(1), area, rtol=1e-13)
    np.testing.assert_allclose(np.linalg.norm(g.normals, axis=-1), 1.0, atol=1e-14)
    centroid = X.mean(1)
    face_mid = g.xf.mean(2)
    out = np.einsum("efd,efd->ef", g.normals[:, :, 0], face_mid - centroid[:, None])
    assert np.all(out > 0)
    perim = np.linalg.norm(X - np.roll(X, -1, 1), axis=-1).sum(1)
    np.testing.assert_allclose(g.wface.sum((1, 2)), perim, rtol=1e-13)
    assert nv == ref.n_fa


def test_inverted_element():
    ref = lagrange_reference(TRI, 1)
    with pytest.raises(InvertedElementError):
        map_element([[0, 0], [0, 1], [1, 0]], ref)
