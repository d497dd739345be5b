import math

import numpy as np
import pytest

from netstab.errors import ConvergenceError
from netstab.spectral import (
    NonnegMatrix,
    is_irreducible,
    perron_eigenvector,
    spectral_radius,
    strongly_connected_components,
    theta_extension,
)


def eig_radius(M) -> float:
    """Oracle: max modulus of the eigenvalues (characteristic roots)."""
    data = M.data if isinstance(M, NonnegMatrix) else np.asarray(M, float)
    return float(np.max(np.abs(np.linalg.eigvals(data))))


def random_nonneg(rng, n, density=0.6):
    M = np.where(rng.random((n, n)) < density, rng.uniform(0, 2, (n, n)), 0.0)
    return M


def random_irreducible(rng, n):
    # random nonnegative plus a weighted cycle through all vertices
    M = random_nonneg(rng, n, density=0.4)
    perm = rng.permutation(n)
    for i in range(n):
        M[perm[i], perm[(i + 1) % n]] += rng.uniform(0.1, 1.0)
    return M


# ---------------------------------------------------------------------------
# strongly connected components


def test_scc_zero_matrix():
    comps = strongly_connected_components(np.zeros((2, 2)))
    assert len(comps) == 2
    assert all(c.trivial for c in comps)


def test_scc_ring_is_one_component():
    n = 6
    M = np.zeros((n, n))
    for i in range(n):
        M[i, (i + 1) % n] = 1.0
        M[i, (i - 1) % n] = 1.0
    comps = strongly_connected_components(M)
    assert len(comps) == 1
    assert comps[0].indices == tuple(range(n))
    assert not comps[0].trivial


def test_scc_self_loop_is_nontrivial():
    comps = strongly_connected_components(np.array([[2.0]]))
    assert comps[0].trivial is False
    comps = strongly_connected_components(np.array([[0.0]]))
    assert comps[0].trivial is True


def test_scc_reverse_topological_order():
    # 0 -> 1 -> 2, no cycles: sink component first
    M = np.zeros((3, 3))
    M[0, 1] = 1.0
    M[1, 2] = 1.0
    comps = strongly_connected_components(M)
    order = [c.indices[0] for c in comps]
    assert order.index(2) < order.index(1) < order.index(0)


def test_scc_mixed_structure():
    # two 2-cycles bridged one-way plus an isolated vertex
    M = np.zeros((5, 5))
    M[0, 1] = M[1, 0] = 1.0
    M[2, 3] = M[3, 2] = 1.0
    M[1, 2] = 1.0
    comps = strongly_connected_components(M)
    sets = {c.indices for c in comps}
    assert (0, 1) in sets and (2, 3) in sets and (4,) in sets


def test_scc_of_delayed_pair_matrix_is_single_cycle():
    from netstab import gallery
    from netstab.stability import stability_matrix

    M = stability_matrix(gallery.delayed_pair(0.5, 0.1, 1.0))
    comps = strongly_connected_components(M)
    assert len(comps) == 1
    assert not comps[0].trivial


# ---------------------------------------------------------------------------
# spectral radius


def test_radius_identity():
    assert spectral_radius(np.eye(2)) == pytest.approx(1.0, abs=1e-12)


def test_radius_ring_row_sums():
    n, a = 6, 0.3
    M = np.zeros((n, n))
    for i in range(n):
        M[i, (i + 1) % n] = a
        M[i, (i - 1) % n] = a
    assert spectral_radius(M) == pytest.approx(2 * a, abs=1e-10)


def test_radius_periodic_matrix():
    # pure 4-cycle: eigenvalues are 4th roots of unity
    M = np.zeros((4, 4))
    for i in range(4):
        M[i, (i + 1) % 4] = 1.0
    assert spectral_radius(M) == pytest.approx(1.0, abs=1e-10)


def test_radius_triangular_is_zero():
    M = np.array([[0.0, 3.0, 1.0], [0, 0, 2.0], [0, 0, 0]])
    assert spectral_radius(M) == 0.0


def test_radius_matches_eigenvalue_oracle():
    rng = np.random.default_rng(17)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        M = random_nonneg(rng, n)
        assert spectral_radius(M) == pytest.approx(eig_radius(M), abs=1e-8)


def test_radius_bracketed_by_row_sums():
    rng = np.random.default_rng(19)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        M = random_nonneg(rng, n)
        rho = spectral_radius(M)
        sums = M.sum(axis=1)
        assert rho <= sums.max() + 1e-9
        if (M > 0).all():
            assert rho >= sums.min() - 1e-9


def test_radius_homogeneous():
    rng = np.random.default_rng(23)
    for _ in range(50):
        n = int(rng.integers(1, 6))
        M = random_nonneg(rng, n)
        c = float(rng.uniform(0, 3))
        assert spectral_radius(c * M) == pytest.approx(
            c * spectral_radius(M), abs=1e-10 * max(1, c)
        )


def test_radius_monotone_in_entries():
    # adding nonnegative mass to an irreducible matrix raises the radius
    rng = np.random.default_rng(29)
    for _ in range(60):
        n = int(rng.integers(2, 7))
        A = random_irreducible(rng, n)
        B = np.zeros((n, n))
        i, j = int(rng.integers(0, n)), int(rng.integers(0, n))
        B[i, j] = float(rng.uniform(0.05, 1.0))
        assert spectral_radius(A + B) > spectral_radius(A)


def test_radius_rejects_negative_entries():
    with pytest.raises(ValueError):
        spectral_radius(np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_radius_respects_iteration_cap(monkeypatch):
    monkeypatch.setenv("NETSTAB_MAX_ITERS", "2")
    M = np.array([[0.3, 1.7], [0.2, 0.1]])
    with pytest.raises(ConvergenceError):
        spectral_radius(M)


# ---------------------------------------------------------------------------
# irreducibility and Perron pairs


def test_irreducible_examples():
    ring = np.array([[0, 1.0], [1.0, 0]])
    assert is_irreducible(ring)
    assert not is_irreducible(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert is_irreducible(np.array([[0.0]]))  # single-vertex convention


def test_perron_exchange_matrix():
    rho, v = perron_eigenvector(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert rho == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(v, [1.0, 1.0], atol=1e-9)


def test_perron_symmetric_coupling():
    # [[p, q], [q, p]] has Perron pair (p + q, (1, 1))
    p, q = 0.5, 0.2
    rho, v = perron_eigenvector(np.array([[p, q], [q, p]]))
    assert rho == pytest.approx(p + q, abs=1e-10)
    assert np.allclose(v, [1.0, 1.0], atol=1e-8)


def test_perron_scalar():
    rho, v = perron_eigenvector(np.array([[2.0]]))
    assert rho == 2.0 and v.tolist() == [1.0]


def test_perron_residual_and_positivity():
    rng = np.random.default_rng(31)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        M = random_irreducible(rng, n)
        rho, v = perron_eigenvector(M)
        assert (v > 0).all()
        assert v.max() == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(M @ v - rho * v)) <= 1e-8


def test_perron_rejects_reducible():
    with pytest.raises(ValueError):
        perron_eigenvector(np.array([[1.0, 1.0], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# theta extension


def test_theta_extension_shape_and_values():
    M = NonnegMatrix(np.array([[2.0]]), ("v",))
    Mt = theta_extension(M, 0, 0, alpha=2.0, lip=0.0, theta=1.0)
    assert Mt.data.tolist() == [[0.0, 2.0], [1.0, 0.0]]
    rho = spectral_radius(Mt)
    assert rho == pytest.approx(math.sqrt(2.0), abs=1e-10)
    assert 1.0 <= rho <= 2.0  # theta <= rho(Mt) <= rho(M) for theta <= rho(M)


def test_theta_extension_large_theta():
    Mt = theta_extension(np.array([[2.0]]), 0, 0, alpha=2.0, lip=0.0, theta=4.0)
    rho = spectral_radius(Mt)
    assert rho == pytest.approx(math.sqrt(8.0), abs=1e-10)
    assert 2.0 < rho < 4.0  # rho(M) < rho(Mt) < theta for theta > rho(M)


def test_theta_extension_zero_alpha_keeps_radius():
    rng = np.random.default_rng(37)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        M = random_nonneg(rng, n)
        i, j = int(rng.integers(0, n)), int(rng.integers(0, n))
        Mt = theta_extension(M, i, j, alpha=0.0, lip=float(M[i, j]), theta=2.0)
        assert spectral_radius(Mt) == pytest.approx(spectral_radius(M), abs=1e-9)


def test_theta_extension_rejects_bad_split():
    with pytest.raises(ValueError):
        theta_extension(np.array([[2.0]]), 0, 0, alpha=1.0, lip=0.5, theta=1.0)


def test_theta_threshold_biconditional_suite():
    # rho(M_theta) < theta iff rho(M) < theta, for any nonnegative M
    rng = np.random.default_rng(41)
    count = 0
    while count < 200:
        n = int(rng.integers(1, 7))
        M = random_nonneg(rng, n, density=float(rng.uniform(0.2, 0.9)))
        rho = spectral_radius(M)
        factor = float(rng.uniform(1.05, 3.0) if rng.random() < 0.5 else rng.uniform(0.3, 0.95))
        theta = max(rho * factor, 1e-3)
        if abs(rho - theta) <= 1e-6:
            continue
        i, j = int(rng.integers(0, n)), int(rng.integers(0, n))
        u = float(rng.random())
        alpha, lip = u * M[i, j], (1 - u) * M[i, j]
        lip = M[i, j] - alpha  # keep the split exact in floating point
        Mt = theta_extension(M, i, j, alpha=alpha, lip=lip, theta=theta)
        assert (spectral_radius(Mt) < theta) == (rho < theta), (M, i, j, alpha, theta)
        count += 1


def test_theta_extension_radius_bounds_irreducible():
    rng = np.random.default_rng(43)
    for _ in range(120):
        n = int(rng.integers(2, 7))
        M = random_irreducible(rng, n)
        rho = spectral_radius(M)
        i, j = int(rng.integers(0, n)), int(rng.integers(0, n))
        u = float(rng.random())
        alpha = u * M[i, j]
        lip = M[i, j] - alpha
        below = float(rng.uniform(0.1, 0.95)) * rho
        above = float(rng.uniform(1.05, 3.0)) * rho
        rho_below = spectral_radius(theta_extension(M, i, j, alpha, lip, below))
        assert below <= rho_below + 1e-9
        assert rho_below <= rho + 1e-9
        rho_above = spectral_radius(theta_extension(M, i, j, alpha, lip, above))
        assert rho - 1e-9 <= rho_above <= above + 1e-9


def test_labeled_matrix_validation():
    with pytest.raises(ValueError):
        NonnegMatrix(np.array([[1.0, -0.1], [0.0, 0.0]]), ("a", "b"))
    with pytest.raises(ValueError):
        NonnegMatrix(np.zeros((2, 2)), ("a",))
    M = NonnegMatrix(np.array([[0.0, 2.0], [1.0, 0.0]]), ("a", "b"))
    assert M.entry("a", "b") == 2.0
    assert M.to_json_dict()["indices"] == ["a", "b"]
