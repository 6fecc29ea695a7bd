import numpy as np
import numpy.testing as npt
import pytest

from triptych import (
    ContingencyTable,
    ca,
    classical_geary,
    component_subgraphs,
    geary,
    laplacian,
    layout,
    lda,
    local_covariance,
    local_variance,
    make_graph,
    regress_on_covariates,
    spectrum,
)


def path_graph(n=3):
    M = np.zeros((n, n))
    for i in range(n - 1):
        M[i, i + 1] = M[i + 1, i] = 1
    return make_graph(M)


def complete_graph(n):
    return make_graph(np.ones((n, n)) - np.eye(n))


def cycle_graph(n):
    M = np.zeros((n, n))
    for i in range(n):
        M[i, (i + 1) % n] = M[(i + 1) % n, i] = 1
    return make_graph(M)


def two_triangles():
    M = np.zeros((6, 6))
    for a, b in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]:
        M[a, b] = M[b, a] = 1
    return make_graph(M)


def linked_triangles():
    g = two_triangles()
    M = np.array(g.adjacency)
    M[2, 3] = M[3, 2] = 1
    return make_graph(M)


def random_connected(rng, n):
    # random spanning tree plus a few extra edges
    M = np.zeros((n, n))
    for v in range(1, n):
        u = int(rng.integers(0, v))
        M[u, v] = M[v, u] = 1
    for _ in range(int(rng.integers(0, n))):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            M[i, j] = M[j, i] = 1
    return make_graph(M)


def brute_pair_sum(M, x, y):
    s = 0.0
    n = M.shape[0]
    for i in range(n):
        for j in range(n):
            s += M[i, j] * (x[i] - x[j]) * (y[i] - y[j])
    return s


class TestMakeGraph:
    def test_basic_fields(self):
        g = path_graph(4)
        npt.assert_array_equal(g.degrees, [1, 2, 2, 1])
        assert g.total_degree == 6
        assert g.n_edges == 3
        assert g.n_nodes == 4
        assert g.node_labels == ("v1", "v2", "v3", "v4")

    def test_custom_labels(self):
        g = make_graph([[0, 1], [1, 0]], node_labels=["left", "right"])
        assert g.node_labels == ("left", "right")

    def test_validation(self):
        with pytest.raises(ValueError, match="square"):
            make_graph(np.zeros((2, 3)))
        with pytest.raises(ValueError, match="0 or 1"):
            make_graph([[0, 0.5], [0.5, 0]])
        with pytest.raises(ValueError, match="symmetric"):
            make_graph([[0, 1], [0, 0]])
        with pytest.raises(ValueError, match="self loops"):
            make_graph([[1, 1], [1, 0]])
        with pytest.raises(ValueError, match="expected 2"):
            make_graph([[0, 1], [1, 0]], node_labels=["a"])
        with pytest.raises(ValueError, match="duplicate"):
            make_graph([[0, 1], [1, 0]], node_labels=["a", "a"])

    def test_adjacency_immutable(self):
        g = path_graph()
        with pytest.raises(ValueError):
            g.adjacency[0, 1] = 0

    def test_component_subgraphs(self):
        g = two_triangles()
        comps = component_subgraphs(g)
        assert len(comps) == 2
        idx0, sub0 = comps[0]
        npt.assert_array_equal(idx0, [0, 1, 2])
        assert sub0.n_edges == 3
        assert sub0.node_labels == ("v1", "v2", "v3")


class TestLaplacian:
    def test_annihilates_constants_exactly(self):
        rng = np.random.default_rng(60)
        for n in (3, 6, 10):
            g = random_connected(rng, n)
            L = laplacian(g)
            assert np.all(L @ np.ones(n) == 0.0)
            npt.assert_array_equal(L, L.T)

    def test_quadratic_form_splits_degree_form(self):
        rng = np.random.default_rng(61)
        g = random_connected(rng, 7)
        x = rng.standard_normal(7)
        lhs = x @ laplacian(g) @ x + x @ g.adjacency @ x
        npt.assert_allclose(lhs, np.sum(g.degrees * x * x), rtol=1e-12)


class TestLocalVariance:
    def test_constant_is_zero(self):
        g = path_graph(5)
        npt.assert_array_equal(local_variance(g, np.full(5, 3.7)), [0.0])

    def test_path_example(self):
        g = path_graph(3)
        x = np.array([1.0, 2.0, 3.0])
        got = local_variance(g, x)[0]
        brute = brute_pair_sum(np.asarray(g.adjacency), x, x) / (2 * g.total_degree)
        npt.assert_allclose(got, brute, rtol=1e-14)
        npt.assert_allclose(got, 0.5, rtol=1e-14)

    def test_random_against_brute(self):
        rng = np.random.default_rng(62)
        g = random_connected(rng, 9)
        X = rng.standard_normal((9, 3))
        got = local_variance(g, X)
        M = np.asarray(g.adjacency)
        brute = [
            brute_pair_sum(M, X[:, j], X[:, j]) / (2 * g.total_degree)
            for j in range(3)
        ]
        npt.assert_allclose(got, brute, rtol=1e-12)

    def test_complete_graph_inflates_variance(self):
        rng = np.random.default_rng(63)
        n = 6
        g = complete_graph(n)
        x = rng.standard_normal(n)
        var = np.mean((x - x.mean()) ** 2)
        npt.assert_allclose(local_variance(g, x)[0], n / (n - 1) * var, rtol=1e-12)

    def test_edgeless_rejected(self):
        g = make_graph(np.zeros((3, 3)))
        with pytest.raises(ValueError, match="edge"):
            local_variance(g, np.arange(3.0))


class TestGeary:
    def test_constant_is_zero(self):
        assert geary(path_graph(4), np.ones(4)) == 0.0

    def test_path_example(self):
        npt.assert_allclose(geary(path_graph(3), [1.0, 2.0, 3.0]), 1 / 9,
                            rtol=1e-14)

    def test_eigenvector_gives_eigenvalue(self):
        rng = np.random.default_rng(64)
        g = random_connected(rng, 8)
        sp = spectrum(g)
        for j in range(sp.eigenvalues.size):
            npt.assert_allclose(
                geary(g, sp.vectors[:, j]), sp.eigenvalues[j], rtol=1e-10,
                atol=1e-12,
            )

    def test_errors(self):
        g = path_graph(3)
        with pytest.raises(ValueError, match="zero vector"):
            geary(g, np.zeros(3))
        with pytest.raises(ValueError, match="length 3"):
            geary(g, np.ones(4))
        with pytest.raises(ValueError, match="edge"):
            geary(make_graph(np.zeros((2, 2))), np.ones(2))

    def test_isolated_support_rejected(self):
        M = np.zeros((3, 3))
        M[0, 1] = M[1, 0] = 1
        # third node has degree zero but the graph still has an edge
        g = make_graph(M)
        with pytest.raises(ValueError, match="isolated"):
            geary(g, [0.0, 0.0, 1.0])


class TestClassicalGeary:
    def test_ratio_definition(self):
        rng = np.random.default_rng(65)
        g = random_connected(rng, 7)
        X = rng.standard_normal((7, 2))
        got = classical_geary(g, X)
        var = np.mean((X - X.mean(axis=0)) ** 2, axis=0)
        npt.assert_allclose(got, local_variance(g, X) / var, rtol=1e-12)

    def test_constant_column_rejected(self):
        g = path_graph(4)
        X = np.column_stack([np.arange(4.0), np.full(4, 2.0)])
        with pytest.raises(ValueError, match="column 1"):
            classical_geary(g, X)


class TestLocalCovariance:
    def test_constant_columns_are_zero(self):
        g = path_graph(4)
        V = local_covariance(g, np.ones((4, 2)))
        npt.assert_array_equal(V, np.zeros((2, 2)))

    def test_path_single_column(self):
        npt.assert_allclose(
            local_covariance(path_graph(3), [1.0, 2.0, 3.0]), [[0.25]],
            rtol=1e-14,
        )

    def test_brute_pair_sums(self):
        rng = np.random.default_rng(66)
        g = random_connected(rng, 8)
        X = rng.standard_normal((8, 3))
        V = local_covariance(g, X)
        M = np.asarray(g.adjacency)
        for a in range(3):
            for b in range(3):
                brute = brute_pair_sum(M, X[:, a], X[:, b]) / (4 * g.total_degree)
                npt.assert_allclose(V[a, b], brute, rtol=1e-11, atol=1e-14)

    def test_diagonal_is_half_local_variance(self):
        rng = np.random.default_rng(67)
        g = random_connected(rng, 10)
        X = rng.standard_normal((10, 4))
        npt.assert_allclose(
            np.diag(local_covariance(g, X)), local_variance(g, X) / 2.0,
            rtol=1e-12,
        )

    def test_disjoint_cliques_proportional_to_within_covariance(self):
        # two disjoint triangles: the graph knows only the grouping, so the
        # local covariance reproduces the within-group covariance up to the
        # clique factor s / (2 (s - 1))
        rng = np.random.default_rng(68)
        g = two_triangles()
        X = rng.standard_normal((6, 2))
        V = local_covariance(g, X)
        labels = ["a", "a", "a", "b", "b", "b"]
        W = lda(X, labels).extras["within"]
        ratio = np.sum(V * W) / np.sum(W * W)
        npt.assert_allclose(ratio, 0.75, rtol=1e-10)
        assert np.max(np.abs(V - ratio * W)) <= 1e-10 * np.max(np.abs(V))


class TestSpectrum:
    def test_path_three_nodes(self):
        sp = spectrum(path_graph(3))
        npt.assert_allclose(sp.eigenvalues, [1.0, 2.0], rtol=1e-10)
        assert sp.trivial_dropped
        assert sp.n_components == 1
        # mu = 1 eigenvector vanishes on the middle node, mu = 2 alternates
        v1, v2 = sp.vectors[:, 0], sp.vectors[:, 1]
        npt.assert_allclose(v1[1], 0.0, atol=1e-12)
        npt.assert_allclose(v1[0], -v1[2], rtol=1e-10)
        npt.assert_allclose(v2[0], v2[2], rtol=1e-10)
        assert np.sign(v2[0]) != np.sign(v2[1])

    def test_random_graphs_match_brute_oracle(self):
        rng = np.random.default_rng(69)
        for _ in range(10):
            n = int(rng.integers(4, 14))
            g = random_connected(rng, n)
            sp = spectrum(g)
            Dg = np.diag(np.asarray(g.degrees, float))
            brute = np.sort(
                np.linalg.eigvals(np.linalg.solve(Dg, laplacian(g))).real
            )
            npt.assert_allclose(brute[0], 0.0, atol=1e-10)
            npt.assert_allclose(sp.eigenvalues, brute[1:], rtol=1e-8, atol=1e-8)
            assert np.all(sp.eigenvalues >= -1e-10)
            assert np.all(sp.eigenvalues <= 2.0 + 1e-10)
            # eigenvectors orthonormal in the degree metric
            V = sp.vectors
            npt.assert_allclose(V.T @ Dg @ V, np.eye(n - 1), atol=1e-8)

    def test_eigen_equation(self):
        rng = np.random.default_rng(70)
        g = random_connected(rng, 9)
        sp = spectrum(g)
        L = laplacian(g)
        Dg = np.diag(np.asarray(g.degrees, float))
        resid = L @ sp.vectors - Dg @ sp.vectors * sp.eigenvalues
        assert np.max(np.abs(resid)) <= 1e-10

    def test_k_selects_smallest(self):
        rng = np.random.default_rng(71)
        g = random_connected(rng, 8)
        full = spectrum(g)
        part = spectrum(g, k=3)
        npt.assert_allclose(part.eigenvalues, full.eigenvalues[:3], rtol=1e-12)
        with pytest.raises(ValueError, match=r"k must be in \[1, 7\]"):
            spectrum(g, k=8)

    def test_disconnected_rejected_by_default(self):
        with pytest.raises(ValueError, match="per_component"):
            spectrum(two_triangles())

    def test_per_component_pooling(self):
        sp = spectrum(two_triangles(), per_component=True)
        assert sp.n_components == 2
        npt.assert_allclose(sp.eigenvalues, [1.5, 1.5, 1.5, 1.5], rtol=1e-10)
        # each pooled vector lives on exactly one triangle
        for j in range(4):
            v = sp.vectors[:, j]
            head, tail = np.abs(v[:3]).max(), np.abs(v[3:]).max()
            assert (head == 0.0) != (tail == 0.0)
        Dg = np.diag(np.asarray(two_triangles().degrees, float))
        npt.assert_allclose(sp.vectors.T @ Dg @ sp.vectors, np.eye(4),
                            atol=1e-10)

    def test_isolated_node_rejected(self):
        M = np.zeros((3, 3))
        M[0, 1] = M[1, 0] = 1
        with pytest.raises(ValueError, match="isolated"):
            spectrum(make_graph(M, node_labels=["a", "b", "lonely"]),
                     per_component=True)

    def test_deterministic(self):
        rng = np.random.default_rng(72)
        g = random_connected(rng, 10)
        s1, s2 = spectrum(g), spectrum(g)
        npt.assert_array_equal(s1.vectors, s2.vectors)


class TestAdjacencyCorrespondence:
    # correspondence analysis of the adjacency table sees the same axes as
    # the graph eigenproblem, with eigenvalues folded to (1 - mu)^2

    @pytest.mark.parametrize("seed", [73, 74, 75])
    def test_eigenvalue_folding(self, seed):
        rng = np.random.default_rng(seed)
        g = random_connected(rng, 8)
        mu = spectrum(g).eigenvalues
        kept = np.sort([(1 - m) ** 2 for m in mu if abs(1 - m) > 1e-6])[::-1]
        res = ca(ContingencyTable(np.asarray(g.adjacency, int)))
        lam = res.decomposition.eigenvalues
        assert lam.size == len(kept)
        npt.assert_allclose(lam, kept, rtol=1e-8, atol=1e-10)

    def test_axes_span_matching_eigenspaces(self):
        rng = np.random.default_rng(76)
        g = random_connected(rng, 7)
        sp = spectrum(g)
        mu = sp.eigenvalues
        res = ca(ContingencyTable(np.asarray(g.adjacency, int)))
        lam = res.decomposition.eigenvalues
        C = res.row_coords
        Dg = np.diag(np.asarray(g.degrees, float))
        for j, l in enumerate(lam):
            # pool graph eigenvectors whose folded eigenvalue matches; both
            # the mu and 2 - mu branches fold onto the same value
            match = np.flatnonzero(np.abs((1 - mu) ** 2 - l) <= 1e-8 * max(lam[0], 1))
            assert match.size > 0
            V = sp.vectors[:, match]
            proj = V @ (V.T @ Dg @ C[:, j])
            resid = np.linalg.norm(C[:, j] - proj) / np.linalg.norm(C[:, j])
            assert resid <= 1e-6


class TestLayout:
    def test_cycle_four_degenerate_plane(self):
        g = cycle_graph(4)
        with pytest.warns(UserWarning, match="degenerate"):
            coords = layout(g)
        assert coords.shape == (4, 2)
        # the mu = 1 eigenspace of the 4-cycle: opposite nodes cancel
        for j in range(2):
            v = coords[:, j]
            npt.assert_allclose(v[0] + v[2], 0.0, atol=1e-10)
            npt.assert_allclose(v[1] + v[3], 0.0, atol=1e-10)
        # mu = 1 means no shrinking: still orthonormal in the degree metric
        Dg = np.diag(np.asarray(g.degrees, float))
        npt.assert_allclose(coords.T @ Dg @ coords, np.eye(2), atol=1e-10)

    def test_complete_four_unscaled(self):
        g = complete_graph(4)
        with pytest.warns(UserWarning, match="degenerate"):
            coords = layout(g)
        Dg = np.diag(np.asarray(g.degrees, float))
        npt.assert_allclose(coords.T @ Dg @ coords, np.eye(2), atol=1e-10)

    def test_linked_clusters_separate_on_first_axis(self):
        coords = layout(linked_triangles())
        first = coords[:, 0]
        assert len(set(np.sign(first[:3]))) == 1
        assert len(set(np.sign(first[3:]))) == 1
        assert np.sign(first[0]) != np.sign(first[3])

    def test_matches_scaled_spectrum(self):
        rng = np.random.default_rng(77)
        g = random_connected(rng, 9)
        sp = spectrum(g, k=2)
        expected = np.array(sp.vectors[:, :2])
        for j in range(2):
            if 1.0 - sp.eigenvalues[j] > 1e-12:
                expected[:, j] *= np.sqrt(1.0 - sp.eigenvalues[j])
        import warnings as _w

        with _w.catch_warnings():
            _w.simplefilter("ignore")
            coords = layout(g)
        npt.assert_allclose(coords, expected, atol=1e-12)

    def test_too_small(self):
        with pytest.raises(ValueError, match="3 nodes"):
            layout(make_graph([[0, 1], [1, 0]]))


class TestRegressOnCovariates:
    def test_eigenvector_covariate_fully_explained(self):
        rng = np.random.default_rng(78)
        g = random_connected(rng, 10)
        sp = spectrum(g, k=2)
        res = regress_on_covariates(g, sp.vectors[:, 0], k=2)
        share = res.extras["explained_share"]
        npt.assert_allclose(share[0], 1.0, atol=1e-10)
        assert np.all(share >= -1e-12) and np.all(share <= 1 + 1e-10)
        npt.assert_allclose(res.extras["graph_eigenvalues"], sp.eigenvalues,
                            rtol=1e-12)
        assert res.method == "graph_regress"

    def test_single_pair_share_is_squared_correlation(self):
        g = linked_triangles()
        x = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
        res = regress_on_covariates(g, x, k=1)
        v = spectrum(g, k=1).vectors[:, 0]
        r = np.corrcoef(x, v)[0, 1]
        npt.assert_allclose(res.extras["explained_share"][0], r**2, rtol=1e-10)

    def test_constant_covariate_rejected(self):
        g = path_graph(5)
        with pytest.raises(ValueError, match="singular"):
            regress_on_covariates(g, np.ones(5), k=2)

    def test_rank_limit(self):
        rng = np.random.default_rng(79)
        g = random_connected(rng, 8)
        X = rng.standard_normal((8, 3))
        with pytest.raises(ValueError, match="exceeds the attainable rank"):
            regress_on_covariates(g, X, k=2, q=3)
