import json
import math

import numpy as np
import pytest

from cvmemory.cluster import (
    LINEAR4_TABLE,
    GraphSpec,
    build_graph_cluster,
    build_linear4_cluster,
    edge_gate,
    linear4_network,
    nullifiers,
    squeezer_bank,
    table_to_matrix,
    uniform_profile,
)
from cvmemory.gaussian import (
    ConfigurationError,
    QuadratureOrdering,
    apply,
    check_symplectic,
    commutator_coefficient,
    light,
    vacuum_state,
    variance,
)

A, B, C = 1 / math.sqrt(2), 1 / math.sqrt(10), 2 / math.sqrt(10)
LINEAR = GraphSpec.linear(4)


def terms(u):
    """Nonzero coefficients keyed like 'x2', 'p1' for a 4-mode combination."""
    names = [f"{q}{k}" for k in range(1, 5) for q in "xp"]
    return {n: c for n, c in zip(names, u.coefficients) if c != 0}


class TestGraphSpec:
    def test_linear(self):
        assert LINEAR.sorted_edges() == [(1, 2), (2, 3), (3, 4)]
        assert LINEAR.neighbors(2) == [1, 3]

    @pytest.mark.parametrize("edges", [[(1, 1)], [(1, 2), (2, 1)], [(0, 1)], [(1, 5)]])
    def test_invalid(self, edges):
        with pytest.raises(ConfigurationError):
            GraphSpec(4, edges)

    def test_zero_vertices(self):
        with pytest.raises(ConfigurationError):
            GraphSpec(0)

    def test_from_json_string(self):
        g = GraphSpec.from_json('{"n": 3, "edges": [[1, 2], [2, 3]]}')
        assert g == GraphSpec.linear(3)

    def test_from_json_file(self, tmp_path):
        p = tmp_path / "g.json"
        p.write_text(json.dumps({"n": 4, "edges": [[1, 2], [2, 3], [3, 4], [4, 1]]}))
        assert len(GraphSpec.from_json(p).edges) == 4

    @pytest.mark.parametrize("doc", ['{"edges": []}', '{"n": 2, "edges": [[1, 2, 3]]}', '{"n": 2, "edges": [[1, 1]]}'])
    def test_from_json_invalid(self, doc):
        with pytest.raises(ConfigurationError):
            GraphSpec.from_json(doc)


class TestNullifiers:
    def test_end_vertex(self):
        assert terms(nullifiers(LINEAR)[0]) == {"p1": 1.0, "x2": -1.0}

    def test_inner_vertex(self):
        assert terms(nullifiers(LINEAR)[1]) == {"p2": 1.0, "x1": -1.0, "x3": -1.0}

    def test_edgeless(self):
        for a, u in enumerate(nullifiers(GraphSpec(4)), start=1):
            assert terms(u) == {f"p{a}": 1.0}

    def test_count_and_labels(self):
        nulls = nullifiers(GraphSpec(4, [(1, 2), (1, 3), (1, 4)]))
        assert [u.label for u in nulls] == ["p1-x2-x3-x4", "p2-x1", "p3-x1", "p4-x1"]

    @pytest.mark.parametrize("edges", [[], [(1, 2), (2, 3), (3, 4)], [(1, 2), (2, 3), (3, 4), (4, 1)],
                                       [(1, 2), (1, 3), (1, 4), (2, 3)]])
    def test_mutually_commute(self, edges):
        nulls = nullifiers(GraphSpec(4, edges))
        for i in range(4):
            for j in range(4):
                assert abs(commutator_coefficient(nulls[i], nulls[j])) <= 1e-12


class TestLinear4Network:
    def test_first_row(self):
        N = linear4_network().matrix
        np.testing.assert_array_equal(N[0], [A, 0, B, 0, 0, -C, 0, 0])

    def test_last_row(self):
        N = linear4_network().matrix
        np.testing.assert_array_equal(N[7], [0, 0, -C, 0, 0, -B, 0, A])

    def test_symplectic(self):
        ok, res = check_symplectic(linear4_network().matrix, 1e-12)
        assert ok and res <= 1e-12

    def test_hand_commutator(self):
        # [X1, P1] = (1/2 + 1/10 + 4/10) i/2
        assert A * A + B * B + C * C == pytest.approx(1.0, abs=1e-15)

    def test_sign_error_is_caught(self):
        bad = {k: dict(v) for k, v in LINEAR4_TABLE.items()}
        bad["P3"]["x3"] = -bad["P3"]["x3"]
        assert not check_symplectic(table_to_matrix(bad), 1e-12)[0]
        with pytest.raises(ConfigurationError):
            linear4_network(bad)


class TestSqueezerBank:
    def test_zero_is_identity(self):
        np.testing.assert_array_equal(squeezer_bank(np.zeros(4)).matrix, np.eye(8))

    def test_p_is_squeezed(self, ordering4):
        st = apply(squeezer_bank(np.ones(4)), vacuum_state(ordering4))
        assert st.cov[1, 1] == pytest.approx(0.25 * math.exp(-2), abs=1e-15)
        assert st.cov[0, 0] == pytest.approx(0.25 * math.exp(2), abs=1e-15)

    def test_non_finite(self):
        with pytest.raises(ConfigurationError):
            squeezer_bank([1.0, math.inf])

    @pytest.mark.parametrize("r", [[0, 0], [-1, 2.5], [3, 3, 3, 3]])
    def test_symplectic(self, r):
        assert check_symplectic(squeezer_bank(r).matrix)[0]


class TestLinear4Cluster:
    def nullifier_variances(self, r):
        st = build_linear4_cluster(uniform_profile(r))
        return [variance(st, u) for u in nullifiers(LINEAR)]

    def test_vacuum_limit(self):
        assert self.nullifier_variances(0.0)[0] == pytest.approx(0.5, abs=1e-12)

    def test_inner_nullifier(self):
        assert self.nullifier_variances(1.0)[1] == pytest.approx(0.10150146242745953, abs=1e-12)

    def test_infinite_squeezing(self):
        assert max(self.nullifier_variances(10.0)) <= 1e-8

    @pytest.mark.parametrize("r", [0.0, 0.3, 1.0, 2.0])
    def test_closed_forms(self, r):
        e = math.exp(-2 * r)
        np.testing.assert_allclose(self.nullifier_variances(r), [e / 2, 3 * e / 4, 3 * e / 4, e / 2], rtol=0, atol=1e-12)

    def test_per_mode_profile(self):
        r = [0.2, 0.9, 1.4, 0.5]
        v = [variance(build_linear4_cluster(r), u) for u in nullifiers(LINEAR)]
        # inner nullifiers pick up only two squeezed momenta (weights 10/4 and 1/2 on e^{-2r}/4)
        expected = [0.5 * math.exp(-2 * r[0]), 0.625 * math.exp(-2 * r[2]) + 0.125 * math.exp(-2 * r[3]),
                    0.125 * math.exp(-2 * r[0]) + 0.625 * math.exp(-2 * r[1]), 0.5 * math.exp(-2 * r[3])]
        np.testing.assert_allclose(v, expected, rtol=0, atol=1e-12)

    def test_strictly_decreasing(self):
        vals = np.array([self.nullifier_variances(r) for r in np.linspace(0, 4, 21)])
        assert np.all(np.diff(vals, axis=0) < 0)

    def test_wrong_length(self):
        with pytest.raises(ConfigurationError):
            build_linear4_cluster([1.0, 1.0, 1.0])

    def test_physical(self):
        assert build_linear4_cluster([0.5, 1.0, 1.5, 2.0]).is_physical()


class TestGraphCluster:
    def test_edgeless_is_product(self):
        st = build_graph_cluster(GraphSpec(3), [0.5, 1.0, 1.5])
        expected = np.diag([v for r in (0.5, 1.0, 1.5) for v in (math.exp(2 * r) / 4, math.exp(-2 * r) / 4)])
        np.testing.assert_allclose(st.cov, expected, rtol=0, atol=1e-14)

    def test_linear_uniform(self):
        st = build_graph_cluster(LINEAR, [1.2] * 4)
        for u in nullifiers(LINEAR):
            assert variance(st, u) == pytest.approx(0.25 * math.exp(-2.4), abs=1e-12)

    @pytest.mark.parametrize("edges", [[(1, 2), (2, 3), (3, 1)], [(1, 2), (1, 3), (1, 4), (2, 4)]])
    def test_other_graphs(self, edges):
        n = max(max(e) for e in edges)
        g = GraphSpec(n, edges)
        r = np.linspace(0.1, 1.5, n)
        st = build_graph_cluster(g, r)
        for a, u in enumerate(nullifiers(g)):
            assert variance(st, u) == pytest.approx(0.25 * math.exp(-2 * r[a]), abs=1e-12)

    def test_edge_gates_symplectic(self):
        for a, b in [(1, 2), (1, 4), (3, 4)]:
            assert check_symplectic(edge_gate(4, a, b).matrix, 1e-12)[0]

    def test_profile_length(self):
        with pytest.raises(ConfigurationError):
            build_graph_cluster(LINEAR, [1.0, 1.0])
