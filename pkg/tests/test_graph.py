import io

import numpy as np
import pytest

from hopnav import (GraphError, connected_components, exact_diameter,
                    largest_connected_component, load_edge_list,
                    write_edge_list)

from conftest import naive_diameter, random_connected_graph


def test_load_toy_tree(toy_tree):
    assert toy_tree.node_count == 7
    assert toy_tree.edge_count == 6
    assert toy_tree.labels[0] == "a"  # first-seen id assignment


def test_load_dedup_and_symmetry():
    g = load_edge_list(io.StringIO("x y\ny x\nx y\n"))
    assert g.node_count == 2
    assert g.edge_count == 1
    assert list(g.neighbors(0)) == [1]
    assert list(g.neighbors(1)) == [0]


def test_load_malformed_line():
    with pytest.raises(GraphError, match="line 1"):
        load_edge_list(io.StringIO("x\n"))


def test_load_empty():
    with pytest.raises(GraphError, match="empty"):
        load_edge_list(io.StringIO("# only a comment\n"))


def test_load_self_edge_dropped():
    g = load_edge_list(io.StringIO("x x\nx y\n"))
    assert g.edge_count == 1


def test_degree(toy_tree):
    assert toy_tree.degree(toy_tree.id_of("b")) == 3
    assert toy_tree.degree(toy_tree.id_of("d")) == 1
    with pytest.raises(GraphError):
        toy_tree.degree(99)


def test_degree_sum_is_twice_edges():
    rng = np.random.default_rng(7)
    for _ in range(20):
        g = random_connected_graph(rng, int(rng.integers(2, 200)),
                                   extra_edges=int(rng.integers(0, 50)))
        assert int(g.degrees().sum()) == 2 * g.edge_count


def test_lcc_picks_largest():
    g = load_edge_list(io.StringIO("a b\nb c\nd e\n"))
    lcc, mapping = largest_connected_component(g)
    assert lcc.node_count == 3
    assert sorted(lcc.labels) == ["a", "b", "c"]
    assert mapping[g.id_of("d")] == -1


def test_lcc_identity_on_connected(toy_tree):
    lcc, mapping = largest_connected_component(toy_tree)
    assert lcc.node_count == 7
    assert lcc.edge_count == 6
    assert np.all(mapping >= 0)


def test_lcc_tie_break_smallest_min_id():
    # two equal 2-node components; the one containing id 0 must win
    g = load_edge_list(io.StringIO("p q\nr s\n"))
    lcc, _ = largest_connected_component(g)
    assert sorted(lcc.labels) == ["p", "q"]


def test_lcc_idempotent():
    g = load_edge_list(io.StringIO("a b\nb c\nd e\nf g\ng h\n"))
    lcc1, _ = largest_connected_component(g)
    lcc2, _ = largest_connected_component(lcc1)
    assert lcc1.content_hash() == lcc2.content_hash()


def test_components_partition():
    g = load_edge_list(io.StringIO("a b\nc d\nd e\n"))
    cm = connected_components(g)
    assert sorted(cm.sizes) == [2, 3]
    assert sum(cm.sizes) == g.node_count


def test_diameter_toy_tree(toy_tree):
    assert exact_diameter(toy_tree) == 4


def test_diameter_path_graph():
    g = load_edge_list(io.StringIO("a b\nb c\nc d\nd e\n"))
    assert exact_diameter(g) == 4


def test_diameter_disconnected_rejected():
    g = load_edge_list(io.StringIO("a b\nc d\n"))
    with pytest.raises(GraphError, match="connected"):
        exact_diameter(g)


def test_diameter_random_tree_matches_oracle():
    rng = np.random.default_rng(11)
    g = random_connected_graph(rng, 1000)
    assert exact_diameter(g) == naive_diameter(g)


def test_diameter_random_graphs_match_oracle():
    rng = np.random.default_rng(5)
    for _ in range(25):
        n = int(rng.integers(2, 400))
        g = random_connected_graph(rng, n, extra_edges=int(rng.integers(0, n)))
        assert exact_diameter(g) == naive_diameter(g)


def test_edge_list_round_trip(tmp_path, toy_tree):
    path = tmp_path / "toy.edges"
    write_edge_list(toy_tree, path)
    g2 = load_edge_list(path)
    assert sorted(g2.labels) == sorted(toy_tree.labels)
    assert g2.edge_count == toy_tree.edge_count
