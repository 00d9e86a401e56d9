import io

import numpy as np
import pytest

from hopnav import bfs_profile, load_edge_list, mk_row_mass, profile_sources
from hopnav.khop import KhopError, ProfileCache

from conftest import naive_bfs, random_connected_graph


def test_toy_profile_from_leaf(toy_tree):
    p = bfs_profile(toy_tree, toy_tree.id_of("d"), 4)
    assert list(p.hop_histogram) == [1, 1, 2, 1, 2]
    assert p.dist[toy_tree.id_of("d")] == 0
    assert p.dist[toy_tree.id_of("g")] == 4


def test_path_profile():
    g = load_edge_list(io.StringIO("x y\ny z\n"))
    p = bfs_profile(g, g.id_of("x"), 2)
    assert list(p.dist) == [0, 1, 2]
    assert list(p.hop_histogram) == [1, 1, 1]


def test_histogram_partitions_nodes(toy_tree):
    for s in range(toy_tree.node_count):
        p = bfs_profile(toy_tree, s, 4)
        assert int(p.hop_histogram.sum()) == toy_tree.node_count
        assert p.hop_histogram[0] == 1


def test_mk_row_mass_examples(toy_tree):
    d = toy_tree.id_of("d")
    p = bfs_profile(toy_tree, d, 4)
    assert mk_row_mass(p, 2, toy_tree.id_of("e"), 4) == 0.5
    assert mk_row_mass(p, 2, toy_tree.id_of("b"), 4) == 0.0
    assert mk_row_mass(p, 4, toy_tree.id_of("g"), 4) == 0.5
    with pytest.raises(KhopError):
        mk_row_mass(p, 0, 0, 4)
    with pytest.raises(KhopError):
        mk_row_mass(p, 5, 0, 4)


def test_mk_rows_are_stochastic(toy_tree):
    for s in range(toy_tree.node_count):
        p = bfs_profile(toy_tree, s, 4)
        for k in range(1, 5):
            if p.hop_histogram[k] == 0:
                continue
            total = sum(mk_row_mass(p, k, j, 4) for j in range(7))
            assert total == pytest.approx(1.0)


def test_distance_symmetry(toy_tree):
    profs = [bfs_profile(toy_tree, s, 4) for s in range(7)]
    for i in range(7):
        for j in range(7):
            assert profs[i].dist[j] == profs[j].dist[i]


def test_profile_sources_matches_naive_oracle():
    rng = np.random.default_rng(3)
    g = random_connected_graph(rng, 1000)
    from hopnav import exact_diameter
    d = exact_diameter(g)
    sources = sorted(set(int(s) for s in rng.integers(0, 1000, size=200)))
    cache = profile_sources(g, sources, d)
    assert len(cache) == len(sources)
    for s in sources[:25]:
        assert np.array_equal(cache.get(s).dist.astype(np.int64), naive_bfs(g, s))


def test_profile_sources_empty(toy_tree):
    cache = profile_sources(toy_tree, [], 4)
    assert len(cache) == 0


def test_cache_lazy_get_matches_batch(toy_tree):
    batch = profile_sources(toy_tree, range(7), 4)
    lazy = ProfileCache(toy_tree, 4)
    for s in range(7):
        assert np.array_equal(batch.get(s).dist, lazy.get(s).dist)
        assert batch.get(s).grav_normalizer == pytest.approx(lazy.get(s).grav_normalizer)


def test_grav_normalizer_value(toy_tree):
    # from leaf d: sum over degrees / squared distance, diagonal at (4+2)^2
    p = bfs_profile(toy_tree, toy_tree.id_of("d"), 4)
    expected = 2 / 4 + 3 / 1 + 3 / 9 + 1 / 36 + 1 / 4 + 1 / 16 + 1 / 16
    assert p.grav_normalizer == pytest.approx(expected)


def test_cache_file_round_trip(tmp_path, toy_tree):
    cache = profile_sources(toy_tree, range(7), 4)
    path = tmp_path / "profiles.bin"
    cache.save(path)
    loaded = ProfileCache.load(path, toy_tree, 4)
    for s in range(7):
        assert np.array_equal(cache.get(s).dist, loaded.get(s).dist)
        assert np.array_equal(cache.get(s).hop_histogram, loaded.get(s).hop_histogram)
        assert cache.get(s).grav_normalizer == loaded.get(s).grav_normalizer


def test_cache_file_rejects_other_graph(tmp_path, toy_tree):
    cache = profile_sources(toy_tree, [0], 4)
    path = tmp_path / "profiles.bin"
    cache.save(path)
    other = load_edge_list(io.StringIO("x y\ny z\n"))
    with pytest.raises(KhopError, match="match"):
        ProfileCache.load(path, other, 4)
