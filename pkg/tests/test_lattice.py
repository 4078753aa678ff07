from collections import Counter

import pytest
from hypothesis import given, strategies as st

from fpp.errors import DomainError, MalformedPathError
from fpp.lattice import (
    Edge, H, Region, V, basis, edge_class, neighbors, on_axis, path_edges, vertex_at, vertex_index,
)


@pytest.mark.parametrize("base, axis, expected", [
    ((2, 0), 1, H(2)),
    ((2, 5), 2, V(2)),
    ((0, 0), 1, H(0)),
    ((-3, 1, 4), 3, V(-3)),
])
def test_edge_class(base, axis, expected):
    assert edge_class(Edge(base, axis)) == expected


def test_edge_between_is_orientation_free():
    assert Edge.between((1, 0), (0, 0)) == Edge.between((0, 0), (1, 0)) == Edge((0, 0), 1)
    assert Edge.between((0, 3), (0, 2)) == Edge((0, 2), 2)


@pytest.mark.parametrize("u, v", [((0, 0), (1, 1)), ((0, 0), (2, 0)), ((0, 0), (0, 0)), ((0, 0), (0, 0, 1))])
def test_edge_between_rejects_non_neighbours(u, v):
    with pytest.raises(DomainError):
        Edge.between(u, v)


def test_basis_and_axis_points():
    assert basis(2, 3) == (0, 1, 0)
    assert on_axis(4, 3) == (4, 0, 0)
    with pytest.raises(DomainError):
        basis(0, 2)


def test_neighbors_of_corner():
    box = Region.box((0, 2), (0, 2))
    assert set(neighbors((0, 0), box)) == {((1, 0), Edge((0, 0), 1)), ((0, 1), Edge((0, 0), 2))}


def test_neighbors_of_interior_vertex():
    assert len(neighbors((1, 1), Region.box((0, 2), (0, 2)))) == 4


def test_degenerate_cylinder_blocks_axis_one():
    cyl = Region.cylinder(0, 2, 1)
    assert {u for u, _ in neighbors((0, 0), cyl)} == {(0, 1), (0, -1)}


def test_neighbors_outside_region():
    with pytest.raises(DomainError):
        neighbors((5, 5), Region.box((0, 2), (0, 2)))


@pytest.mark.parametrize("region, v, expected", [
    (Region.box((3, 5), (-1, 2)), (3, -1), 0),
    (Region.box((0, 1), (0, 1)), (1, 1), 3),
    (Region.box((0, 2), (0, 1)), (1, 0), 2),
])
def test_vertex_index_examples(region, v, expected):
    assert vertex_index(v, region) == expected


def test_vertex_index_needs_bounded_region():
    with pytest.raises(DomainError):
        vertex_index((0, 0), Region.cylinder(2, 2))


ranges = st.tuples(st.integers(-3, 3), st.integers(0, 3)).map(lambda t: (t[0], t[0] + t[1]))
boxes = st.lists(ranges, min_size=2, max_size=3).map(lambda rs: Region(tuple(rs)))


@given(boxes)
def test_vertex_index_is_a_bijection(region):
    indices = [vertex_index(v, region) for v in region.vertices()]
    assert indices == list(range(region.size))
    assert [vertex_at(k, region) for k in indices] == list(region.vertices())


@given(boxes)
def test_neighbors_symmetric(region):
    for v in region.vertices():
        for u, e in neighbors(v, region):
            assert v in {w for w, _ in neighbors(u, region)}
            assert set(e.endpoints) == {u, v}


@given(boxes)
def test_edge_classes_partition_edges(region):
    edges = list(region.edges())
    assert len(set(edges)) == len(edges)
    counts = Counter(edge_class(e) for e in edges)
    (lo1, hi1), rest = region.bounds[0], region.bounds[1:]
    cross = 1
    for lo, hi in rest:
        cross *= hi - lo + 1
    transverse_per_column = sum(cross // (hi - lo + 1) * (hi - lo) for lo, hi in rest)
    for i in range(lo1, hi1 + 1):
        assert counts[V(i)] == transverse_per_column
        assert counts[H(i)] == (cross if i < hi1 else 0)
    assert sum(counts.values()) == len(edges)


def test_region_json_round_trip():
    r = Region.cylinder(3, 3, None)
    assert Region.from_json(r.to_json()) == r
    assert not r.bounded
    assert Region.cylinder(3, 3, 2).issubset(r)
    assert not r.issubset(Region.cylinder(3, 3, 2))


def test_region_rejects_bad_bounds():
    with pytest.raises(DomainError):
        Region(((0, 1),))
    with pytest.raises(DomainError):
        Region(((2, 1), (0, 0)))


def test_path_edges_detects_gaps():
    assert path_edges([(0, 0), (1, 0), (1, 1)]) == [Edge((0, 0), 1), Edge((1, 0), 2)]
    with pytest.raises(MalformedPathError):
        path_edges([(0, 0), (2, 0)])
