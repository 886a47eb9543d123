import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import InvalidParameterError, TopologyError
from app.geometry.annulus import Annulus, contains
from app.pointfield import Box, PointField, TestedRegion, Topology, sample_poisson


def _brute_neighbors(field: PointField, center, a: Annulus):
    disp = field.box.displacement(field.points - np.asarray(center, dtype=float))
    keep = contains(a, disp) & np.any(disp != 0.0, axis=1)
    return np.nonzero(keep)[0]


# === CAJA ===


def test_box_geometry():
    box = Box.square(10.0, centered=True)
    assert box.origin == (-5.0, -5.0)
    assert box.upper == (5.0, 5.0)
    assert box.area == 100.0
    assert box.expanded(1.0).width == 12.0
    assert list(box.contains([[0, 0], [6, 0]])) == [True, False]
    with pytest.raises(ValidationError):
        Box(width=0.0, height=1.0)


def test_torus_minimum_image_and_wrap():
    box = Box.square(10.0, topology=Topology.TORUS)
    assert np.allclose(box.displacement([9.0, -9.5]), [-1.0, 0.5])
    assert np.allclose(box.wrap([[11.0, -1.0]]), [[1.0, 9.0]])
    hard = Box.square(10.0)
    assert np.allclose(hard.displacement([9.0, -9.5]), [9.0, -9.5])


# === MUESTREO ===


def test_sample_poisson_records_seed_and_is_reproducible():
    box = Box.square(20.0)
    a = sample_poisson(box, 1.0, 42)
    b = sample_poisson(box, 1.0, 42)
    assert a.seed == 42
    assert np.array_equal(a.points, b.points)
    assert box.contains(a.points).all()


def test_sample_poisson_generator_has_no_seed(gen):
    field = sample_poisson(Box.square(5.0), 2.0, gen)
    assert field.seed is None
    assert field.intensity == 2.0


def test_sample_poisson_count_matches_intensity():
    counts = [len(sample_poisson(Box.square(10.0), 2.0, s)) for s in range(200)]
    # media 200, error estándar de la media 1
    assert np.mean(counts) == pytest.approx(200.0, abs=5.0)


def test_sample_poisson_margin_expands_hard_box():
    field = sample_poisson(Box.square(10.0), 1.0, 1, margin=2.0)
    assert field.box.origin == (-2.0, -2.0)
    assert field.box.width == 14.0
    torus = sample_poisson(Box.square(10.0, topology=Topology.TORUS), 1.0, 1, margin=2.0)
    assert torus.box.width == 10.0


def test_sample_poisson_cell_size_follows_annulus():
    box = Box.square(10.0)
    assert sample_poisson(box, 1.0, 1).cell_size == 1.0
    assert sample_poisson(box, 1.0, 1, annulus=Annulus(r=2.5, eps=0.5)).cell_size == 2.5
    assert sample_poisson(box, 1.0, 1, cell_size=0.5, annulus=Annulus(r=2.5, eps=0.5)).cell_size == 0.5


def test_sample_poisson_mean_count_over_many_seeds():
    box = Box(width=5.0, height=10.0)
    counts = np.array([len(sample_poisson(box, 1.0, s)) for s in range(10_000)])
    sigma = np.sqrt(50.0 / 10_000)
    assert abs(counts.mean() - 50.0) <= 3 * sigma


def test_torus_translation_keeps_neighbor_counts(round_annulus, gen):
    box = Box.square(12.0, topology=Topology.TORUS)
    field = sample_poisson(box, 2.0, 9)
    base = np.array([len(field.annulus_neighbors(p, round_annulus, exclude=i)) for i, p in enumerate(field.points)])
    for _ in range(10):
        shift = gen.uniform(-30.0, 30.0, size=2)
        moved = PointField(box=box, points=box.wrap(field.points + shift), cell_size=field.cell_size)
        counts = np.array([len(moved.annulus_neighbors(p, round_annulus, exclude=i)) for i, p in enumerate(moved.points)])
        assert np.array_equal(np.sort(counts), np.sort(base))


def test_sample_poisson_rejects_bad_intensity():
    with pytest.raises(InvalidParameterError):
        sample_poisson(Box.square(5.0), 0.0, 1)


# === CONSULTAS ===


@pytest.mark.parametrize("topology", [Topology.HARD, Topology.TORUS])
def test_annulus_neighbors_match_brute_force(topology, round_annulus):
    field = sample_poisson(Box.square(12.0, topology=topology), 3.0, 7, cell_size=1.0)
    for k in range(0, len(field), 37):
        center = field.points[k]
        found = field.annulus_neighbors(center, round_annulus, exclude=k)
        expected = _brute_neighbors(field, center, round_annulus)
        assert np.array_equal(found, expected)
        assert np.all(np.diff(found) > 0)


def test_annulus_neighbors_center_outside_hard_box(round_annulus):
    field = PointField(box=Box.square(4.0), points=[[0.2, 0.0], [3.0, 3.0]], cell_size=1.0)
    assert list(field.annulus_neighbors((-0.5, 0.0), round_annulus)) == [0]


@pytest.mark.parametrize("topology", [Topology.HARD, Topology.TORUS])
def test_annulus_pairs_match_brute_force(topology, square_annulus):
    field = sample_poisson(Box.square(8.0, topology=topology), 2.0, 11, cell_size=1.0)
    i, j = field.annulus_pairs(square_annulus)
    got = set(zip(i.tolist(), j.tolist()))
    pts = field.points
    disp = field.box.displacement(pts[None, :, :] - pts[:, None, :])
    adj = contains(square_annulus, disp)
    expected = {(a, b) for a, b in zip(*np.nonzero(np.triu(adj, 1)))}
    assert got == expected
    assert all(a < b for a, b in got)


def test_torus_rejects_large_radius():
    field = sample_poisson(Box.square(3.0, topology=Topology.TORUS), 1.0, 1)
    with pytest.raises(TopologyError):
        field.annulus_pairs(Annulus(r=2.0, eps=0.5))


def test_empty_and_single_point_fields(round_annulus):
    empty = PointField(box=Box.square(5.0), points=np.empty((0, 2)), cell_size=1.0)
    i, j = empty.annulus_pairs(round_annulus)
    assert i.size == j.size == 0
    assert empty.annulus_neighbors((1.0, 1.0), round_annulus).size == 0
    with pytest.raises(InvalidParameterError):
        PointField(box=Box.square(5.0), points=np.empty((0, 2)), cell_size=0.0)


def test_subset_keeps_order_and_metadata():
    field = sample_poisson(Box.square(6.0), 2.0, 5)
    mask = np.arange(len(field)) % 2 == 0
    sub = field.subset(mask)
    assert np.array_equal(sub.points, field.points[mask])
    assert sub.seed == 5 and sub.box == field.box


# === SERIALIZACIÓN ===


def test_csv_and_npz_persist_exactly(tmp_path):
    field = sample_poisson(Box.square(6.0, topology=Topology.TORUS), 1.5, 9, cell_size=1.5)
    field.to_csv(tmp_path / "field.csv")
    field.to_npz(tmp_path / "field.npz")
    for loaded in (PointField.from_csv(tmp_path / "field.csv"), PointField.from_npz(tmp_path / "field.npz")):
        assert np.array_equal(loaded.points, field.points)
        assert loaded.box == field.box
        assert loaded.seed == 9
        assert loaded.cell_size == 1.5
        assert loaded.intensity == 1.5


# === REGIÓN PROBADA ===


def test_tested_region_queries(round_annulus):
    region = TestedRegion(round_annulus, ball_radius=0.3)
    assert not region.query((0.0, 0.0))
    z = region.add((0.0, 0.0))
    assert region.query((0.2, 0.0))      # bola
    assert not region.query((0.4, 0.0))  # hueco entre bola y anillo
    assert region.query((0.0, 0.75))     # anillo
    assert not region.query((1.2, 0.0))
    assert not region.query((0.0, 0.75), skip_annulus=z)
    assert region.query((0.1, 0.0), skip_annulus=z)


def test_tested_region_flags(round_annulus):
    region = TestedRegion(round_annulus)
    region.add((5.0, 5.0), annulus=False)
    region.add((-5.0, 5.0), ball=False)
    assert len(region) == 2
    assert region.centers_annuli == [(-5.0, 5.0)]
    assert region.centers_balls == [(5.0, 5.0)]
    assert not region.query((5.0, 5.8))
    assert region.query((5.1, 5.0))
    assert not region.query((-5.0, 5.0))
    assert list(region.covered([[5.0, 5.0], [-5.0, 5.75]])) == [True, True]
