"""Building DEM, tree mask, green-share index, evergreen/deciduous split."""

import numpy as np
import pytest

from solpot.errors import ExtentError, GeometryError, ShapeError
from solpot.imagery import RgbImage
from solpot.raster import BinaryMask, GridSpec, Raster
from solpot.vegetation import (
    ClassifyConfig,
    building_dem,
    channel_percent,
    split_trees,
    tree_mask,
    tree_type_dem,
)

CFG = ClassifyConfig()


def _r(values, cell=1.0):
    values = np.asarray(values, dtype=np.float64)
    return Raster(GridSpec(values.shape[1], values.shape[0], 0.0, 0.0, cell), values)


def _square(x0, y0, x1, y1):
    return [[(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)]]


class TestBuildingDem:
    def test_no_footprints_is_identity(self):
        dem = _r(np.full((3, 3), 100.0))
        dsm = _r(np.full((3, 3), 130.0))
        bdem, mask = building_dem(dem, dsm, [])
        assert bdem == dem
        assert not mask.values.any()

    def test_footprint_pixel_takes_surface_height(self):
        dem = _r([[100.0, 100.0]])
        dsm = _r([[130.0, 130.0]])
        bdem, mask = building_dem(dem, dsm, [_square(0.0, 0.0, 1.0, 1.0)])
        assert mask.values.tolist() == [[1.0, 0.0]]
        assert bdem.values.tolist() == [[130.0, 100.0]]

    def test_degenerate_ring_rejected(self):
        dem = _r([[1.0]])
        with pytest.raises(GeometryError, match="at least 3"):
            building_dem(dem, dem, [[[(0.0, 0.0), (1.0, 1.0)]]])

    def test_grid_mismatch(self):
        with pytest.raises(ShapeError):
            building_dem(_r([[1.0]]), _r([[1.0, 2.0]]), [])

    def test_center_on_edge_is_deterministic(self):
        # centers (0.5, 0.5) and (1.5, 0.5) sit exactly on the footprint
        # boundary; the crossing-count rule resolves both as inside, stably
        dem = _r([[0.0, 0.0]])
        dsm = _r([[9.0, 9.0]])
        ring = _square(0.5, 0.5, 2.5, 2.5)
        _, first = building_dem(dem, dsm, [ring])
        _, second = building_dem(dem, dsm, [ring])
        assert first.values.tolist() == [[1.0, 1.0]]
        assert first == second


class TestTreeMask:
    def test_tall_pixel_is_tree(self):
        out = tree_mask(_r([[10.0]]), _r([[5.0]]), CFG)
        assert out.values[0, 0] == 1.0

    def test_threshold_is_strict(self):
        out = tree_mask(_r([[7.5]]), _r([[5.0]]), CFG)  # exactly 2.5 above
        assert out.values[0, 0] == 0.0

    def test_building_interior_is_not_tree(self):
        out = tree_mask(_r([[130.0]]), _r([[130.0]]), CFG)
        assert out.values[0, 0] == 0.0

    def test_nodata_propagates(self):
        out = tree_mask(_r([[-9999.0, 10.0]]), _r([[5.0, -9999.0]]), CFG)
        assert out.values.tolist() == [[-9999.0, -9999.0]]

    def test_returns_binary_mask(self):
        assert isinstance(tree_mask(_r([[10.0]]), _r([[5.0]]), CFG), BinaryMask)


class TestChannelPercent:
    def _img(self, rgb_rows, cell=1.0):
        pixels = np.asarray(rgb_rows, dtype=np.uint8)
        spec = GridSpec(pixels.shape[1], pixels.shape[0], 0.0, 0.0, cell)
        return RgbImage(pixels, spec)

    def test_gray_is_one_third(self):
        img = self._img([[(100, 100, 100)]])
        out = channel_percent(img, img.spec)
        assert out.values[0, 0] == pytest.approx(1.0 / 3.0)

    def test_pure_green_is_one(self):
        img = self._img([[(0, 255, 0)]])
        assert channel_percent(img, img.spec).values[0, 0] == 1.0

    def test_mixed_pixel_below_threshold(self):
        img = self._img([[(120, 100, 90)]])
        value = channel_percent(img, img.spec).values[0, 0]
        assert value == pytest.approx(100.0 / 310.0)
        assert value <= CFG.evergreen_threshold

    def test_black_pixel_becomes_nodata(self):
        img = self._img([[(0, 0, 0), (10, 10, 10)]])
        out = channel_percent(img, img.spec)
        assert out.values[0, 0] == out.nodata

    def test_mean_resample_to_coarser_grid(self):
        img = self._img([[(0, 255, 0), (100, 100, 100)],
                         [(0, 255, 0), (100, 100, 100)]], cell=0.5)
        out = channel_percent(img, GridSpec(1, 1, 0.0, 0.0, 1.0))
        assert out.values[0, 0] == pytest.approx((1.0 + 1.0 / 3.0) / 2.0)

    def test_values_within_unit_interval(self):
        rng = np.random.default_rng(17)
        pixels = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
        img = RgbImage(pixels, GridSpec(8, 8, 0.0, 0.0, 1.0))
        out = channel_percent(img, img.spec)
        valid = out.valid_mask()
        assert (out.values[valid] >= 0.0).all() and (out.values[valid] <= 1.0).all()

    def test_no_overlap_raises_extent_error(self):
        img = self._img([[(1, 2, 3)]])
        with pytest.raises(ExtentError):
            channel_percent(img, GridSpec(2, 2, 500.0, 500.0, 1.0))

    def test_unanchored_imagery_rejected(self):
        img = RgbImage(np.zeros((2, 2, 3), dtype=np.uint8))
        with pytest.raises(ValueError, match="anchor"):
            channel_percent(img, GridSpec(2, 2, 0.0, 0.0, 1.0))


class TestSplitTrees:
    def _mask(self, values):
        values = np.asarray(values, dtype=np.float64)
        return BinaryMask(GridSpec(values.shape[1], values.shape[0], 0.0, 0.0, 1.0), values)

    def test_green_tree_is_evergreen(self):
        ever, decid = split_trees(_r([[0.50]]), self._mask([[1.0]]), CFG)
        assert ever.values[0, 0] == 1.0
        assert decid.values[0, 0] == 0.0

    def test_threshold_exact_is_deciduous(self):
        ever, decid = split_trees(_r([[0.375]]), self._mask([[1.0]]), CFG)
        assert ever.values[0, 0] == 0.0
        assert decid.values[0, 0] == 1.0

    def test_non_tree_pixel_in_neither(self):
        ever, decid = split_trees(_r([[0.9]]), self._mask([[0.0]]), CFG)
        assert ever.values[0, 0] == 0.0
        assert decid.values[0, 0] == 0.0

    def test_missing_share_defaults_deciduous_with_warning(self):
        with pytest.warns(UserWarning, match="defaulting to deciduous"):
            ever, decid = split_trees(_r([[-9999.0]]), self._mask([[1.0]]), CFG)
        assert ever.values[0, 0] == 0.0
        assert decid.values[0, 0] == 1.0

    def test_partition_of_tree_pixels(self):
        rng = np.random.default_rng(4)
        chan = _r(rng.uniform(0, 1, (6, 6)))
        tree = self._mask((rng.random((6, 6)) < 0.5).astype(float))
        ever, decid = split_trees(chan, tree, CFG)
        np.testing.assert_array_equal(ever.values + decid.values, tree.values)
        assert not ((ever.values == 1.0) & (decid.values == 1.0)).any()


class TestTreeTypeDem:
    def test_empty_mask_keeps_terrain(self):
        dem = _r([[100.0, 101.0]])
        out = tree_type_dem(dem, _r([[112.0, 113.0]]),
                            BinaryMask(dem.spec, np.zeros((1, 2))))
        assert out == dem

    def test_crown_pixel_takes_surface(self):
        dem = _r([[100.0]])
        out = tree_type_dem(dem, _r([[112.0]]), BinaryMask(dem.spec, [[1.0]]))
        assert out.values[0, 0] == 112.0

    def test_two_masks_differ_only_on_their_pixels(self):
        rng = np.random.default_rng(6)
        dem = _r(rng.uniform(90, 110, (5, 5)))
        dsm = _r(dem.values + rng.uniform(0, 10, (5, 5)))
        a = np.zeros((5, 5)); a[1, 1] = 1.0
        b = np.zeros((5, 5)); b[3, 2] = 1.0
        da = tree_type_dem(dem, dsm, BinaryMask(dem.spec, a))
        db = tree_type_dem(dem, dsm, BinaryMask(dem.spec, b))
        diff = da.values != db.values
        assert diff.sum() == 2
        assert diff[1, 1] and diff[3, 2]
