"""Solar position, clear-sky radiometry, shadow casting, daily integration."""

import math

import numpy as np
import pytest

from solpot.errors import EmptyRasterError
from solpot.raster import GridSpec, Raster
from solpot.sun import (
    SolarConfig,
    SunPosition,
    beam_normal_irradiance,
    clearsky_components,
    daily_irradiation,
    declination,
    diffuse_horizontal_irradiance,
    is_shadowed,
    shadow_mask,
    slope_aspect,
    solar_position,
    sun_window,
)

RALEIGH = 35.78

# direct evaluation of the clear-sky beam expressions at air mass exactly 1,
# TL = 3, day 91: 1367 * (1 + 0.033*cos(2*pi*91/365)) * exp(-0.8662*3/8.26697)
ZENITH_BEAM_GOLDEN = 998.430360


def _flat(n, z=100.0, cell=0.5):
    return Raster(GridSpec(n, n, 0.0, 0.0, cell), np.full((n, n), z))


class TestSolarPosition:
    def test_subsolar_point_at_equator_equinox(self):
        pos = solar_position(SolarConfig(latitude=0.0, day_of_year=81), 12.0)
        assert pos.altitude == pytest.approx(90.0, abs=0.3)

    @pytest.mark.parametrize("day,target", [(172, 77.7), (1, 31.2)])
    def test_noon_altitude_closed_form(self, day, target):
        cfg = SolarConfig(latitude=RALEIGH, day_of_year=day)
        alt = solar_position(cfg, 12.0).altitude
        assert alt == pytest.approx(90.0 - abs(RALEIGH - declination(day)), abs=1e-6)
        assert alt == pytest.approx(target, abs=0.3)

    def test_azimuth_morning_east_afternoon_west(self):
        cfg = SolarConfig(latitude=RALEIGH, day_of_year=172)
        assert 0.0 < solar_position(cfg, 9.0).azimuth < 180.0
        assert 180.0 < solar_position(cfg, 15.0).azimuth < 360.0
        assert solar_position(cfg, 12.0).azimuth == pytest.approx(180.0, abs=1e-6)

    def test_ranges(self):
        cfg = SolarConfig(latitude=-40.0, day_of_year=200)
        for t in np.linspace(0.0, 24.0, 49):
            pos = solar_position(cfg, float(t))
            assert -90.0 <= pos.altitude <= 90.0
            assert 0.0 <= pos.azimuth < 360.0

    def test_declination_peaks_at_solstice(self):
        assert declination(172) == pytest.approx(23.45, abs=0.01)
        assert declination(1) == pytest.approx(-23.0, abs=0.05)


class TestSunWindow:
    def test_equinox_equator_six_to_six(self):
        rise, set_ = sun_window(SolarConfig(latitude=0.0, day_of_year=81))
        assert rise == pytest.approx(6.0, abs=0.01)
        assert set_ == pytest.approx(18.0, abs=0.01)

    def test_matches_hour_angle_closed_form(self):
        cfg = SolarConfig(latitude=RALEIGH, day_of_year=172)
        cos_ws = -math.tan(math.radians(RALEIGH)) * math.tan(math.radians(declination(172)))
        ws = math.degrees(math.acos(cos_ws))
        rise, set_ = sun_window(cfg)
        assert rise == pytest.approx(12.0 - ws / 15.0, abs=2.0 / 3600.0)
        assert set_ == pytest.approx(12.0 + ws / 15.0, abs=2.0 / 3600.0)

    def test_polar_day_and_night(self):
        assert sun_window(SolarConfig(latitude=80.0, day_of_year=172)) == (0.0, 24.0)
        assert sun_window(SolarConfig(latitude=80.0, day_of_year=1)) is None


class TestClearskyComponents:
    CFG = SolarConfig(latitude=0.0, day_of_year=91)

    def test_night_is_all_zero(self):
        s = clearsky_components(SunPosition(-5.0, 90.0), self.CFG)
        assert (s.beam, s.diffuse, s.reflected) == (0.0, 0.0, 0.0)

    def test_shadow_kills_beam_only_and_flat_kills_reflected(self):
        s = clearsky_components(SunPosition(45.0, 180.0), self.CFG, slope=0.0, shadowed=True)
        assert s.beam == 0.0
        assert s.diffuse > 0.0
        assert s.reflected == 0.0

    def test_zenith_beam_golden_number(self):
        s = clearsky_components(SunPosition(90.0, 180.0), self.CFG)
        assert 700.0 <= s.beam <= 1100.0
        assert s.beam == pytest.approx(ZENITH_BEAM_GOLDEN, rel=5e-3)

    def test_beam_monotone_decreasing_in_turbidity(self):
        beams = [
            beam_normal_irradiance(90.0, SolarConfig(latitude=0, day_of_year=91, linke_turbidity=tl))
            for tl in (2.0, 3.0, 4.0, 5.0, 6.0)
        ]
        assert all(a > b for a, b in zip(beams, beams[1:]))

    def test_components_nonnegative_and_total(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            sun = SunPosition(float(rng.uniform(-10, 90)), float(rng.uniform(0, 360)))
            s = clearsky_components(
                sun, self.CFG,
                slope=float(rng.uniform(0, 90)),
                aspect=float(rng.uniform(0, 360)),
                shadowed=bool(rng.integers(0, 2)),
            )
            assert s.beam >= 0.0 and s.diffuse >= 0.0 and s.reflected >= 0.0
            assert s.total == s.beam + s.diffuse + s.reflected

    def test_sun_facing_slope_collects_more_beam(self):
        sun = SunPosition(40.0, 180.0)
        south = clearsky_components(sun, self.CFG, slope=30.0, aspect=180.0)
        north = clearsky_components(sun, self.CFG, slope=30.0, aspect=0.0)
        assert south.beam > north.beam

    def test_diffuse_positive_at_low_sun(self):
        assert diffuse_horizontal_irradiance(1.0, self.CFG) > 0.0


class TestSlopeAspect:
    def test_flat_surface(self):
        slope, _ = slope_aspect(_flat(8))
        assert (slope == 0.0).all()

    def test_east_rising_plane(self):
        spec = GridSpec(8, 8, 0.0, 0.0, 1.0)
        x = spec.col_centers()
        z = np.tile(0.3 * x, (8, 1))
        slope, aspect = slope_aspect(Raster(spec, z))
        inner = (slice(1, -1), slice(1, -1))
        np.testing.assert_allclose(slope[inner], math.degrees(math.atan(0.3)), atol=1e-9)
        np.testing.assert_allclose(aspect[inner], 270.0, atol=1e-9)  # faces west

    def test_north_rising_plane_faces_south(self):
        spec = GridSpec(8, 8, 0.0, 0.0, 1.0)
        y = spec.row_centers()
        z = np.tile((0.2 * y)[:, None], (1, 8))
        _, aspect = slope_aspect(Raster(spec, z))
        np.testing.assert_allclose(aspect[1:-1, 1:-1], 180.0, atol=1e-9)


def _wall_scene(height=10.0, wall_col=40, ncols=140, nrows=21, cell=0.5):
    z = np.zeros((nrows, ncols))
    z[:, wall_col] = height
    return Raster(GridSpec(ncols, nrows, 0.0, 0.0, cell), z)


def _naive_is_shadowed(surface, col, row, sun, max_dist):
    """Plain lattice march straight from the contract, no acceleration."""
    valid = surface.valid_mask()
    filled = np.where(valid, surface.values, -1e30)
    zmax = surface.values[valid].max()
    nrows, ncols = filled.shape
    cs = surface.spec.cell_size
    z0 = surface.values[row, col]
    az = math.radians(sun.azimuth)
    ta = math.tan(math.radians(sun.altitude))
    d_limit = min(max_dist, (zmax - z0) / ta)
    k = 1
    while True:
        d = k * cs / 2.0
        if d > d_limit:
            return False
        pr = row - (d / cs) * math.cos(az)
        pc = col + (d / cs) * math.sin(az)
        if not (0.0 <= pr <= nrows - 1 and 0.0 <= pc <= ncols - 1):
            return False
        r0 = min(max(int(math.floor(pr)), 0), max(nrows - 2, 0))
        c0 = min(max(int(math.floor(pc)), 0), max(ncols - 2, 0))
        r1, c1 = min(r0 + 1, nrows - 1), min(c0 + 1, ncols - 1)
        tr, tc = pr - r0, pc - c0
        top = filled[r0, c0] + (filled[r0, c1] - filled[r0, c0]) * tc
        bot = filled[r1, c0] + (filled[r1, c1] - filled[r1, c0]) * tc
        if top + (bot - top) * tr > z0 + d * ta:
            return True
        k += 1


class TestShadow:
    CFG = SolarConfig(latitude=RALEIGH, day_of_year=172, shadow_max_distance=100.0)

    def test_flat_plane_never_shadowed(self):
        surf = _flat(16)
        for alt in (5.0, 30.0, 60.0):
            mask = shadow_mask(surf, SunPosition(alt, 217.0), self.CFG)
            assert not mask.any()

    @pytest.mark.parametrize("altitude,expect_len", [(45.0, 10.0), (26.565, 20.0)])
    def test_wall_shadow_length_analytic(self, altitude, expect_len):
        surf = _wall_scene()
        sun = SunPosition(altitude, 270.0)  # sun west, shadow east
        mask = shadow_mask(surf, sun, self.CFG)
        row = surf.spec.nrows // 2
        cols = np.flatnonzero(mask[row])
        wall_x = (40 + 0.5) * 0.5
        east_edge = (cols.max() + 0.5) * 0.5
        assert abs((east_edge - wall_x) - expect_len) <= 0.5  # one cell

    def test_down_sun_pixels_per_spec_example(self):
        surf = _wall_scene()
        sun = SunPosition(45.0, 270.0)
        row = surf.spec.nrows // 2
        wall_x = 20.25
        col_5m = int((wall_x + 5.0) / 0.5)
        col_15m = int((wall_x + 15.0) / 0.5)
        assert is_shadowed(surf, col_5m, row, sun, self.CFG)
        assert not is_shadowed(surf, col_15m, row, sun, self.CFG)

    def test_out_of_bounds_pixel(self):
        with pytest.raises(IndexError):
            is_shadowed(_flat(4), 4, 0, SunPosition(45.0, 180.0), self.CFG)

    def test_nodata_pixel_rejected(self):
        v = np.full((4, 4), 5.0)
        v[1, 1] = -9999.0
        surf = Raster(GridSpec(4, 4, 0, 0, 0.5), v)
        with pytest.raises(ValueError, match="nodata"):
            is_shadowed(surf, 1, 1, SunPosition(45.0, 180.0), self.CFG)

    def test_sun_below_horizon_rejected(self):
        with pytest.raises(ValueError, match="below horizon"):
            is_shadowed(_flat(4), 0, 0, SunPosition(-1.0, 180.0), self.CFG)

    def test_nodata_never_obstructs(self):
        v = np.zeros((9, 9))
        v[:, 4] = -9999.0
        surf = Raster(GridSpec(9, 9, 0, 0, 0.5), v)
        mask = shadow_mask(surf, SunPosition(10.0, 270.0), self.CFG)
        assert not mask.any()

    def test_block_skip_equals_naive_march(self):
        rng = np.random.default_rng(99)
        for case in range(40):
            n = int(rng.integers(8, 40))
            v = rng.uniform(0.0, 12.0, (n, n))
            v[rng.random((n, n)) < 0.05] = -9999.0
            if not (v != -9999.0).any():
                continue
            surf = Raster(GridSpec(n, n, 0.0, 0.0, 0.5), v)
            sun = SunPosition(float(rng.uniform(3, 80)), float(rng.uniform(0, 360)))
            max_dist = float(rng.uniform(3, 25))
            cfg = SolarConfig(latitude=RALEIGH, day_of_year=172, shadow_max_distance=max_dist)
            mask = shadow_mask(surf, sun, cfg)
            valid = surf.valid_mask()
            for row in range(n):
                for col in range(n):
                    if not valid[row, col]:
                        continue
                    assert mask[row, col] == _naive_is_shadowed(surf, col, row, sun, max_dist), (
                        f"case {case} pixel ({col},{row}) sun {sun}"
                    )


class TestDailyIrradiation:
    def test_flat_field_is_uniform_and_seasonal(self):
        surf = _flat(32)
        summer = daily_irradiation(surf, SolarConfig(latitude=RALEIGH, day_of_year=172))
        winter = daily_irradiation(surf, SolarConfig(latitude=RALEIGH, day_of_year=1))
        for r in (summer, winter):
            v = r.values
            assert (v.max() - v.min()) / v.max() < 1e-3
        assert (summer.values > winter.values).all()

    def test_quarter_hour_close_to_one_minute_reference(self):
        one = Raster(GridSpec(1, 1, 0, 0, 0.5), [[100.0]])
        for day in (172, 1):
            coarse = daily_irradiation(one, SolarConfig(latitude=RALEIGH, day_of_year=day)).values[0, 0]
            fine = daily_irradiation(
                one, SolarConfig(latitude=RALEIGH, day_of_year=day, time_step=1.0 / 60.0)
            ).values[0, 0]
            assert abs(coarse - fine) / fine < 0.01

    def test_halving_time_step_changes_less_than_half_percent(self):
        # holds where the irradiance is time-continuous; a pixel swept by a
        # hard shadow edge sees an O(time_step) jump instead, so the scenes
        # here are shadow-transition-free
        spec = GridSpec(16, 16, 0.0, 0.0, 0.5)
        x = spec.col_centers()
        scenes = [
            _flat(16),
            Raster(spec, np.tile(100.0 + 0.1 * x, (16, 1))),  # gentle tilt
        ]
        for surf in scenes:
            a = daily_irradiation(surf, SolarConfig(latitude=RALEIGH, day_of_year=172, time_step=0.25))
            b = daily_irradiation(surf, SolarConfig(latitude=RALEIGH, day_of_year=172, time_step=0.125))
            rel = np.abs(a.values - b.values) / b.values
            assert rel.max() < 0.005

    def test_all_day_shade_pixel_equals_raster_min_and_diffuse_integral(self):
        # deep pit, horizontal receivers: floor never sees beam
        n = 32
        z = np.full((n, n), 100.0)
        z[12:21, 12:21] = 60.0
        surf = Raster(GridSpec(n, n, 0.0, 0.0, 0.5), z)
        cfg = SolarConfig(
            latitude=RALEIGH, day_of_year=172, terrain_mode="horizontal",
            shadow_max_distance=100.0,
        )
        out = daily_irradiation(surf, cfg)
        center = out.values[16, 16]
        assert out.values.min() == center

        rise, set_ = sun_window(cfg)
        times = [rise]
        k = 1
        while rise + k * cfg.time_step < set_:
            times.append(rise + k * cfg.time_step)
            k += 1
        times.append(set_)
        total = 0.0
        prev = None
        for t in times:
            alt = solar_position(cfg, t).altitude
            dh = diffuse_horizontal_irradiance(alt, cfg) if alt > 0 else 0.0
            if prev is not None:
                total += 0.5 * (dh + prev[1]) * (t - prev[0])
            prev = (t, dh)
        assert center == pytest.approx(total, abs=1e-9)

    def test_nodata_pixels_stay_nodata(self):
        v = np.full((6, 6), 10.0)
        v[2, 2] = -9999.0
        out = daily_irradiation(
            Raster(GridSpec(6, 6, 0, 0, 0.5), v), SolarConfig(latitude=RALEIGH, day_of_year=172)
        )
        assert out.values[2, 2] == -9999.0
        assert (out.values[out.values != -9999.0] > 0).all()

    def test_all_nodata_raises(self):
        r = Raster(GridSpec(2, 2, 0, 0, 0.5), np.full((2, 2), -9999.0))
        with pytest.raises(EmptyRasterError):
            daily_irradiation(r, SolarConfig(latitude=RALEIGH, day_of_year=172))

    def test_polar_night_yields_zero(self):
        out = daily_irradiation(_flat(4), SolarConfig(latitude=80.0, day_of_year=1))
        assert (out.values == 0.0).all()

    def test_raising_obstacle_never_helps_neighbors(self):
        rng = np.random.default_rng(21)
        cfg = SolarConfig(
            latitude=RALEIGH, day_of_year=172, terrain_mode="horizontal",
            shadow_max_distance=40.0,
        )
        for _ in range(5):
            z = rng.uniform(0.0, 3.0, (16, 16))
            base = Raster(GridSpec(16, 16, 0.0, 0.0, 0.5), z)
            r, c = rng.integers(0, 16, 2)
            raised_vals = z.copy()
            raised_vals[r, c] += rng.uniform(2.0, 12.0)
            raised = Raster(base.spec, raised_vals)
            a = daily_irradiation(base, cfg).values
            b = daily_irradiation(raised, cfg).values
            mask = np.ones((16, 16), dtype=bool)
            mask[r, c] = False
            assert (b[mask] <= a[mask] + 1e-9).all()

    def test_mirror_symmetry_at_equator_equinox(self):
        rng = np.random.default_rng(31)
        z = rng.uniform(0.0, 6.0, (21, 21))
        spec = GridSpec(21, 21, 0.0, 0.0, 0.5)
        cfg = SolarConfig(
            latitude=0.0, day_of_year=81, terrain_mode="horizontal",
            shadow_max_distance=30.0,
        )
        a = daily_irradiation(Raster(spec, z), cfg).values
        b = daily_irradiation(Raster(spec, np.flipud(z).copy()), cfg).values
        center = 10  # mirror axis row maps to itself
        np.testing.assert_allclose(a[center], b[center], rtol=1e-6)
