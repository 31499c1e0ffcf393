import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starknoise.geometry import (
    FieldMoments,
    TrapGeometry,
    expected_annulus_moments,
    field_moments,
    kappa_hat_annulus,
    sample_trap_geometry,
    trap_field_magnitude,
)

# Direct constant evaluation e/(4 pi eps0 eps_r r^2), converted to kV/cm.
F_AT_3NM = 1.43996 / (8.8 * 9.0) * 1e4    # 181.8131...
F_AT_5NM = 1.43996 / (8.8 * 25.0) * 1e4   # 65.4527...


def synthetic_geometry(magnitudes, radii=None):
    magnitudes = np.asarray(magnitudes, dtype=float)
    n = magnitudes.size
    radii = np.full(n, 4.0) if radii is None else np.asarray(radii, dtype=float)
    return TrapGeometry(
        n_traps=n, r_min_nm=3.0, r_max_nm=5.0, epsilon_r=8.8,
        radii_nm=radii, angles_rad=np.linspace(0.0, 2.0 * np.pi, n, endpoint=False),
        field_magnitudes_kv_cm=magnitudes,
    )


class TestTrapFieldMagnitude:
    def test_at_3nm(self):
        assert trap_field_magnitude(3.0, 8.8) == pytest.approx(F_AT_3NM, rel=1e-12)
        assert F_AT_3NM == pytest.approx(181.81, rel=1e-4)

    def test_at_5nm(self):
        assert trap_field_magnitude(5.0, 8.8) == pytest.approx(F_AT_5NM, rel=1e-12)
        assert F_AT_5NM == pytest.approx(65.45, rel=1e-4)

    def test_inverse_square(self):
        f1 = trap_field_magnitude(2.7, 8.8)
        f2 = trap_field_magnitude(5.4, 8.8)
        assert f2 == pytest.approx(f1 / 4.0, rel=1e-14)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            trap_field_magnitude(0.0, 8.8)
        with pytest.raises(ValueError):
            trap_field_magnitude(-1.0, 8.8)
        with pytest.raises(ValueError):
            trap_field_magnitude(3.0, 0.5)


class TestSampleTrapGeometry:
    def test_bounds_and_fields(self):
        geom = sample_trap_geometry(18, 3.0, 5.0, 8.8, seed=1)
        assert geom.n_traps == 18
        assert np.all(geom.radii_nm >= 3.0) and np.all(geom.radii_nm <= 5.0)
        assert np.all(geom.field_magnitudes_kv_cm >= F_AT_5NM - 1e-9)
        assert np.all(geom.field_magnitudes_kv_cm <= F_AT_3NM + 1e-9)
        assert np.all(geom.angles_rad >= 0.0) and np.all(geom.angles_rad < 2.0 * np.pi)

    def test_narrow_annulus_limit(self):
        geom = sample_trap_geometry(1, 3.0, 3.0 + 1e-9, 8.8, seed=7)
        assert geom.field_magnitudes_kv_cm[0] == pytest.approx(F_AT_3NM, rel=1e-8)

    def test_determinism(self):
        a = sample_trap_geometry(12, 3.0, 5.0, 8.8, seed=42)
        b = sample_trap_geometry(12, 3.0, 5.0, 8.8, seed=42)
        assert np.array_equal(a.radii_nm, b.radii_nm)
        assert np.array_equal(a.angles_rad, b.angles_rad)
        assert np.array_equal(a.field_magnitudes_kv_cm, b.field_magnitudes_kv_cm)

    def test_distinct_seeds_differ(self):
        a = sample_trap_geometry(12, 3.0, 5.0, 8.8, seed=42)
        b = sample_trap_geometry(12, 3.0, 5.0, 8.8, seed=43)
        assert not np.array_equal(a.radii_nm, b.radii_nm)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            sample_trap_geometry(0, 3.0, 5.0, 8.8, seed=1)
        with pytest.raises(ValueError):
            sample_trap_geometry(5, 5.0, 3.0, 8.8, seed=1)
        with pytest.raises(ValueError):
            sample_trap_geometry(5, 0.0, 5.0, 8.8, seed=1)

    def test_field_decreases_with_radius(self):
        geom = sample_trap_geometry(50, 3.0, 8.0, 8.8, seed=3)
        order = np.argsort(geom.radii_nm)
        assert np.all(np.diff(geom.field_magnitudes_kv_cm[order]) < 0.0)

    def test_area_uniform_radii(self):
        # r^2 should be uniform on [r_min^2, r_max^2] for area-uniform samples
        geom = sample_trap_geometry(20000, 3.0, 5.0, 8.8, seed=11)
        u = (geom.radii_nm**2 - 9.0) / (25.0 - 9.0)
        assert abs(u.mean() - 0.5) < 3.0 * np.sqrt(1.0 / 12.0 / 20000)


class TestFieldMoments:
    def test_single_trap(self):
        m = field_moments(synthetic_geometry([2.0]))
        assert m.s2 == 4.0 and m.s4 == 16.0 and m.kappa_hat == 1.0

    def test_identical_traps_lower_bound(self):
        n = 7
        m = field_moments(synthetic_geometry(np.ones(n)))
        assert m.s2 == pytest.approx(n) and m.s4 == pytest.approx(n)
        assert m.kappa_hat == pytest.approx(1.0 / n, rel=1e-12)

    def test_moment_consistency_check(self):
        with pytest.raises(ValueError):
            FieldMoments(s2=4.0, s4=16.0, kappa_hat=0.5)


class TestKappaHatAnnulus:
    def test_main_geometry(self):
        a = 5.0 / 3.0
        expected = (a**2 + 1.0 + a**-2) / (3.0 * 18)
        assert kappa_hat_annulus(a, 18) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.07663, abs=5e-6)

    def test_degenerate_shell(self):
        assert kappa_hat_annulus(1.0, 10) == pytest.approx(0.1, rel=1e-14)

    def test_wide_annulus(self):
        a = 8.0 / 3.0
        expected = (a**2 + 1.0 + a**-2) / 150.0
        assert kappa_hat_annulus(a, 50) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.05501, abs=5e-6)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            kappa_hat_annulus(0.9, 10)
        with pytest.raises(ValueError):
            kappa_hat_annulus(2.0, 0)

    def test_ensemble_mean_matches_formula(self):
        # Monte Carlo oracle: kappa_hat of the ensemble is the ratio of the
        # ensemble-mean moments (per-geometry ratios carry a 1/N Jensen bias).
        n_geom, n_traps = 6000, 18
        s2 = np.empty(n_geom)
        s4 = np.empty(n_geom)
        for g in range(n_geom):
            m = field_moments(sample_trap_geometry(n_traps, 3.0, 5.0, 8.8, seed=1000 + g))
            s2[g], s4[g] = m.s2, m.s4
        est = s4.mean() / s2.mean() ** 2
        # delta-method standard error for the moment ratio
        gx = -2.0 * s4.mean() / s2.mean() ** 3
        gy = 1.0 / s2.mean() ** 2
        cov = np.cov(s2, s4) / n_geom
        se = np.sqrt(gx * gx * cov[0, 0] + gy * gy * cov[1, 1] + 2 * gx * gy * cov[0, 1])
        assert abs(est - kappa_hat_annulus(5.0 / 3.0, n_traps)) < 3.0 * se


class TestExpectedAnnulusMoments:
    def test_ratio_equals_closed_form(self):
        for n, rmin, rmax in [(18, 3.0, 5.0), (50, 3.0, 8.0), (5, 1.0, 7.0)]:
            m = expected_annulus_moments(n, rmin, rmax, 8.8)
            assert m.kappa_hat == pytest.approx(kappa_hat_annulus(rmax / rmin, n), rel=1e-12)

    def test_matches_sampling(self):
        m = expected_annulus_moments(50, 3.0, 8.0, 8.8)
        samples = np.array([
            field_moments(sample_trap_geometry(50, 3.0, 8.0, 8.8, seed=s)).s2
            for s in range(4000)
        ])
        se = samples.std(ddof=1) / np.sqrt(samples.size)
        assert abs(samples.mean() - m.s2) < 3.0 * se


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=40),
    rmin=st.floats(min_value=0.5, max_value=5.0),
    ratio=st.floats(min_value=1.01, max_value=6.0),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_kappa_bound_property(n, rmin, ratio, seed):
    geom = sample_trap_geometry(n, rmin, rmin * ratio, 8.8, seed=seed)
    kappa = field_moments(geom).kappa_hat
    assert 1.0 / n - 1e-12 <= kappa <= 1.0 + 1e-12


class TestJsonRoundTrip:
    def test_round_trip(self, tmp_path):
        geom = sample_trap_geometry(9, 3.0, 5.0, 8.8, seed=5)
        path = tmp_path / "geom.json"
        geom.save_json(path)
        data = json.loads(path.read_text())
        assert set(data) == {"n_traps", "r_min_nm", "r_max_nm", "epsilon_r", "traps"}
        assert set(data["traps"][0]) == {"r_nm", "theta_rad", "f_kv_cm"}
        loaded = TrapGeometry.load_json(path)
        assert loaded.n_traps == geom.n_traps
        np.testing.assert_allclose(loaded.radii_nm, geom.radii_nm)
        np.testing.assert_allclose(loaded.field_magnitudes_kv_cm,
                                   geom.field_magnitudes_kv_cm)

    def test_immutability(self):
        geom = sample_trap_geometry(4, 3.0, 5.0, 8.8, seed=2)
        with pytest.raises(ValueError):
            geom.radii_nm[0] = 10.0
