import math

import numpy as np
import pytest

from ttcomplete.metrics import QualityReport, psnr, quality_report, ssim_band


def ssim_reference(x, y):
    """Window-by-window SSIM evaluator written straight from the definition.

    Slow on purpose: explicit python loops, no shared code with the
    implementation under test.
    """
    c1, c2 = 0.01**2, 0.03**2
    h, w = x.shape
    k = 8
    if h < k or w < k:
        windows = [(x, y)]
    else:
        windows = [
            (x[i : i + k, j : j + k], y[i : i + k, j : j + k])
            for i in range(h - k + 1)
            for j in range(w - k + 1)
        ]
    vals = []
    for wx, wy in windows:
        mx, my = wx.mean(), wy.mean()
        vx = ((wx - mx) ** 2).mean()
        vy = ((wy - my) ** 2).mean()
        cxy = ((wx - mx) * (wy - my)).mean()
        vals.append(
            ((2 * mx * my + c1) * (2 * cxy + c2))
            / ((mx**2 + my**2 + c1) * (vx + vy + c2))
        )
    return float(np.mean(vals))


class TestPsnr:
    def test_identical_inputs_sentinel(self):
        a = np.random.default_rng(0).random((4, 4, 2))
        assert psnr(a, a) == float("inf")

    def test_hand_computed_value(self):
        # all-ones truth, constant 0.5 estimate on (2,2,1):
        # 10*log10(4*1 / (4*0.25)) = 10*log10(4) = 6.0206
        a_true = np.ones((2, 2, 1))
        a = np.full((2, 2, 1), 0.5)
        assert psnr(a, a_true) == pytest.approx(10 * math.log10(4.0), abs=1e-10)

    def test_monotone_in_error(self):
        rng = np.random.default_rng(1)
        a_true = rng.random((6, 6, 2))
        noise = rng.standard_normal(a_true.shape)
        values = [psnr(a_true + s * noise, a_true) for s in (0.01, 0.05, 0.2)]
        assert values[0] > values[1] > values[2]

    def test_peak_comes_from_reference(self):
        a_true = np.full((3, 3, 1), 2.0)
        a = a_true + 0.1
        expect = 10 * math.log10(9 * 4.0 / (9 * 0.01))
        assert psnr(a, a_true) == pytest.approx(expect, rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.zeros((2, 2, 2)), np.zeros((2, 2, 3)))


class TestSsimBand:
    def test_identical_is_one(self):
        x = np.random.default_rng(2).random((16, 16))
        assert ssim_band(x, x) == pytest.approx(1.0, abs=1e-15)

    def test_constant_zero_vs_one(self):
        x = np.zeros((16, 16))
        y = np.ones((16, 16))
        c1, c2 = 0.01**2, 0.03**2
        expect = (c1 * c2) / ((1.0 + c1) * c2)
        assert ssim_band(x, y) == pytest.approx(expect, rel=1e-12)

    def test_matches_reference_evaluator(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            x = rng.random((16, 16))
            y = np.clip(x + 0.1 * rng.standard_normal((16, 16)), 0, 1)
            assert ssim_band(x, y) == pytest.approx(ssim_reference(x, y), abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        x, y = rng.random((12, 12)), rng.random((12, 12))
        assert ssim_band(x, y) == pytest.approx(ssim_band(y, x), abs=1e-14)

    def test_bounded_by_one(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            x, y = rng.random((10, 10)), rng.random((10, 10))
            assert ssim_band(x, y) <= 1.0 + 1e-12

    def test_small_input_global_window(self):
        rng = np.random.default_rng(6)
        x, y = rng.random((5, 7)), rng.random((5, 7))
        assert ssim_band(x, y) == pytest.approx(ssim_reference(x, y), abs=1e-12)

    def test_rectangular_input(self):
        rng = np.random.default_rng(7)
        x = rng.random((9, 20))
        y = np.clip(x + 0.05 * rng.standard_normal(x.shape), 0, 1)
        assert ssim_band(x, y) == pytest.approx(ssim_reference(x, y), abs=1e-12)


class TestQualityReport:
    def test_identical_inputs(self):
        a = np.random.default_rng(8).random((12, 12, 3))
        rep = quality_report(a, a)
        assert rep.band_count == 3
        assert all(p == float("inf") for p in rep.psnr_per_band)
        assert rep.ssim_per_band == pytest.approx([1.0, 1.0, 1.0], abs=1e-14)
        assert rep.mssim == pytest.approx(1.0, abs=1e-14)

    def test_single_band_mean(self):
        rng = np.random.default_rng(9)
        a_true = rng.random((10, 10, 1))
        a = np.clip(a_true + 0.1 * rng.standard_normal(a_true.shape), 0, 1)
        rep = quality_report(a, a_true)
        assert rep.mpsnr == rep.psnr_per_band[0]
        assert rep.mssim == rep.ssim_per_band[0]

    def test_means_match_lists(self):
        rng = np.random.default_rng(10)
        a_true = rng.random((16, 16, 4))
        a = np.clip(a_true + 0.05 * rng.standard_normal(a_true.shape), 0, 1)
        rep = quality_report(a, a_true)
        assert rep.mpsnr == pytest.approx(np.mean(rep.psnr_per_band), abs=1e-14)
        assert rep.mssim == pytest.approx(np.mean(rep.ssim_per_band), abs=1e-14)

    def test_band_psnr_uses_band_peak_and_count(self):
        # two bands with different scales must score on their own peaks
        a_true = np.zeros((4, 4, 2))
        a_true[:, :, 0] = 1.0
        a_true[:, :, 1] = 2.0
        a = a_true.copy()
        a[:, :, 0] -= 0.1
        a[:, :, 1] -= 0.1
        rep = quality_report(a, a_true)
        e0 = 10 * math.log10(16 * 1.0 / (16 * 0.01))
        e1 = 10 * math.log10(16 * 4.0 / (16 * 0.01))
        assert rep.psnr_per_band[0] == pytest.approx(e0, rel=1e-12)
        assert rep.psnr_per_band[1] == pytest.approx(e1, rel=1e-12)

    def test_report_validation(self):
        with pytest.raises(ValueError):
            QualityReport(psnr_per_band=[1.0], ssim_per_band=[1.0, 0.5])
        with pytest.raises(ValueError):
            QualityReport(psnr_per_band=[], ssim_per_band=[])

    def test_definitional_oracle_sweep(self):
        # many random pairs against straight-line formulas
        rng = np.random.default_rng(11)
        for _ in range(100):
            a_true = rng.random((16, 16, 2))
            a = np.clip(a_true + 0.1 * rng.standard_normal(a_true.shape), 0, 1)
            got = psnr(a, a_true)
            err = np.sum((a - a_true) ** 2)
            expect = 10 * math.log10(a.size * np.max(np.abs(a_true)) ** 2 / err)
            assert got == pytest.approx(expect, abs=1e-12)
            for b in range(2):
                got_s = ssim_band(a[:, :, b], a_true[:, :, b])
                assert got_s == pytest.approx(
                    ssim_reference(a[:, :, b], a_true[:, :, b]), abs=1e-12
                )
