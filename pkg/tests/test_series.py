"""Tests for the coefficient recurrences against the enumeration oracle."""

import math

import numpy as np
import pytest

from rnaphase.energy import DEFAULT_P, DEFAULT_V, SUBCRITICAL_PARAMS, SUPERCRITICAL_PARAMS
from rnaphase.series import (
    BruteForceTotals,
    brute_force_enumerate,
    compute_series,
    enumerate_structures,
    export_block_histogram_csv,
    export_series_csv,
    ratio_trace,
    scaled_decimal,
)

PARAMS = {"subcritical": SUBCRITICAL_PARAMS, "supercritical": SUPERCRITICAL_PARAMS}


def rel_err(got: float, expect: float) -> float:
    if expect == 0.0:
        return abs(got)
    return abs(got - expect) / abs(expect)


class TestOracle:
    def test_structure_counts(self):
        # 2^k pattern holds up to n = 9 for minimum chord length 4
        counts = [sum(1 for _ in enumerate_structures(n)) for n in range(10)]
        assert counts == [1, 1, 1, 1, 1, 2, 4, 8, 16, 32]

    def test_refuses_large_n(self):
        with pytest.raises(ValueError, match="refusing"):
            list(enumerate_structures(17))

    def test_n4_trivial(self):
        bf = brute_force_enumerate(4, SUBCRITICAL_PARAMS)
        assert bf.S_exact.to_float() == 1.0
        assert bf.C_exact.is_zero()

    def test_n5(self):
        bf = brute_force_enumerate(5, SUBCRITICAL_PARAMS)
        assert bf.structure_count == 2
        expect_c = DEFAULT_P * DEFAULT_V ** (-5.03)
        assert bf.C_exact.to_float() == pytest.approx(expect_c, rel=1e-12)
        assert bf.S_exact.to_float() == pytest.approx(1 + expect_c, rel=1e-12)

    @pytest.mark.parametrize("name", sorted(PARAMS))
    def test_series_agrees_with_oracle(self, name):
        """Recurrences vs exhaustive enumeration, n <= 14, rel err < 1e-9."""
        params = PARAMS[name]
        series = compute_series(params, 14, kmax="auto")
        for n in range(15):
            bf: BruteForceTotals = brute_force_enumerate(n, params)
            assert rel_err(series.S.get(n).to_float(), bf.S_exact.to_float()) < 1e-9
            assert rel_err(series.C.get(n).to_float(), bf.C_exact.to_float()) < 1e-9
            for k, exact in enumerate(bf.Sk_exact):
                if k <= series.kmax:
                    got = series.Sk.get(n, k).to_float()
                    assert rel_err(got, exact.to_float()) < 1e-9


class TestCoefficients:
    def test_low_coefficients(self):
        s = compute_series(SUBCRITICAL_PARAMS, 12)
        for n in range(5):
            assert s.C.get(n).is_zero()
            assert s.S.get(n).to_float() == 1.0
        assert s.C.get(5).to_float() == pytest.approx(
            DEFAULT_P * DEFAULT_V ** (-5.03), rel=1e-12
        )
        assert s.C.get(6).to_float() == pytest.approx(
            DEFAULT_P * DEFAULT_V ** (2.53), rel=1e-12
        )

    def test_positivity(self):
        s = compute_series(SUPERCRITICAL_PARAMS, 200)
        assert all(s.C.get(n).to_float() > 0 for n in range(5, 201))
        assert all(s.S.get(n).to_float() > 0 or s.S.get(n).e > 0 for n in range(201))

    def test_aperiodicity_witness(self):
        s = compute_series(SUBCRITICAL_PARAMS, 20)
        support = [n for n in range(5, 21) if not s.C.get(n).is_zero()]
        offsets = [n - support[0] for n in support[1:]]
        assert math.gcd(*offsets) == 1

    def test_sk_marginalization(self):
        s = compute_series(SUBCRITICAL_PARAMS, 200, kmax="auto")
        for n in (0, 17, 100, 200):
            assert abs(s.block_pmf(n).sum() - 1.0) < 1e-12

    def test_sk_first_column_all_ones(self):
        s = compute_series(SUPERCRITICAL_PARAMS, 60, kmax=12)
        for n in range(61):
            assert s.Sk.get(n, 0).to_float() == 1.0

    def test_sk_two_blocks_at_ten(self):
        s = compute_series(SUBCRITICAL_PARAMS, 10, kmax=2)
        c5 = s.C.get(5).to_float()
        assert s.Sk.get(10, 2).to_float() == pytest.approx(c5 * c5, rel=1e-12)

    def test_sk_truncation_flagged(self):
        s = compute_series(SUBCRITICAL_PARAMS, 80, kmax=1)
        assert s.sk_truncation_defect(80) > 1e-12

    def test_extended_precision_agrees(self):
        """float64 vs longdouble recurrences at n = 1000, 1e-12 relative."""
        a = compute_series(SUBCRITICAL_PARAMS, 1000)
        b = compute_series(SUBCRITICAL_PARAMS, 1000, dtype=np.longdouble)
        la, lb = a.S.log2(), b.S.log2()
        worst = np.abs(np.expm1((la - lb) * math.log(2.0))).max()
        assert worst < 1e-12


class TestRatioTrace:
    def test_limit_matches_closed_form(self):
        """Richardson-extrapolated C/S ratio equals the analytic limit.

        In the discrete-law regime r(n) -> 1/S_reg(rho_r)^2 where S_reg is
        the full series evaluated at the branch point; convergence is O(1/n)
        with a large constant, so two-point extrapolation is used.
        """
        from rnaphase.singularity import classify

        s = compute_series(SUBCRITICAL_PARAMS, 4000)
        tr = ratio_trace(s)
        extrapolated = 2 * tr["r"][4000] - tr["r"][2000]
        rep = classify(SUBCRITICAL_PARAMS)
        chi = (1.0 - rep.rho_c - rep.C_at_rho_r) ** 2
        assert extrapolated == pytest.approx(chi, rel=5e-3)
        assert extrapolated > 0

    def test_supercritical_geometric_decay(self):
        from rnaphase.singularity import classify

        rep = classify(SUPERCRITICAL_PARAMS)
        s = compute_series(SUPERCRITICAL_PARAMS, 4001)
        tr = ratio_trace(s)
        rate = math.exp(
            (tr["log2_r"][4001] - tr["log2_r"][3001]) * math.log(2.0) / 1000
        )
        assert rate == pytest.approx(rep.rho_s / rep.rho_c, rel=5e-3)
        # r itself underflows doubles eventually; log2_r stays finite
        assert np.isfinite(tr["log2_r"][4001])


class TestExport:
    def test_scaled_decimal(self):
        from rnaphase.scaled import ScaledReal

        assert scaled_decimal(ScaledReal.from_float(0.0)) == "0"
        assert scaled_decimal(ScaledReal.from_float(1.5), digits=3) == "1.500e+0"
        huge = ScaledReal.from_log2(10000.0)
        text = scaled_decimal(huge, digits=6)
        mant, exp = text.split("e")
        assert 1.0 <= float(mant) < 10.0
        assert int(exp) == math.floor(10000 * math.log10(2))

    def test_series_csv(self, tmp_path):
        s = compute_series(SUBCRITICAL_PARAMS, 30)
        path = tmp_path / "series.csv"
        export_series_csv(s, path)
        lines = path.read_text().splitlines()
        header = [ln for ln in lines if ln.startswith("#")]
        assert any("v=1.843868184" in ln for ln in header)
        assert any("p=0.375" in ln for ln in header)
        body = [ln for ln in lines if not ln.startswith("#")]
        assert body[0] == "n,S,C,r,log10_S,log10_C"
        assert len(body) == 32  # header row + 31 data rows

    def test_histogram_csv(self, tmp_path):
        s = compute_series(SUBCRITICAL_PARAMS, 25, kmax="auto")
        path = tmp_path / "hist.csv"
        export_block_histogram_csv(s, 25, path)
        body = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
        assert body[0] == "n,k,Sk,P"
        probs = [float(ln.split(",")[3]) for ln in body[1:]]
        assert sum(probs) == pytest.approx(1.0, abs=1e-12)
