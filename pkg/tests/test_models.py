import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from mnlab import linalg as la
from mnlab import models
from mnlab import structures as st
from mnlab.errors import InvalidDifferencing, InvalidProfile, QuadratureFailure
from mnlab.hypotheses import build_family
from mnlab.profiles import CallableProfile, ConstantProfile, PiecewiseConstantProfile

ONE = ConstantProfile(1.0)


def raw_entry_oracle(model, n, tau, profile, i, j, q=None):
    """Direct quadrature of the defining integral, 1-based indices."""
    ti, tj, s = i / n, j / n, min(i, j) / n
    noise = tau * tau if i == j else 0.0
    if model == "m1":
        val, _ = quad(lambda u: float(profile.eval(u)), 0.0, s,
                      points=[p for p in profile.breakpoints if 0 < p < s] or None,
                      limit=200)
        return val + noise
    if model == "m2":
        return (math.sqrt(float(profile.eval(ti)) * float(profile.eval(tj))) * s
                + noise)
    power = {"m3": 1.0}.get(model, q)
    val, _ = quad(
        lambda u: (ti - u) ** power * (tj - u) ** power * float(profile.eval(u)),
        0.0, s,
        points=[p for p in profile.breakpoints if 0 < p < s] or None,
        limit=200,
    )
    return val + noise


def random_piecewise(rng, pieces=4):
    breaks = np.sort(rng.uniform(0.1, 0.9, size=pieces - 1))
    values = rng.uniform(0.5, 2.0, size=pieces)
    return PiecewiseConstantProfile(breaks, values)


class TestCovRaw:
    def test_m1_constant_closed_form(self):
        n, tau = 8, 0.3
        cov = models.cov_raw(models.ModelSpec("m1", n, tau), ONE)
        i = np.arange(1, n + 1)
        expected = np.minimum.outer(i, i) / n + tau * tau * np.eye(n)
        assert np.max(np.abs(cov - expected)) <= 1e-15

    def test_m2_matches_sandwich_form(self):
        n, tau = 12, 0.2
        rng = np.random.default_rng(0)
        profile = random_piecewise(rng)
        cov = models.cov_raw(models.ModelSpec("m2", n, tau), profile)
        s = np.sqrt(profile.eval(np.arange(1, n + 1) / n))
        i = np.arange(1, n + 1)
        expected = np.outer(s, s) * (np.minimum.outer(i, i) / n) \
            + tau * tau * np.eye(n)
        assert np.max(np.abs(cov - expected)) <= 1e-14

    def test_m3_single_interval(self):
        cov = models.cov_raw(models.ModelSpec("m3", 1, 0.0), ONE)
        assert cov[0, 0] == pytest.approx(1.0 / 3.0, abs=1e-15)

    @pytest.mark.parametrize("model", ["m1", "m3"])
    def test_entries_match_quadrature_oracle(self, model):
        n, tau = 10, 0.15
        rng = np.random.default_rng(1)
        for profile in (random_piecewise(rng),
                        build_family(64, 1.0, 1.0, 7.5, "m1m2", seed=1).profile(1)):
            cov = models.cov_raw(models.ModelSpec(model, n, tau), profile)
            for i, j in ((1, 1), (2, 5), (7, 7), (10, 3)):
                oracle = raw_entry_oracle(model, n, tau, profile, i, j)
                assert cov[i - 1, j - 1] == pytest.approx(oracle, abs=1e-11)

    def test_fractional_q_against_oracle(self):
        n, tau, q = 6, 0.1, 0.5
        cov = models.cov_raw(models.ModelSpec("mq", n, tau, q=q), ONE)
        for i, j in ((1, 1), (2, 4), (6, 6), (5, 3)):
            oracle = raw_entry_oracle("mq", n, tau, ONE, i, j, q=q)
            assert cov[i - 1, j - 1] == pytest.approx(oracle, abs=1e-11)

    def test_kernel_specialisation(self):
        n, tau = 8, 0.2
        profile = build_family(64, 1.0, 1.0, 7.5, "m1m2", seed=2).profile(1)
        for q, ref_model in ((0.0, "m1"), (1.0, "m3")):
            a = models.cov_raw(models.ModelSpec("mq", n, tau, q=q), profile)
            b = models.cov_raw(models.ModelSpec(ref_model, n, tau), profile)
            scale = np.max(np.abs(b))
            assert np.max(np.abs(a - b)) <= 1e-12 * scale

    def test_invalid_profile_probed(self):
        bad = CallableProfile(lambda t: np.cos(12.0 * np.asarray(t)),
                              lower=0.1, upper=1.0)
        with pytest.raises(InvalidProfile):
            models.cov_raw(models.ModelSpec("m1", 16, 0.1), bad)

    def test_quadrature_failure_surfaces(self):
        wild = CallableProfile(
            lambda t: 1.01 + np.sin(3.7e6 * np.asarray(t)),
            lower=0.01, upper=2.01,
        )
        with pytest.raises(QuadratureFailure):
            models.cov_raw(models.ModelSpec("m1", 4, 0.1), wild)


class TestDiffMatrix:
    def test_first_n2(self):
        d = models.diff_matrix(models.ModelSpec("m1", 2, 0.1, differencing="first"))
        assert np.array_equal(d, [[1.0, 0.0], [-1.0, 1.0]])

    def test_second_n3(self):
        d = models.diff_matrix(models.ModelSpec("m3", 3, 0.1, differencing="second"))
        expected = [[math.sqrt(2.0), 0.0, 0.0], [-2.0, 1.0, 0.0], [1.0, -2.0, 1.0]]
        assert np.allclose(d, expected, atol=0)

    @pytest.mark.parametrize("n", [2, 5, 17])
    def test_first_determinant_one(self, n):
        d = models.diff_matrix(models.ModelSpec("m1", n, 0.1, differencing="first"))
        assert np.linalg.det(d) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("differencing", ["first", "second"])
    def test_invertible_roundtrip(self, differencing):
        model = "m3" if differencing == "second" else "m1"
        spec = models.ModelSpec(model, 20, 0.1, differencing=differencing)
        d = models.diff_matrix(spec)
        rng = np.random.default_rng(3)
        x = rng.standard_normal(20)
        assert np.max(np.abs(np.linalg.solve(d, d @ x) - x)) <= 1e-12

    def test_requires_differencing(self):
        with pytest.raises(InvalidDifferencing):
            models.diff_matrix(models.ModelSpec("m1", 4, 0.1))

    def test_second_only_for_m3(self):
        with pytest.raises(InvalidDifferencing):
            models.ModelSpec("m1", 4, 0.1, differencing="second")


class TestCovDifferenced:
    def test_m1_n2_closed_form(self):
        spec = models.ModelSpec("m1", 2, 1.0, differencing="first")
        cov = models.cov_differenced(spec, ONE)
        assert np.allclose(cov, [[1.5, -1.0], [-1.0, 2.5]], atol=1e-15)

    def test_m1_constant_structured_form(self):
        n, tau = 96, 0.2
        spec = models.ModelSpec("m1", n, tau, differencing="first")
        cov = models.cov_differenced(spec, ONE)
        expected = np.eye(n) / n + tau * tau * st.matrix_a(n)
        assert np.max(np.abs(cov - expected)) <= 1e-12

    def test_m3_closed_entries(self):
        n = 32
        spec = models.ModelSpec("m3", n, 0.0, differencing="second")
        cov = models.cov_differenced(spec, ONE)
        n3 = float(n) ** 3
        assert np.max(np.abs(np.diag(cov) - 2.0 / (3.0 * n3))) <= 1e-12 / n3
        assert cov[0, 1] == pytest.approx(math.sqrt(2.0) / (6.0 * n3), rel=1e-13)
        off = np.diag(cov, k=1)[1:]
        assert np.max(np.abs(off - 1.0 / (6.0 * n3))) <= 1e-12 / n3
        assert np.max(np.abs(np.diag(cov, k=2))) == 0.0

    @pytest.mark.parametrize("model,differencing", [
        ("m1", "first"), ("m2", "first"), ("m3", "second"),
    ])
    def test_congruence_with_raw(self, model, differencing):
        n, tau = 24, 0.25
        rng = np.random.default_rng(4)
        for profile in (ONE, random_piecewise(rng),
                        build_family(64, 1.0, 1.0, 7.5, "m1m2", seed=4).profile(2)):
            spec = models.ModelSpec(model, n, tau, differencing=differencing)
            raw_spec = models.ModelSpec(model, n, tau)
            d = models.diff_matrix(spec)
            conj = d @ models.cov_raw(raw_spec, profile) @ d.T
            direct = models.cov_differenced(spec, profile)
            scale = np.max(np.abs(models.cov_raw(raw_spec, profile)))
            assert np.max(np.abs(conj - direct)) <= 1e-12 * scale

    def test_m3_differenced_overlap_oracle(self):
        # independent oracle: quadrature of the explicit two-piece kernels
        n, tau = 12, 0.0
        rng = np.random.default_rng(5)
        profile = random_piecewise(rng)
        spec = models.ModelSpec("m3", n, tau, differencing="second")
        cov = models.cov_differenced(spec, profile)

        def kernel(i):
            def k(u):
                if (i - 1) / n <= u <= i / n:
                    return i / n - u
                if i >= 2 and (i - 2) / n <= u < (i - 1) / n:
                    return u - (i - 2) / n
                return 0.0
            return k

        for i, j in ((1, 1), (1, 2), (3, 3), (5, 6), (12, 12)):
            ki, kj = kernel(i), kernel(j)
            scale = 2.0 if (i == 1 and j == 1) else (math.sqrt(2.0)
                    if 1 in (i, j) else 1.0)
            lo, hi = max(i, j) / n - 2.0 / n, min(i, j) / n
            val = 0.0
            if hi > lo:
                val, _ = quad(
                    lambda u: ki(u) * kj(u) * float(profile.eval(u)),
                    max(lo, 0.0), hi,
                    points=[p for p in profile.breakpoints if lo < p < hi] or None,
                    limit=200,
                )
            assert cov[i - 1, j - 1] == pytest.approx(scale * val, abs=1e-14)

    @pytest.mark.parametrize("model,n,differencing", [
        ("m1", 256, "first"), ("m1", 512, "first"),
        ("m2", 256, "first"), ("m2", 512, "first"),
        ("m3", 64, "second"), ("m3", 128, "second"),
    ])
    def test_psd_random_profiles(self, model, n, differencing):
        rng = np.random.default_rng(n)
        spec = models.ModelSpec(model, n, 0.1, differencing=differencing)
        assert la.is_psd(models.cov_differenced(spec, random_piecewise(rng)))

    def test_psd_fractional_kernel(self):
        for q in (0.5, 1.5):
            spec = models.ModelSpec("mq", 24, 0.1, q=q)
            assert la.is_psd(models.cov_raw(spec, ONE))


class TestModel3Ordering:
    def setup_method(self):
        self.n = 128
        self.c = 14.001 / self.n ** (1.0 / 12.0)
        self.family = build_family(self.n, 1.0, 1.0, self.c, "m3", seed=6)
        spec = models.ModelSpec("m3", self.n, 0.1, differencing="second")
        self.null = models.cov_differenced(spec, ONE)
        self.spec = spec

    def test_alternative_dominates_null(self):
        for k in range(1, min(4, self.family.count_alternatives + 1)):
            cov_k = models.cov_differenced(self.spec, self.family.profile(k))
            assert la.is_psd(cov_k - self.null)

    def test_diagonal_domination(self):
        bound = 4.0 * self.family.amplitude * self.family.kernel.sup_value \
            / (3.0 * float(self.n) ** 3)
        gamma = la.sym(bound * np.eye(self.n))
        for k in range(1, min(4, self.family.count_alternatives + 1)):
            cov_k = models.cov_differenced(self.spec, self.family.profile(k))
            assert la.loewner_leq(cov_k - self.null, gamma)


class TestModel2Decomposition:
    def test_constant_sigma_collapses(self):
        n = 8
        dec = models.model2_decomposition(ConstantProfile(2.25), n, 0.1)
        assert np.max(np.abs(dec.cov_r1)) == 0.0
        assert np.max(np.abs(dec.cov_x1p_r1)) == 0.0
        assert np.allclose(dec.gamma, (1.5 - 1.0) * np.eye(n))

    def test_two_point_example(self):
        # sigma(1/2) = 1, sigma(1) = 1.1: only entry (2,2) of cov_r1 survives
        profile = PiecewiseConstantProfile([0.6], [1.0, 1.21])
        dec = models.model2_decomposition(profile, 2, 0.1)
        expected = np.zeros((2, 2))
        expected[1, 1] = (0.1**2) * 0.5
        assert np.max(np.abs(dec.cov_r1 - expected)) <= 1e-14

    def test_reconstruction_identity(self):
        n, tau = 32, 0.2
        profile = build_family(n, 1.0, 1.0, 8.5, "m1m2", seed=7).profile(1)
        spec = models.ModelSpec("m2", n, tau, differencing="first")
        cov = models.cov_differenced(spec, profile)
        null = models.cov_differenced(spec, ONE)
        dec = models.model2_decomposition(profile, n, tau)
        rebuilt = (null + 2.0 / n * dec.gamma + dec.gamma @ dec.gamma / n
                   + dec.cov_x1p_r1 + dec.cov_x1p_r1.T + dec.cov_r1)
        assert np.max(np.abs(rebuilt - cov)) <= 1e-10


class TestNoiseResidual:
    def test_matches_explicit_gram(self):
        n = 9
        spec = models.ModelSpec("m3", n, 0.1, differencing="second")
        d = models.diff_matrix(spec)
        oracle = d @ d.T - st.matrix_a(n) @ st.matrix_a(n)
        assert np.max(np.abs(models.extract_v2(n, 0.1) - oracle)) <= 1e-15

    def test_corner_values(self):
        v2 = models.extract_v2(16, 0.1)
        assert v2[0, 0] == 0.0
        assert v2[0, 1] == pytest.approx(3.0 - 2.0 * math.sqrt(2.0), abs=1e-12)
        assert v2[1, 1] == -1.0
        assert v2[0, 2] == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-12)

    def test_support_structure(self):
        # nonzero only in the leading 3x3 block plus a +1 at the bottom
        # corner: the second-difference Gram has a full interior row at the
        # end while the squared tridiagonal loses one term there
        n = 12
        v2 = models.extract_v2(n, 0.1)
        assert v2[n - 1, n - 1] == 1.0
        mask = np.zeros((n, n), dtype=bool)
        mask[:3, :3] = True
        mask[n - 1, n - 1] = True
        assert np.max(np.abs(v2[~mask])) == 0.0

    def test_preconditions(self):
        with pytest.raises(ValueError):
            models.extract_v2(3, 0.1)
        with pytest.raises(ValueError):
            models.extract_v2(8, 0.0)


class TestReferenceDecomposition:
    def test_matches_exact_off_corner(self):
        n, tau = 48, 0.15
        spec = models.ModelSpec("m3", n, tau, differencing="second")
        exact = models.cov_differenced(spec, ONE)
        reference = models.model3_reference_decomposition(n, tau)
        n3 = float(n) ** 3
        assert np.max(np.abs((exact - reference)[1:, 1:])) <= 1e-13 / n3
        # the known corner discrepancy: structured formula overshoots by
        # exactly 1/(6 n^3) in the signal part
        assert reference[0, 0] - exact[0, 0] == pytest.approx(
            1.0 / (6.0 * n3), rel=1e-10
        )


class TestExport:
    def test_bundle_roundtrip(self, tmp_path):
        spec = models.ModelSpec("m1", 6, 0.2, differencing="first")
        cov = models.cov_differenced(spec, ONE)
        json_path = tmp_path / "cov.json"
        csv_path = tmp_path / "cov.csv"
        models.write_covariance_bundle(spec, ONE, cov, json_path, csv_path)
        header = json.loads(json_path.read_text())
        assert header["model"] == "m1"
        assert header["n"] == 6
        assert header["profile"] == {"kind": "constant", "value": 1.0}
        back = np.loadtxt(csv_path, delimiter=",")
        assert np.array_equal(back, cov)
