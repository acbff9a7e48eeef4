import math

import numpy as np
import pytest

from aracodes.dd import (
    DegreeDist,
    DegreeDistPair,
    Family,
    NegativityReport,
    NotMonotone,
    Perspective,
    Side,
    dist_from_json,
    dist_to_json,
    dumps,
    edge_from_node,
    is_in_A,
    is_in_P,
    node_from_edge,
    pair_from_json,
    pair_to_json,
    symmetry_swap,
    t_operator,
    t_operator_numeric,
    t_operator_series,
    tilt_edge,
    tilt_node,
    untilt_node,
)
from aracodes.series import PowerSeries

N = 128


def node(coeffs, side=Side.BIT, **kw):
    return DegreeDist(PowerSeries(coeffs, N), Perspective.NODE, side, **kw)


def edge(coeffs, side=Side.BIT, **kw):
    return DegreeDist(PowerSeries(coeffs, N), Perspective.EDGE, side, **kw)


def geometric_kernel(b, n=N, side=Side.BIT):
    """(1-b)x/(1-bx): coefficients (1-b) b^{k-1} at degree k."""
    c = np.zeros(n)
    c[1:] = (1 - b) * b ** np.arange(n - 1)
    analytic = lambda x: (1 - b) * x / (1 - b * x)
    return DegreeDist(PowerSeries(c), Perspective.EDGE, side, analytic=analytic,
                      exact_integral=-(1 - b) * (b + math.log1p(-b)) / b**2)


def random_node_dd(rng, n=N, decay=0.5):
    c = np.abs(rng.normal(size=n)) * decay ** np.arange(n)
    c[0] = 0.0
    c /= c.sum()
    return c


class TestPerspectiveConversion:
    def test_cube_to_square(self):
        lam = edge_from_node(node([0, 0, 0, 1]))
        assert np.allclose(lam.coeffs[:4], [0, 0, 1, 0])
        assert lam.perspective is Perspective.EDGE

    def test_degree_one_nodes(self):
        lam = edge_from_node(node([0, 1]))
        assert np.allclose(lam.coeffs[:2], [1, 0])

    def test_square_to_cube(self):
        L = node_from_edge(edge([0, 0, 1]))
        assert np.allclose(L.coeffs[:4], [0, 0, 0, 1])

    def test_edge_degree_one(self):
        L = node_from_edge(edge([0, 1]))
        assert np.allclose(L.coeffs[:3], [0, 0, 1])

    def test_roundtrip_random(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            lam = edge(np.diff(np.concatenate(([0.0], np.sort(rng.uniform(size=15)), [1.0]))), )
            back = edge_from_node(node_from_edge(lam))
            assert np.allclose(back.coeffs, lam.coeffs, atol=1e-12)


class TestTiltNode:
    def test_geometric_expansion_check_side(self):
        # R=x, p=0.5: tilted coefficients are 0.5^k at degree k
        out = tilt_node(node([0, 1], side=Side.CHECK), 0.5)
        expect = np.concatenate(([0.0], 0.5 ** np.arange(1, N)))
        assert np.allclose(out.coeffs, expect, atol=1e-15)

    def test_small_p_limit_is_identity(self):
        f = node(random_node_dd(np.random.default_rng(0)), side=Side.CHECK)
        out = tilt_node(f, 1e-9)
        assert np.allclose(out.coeffs, f.coeffs, atol=1e-7)

    def test_value_one_at_one(self):
        f = node(random_node_dd(np.random.default_rng(1)), side=Side.BIT)
        out = tilt_node(f, 0.37)
        assert out.coeffs.sum() == pytest.approx(1.0, abs=1e-9)

    def test_untilt_roundtrip(self):
        rng = np.random.default_rng(4)
        for p in (0.1, 0.3, 0.5, 0.7, 0.9):
            for side in (Side.BIT, Side.CHECK):
                f = node(random_node_dd(rng), side=side)
                back, report = untilt_node(tilt_node(f, p), p)
                assert report.nonnegative
                assert np.allclose(back.coeffs, f.coeffs, atol=1e-10)


class TestUntiltBoundary:
    """The log-form node distribution g(x)/g(1) untilts to a valid d.d. only
    inside an empirical p-window; the first offending coefficient flags it."""

    @staticmethod
    def log_form_node(b, n=512):
        # geometric tail: needs the full default precision for tight sums
        k = np.arange(2, n)
        c = np.zeros(n)
        c[2:] = -(b**k / k) / (b + math.log1p(-b))
        return DegreeDist(PowerSeries(c), Perspective.NODE, Side.BIT)

    def test_valid_point_all_nonnegative(self):
        f = self.log_form_node(0.94)
        out, report = untilt_node(f, 0.5, Side.BIT)
        assert report.nonnegative
        assert out.coeffs.sum() == pytest.approx(1.0, abs=1e-9)

    def test_boundary_flip_at_index_six(self):
        b = 0.9304
        c9 = (13 - math.sqrt(61)) / 9
        p_lo = 1 / (1 - c9 * (b + math.log1p(-b)))
        f = self.log_form_node(b)
        _, below = untilt_node(f, p_lo - 1e-3, Side.BIT)
        _, above = untilt_node(f, p_lo + 1e-3, Side.BIT)
        assert below.first_negative_index == 6
        assert above.nonnegative

    def test_deep_violation_flags_earlier_index(self):
        # far outside the window the expansion breaks down before index 6
        f = self.log_form_node(0.9304)
        _, report = untilt_node(f, 0.05, Side.BIT)
        assert report.first_negative_index == 4
        assert report.min_coefficient < -1.0


def build_ara_pair(p=0.3, b=0.9, n=N):
    lam = geometric_kernel(b, n=n)
    # use the kernel on both sides purely as a structural stand-in
    rho = geometric_kernel(b, n=n, side=Side.CHECK)
    return DegreeDistPair(lam, rho, Family.ARA, p)


class TestTiltEdge:
    def test_bit_regular_closed_form(self):
        # lambda = x^2 at p=0.3: tilted bit side is 0.09 x^2 / (1 - 0.7 x^3)^2
        lam = edge([0, 0, 1], side=Side.BIT)
        rho = geometric_kernel(0.5, side=Side.CHECK)
        pair = DegreeDistPair(lam, rho, Family.ARA, 0.3)
        tilted = tilt_edge(pair)
        x = np.linspace(0, 0.95, 20)
        expect = 0.09 * x**2 / (1 - 0.7 * x**3) ** 2
        assert np.allclose(tilted.bit.series(x), expect, atol=1e-9)
        assert tilted.family is Family.LDPC

    def test_nsira_keeps_bit_side(self):
        pair = DegreeDistPair(geometric_kernel(0.6), geometric_kernel(0.6, side=Side.CHECK),
                              Family.NSIRA, 0.4)
        tilted = tilt_edge(pair)
        assert np.array_equal(tilted.bit.coeffs, pair.bit.coeffs)
        assert not np.allclose(tilted.check.coeffs, pair.check.coeffs)

    def test_normalized_at_one(self):
        pair = build_ara_pair(0.35, 0.8, n=512)
        tilted = tilt_edge(pair)
        assert tilted.bit.coeffs.sum() == pytest.approx(1.0, abs=1e-8)
        assert tilted.check.coeffs.sum() == pytest.approx(1.0, abs=1e-8)

    def test_matches_node_tilt_route(self):
        # edge-level tilt == edge_from_node . tilt_node . node_from_edge
        pair = build_ara_pair(0.3, 0.7)
        tilted = tilt_edge(pair)
        via_node_bit = edge_from_node(tilt_node(node_from_edge(pair.bit), pair.p))
        via_node_check = edge_from_node(tilt_node(node_from_edge(pair.check), pair.p))
        assert np.allclose(tilted.bit.coeffs, via_node_bit.coeffs, atol=1e-9)
        assert np.allclose(tilted.check.coeffs, via_node_check.coeffs, atol=1e-9)


class TestTOperator:
    def test_identity_is_self_matched(self):
        out = t_operator_series(edge([0, 1]))
        assert np.allclose(out.coeffs[:3], [0, 1, 0], atol=1e-12)

    def test_square_gives_binomial_sqrt(self):
        out = t_operator_series(edge([0, 0, 1]))
        # 1 - sqrt(1-x): coefficients C(2k-2,k-1)/(k 4^{k-1}) / 2-ish, check pointwise
        x = np.linspace(0, 0.9, 10)
        assert np.allclose(out.series(x), 1 - np.sqrt(1 - x), atol=1e-9)
        assert NegativityReport.scan(out.coeffs).nonnegative

    def test_geometric_kernel_self_matched(self):
        f = geometric_kernel(0.5)
        tf = t_operator_series(f)
        assert np.allclose(tf.coeffs, f.coeffs, atol=1e-10)
        tfn = t_operator_numeric(f)
        for x in (0.2, 0.5, 0.8):
            assert tfn(x) == pytest.approx(f.analytic(x), abs=1e-10)

    def test_involution(self):
        f = DegreeDist(PowerSeries([0, 0.4, 0.6], 512), Perspective.EDGE, Side.BIT)
        back = t_operator_series(t_operator_series(f))
        assert np.allclose(back.coeffs, f.coeffs, atol=1e-9)

    def test_numeric_series_agree(self):
        f = geometric_kernel(0.4)
        tf_series = t_operator_series(f)
        tf_num = t_operator_numeric(f)
        for x in np.arange(0.1, 0.95, 0.1):
            assert float(tf_series.series(float(x))) == pytest.approx(tf_num(float(x)), abs=1e-7)

    def test_not_monotone_rejected(self):
        bad = edge([0, 2, -1.2])  # rises then falls on [0,1]
        with pytest.raises(NotMonotone):
            t_operator(bad, mode="numeric")


class TestMembership:
    def test_square_passes(self):
        assert is_in_P(edge([0, 0, 1])).ok

    def test_negative_coefficient_fails(self):
        rep = is_in_P(edge([0, 2, -1]))
        assert not rep.ok
        assert rep.negativity.first_negative_index == 2

    def test_kernel_in_A(self):
        rep = is_in_A(geometric_kernel(0.5))
        assert rep.ok

    def test_identity_in_A(self):
        assert is_in_A(edge([0, 1])).ok

    def test_square_in_A(self):
        assert is_in_A(edge([0, 0, 1])).ok


class TestSymmetrySwap:
    def test_involution(self):
        pair = build_ara_pair(0.3, 0.8)
        back = symmetry_swap(symmetry_swap(pair))
        assert np.array_equal(back.bit.coeffs, pair.bit.coeffs)
        assert back.p == pytest.approx(pair.p)
        assert back.family is pair.family

    def test_family_mapping(self):
        nsira = DegreeDistPair(geometric_kernel(0.6), geometric_kernel(0.6, side=Side.CHECK),
                               Family.NSIRA, 0.25)
        swapped = symmetry_swap(nsira)
        assert swapped.family is Family.ALDPC
        assert swapped.p == pytest.approx(0.75)
        assert swapped.bit.side is Side.BIT

    def test_sides_stay_consistent(self):
        pair = build_ara_pair()
        swapped = symmetry_swap(pair)
        assert swapped.bit.side is Side.BIT and swapped.check.side is Side.CHECK


class TestJson:
    def test_roundtrip_byte_identical(self):
        rng = np.random.default_rng(9)
        f = edge(random_node_dd(rng))
        doc = dist_to_json(f, Family.ARA, 0.3)
        text = dumps(doc)
        text2 = dumps(dist_to_json(dist_from_json(json_loads(text)), Family.ARA, 0.3))
        assert text == text2

    def test_pair_roundtrip(self):
        pair = build_ara_pair(0.3, 0.8)
        doc = pair_to_json(pair, meta={"b": 0.8})
        back = pair_from_json(json_loads(dumps(doc)))
        assert np.allclose(back.bit.coeffs, pair.bit.coeffs)
        assert back.family is Family.ARA

    def test_clamping_flagged(self):
        c = np.zeros(8)
        c[1] = 1.0
        c[3] = -5e-12  # inside the clamp window
        f = edge(c)
        assert f.clamped
        assert f.coeffs[3] == 0.0


def json_loads(text):
    import json

    return json.loads(text)
