"""Contrast evaluation, hypothesis checking, and the boundary cutoff."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iteig import (
    CoercivityParams,
    Contrast,
    CutoffFunction,
    Domain1D,
    check_hypotheses,
    make_cutoff,
)
from iteig.errors import ConfigurationError, InputError


def test_domain_validation():
    with pytest.raises(InputError):
        Domain1D(1.0, 0.0, 0.1)
    with pytest.raises(InputError):
        Domain1D(0.0, 1.0, 0.6)  # neighborhoods would overlap
    with pytest.raises(InputError):
        Domain1D(0.0, 1.0, 0.0)
    d = Domain1D(-1.0, 3.0, 0.5)
    assert d.length == 4.0


class TestContrastKinds:
    def test_constant(self, domain):
        m = Contrast.constant(2.5, domain)
        x = np.linspace(0, 1, 7)
        np.testing.assert_allclose(m(x), 2.5 + 0j)

    def test_from_index(self, domain):
        m = Contrast.from_index(3.0, domain)
        assert m(0.5) == pytest.approx(8.0)

    def test_polynomial(self, domain):
        # 1 + 2x + 3x^2, ascending coefficients
        m = Contrast("polynomial", [1.0, 2.0, 3.0], domain)
        assert m(0.0) == pytest.approx(1.0)
        assert m(1.0) == pytest.approx(6.0)
        assert m(0.5) == pytest.approx(1 + 1 + 0.75)

    def test_piecewise_left_continuous(self, domain):
        m = Contrast("piecewise", [[0.5], [1.0, 2.0]], domain)
        assert m(0.4) == pytest.approx(1.0)
        assert m(0.5) == pytest.approx(1.0)  # left-continuous at the break
        assert m(0.6) == pytest.approx(2.0)

    def test_piecewise_complex_values(self, domain):
        m = Contrast("piecewise", [[0.5], [0.5 + 0.25j, 1.5]], domain)
        assert m(0.1) == pytest.approx(0.5 + 0.25j)

    def test_sampled_interpolates(self, domain):
        m = Contrast("sampled", [[0.0, 1.0], [1.0, 3.0]], domain)
        assert m(0.25) == pytest.approx(1.5)

    def test_vector_evaluation_shape(self, domain):
        m = Contrast("polynomial", [0.0, 1.0], domain)
        x = np.linspace(0, 1, 11)
        out = m(x)
        assert out.shape == x.shape
        np.testing.assert_allclose(out, x)

    def test_bad_kind(self, domain):
        with pytest.raises(ConfigurationError):
            Contrast("fourier", [1.0], domain)

    def test_unsorted_breaks(self, domain):
        with pytest.raises(ConfigurationError):
            Contrast("piecewise", [[0.7, 0.3], [1.0, 2.0, 3.0]], domain)

    def test_piecewise_length_mismatch(self, domain):
        with pytest.raises(ConfigurationError):
            Contrast("piecewise", [[0.5], [1.0]], domain)


def test_from_json_roundtrip(tmp_path, domain):
    spec = {
        "kind": "piecewise",
        "domain": [0.0, 1.0],
        "neighborhood_width": 0.2,
        "data": [[0.5], [[1.0, 0.5], 2.0]],
    }
    path = tmp_path / "contrast.json"
    path.write_text(json.dumps(spec), encoding="utf-8")
    m = Contrast.from_json(path)
    assert m(0.25) == pytest.approx(1.0 + 0.5j)
    assert m(0.75) == pytest.approx(2.0)


def test_from_json_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        Contrast.from_json(tmp_path / "nope.json")


def test_from_json_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        Contrast.from_json(path)


class TestHypotheses:
    def test_positive_constant_passes(self, domain):
        rep = check_hypotheses(
            Contrast.constant(1.0, domain), CoercivityParams(0.5, 100.0, 0.5)
        )
        assert rep.all_pass
        assert rep.branch == "complex-rotation"
        assert rep.witness_theta == pytest.approx(0.0)

    def test_real_negative_branch(self, domain):
        rep = check_hypotheses(
            Contrast.constant(-0.8, domain), CoercivityParams(0.5, 100.0, 0.1)
        )
        assert rep.passes_item1
        assert rep.branch == "real-negative"

    def test_complex_contrast_rotation(self, domain):
        # purely imaginary contrast needs a nonzero rotation angle
        rep = check_hypotheses(
            Contrast.constant(2.0j, domain), CoercivityParams(0.5, 100.0, 0.5)
        )
        assert rep.passes_item1
        assert rep.branch == "complex-rotation"
        assert abs(rep.witness_theta) > 0.1

    def test_small_contrast_fails_with_violations(self, domain):
        rep = check_hypotheses(
            Contrast.constant(0.1, domain), CoercivityParams(0.5, 100.0, 0.5)
        )
        assert not rep.passes_item1
        assert not rep.all_pass
        assert len(rep.violating_points) > 0
        w = domain.neighborhood_width
        for x in rep.violating_points:
            assert x <= domain.a + w or x >= domain.b - w

    def test_interior_sign_change_allowed(self, domain):
        # 8 near both endpoints, dips negative only at the center
        m = Contrast("polynomial", [8.0, 0.0, -132.8, 265.6, -132.8], domain)
        assert m(0.5).real < 0
        rep = check_hypotheses(m, CoercivityParams(0.5, 300.0, 0.5))
        assert rep.passes_item1
        assert rep.passes_item3

    def test_unbounded_fails_item2(self, domain):
        rep = check_hypotheses(
            Contrast.constant(8.0, domain), CoercivityParams(0.5, 5.0, 0.5)
        )
        assert rep.passes_item1
        assert not rep.passes_item2

    def test_weight_degeneracy_fails_item3(self, domain):
        rep = check_hypotheses(
            Contrast.constant(-0.99, domain), CoercivityParams(0.5, 100.0, 0.5)
        )
        assert not rep.passes_item3

    def test_to_dict_is_json_serializable(self, domain):
        rep = check_hypotheses(
            Contrast.constant(0.1, domain), CoercivityParams(0.5, 100.0, 0.5)
        )
        json.dumps(rep.to_dict())

    @given(
        m_val=st.floats(min_value=0.6, max_value=50.0),
        weaker=st.floats(min_value=0.05, max_value=1.0),
    )
    @settings(max_examples=25, deadline=None)
    def test_m_star_monotonicity(self, m_val, weaker):
        # passing at m_star implies passing at any smaller m_star
        domain = Domain1D(0.0, 1.0, 0.2)
        contrast = Contrast.constant(m_val, domain)
        strong = check_hypotheses(contrast, CoercivityParams(0.5, 100.0, 0.5))
        weak = check_hypotheses(
            contrast, CoercivityParams(0.5 * weaker, 100.0, 0.5)
        )
        if strong.passes_item1:
            assert weak.passes_item1


class TestCutoff:
    def test_endpoint_zero_interior_one(self, domain, cutoff):
        w = domain.neighborhood_width
        assert cutoff(domain.a) == 0.0
        assert cutoff(domain.b) == 0.0
        assert cutoff(domain.a + 0.4 * w) == 0.0
        assert cutoff(domain.a + w) == pytest.approx(1.0)
        assert cutoff(0.5) == pytest.approx(1.0)

    def test_range_and_monotone_rise(self, domain, cutoff):
        x = np.linspace(domain.a, domain.b, 801)
        vals = cutoff(x)
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
        rise = vals[(x > domain.a) & (x < domain.a + domain.neighborhood_width)]
        assert np.all(np.diff(rise) >= -1e-12)

    def test_symmetry(self, domain, cutoff):
        x = np.linspace(0.01, 0.3, 50)
        np.testing.assert_allclose(cutoff(x), cutoff(1.0 - x), atol=1e-14)

    def test_smooth_at_transition(self, domain):
        # C-infinity junction: numerical first derivative stays bounded and
        # tends to zero at both ends of the rise
        phi = make_cutoff(domain)
        h = 1e-6
        for x0 in (0.1 + 1e-4, 0.2 - 1e-4):
            d = (phi(x0 + h) - phi(x0 - h)) / (2 * h)
            assert np.isfinite(d)
        assert abs((phi(0.1 + 1e-8) - phi(0.1)) / 1e-8) < 1e-3

    def test_custom_width(self):
        d = Domain1D(0.0, 2.0, 0.3)
        phi = CutoffFunction(d)
        assert phi(0.14) == 0.0
        assert phi(0.31) == pytest.approx(1.0)
        assert phi(2.0 - 0.14) == 0.0
