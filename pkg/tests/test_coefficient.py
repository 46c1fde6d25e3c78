import math

import numpy as np
import pytest

from randbasis.coefficient import (
    CoefficientField,
    element_value,
    element_values,
    read_tabulated,
    write_tabulated,
)
from randbasis.errors import ConfigurationError, DomainError, EllipticityError


def _independent_medium(x, y):
    # written out term by term, separately from the library version
    s = math.sin
    c = math.cos
    p = math.pi
    t1 = (1.1 + s(7 * p * x)) / (1.1 + s(7 * p * y))
    t2 = (1.1 + s(9 * p * y)) / (1.1 + c(9 * p * x))
    t3 = (1.1 + c(13 * p * y)) / (1.1 + c(13 * p * x))
    t4 = (1.1 + c(9 * p * x)) / (1.1 + s(9 * p * y))
    t5 = (1.1 + s(7 * p * y)) / (1.1 + s(7 * p * x))
    return (t1 + t2 + t3 + t4 + t5) / 5


def test_paper_medium_at_origin():
    expected = (1 + 1.1 / 2.1 + 1 + 2.1 / 1.1 + 1) / 5
    assert CoefficientField.paper().eval((0.0, 0.0)) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(1.0865801, abs=1e-7)


def test_paper_medium_matches_independent_evaluation(rng):
    pts = rng.uniform(-1.4, 1.4, size=(1000, 2))
    got = CoefficientField.paper().values(pts[:, 0], pts[:, 1])
    want = np.array([_independent_medium(x, y) for x, y in pts])
    assert np.allclose(got, want, rtol=1e-13, atol=0)


def test_constant_medium():
    f = CoefficientField.constant(1.0)
    assert f.eval((0.3, -1.2)) == 1.0


def test_constant_element_value(small):
    f = CoefficientField.constant(3.0, 0.8)
    assert np.all(element_values(f, small.mesh) == 3.0)
    assert element_value(f, small.mesh, 7) == 3.0


def test_element_value_is_centroid_value(paper):
    m = paper.mesh
    f = paper.field
    centroids = m.nodes[m.triangles].mean(axis=1)
    t = int(np.argmin(np.linalg.norm(centroids, axis=1)))
    assert element_value(f, m, t) == f.eval(centroids[t])


def test_outside_domain_raises():
    with pytest.raises(DomainError):
        CoefficientField.paper().eval((1.5, 0.0))


def test_nonpositive_medium_is_rejected():
    with pytest.raises(EllipticityError):
        CoefficientField.constant(0.0)
    with pytest.raises(EllipticityError):
        CoefficientField.tabulated([[1.0, -1.0]])


def test_bounds_enclose_every_element_value(paper):
    f = paper.field.with_bounds(paper.mesh)
    a = element_values(f, paper.mesh)
    assert f.alpha_star == a.min() > 0
    assert f.beta_star == a.max()


def test_tabulated_roundtrip_and_lookup(tmp_path):
    table = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])  # two rows of three cells
    path = tmp_path / "medium.txt"
    write_tabulated(path, table)
    f = read_tabulated(path, half_width=1.5)
    assert np.array_equal(f.table, table)
    # cell width 1 in x, 1.5 in y; row 0 is the bottom
    assert f.eval((-1.2, -1.0)) == 1.0
    assert f.eval((1.2, -1.0)) == 3.0
    assert f.eval((0.0, 1.0)) == 5.0


def test_tabulated_file_with_wrong_count(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 2\n1 2 3\n")
    with pytest.raises(ConfigurationError, match="expected 2\\*2"):
        read_tabulated(path)


def test_eval_is_pure():
    f = CoefficientField.paper()
    assert f.eval((0.1, 0.2)) == f.eval((0.1, 0.2))
