import cmath
import math
import os

import pytest

import dwgraph

CORPUS = os.path.join(os.path.dirname(__file__), "..", "..", "data", "corpus")


def corpus(name):
    return os.path.join(CORPUS, name)


def test_lambda_tilde_branch():
    z = dwgraph.lambda_tilde(3.0 + 40.0j, 1.0, 0.0)
    assert abs(z * z - ((3.0 + 40.0j) ** 2 + 2.0 * (3.0 + 40.0j))) < 1e-9
    assert abs(z - (4.0 + 40.0j)) < 0.1


def test_dirichlet_edge_spectrum():
    roots = dwgraph.spectrum(corpus("dirichlet_edge.json"), -2.0, 0.0, 0.5, 20.0)
    expected = [complex(-1.0, math.sqrt((k * math.pi) ** 2 - 1.0)) for k in range(1, 7)]
    got = sorted((z for z, _ in roots), key=lambda z: z.imag)
    assert len(got) == len(expected)
    for z, w in zip(got, expected):
        assert abs(z - w) < 1e-8


def test_example_two_loops_abscissas():
    rep = dwgraph.abscissas(corpus("two_loops.json"))
    res = [c["re"] for c in rep["clusters"]]
    assert res == pytest.approx([-2.0, -1.5, -1.0], abs=1e-9)
    assert [c["mu"] for c in rep["clusters"]] == ["3/12", "6/12", "3/12"]


def test_verify_passes():
    rep = dwgraph.verify(corpus("star3_dirichlet.json"), strips=1)
    assert rep["passed"]


def test_vertex_coefficient_cancels():
    assert dwgraph.vertex_coefficient(6, 3) == pytest.approx(0.0, abs=1e-15)
    assert dwgraph.vertex_coefficient(3, 1) == pytest.approx(-(2.0 / 3.0 - 1.0))


def test_cli_exit_codes():
    code, _, err = dwgraph.run_cli(["abscissas", "--graph", corpus("star_l141.json")])
    assert code == 4 and "spectrum" in err
    code, _, _ = dwgraph.run_cli(["spectrum", "--graph", corpus("does_not_exist.json")])
    assert code == 2


def test_bad_graph_raises():
    with pytest.raises(ValueError):
        dwgraph.spectrum({"vertices": ["A"], "edges": []}, -1, 1, -1, 1)


def test_determinant_vanishes_at_root():
    lam = complex(-1.0, math.sqrt(math.pi ** 2 - 1.0))
    mant, log_scale = dwgraph.secular_determinant(corpus("dirichlet_edge.json"), lam)
    assert abs(mant) * math.exp(log_scale) < 1e-8
    assert not cmath.isnan(mant)
