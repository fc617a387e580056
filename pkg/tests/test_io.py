import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from armagf import (
    InputError,
    build_shift_operator,
    design_arma,
    design_fir,
    eigendecompose,
    path_graph,
    random_geometric_graph,
    run_arma1,
    step_response,
)
from armagf import io as aio
from armagf.engine import GraphTables


def test_graph_round_trip(tmp_path):
    g = random_geometric_graph(12, 0.5, seed=7)
    path = tmp_path / "g.txt"
    aio.write_graph(path, g)
    back = aio.read_graph(path)
    assert back == g


def test_graph_weights_and_default(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("1 2 0.5\n2 3\n")
    g = aio.read_graph(path)
    assert g.n == 3
    assert g.edges == ((0, 1, 0.5), (1, 2, 1.0))


def test_graph_pos_lines(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("1 2\n# pos 1 0.0 0.0\n# pos 2 3.0 4.0\n")
    g = aio.read_graph(path)
    assert g.positions == ((0.0, 0.0), (3.0, 4.0))


def test_graph_bad_lines(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("0 2\n")
    with pytest.raises(InputError):
        aio.read_graph(path)
    path.write_text("1 2 3 4\n")
    with pytest.raises(InputError):
        aio.read_graph(path)


def test_signal_round_trip(tmp_path):
    x = np.array([1.5, -2.25, 0.0625])
    path = tmp_path / "x.csv"
    aio.write_signal(path, x)
    assert np.array_equal(aio.read_signal(path), x)


def test_signal_header_required(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(InputError):
        aio.read_signal(path)


def test_tv_signal_provider(tmp_path):
    path = tmp_path / "tv.csv"
    path.write_text("t,node,value\n0,1,1.0\n0,2,0.0\n5,1,0.0\n5,2,2.0\n")
    provider = aio.tv_signal_provider(aio.read_time_varying_signal(path))
    assert np.array_equal(provider(0, None), [1.0, 0.0])
    assert np.array_equal(provider(4, None), [1.0, 0.0])
    assert np.array_equal(provider(5, None), [0.0, 2.0])
    assert np.array_equal(provider(100, None), [0.0, 2.0])


def test_parse_signal_builtins():
    f, _ = aio.parse_signal_source("constant:2.5", 3)
    assert np.array_equal(f(0, None), [2.5, 2.5, 2.5])
    f, _ = aio.parse_signal_source("switch:4:1.0:2.0", 2)
    assert np.array_equal(f(3, None), [1.0, 1.0])
    assert np.array_equal(f(4, None), [2.0, 2.0])
    f, _ = aio.parse_signal_source("sinusoid:0.5:2.0", 1)
    assert np.isclose(f(3, None)[0], 2.0 * np.cos(1.5))
    f, _ = aio.parse_signal_source("degree", 2)
    assert np.array_equal(f(0, path_graph(2)), [1.0, 1.0])
    with pytest.raises(InputError):
        aio.parse_signal_source("nonsense:1", 2)


def test_spectrum_csv(tmp_path):
    spec = eigendecompose(build_shift_operator(path_graph(2), "discrete", (0.0, 2.0)))
    path = tmp_path / "s.csv"
    aio.write_spectrum(path, spec)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,lambda,mu"
    assert lines[1] == "1,0.0,1.0"
    assert lines[2] == "2,2.0,-1.0"


def test_trace_csv(tmp_path):
    tab = GraphTables.build(path_graph(2), "discrete", (0.0, 2.0))
    tr = run_arma1((0.5, 1.0), tab, np.array([1.0, 0.0]), rounds=2)
    path = tmp_path / "t.csv"
    aio.write_trace(path, tr)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,node,value"
    assert len(lines) == 1 + 3 * 2


def test_design_document_exact_round_trip(tmp_path):
    res = design_arma(step_response(), 5)
    doc = aio.design_to_dict(res)
    path = tmp_path / "d.json"
    aio.write_design(path, doc)
    loaded = aio.read_design(path)
    # bit-exact round trip (shortest-repr JSON floats)
    assert np.array_equal(loaded.rational.b, res.rational.b)
    assert np.array_equal(loaded.rational.a, res.rational.a)
    assert np.array_equal(loaded.parallel.psi, res.parallel.psi)
    assert np.array_equal(loaded.parallel.phi, res.parallel.phi)
    assert np.array_equal(loaded.periodic.psi, res.periodic.psi)
    assert np.array_equal(loaded.periodic.phi, res.periodic.phi)
    assert np.array_equal(loaded.stability.roots, res.stability.roots)
    assert loaded.l2_error == res.l2_error
    assert loaded.response.kind == res.response.kind
    # second write is byte-identical
    path2 = tmp_path / "d2.json"
    aio.write_design(path2, aio.design_to_dict(loaded))
    assert path.read_text() == path2.read_text()


def test_fir_document_round_trip(tmp_path):
    fir = design_fir(step_response(), 7)
    path = tmp_path / "f.json"
    aio.write_design(path, aio.fir_to_dict(fir, step_response(), 0.5))
    loaded = aio.read_design(path)
    assert np.array_equal(loaded.h, fir.h)
    assert loaded.interval == fir.interval


def test_pick_form(tmp_path):
    res = design_arma(step_response(), 1)
    assert aio.pick_form(res, "parallel") is res.parallel
    assert aio.pick_form(res, "periodic") is res.periodic
    one = aio.pick_form(res, "arma1")
    assert np.isclose(one.psi, -res.rational.a[0])
    with pytest.raises(InputError):
        aio.pick_form(res, "fir")
    fir = design_fir(step_response(), 3)
    assert aio.pick_form(fir, "auto") is fir
    with pytest.raises(InputError):
        aio.pick_form(fir, "parallel")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=8))
def test_json_floats_lossless(values):
    dumped = json.dumps({"v": values})
    assert json.loads(dumped)["v"] == values


def test_read_design_missing_file(tmp_path):
    with pytest.raises(InputError):
        aio.read_design(tmp_path / "absent.json")


def test_columns_csv(tmp_path):
    path = tmp_path / "c.csv"
    aio.write_columns_csv(path, {"a": [1.0, 2.5], "b": ["x", "y"]})
    assert path.read_text().splitlines() == ["a,b", "1.0,x", "2.5,y"]


def test_surface_csv(tmp_path):
    path = tmp_path / "s.csv"
    aio.write_surface(path, [0.0, 1.0], [0.5], np.array([[1 + 1j], [2 + 0j]]))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "omega,mu,magnitude,phase"
    assert len(lines) == 3


def test_load_config_errors(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("- just\n- a list\n")
    with pytest.raises(InputError):
        aio.load_config(path)
    with pytest.raises(InputError):
        aio.load_config(tmp_path / "absent.yaml")
