import numpy as np
import orjson
import pytest
from intspan import intspan

from ukblab.errors import SpecError
from ukblab.geometry.hereditary import Region
from ukblab.states.state import fiber_of
from ukblab.utils.json_specs import (
    dumps,
    load_file,
    loads,
    parse_algebra,
    parse_complex,
    parse_matrix,
    parse_samples,
    parse_state,
    parse_vector,
    to_jsonable,
)
from ukblab.utils.report import CheckResult


def test_loads():
    assert loads(b'{"a": 1}') == {"a": 1}
    with pytest.raises(SpecError, match="Invalid JSON"):
        loads("{not json")


def test_load_file(tmp_path):
    document = tmp_path.joinpath("algebra.json")
    document.write_text('{"ambient_dim": 1, "generators": [[[1]]]}')
    assert load_file(document)["ambient_dim"] == 1

    records = tmp_path.joinpath("samples.jsonl")
    records.write_text('{"value": 1}\n{"value": [0, 1]}\n')
    assert load_file(records) == [{"value": 1}, {"value": [0, 1]}]

    with pytest.raises(SpecError, match="does not exist"):
        load_file(tmp_path.joinpath("missing.json"))


def test_parse_numbers():
    assert parse_complex(2) == 2
    assert parse_complex([1.5, -2]) == complex(1.5, -2)
    for bad in (True, "1", [1, 2, 3], None):
        with pytest.raises(SpecError):
            parse_complex(bad)
    np.testing.assert_allclose(parse_vector([1, [0, 1]]), [1, 1j])
    with pytest.raises(SpecError):
        parse_vector([])
    np.testing.assert_allclose(parse_matrix([[1, 0], [0, [0, 1]]]), np.diag([1, 1j]))
    with pytest.raises(SpecError, match="different lengths"):
        parse_matrix([[1, 0], [1]])
    with pytest.raises(SpecError):
        parse_matrix([1, 2])


def test_parse_algebra():
    a = parse_algebra({"ambient_dim": 2, "generators": [[[0, 1], [0, 0]]]})
    assert a.dim == 4
    with pytest.raises(SpecError, match="ambient_dim"):
        parse_algebra({"generators": []})
    with pytest.raises(SpecError, match="non-negative integer"):
        parse_algebra({"ambient_dim": 1.5, "generators": []})
    with pytest.raises(SpecError, match="generators"):
        parse_algebra({"ambient_dim": 2, "generators": "none"})


def test_parse_state_forms(m2m3):
    by_ray = parse_state(m2m3, {"ray": {"fiber": 2, "vector": [1, 0, [0, 1]]}})
    assert fiber_of(by_ray) == 2
    by_values = parse_state(m2m3, {"values": [[float(v.real), float(v.imag)] for v in by_ray.values]})
    np.testing.assert_allclose(by_values.values, by_ray.values, atol=1e-12)

    density = np.zeros((5, 5)).tolist()
    density[0][0] = 1
    assert fiber_of(parse_state(m2m3, {"density": density})) == 1

    mixed = parse_state(
        m2m3,
        {"block_densities": {"1": [[0.5, 0], [0, 0]], "2": [[0.5, 0, 0], [0, 0, 0], [0, 0, 0]]}},
    )
    assert not mixed.is_pure


def test_parse_state_errors(m2m3):
    with pytest.raises(SpecError, match="must be an object"):
        parse_state(m2m3, [1, 2])
    with pytest.raises(SpecError, match="needs one of"):
        parse_state(m2m3, {"vector": [1]})
    with pytest.raises(SpecError, match="integer label"):
        parse_state(m2m3, {"ray": {"fiber": "one", "vector": [1, 0]}})
    with pytest.raises(SpecError, match="zero"):
        parse_state(m2m3, {"ray": {"fiber": 1, "vector": [0, 0]}})
    with pytest.raises(SpecError, match="not an integer"):
        parse_state(m2m3, {"block_densities": {"a": [[1]]}})


def test_parse_samples(m2):
    samples = parse_samples(
        m2, [{"state": {"ray": {"fiber": 1, "vector": [1, 0]}}, "value": [2, 0]}]
    )
    assert len(samples) == 1
    assert samples[0][1] == 2
    with pytest.raises(SpecError, match="value"):
        parse_samples(m2, [{"state": {"ray": {"fiber": 1, "vector": [1, 0]}}}])


def test_to_jsonable():
    data = to_jsonable(
        {
            "z": 1 + 2j,
            "array": np.array([[1.0, 0.5j]]),
            "labels": intspan("1-3"),
            "region": Region.INSIDE_DISK,
            "check": CheckResult("ok", True),
            "count": np.int64(3),
            1: (np.float64(0.25),),
        }
    )
    assert data == {
        "z": [1.0, 2.0],
        "array": [[[1.0, 0.0], [0.0, 0.5]]],
        "labels": "1-3",
        "region": "inside_disk",
        "check": {"check": "ok", "pass": True, "witnesses": [], "max_residual": 0.0},
        "count": 3,
        "1": [0.25],
    }
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_dumps_deterministic():
    payload = {"b": 0.1, "a": [1e-17, 3.0]}
    first = dumps(payload)
    assert first == dumps(payload)
    assert first.endswith(b"\n")
    assert orjson.loads(first) == {"b": 0.1, "a": [1e-17, 3.0]}
