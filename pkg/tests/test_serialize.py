import json
import warnings
from fractions import Fraction
from pathlib import Path

import pytest

from netcap.fixtures import named_instances, write_fixture_files
from netcap.info import DistributionTable
from netcap.serialize import (
    CodeDoc,
    Problem,
    SchemaError,
    code_from_obj,
    code_to_obj,
    dumps,
    load_problem,
    problem_from_obj,
    problem_to_obj,
    region_from_obj,
    region_to_obj,
    round_trip,
)

DATA = Path(__file__).parent / "data"


def test_fixture_files_are_current(tmp_path):
    fresh = write_fixture_files(tmp_path)
    for p in fresh:
        assert (DATA / p.name).read_text() == p.read_text(), p.name


ROUND_TRIP = sorted(p for p in DATA.glob("*.json") if not p.name.endswith(".bc.json")) + sorted(DATA.glob("*.csv"))


@pytest.mark.parametrize("path", ROUND_TRIP, ids=lambda p: p.name)
def test_every_fixture_round_trips(path):
    problem = None
    if path.name.endswith(".code.json"):
        problem = load_problem(DATA / path.name.replace(".code.json", ".net.json"))
    assert round_trip(path, problem)


def test_codes_round_trip_in_memory():
    for inst in named_instances():
        if inst.code is None:
            continue
        p = Problem(inst.net, inst.demand)
        doc = code_from_obj(json.loads(dumps(code_to_obj(inst.code))), p)
        assert doc.code == inst.code


def base_network():
    return {
        "nodes": ["s", "t"],
        "edges": [{"id": "e", "from": "s", "to": "t", "capacity": "3/2"}],
        "sources": [{"id": "1", "node": "s", "rate": "1"}],
        "demands": {"t": ["1"]},
    }


def test_unknown_fields_warn_and_survive():
    obj = base_network()
    obj["comment"] = "hello"
    obj["edges"][0]["color"] = "red"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        p = problem_from_obj(obj)
    messages = sorted(str(w.message) for w in caught)
    assert messages == ["$.comment: unknown field preserved", "$.edges[0].color: unknown field preserved"]
    out = problem_to_obj(p)
    assert out["comment"] == "hello"
    assert out["edges"][0]["color"] == "red"


def test_bad_rational_names_field():
    obj = base_network()
    obj["edges"][0]["capacity"] = "3/0"
    with pytest.raises(SchemaError) as err:
        problem_from_obj(obj)
    assert err.value.path == "$.edges[0].capacity"


def test_schema_paths():
    obj = base_network()
    del obj["edges"][0]["to"]
    with pytest.raises(SchemaError, match=r"\$\.edges\[0\]\.to"):
        problem_from_obj(obj)
    obj = base_network()
    obj["sources"][0]["rate"] = 0.5
    with pytest.raises(SchemaError, match=r"sources\[0\]\.rate"):
        problem_from_obj(obj)
    obj = base_network()
    obj["demands"]["t"] = ["9"]
    with pytest.raises(SchemaError):
        problem_from_obj(obj)


def test_code_schema_errors():
    p = problem_from_obj(
        {
            "nodes": ["s", "t"],
            "edges": [{"id": "e", "from": "s", "to": "t", "capacity": "1"}],
            "sources": [{"id": "1", "node": "s", "rate": "1"}],
            "demands": {"t": ["1"]},
        }
    )
    ok = {"blocklength": 1, "encoders": {"e": "1"}, "decoders": {"t:1": "1"}}
    assert code_from_obj(ok, p).code.encoders["e"].to_text() == "1"
    with pytest.raises(SchemaError, match=r"encoders\.e"):
        code_from_obj({"blocklength": 1, "encoders": {"e": "11"}}, p)
    with pytest.raises(SchemaError, match=r"encoders\.zz"):
        code_from_obj({"blocklength": 1, "encoders": {"e": "1", "zz": "1"}}, p)
    with pytest.raises(SchemaError, match=r"decoders"):
        code_from_obj({"blocklength": 1, "encoders": {"e": "1"}, "decoders": {"t": "1"}}, p)
    general = {"blocklength": 1, "encoders": {"e": [0, 1]}, "decoders": {"t:1": [0, 1]}}
    doc = code_from_obj(general, p)
    assert code_to_obj(doc) == general


def test_region_round_trip():
    obj = json.loads((DATA / "box.region.json").read_text())
    region = region_from_obj(obj)
    assert region.offset == (Fraction(1, 2), Fraction(1, 2))
    assert region.inequalities[1].bound == 1.5
    assert region_from_obj(region_to_obj(region)) == region
    with pytest.raises(SchemaError):
        region_from_obj({"dimension": 1, "inequalities": [{"subset": ["9"], "bound": "1"}]})


def test_distribution_csv():
    d = DistributionTable.from_csv((DATA / "xor-mac.csv").read_text())
    assert d.names == ("M1", "M2", "W")


def test_dumps_is_canonical():
    text = dumps({"b": 1 / 3, "a": [1, 2]})
    assert text.index('"a"') < text.index('"b"')
    assert "0.333333333333" in text and "0.3333333333333" not in text
    assert dumps({"b": 1 / 3, "a": [1, 2]}) == text


def test_code_doc_extra_preserved():
    p = Problem(named_instances()[0].net, named_instances()[0].demand)
    obj = code_to_obj(named_instances()[0].code)
    obj["note"] = "x"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        doc = code_from_obj(obj, p)
    assert isinstance(doc, CodeDoc) and code_to_obj(doc)["note"] == "x"
