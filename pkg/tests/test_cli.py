import doctest
import json
from fractions import Fraction

import pytest

import midr.lowerbound
import midr.mechanism
from midr import io
from midr.cli import main
from midr.lowerbound import gen_lb_instance
from midr.mechanism import Mechanism
from midr.oracle import unweighted_opt
from midr.valuations import validate

PAIR = {"m": 8, "epsilon": "1/2",
        "bidders": [{"kind": "single-minded", "size": 5, "value": "10"},
                    {"kind": "single-minded", "size": 3, "value": "6"}]}


@pytest.fixture
def pair_file(tmp_path):
    path = tmp_path / "pair.json"
    path.write_text(json.dumps(PAIR))
    return path


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_doctests():
    for mod in (midr.mechanism, midr.lowerbound):
        assert doctest.testmod(mod).failed == 0


def test_parse_minimal_instance(pair_file):
    inst, opts = io.parse_instance(pair_file)
    assert inst.n == 2 and inst.m == 8 and opts["epsilon"] == Fraction(1, 2)


def test_parse_rational_per_unit():
    inst, _ = io.instance_from_dict({"m": 4, "bidders": [{"kind": "additive", "per_unit": "3/2"}]})
    assert inst.bidders[0](1) == Fraction(3, 2)


@pytest.mark.parametrize("doc,where", [
    ({"m": 4, "bidders": [{"kind": "additive", "per_unit": "-1"}]}, "bidders[0].per_unit"),
    ({"m": 4, "bidders": [{"kind": "single-minded", "size": 9, "value": 1}]}, "bidders[0]"),
    ({"bidders": []}, "m"),
    ({"m": 4, "bidders": []}, "bidders"),
    ({"m": 4, "bidders": [{"kind": "additive", "per_unit": 0.5}]}, "bidders[0].per_unit"),
])
def test_schema_errors_name_the_field(doc, where):
    with pytest.raises(io.SchemaError) as exc:
        io.instance_from_dict(doc)
    assert str(exc.value).startswith(where)


def test_instance_round_trip():
    lb = gen_lb_instance(8, 3, "1/100", 1, "1/1000")
    doc = json.loads(io.dumps(io.instance_to_dict(lb.instance)))
    inst, _ = io.instance_from_dict(doc)
    assert [inst.bidders[0](s) for s in range(9)] == [lb.instance.bidders[0](s) for s in range(9)]
    assert inst.strictly_increasing


def test_solve_report(pair_file, capsys):
    code, out = _run(capsys, "solve", "--input", pair_file)
    rep = json.loads(out.out)
    assert code == 0
    assert rep["distribution"]["base"] == [8, 0]
    assert Fraction(rep["expected_welfare"]) > 8
    assert rep["approximation"]["holds"] is True and rep["approximation"]["opt"] == "16/1"
    assert "payments" not in rep
    assert all("." not in json.dumps(v) for v in rep["distribution"]["nodes"])


def test_report_is_byte_stable(pair_file, capsys):
    a = _run(capsys, "payments", "--input", pair_file)[1].out
    b = _run(capsys, "payments", "--input", pair_file)[1].out
    assert a == b and "payments" in json.loads(a)


def test_sample_is_deterministic(pair_file, capsys):
    a = json.loads(_run(capsys, "sample", "--input", pair_file, "--seed", 7)[1].out)
    b = json.loads(_run(capsys, "sample", "--input", pair_file, "--seed", 7)[1].out)
    assert a["sample"] == b["sample"] and a["sample"]["seed"] == 7


def test_audit_exit_zero(pair_file, capsys):
    code, out = _run(capsys, "audit", "--input", pair_file)
    assert code == 0 and json.loads(out.out)["summary"]["violations"] == 0


def test_output_flag(pair_file, tmp_path, capsys):
    target = tmp_path / "rep.json"
    code, out = _run(capsys, "solve", "--input", pair_file, "--output", target)
    assert code == 0 and out.out == "" and json.loads(target.read_text())["input"]["m"] == 8


def test_exit_codes(tmp_path, capsys):
    assert _run(capsys, "solve")[0] == 1
    assert _run(capsys, "frobnicate")[0] == 1
    assert _run(capsys, "solve", "--input", tmp_path / "missing.json")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"m": 4, "bidders": [{"kind": "additive", "per_unit": "-1"}]}))
    assert _run(capsys, "solve", "--input", bad)[0] == 2
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"m": 4096, "bidders": [{"kind": "additive", "per_unit": 1}] * 2}))
    assert _run(capsys, "audit", "--input", big)[0] == 3


def test_epsilon_flag_overrides_and_validates(pair_file, capsys):
    rep = json.loads(_run(capsys, "solve", "--input", pair_file, "--epsilon", "1/10")[1].out)
    assert rep["input"]["epsilon"] == "1/10"
    assert _run(capsys, "solve", "--input", pair_file, "--epsilon", "3/4")[0] == 2
    assert _run(capsys, "solve", "--input", pair_file, "--epsilon", "half")[0] == 1


def test_restricted_rejects_non_strict(pair_file, capsys):
    assert _run(capsys, "solve", "--input", pair_file, "--variant", "restricted")[0] == 2


def test_gen_lb_then_solve(tmp_path, capsys):
    path = tmp_path / "lb.json"
    code, _ = _run(capsys, "gen-lb", "--m", 8, "--k", 3, "--sigma", "1/100", "--C", 1,
                   "--output", path)
    assert code == 0
    doc = json.loads(path.read_text())
    assert doc["family"]["optimum"] == {"allocation": [3, 5], "welfare": "1/1"}
    code, out = _run(capsys, "solve", "--input", path, "--epsilon", "1/10")
    rep = json.loads(out.out)
    assert code == 0 and "not strictly increasing" in out.err
    assert Fraction(rep["expected_welfare"]) >= Fraction(9, 10)
    assert _run(capsys, "gen-lb", "--m", 6, "--k", 3, "--sigma", "1/100", "--C", 1)[0] == 2


def test_bench_small(capsys):
    code, out = _run(capsys, "bench", "--ms", 1024, 2048, "--ns", 2, 4)
    doc = json.loads(out.out)
    assert code == 0 and len(doc["rows"]) == 4
    assert all(r <= 1.5 for rs in doc["doubling_ratios"].values() for r in rs.values())


# ---------------------------------------------------------------- I_k family


def test_lb_formulas():
    lb = gen_lb_instance(8, 3, Fraction(1, 100), 1)
    u, v = lb.instance.bidders
    assert [u(t) for t in range(9)] == [Fraction(t, 1600) for t in range(3)] + [Fraction(1, 2)] * 6
    assert [v(t) for t in range(9)] == [Fraction(t, 1600) for t in range(5)] + [Fraction(1, 2)] * 4
    assert lb.optimum == ((3, 5), 1)


@pytest.mark.parametrize("eta", [0, Fraction(1, 10 ** 4)])
def test_lb_optimum_is_known(eta):
    for k in range(1, 8):
        lb = gen_lb_instance(8, k, Fraction(1, 100), 3, eta)
        assert unweighted_opt(lb.instance) == 3
        assert validate(lb.instance, require_strict=True).ok == (eta > 0)


def test_lb_restricted_fptas():
    mech = Mechanism(64, 2, Fraction(1, 10), "restricted")
    for k in (1, 17, 32, 63):
        dist, welfare = mech.solve(gen_lb_instance(64, k, Fraction(1, 100), 1).instance)
        assert welfare >= Fraction(9, 10) and dist.base not in ((64, 0), (0, 64))


@pytest.mark.parametrize("kw", [dict(m=8, k=0), dict(m=8, k=8), dict(m=12, k=3),
                                dict(m=8, k=3, sigma=2), dict(m=8, k=3, eta=1)])
def test_lb_parameter_errors(kw):
    args = dict(sigma=Fraction(1, 100), C=1)
    args.update(kw)
    with pytest.raises(ValueError):
        gen_lb_instance(**args)
