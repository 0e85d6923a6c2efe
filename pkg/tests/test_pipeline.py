import json
from fractions import Fraction

import pytest

from escurves.config import Config, config_from_dict, load_config
from escurves.errors import InputError
from escurves.fixtures import tampered_terms
from escurves.pipeline import (
    STAGES,
    Candidate,
    certificate_json,
    is_contradiction,
    load_candidate,
    parse_candidate,
    run_audit,
    sharded_factor_terms,
    terms_to_json,
)
from escurves.es_model import ApSolution
from escurves.factor_terms import factor_terms


def stage(cert, name):
    return next(s for s in cert["stages"] if s["name"] == name)


class TestParse:
    def test_plain(self):
        c = parse_candidate({"n": "12345678901234567890", "d": 1, "t": None, "k": 5, "l": 3})
        assert c.n == 12345678901234567890 and c.t is None

    @pytest.mark.parametrize("obj,field", [
        ({"d": 1, "k": 5, "l": 3}, "n"),
        ({"n": 1, "d": 0, "k": 5, "l": 3}, "d"),
        ({"n": 1, "d": 1, "k": "x", "l": 3}, "k"),
        ({"d": 1, "k": 3, "l": 3, "terms": [{"i": 0, "a": 1, "rough": 1}] * 2}, "terms"),
        ({"d": 1, "k": 3, "l": 3, "terms": [{"i": 0, "a": 1, "rough": 1}, {"i": 1, "rough": 1},
                                             {"i": 2, "a": 1, "rough": 1}]}, "terms[1].a"),
    ])
    def test_errors_name_field(self, obj, field):
        with pytest.raises(InputError) as exc:
            parse_candidate(obj)
        assert str(exc.value).startswith(field)

    def test_json_error_has_position(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text('{"n": 1,\n "d": }')
        with pytest.raises(InputError, match="line 2"):
            load_candidate(p)

    def test_terms_round_trip(self):
        terms = factor_terms(ApSolution(1, 1, None, 5, 3))
        c = parse_candidate(json.loads(json.dumps(terms_to_json(terms, 5, 3, 1))))
        assert list(c.terms) == terms


class TestConfig:
    def test_defaults(self):
        cfg = Config()
        assert (cfg.c, cfg.A, cfg.eta) == (Fraction(229, 1000), 283, Fraction(1, 17000))

    def test_overrides(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"c": "0.3", "curves": {"-2": {"L": 1.5}}}))
        cfg = load_config(p)
        assert cfg.c == Fraction(3, 10) and cfg.curve_override(-2, "L") == 1.5

    @pytest.mark.parametrize("raw", [{"bogus": 1}, {"precision": -3}, {"curves": {"x": {}}}, {"curves": {"2": {"r": 1}}}])
    def test_rejects(self, raw):
        with pytest.raises(InputError):
            config_from_dict(raw)


class TestAudit:
    def test_stage_order(self):
        cert = run_audit(Candidate(3, 3, 1, n=1, t=2))
        assert [s["name"] for s in cert["stages"]] == list(STAGES)

    def test_non_power_product(self):
        cert = run_audit(Candidate(3, 3, 1, n=1, t=2))
        assert cert["verdict"]["result"] == "contradiction-at-stage-transform"
        assert stage(cert, "transform")["detail"]["values"]["product"] == "6"
        assert is_contradiction(cert)

    def test_speculative(self):
        cert = run_audit(Candidate(100, 5, 1, n=1, t=None))
        v = cert["verdict"]
        assert v["result"] == "contradiction-at-stage-invariants"
        assert v["first_failure"]["assertion"] == "prod_a_power"
        assert v["first_failure"]["values"] == {"p": "2", "exponent": "97"}

    def test_tampered(self):
        terms, d = tampered_terms()
        cert = run_audit(Candidate(10_000, 3, d, terms=tuple(terms)))
        mi = stage(cert, "mass_increment")["detail"]["trace"]
        assert mi["consistent_counts"]
        assert mi["collision"]["A0"] == "28"
        assert mi["collision"]["pairs"][0] == {"i": "28", "j": "0", "alpha": "1", "A": "28"}
        assert is_contradiction(cert)

    def test_sharding_invariant(self):
        ref = sharded_factor_terms(-10**12 + 7, 3, 400, 3, 1)
        assert sharded_factor_terms(-10**12 + 7, 3, 400, 3, 4) == ref
        a = certificate_json(run_audit(Candidate(60, 3, 1, n=5, t=None), shards=1))
        b = certificate_json(run_audit(Candidate(60, 3, 1, n=5, t=None), shards=4))
        assert a == b
