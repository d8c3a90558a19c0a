import json

import pytest

from constants import EMPIRICAL, PAPER
from errors import ParseError, ValidationError
from settings import RunConfig, load_config, override_config, parse_config, serialize_config, settings_template


def test_empty_settings_give_the_defaults():
    assert parse_config("") == RunConfig()
    assert parse_config("{}") == RunConfig()
    assert parse_config(None) == RunConfig()


def test_template_parses_to_the_defaults():
    assert parse_config(json.dumps(settings_template)) == RunConfig()


def test_sections_override_defaults():
    config = parse_config('{"run": {"L": 5000, "nMax": 12}, "constants": {"profileKind": "paper"}}')
    assert config.L == 5000.0
    assert config.n_max == 12
    assert config.profile_kind == PAPER
    assert config.beta == 1.75


@pytest.mark.parametrize("text, field", [
    ('{"constants": {"beta": 2.5}}', "constants.beta"),
    ('{"constants": {"beta": 2.0}}', "constants.beta"),
    ('{"run": {"L": -1}}', "run.L"),
    ('{"run": {"mode": "grid"}}', "run.mode"),
    ('{"run": {"samples": 0}}', "run.samples"),
    ('{"run": {"LList": [1000, 100]}}', "run.LList"),
    ('{"run": {"strict": 1}}', "run.strict"),
    ('{"run": {"workers": 0}}', "run.workers"),
    ('{"drive": {"name": "fourier"}}', "drive.coefficients"),
    ('{"constants": {"overrides": {"gamma": 0.1}}}', "constants.overrides"),
    ('{"run": {"seed": true}}', "run.seed"),
])
def test_invalid_values_name_the_field(text, field):
    with pytest.raises(ValidationError) as raised:
        parse_config(text)
    assert raised.value.field == field


def test_unknown_keys_are_rejected():
    with pytest.raises(ValidationError) as raised:
        parse_config('{"run": {"speed": 3}}')
    assert raised.value.field == "run.speed"
    with pytest.raises(ValidationError):
        parse_config('{"extra": {}}')


def test_malformed_json_reports_the_position():
    with pytest.raises(ParseError) as raised:
        parse_config('{\n  "run": {"L": }\n}')
    assert raised.value.line == 2
    assert raised.value.column is not None


def test_settings_must_be_an_object():
    with pytest.raises(ValidationError):
        parse_config("[1, 2]")


def test_serialize_round_trip():
    config = parse_config('{"drive": {"name": "fourier", "coefficients": [[1, 0.0, 1.0], [2, 0.1, 0.0]]}, '
                          '"constants": {"overrides": {"sigma": 0.05, "delta0": 0.01, "delta": 0.002, '
                          '"lambda": 0.1}}, "run": {"LList": [100, 1000], "workers": 2}}')
    assert parse_config(serialize_config(config)) == config
    assert config.drive_coefficients == [[1, 0.0, 1.0], [2, 0.1, 0.0]]


def test_override_config():
    config = override_config(RunConfig(), L=200.0, n_max=7, seed=None)
    assert config.L == 200.0
    assert config.n_max == 7
    assert config.seed == 0
    with pytest.raises(ValidationError):
        override_config(RunConfig(), beta=3.0)
    with pytest.raises(ValidationError):
        override_config(RunConfig(), speed=3)


def test_load_config_seeds_a_missing_file(tmp_path):
    path = tmp_path / "settings" / "settings.json"
    assert load_config(str(path)) == RunConfig()
    assert path.exists()
    assert json.loads(path.read_text()) == json.loads(json.dumps(settings_template))
    path.write_text('{"run": {"L": 300}}')
    assert load_config(str(path)).L == 300.0


def test_profile_for_uses_the_scaling_rule(sine):
    config = RunConfig()
    assert config.profile_kind == EMPIRICAL
    profile = config.profile_for(sine, 10000.0)
    assert profile.sigma == pytest.approx(0.005)
    assert config.phi() == sine
