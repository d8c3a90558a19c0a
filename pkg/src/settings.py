"""
Run configuration: a JSON settings file with camelCase sections, validated into a RunConfig
"""
import copy
import json
import numbers
from dataclasses import dataclass, field

import pydash as py_

from circle_map import make_drive
from constants import EMPIRICAL, PAPER, build_profile, default_rule, scaled_overrides
from directory_utilities import get_json_text
from errors import ParseError, ValidationError

settings_template = {
    "drive": {
        "name": "sine",
        "coefficients": []
    },
    "constants": {
        "beta": 1.75,
        "alpha": None,
        "N": 20,
        "profileKind": EMPIRICAL,
        "overrides": None,
        "rule": dict(default_rule),
        "epsilon": 0.05
    },
    "run": {
        "L": 1000.0,
        "LList": [100.0, 1000.0, 10000.0, 100000.0],
        "mode": "mc",
        "nMax": 50,
        "samples": 100000,
        "minWidth": 1e-4,
        "seed": 0,
        "strict": False,
        "workers": None
    },
    "output": {
        "directory": "../output"
    }
}

# RunConfig field -> dotted path in the settings file
field_paths = {
    "drive_name": "drive.name",
    "drive_coefficients": "drive.coefficients",
    "beta": "constants.beta",
    "alpha": "constants.alpha",
    "N": "constants.N",
    "profile_kind": "constants.profileKind",
    "overrides": "constants.overrides",
    "rule": "constants.rule",
    "epsilon": "constants.epsilon",
    "L": "run.L",
    "L_list": "run.LList",
    "mode": "run.mode",
    "n_max": "run.nMax",
    "samples": "run.samples",
    "min_width": "run.minWidth",
    "seed": "run.seed",
    "strict": "run.strict",
    "workers": "run.workers",
    "output_directory": "output.directory"
}

override_keys = {"sigma", "delta0", "delta", "lambda", "lambda0"}


@dataclass(frozen=True)
class RunConfig(object):
    drive_name: str = "sine"
    drive_coefficients: list = field(default_factory=list)
    beta: float = 1.75
    alpha: float = None
    N: int = 20
    profile_kind: str = EMPIRICAL
    overrides: dict = None
    rule: dict = field(default_factory=lambda: dict(default_rule))
    epsilon: float = 0.05
    L: float = 1000.0
    L_list: list = field(default_factory=lambda: [100.0, 1000.0, 10000.0, 100000.0])
    mode: str = "mc"
    n_max: int = 50
    samples: int = 100000
    min_width: float = 1e-4
    seed: int = 0
    strict: bool = False
    workers: int = None
    output_directory: str = "../output"

    def to_settings(self):
        """
        :return: The nested settings dict this config was (or could have been) parsed from
        :rtype: dict
        """
        settings = {}
        for name, path in field_paths.items():
            py_.set_(settings, path, copy.deepcopy(getattr(self, name)))
        return settings

    def phi(self):
        return make_drive(self.drive_name, self.drive_coefficients)

    def profile_for(self, phi, L):
        """
        The constants bundle for one L: the asymptotic formulas, explicit overrides, or the empirical scaling rule
        """
        overrides = None
        if self.profile_kind == EMPIRICAL:
            overrides = self.overrides if self.overrides is not None else scaled_overrides(L, self.rule)
        return build_profile(phi, L, beta=self.beta, alpha=self.alpha, N=self.N, kind=self.profile_kind,
                             overrides=overrides, epsilon=self.epsilon)


def parse_config(text):
    """
    Parse and validate the text of a settings file. Empty text gives the defaults.

    :param text: JSON text
    :type text: str

    :rtype: RunConfig

    :raises ParseError: On malformed JSON, with the line and column
    :raises ValidationError: On unknown keys or invalid values, naming the dotted field
    """
    if text is None or text.strip() == "":
        content = {}
    else:
        try:
            content = json.loads(text)
        except json.JSONDecodeError as exception:
            raise ParseError(exception.msg, exception.lineno, exception.colno)
    if not isinstance(content, dict):
        raise ValidationError("<root>", "the settings must be a JSON object")

    _reject_unknown(content, settings_template, "")
    values = {name: copy.deepcopy(py_.get(content, path, py_.get(settings_template, path)))
              for name, path in field_paths.items()}
    return RunConfig(**_validate(values))


def serialize_config(config):
    """
    Canonical JSON text of a config; parse_config(serialize_config(config)) == config
    """
    return json.dumps(config.to_settings(), indent=4, sort_keys=True)


def load_config(path):
    """
    Read a settings file, seeding it with the template when it does not exist yet
    """
    return parse_config(get_json_text(path, settings_template))


def override_config(config, **values):
    """
    A copy of config with the given fields replaced; None values are ignored
    """
    settings = config.to_settings()
    for name, value in values.items():
        if value is None:
            continue
        if name not in field_paths:
            raise ValidationError(name, "unknown setting")
        py_.set_(settings, field_paths[name], value)
    return parse_config(json.dumps(settings))


def _reject_unknown(content, template, prefix):
    for key, value in content.items():
        dotted = prefix + key
        if key not in template:
            raise ValidationError(dotted, "unknown key")
        if dotted in ("constants.overrides", "constants.rule"):
            continue
        if isinstance(template[key], dict):
            if not isinstance(value, dict):
                raise ValidationError(dotted, "expected a section")
            _reject_unknown(value, template[key], dotted + ".")


def _is_number(value):
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _is_integer(value):
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


def _number(values, name, low=None, high=None, open_low=True, open_high=True):
    value = values[name]
    path = field_paths[name]
    if not _is_number(value):
        raise ValidationError(path, "expected a number, got {!r}".format(value))
    value = float(value)
    if low is not None and (value < low or (open_low and value == low)):
        raise ValidationError(path, "{} is below the allowed range".format(value))
    if high is not None and (value > high or (open_high and value == high)):
        raise ValidationError(path, "{} is above the allowed range".format(value))
    return value


def _integer(values, name, low):
    value = values[name]
    if not _is_integer(value) or value < low:
        raise ValidationError(field_paths[name], "expected an integer >= {}, got {!r}".format(low, value))
    return int(value)


def _choice(values, name, choices):
    if values[name] not in choices:
        raise ValidationError(field_paths[name], "expected one of {}, got {!r}".format(choices, values[name]))
    return values[name]


def _validate(values):
    checked = {
        "drive_name": _choice(values, "drive_name", ["sine", "fourier"]),
        "beta": _number(values, "beta", 1.5, 2.0),
        "N": _integer(values, "N", 1),
        "profile_kind": _choice(values, "profile_kind", [EMPIRICAL, PAPER]),
        "epsilon": _number(values, "epsilon", 0.0, 0.25),
        "L": _number(values, "L", 0.0),
        "mode": _choice(values, "mode", ["mc", "bisect"]),
        "n_max": _integer(values, "n_max", 0),
        "samples": _integer(values, "samples", 1),
        "min_width": _number(values, "min_width", 1e-12, open_low=False),
        "seed": _integer(values, "seed", 0)
    }
    if checked["seed"] >= 1 << 64:
        raise ValidationError(field_paths["seed"], "the seed must fit in 64 bits")

    coefficients = values["drive_coefficients"]
    if not isinstance(coefficients, list) or not all(
            isinstance(triple, list) and len(triple) == 3 and _is_integer(triple[0]) and triple[0] >= 1 and
            _is_number(triple[1]) and _is_number(triple[2]) for triple in coefficients):
        raise ValidationError(field_paths["drive_coefficients"], "expected a list of [k, cosCoef, sinCoef] triples")
    if checked["drive_name"] == "fourier" and not coefficients:
        raise ValidationError(field_paths["drive_coefficients"], "the fourier drive needs coefficients")
    checked["drive_coefficients"] = [[int(k), float(cos_coef), float(sin_coef)] for k, cos_coef, sin_coef in
                                     coefficients]

    checked["alpha"] = None if values["alpha"] is None else _number(values, "alpha", 0.0)

    overrides = values["overrides"]
    if overrides is not None:
        if not isinstance(overrides, dict) or not set(overrides) <= override_keys or \
                not all(_is_number(value) for value in overrides.values()):
            raise ValidationError(field_paths["overrides"],
                                  "expected numbers for some of {}".format(sorted(override_keys)))
        overrides = {key: float(value) for key, value in overrides.items()}
    checked["overrides"] = overrides

    rule = values["rule"]
    if not isinstance(rule, dict) or not set(rule) <= set(default_rule) or \
            not all(_is_number(value) and value > 0 for value in rule.values()):
        raise ValidationError(field_paths["rule"], "expected positive numbers for some of {}".format(
            sorted(default_rule)))
    checked["rule"] = {key: float(value) for key, value in dict(default_rule, **rule).items()}

    L_list = values["L_list"]
    if not isinstance(L_list, list) or not L_list or not all(_is_number(L) and L > 0 for L in L_list):
        raise ValidationError(field_paths["L_list"], "expected a non-empty list of positive numbers")
    if any(later <= earlier for earlier, later in zip(L_list, L_list[1:])):
        raise ValidationError(field_paths["L_list"], "L values must increase")
    checked["L_list"] = [float(L) for L in L_list]

    if not isinstance(values["strict"], bool):
        raise ValidationError(field_paths["strict"], "expected true or false")
    checked["strict"] = values["strict"]

    workers = values["workers"]
    if workers is not None and (not _is_integer(workers) or workers < 1):
        raise ValidationError(field_paths["workers"], "expected null or an integer >= 1")
    checked["workers"] = workers

    if not isinstance(values["output_directory"], str) or not values["output_directory"]:
        raise ValidationError(field_paths["output_directory"], "expected a directory path")
    checked["output_directory"] = values["output_directory"]

    return checked
