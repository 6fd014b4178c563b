"""
The parameters module handles parameter files and the hyperparameters of a
translation model.

Classes
-------

SimpleParameterSet:
    handles parameter files in a simple "name = value" format, with no nesting
    or grouping.
JSONParameterSet
    handles parameter files in JSON format
YAMLParameterSet
    handles parameter files in YAML format (only available if PyYAML is installed)
NTParameterSet:
    handles parameter files in the NeuroTools parameter set format, based on
    nested dictionaries (only available if the `parameters` package is installed)
HyperParams:
    one validated point in the model configuration space. Defaults are the
    common settings of the reference experiments.


:license: BSD 2-clause, see LICENSE for details.
"""
import abc
import ast
import json
import os.path
import re
import shutil
from collections import OrderedDict
from itertools import filterfalse
from pathlib import Path

try:
    import yaml
    yaml_loaded = True
except ImportError:
    yaml_loaded = False
try:
    import parameters
    parameters_loaded = True
except ImportError:
    parameters_loaded = False

from .core import component, component_type, get_registered_components, conditional_component
from .lexing import LATEX_SIDE, MIZAR_SIDE, LANGUAGES

POP_NONE = object()


def literal(value):
    """Parse a Python literal; anything else raises ValueError."""
    try:
        return ast.literal_eval(value)
    except SyntaxError:
        raise ValueError("Not a literal: %r" % value)


@component_type
class ParameterSet(object, metaclass=abc.ABCMeta):
    required_attributes = ("update", "save", "as_dict")
    list_pattern = re.compile(r'^\s*\[.*\]\s*$')
    tuple_pattern = re.compile(r'^\s*\(.*\)\s*$')
    if yaml_loaded:
        casts = (yaml.safe_load, )
    else:
        casts = tuple()

    def _new_param_check(self, name, value):
        try:
            self.values[name]
        except KeyError:
            raise ValueError("")

    def parse_command_line_parameter(self, p):
        """Parse command line parameter

        Uses ParameterSet format-specific type parsers stored in self.casts

        Raises ValueError with args tuple containing name, value if parameter name
        isn't in self.values.
        """
        pos = p.find('=')
        if pos == -1:
            raise ValueError("Not a valid command line parameter. String must be of form 'name=value'")
        name = p[:pos]
        value = p[pos + 1:]

        if self.list_pattern.match(value) or self.tuple_pattern.match(value):
            value = ast.literal_eval(value)
        else:
            for cast in self.casts:
                try:
                    value = cast(value)
                    break
                except ValueError:
                    pass
        try:
            self._new_param_check(name, value)
        except ValueError as v:
            raise ValueError(str(v), name, value)
        return {name: value}


@conditional_component(condition=yaml_loaded)
class YAMLParameterSet(ParameterSet):
    """
    Handles parameter files in YAML format, as parsed by the
    PyYAML module
    """
    name = ".yaml"

    def __init__(self, initialiser):
        if not yaml_loaded:
            raise ImportError("Cannot import PyYAML module")
        try:
            if os.path.exists(initialiser):
                with open(initialiser) as fid:
                    self.values = yaml.safe_load(fid)
                self.source_file = initialiser
            elif initialiser:
                self.values = yaml.safe_load(initialiser)
            else:
                self.values = {}
        except yaml.YAMLError:
            raise SyntaxError("Misformatted YAML file")
        if not isinstance(self.values, dict):
            raise SyntaxError("YAML file cannot be represented as a dict")

    def __str__(self):
        return self.pretty()

    def __getitem__(self, name):
        return self.values[name]

    def keys(self):
        return self.values.keys()

    def pretty(self):
        return yaml.safe_dump(self.values, indent=4)

    def as_dict(self):
        return dict(self.values)

    def save(self, filename, add_extension=False):
        if add_extension:
            filename += ".yaml"
        with open(filename, "w") as f:
            yaml.safe_dump(self.values, f)
        return filename

    def update(self, E, **F):
        self.values.update(E, **F)
    update.__doc__ = dict.update.__doc__


if parameters_loaded:
    @component
    class NTParameterSet(parameters.ParameterSet, ParameterSet):
        name = ".params"

        def save(self, filename, add_extension=False):
            if add_extension:
                filename += ".params"
            super().save(filename)
            return filename


@component
class SimpleParameterSet(ParameterSet):
    """
    Handles parameter files in a simple "name = value" format, with no nesting or grouping.
    """
    name = ".param"
    casts = (int, float, literal)

    COMMENT_CHAR = "#"

    def __init__(self, initialiser):
        """
        Create a new parameter set from a file, a string or a dict. In the
        first two cases, parameters should be separated by newlines.
        """
        self.values = OrderedDict()
        self.types = {}
        self.comments = {}
        if isinstance(initialiser, dict):
            for name, value in initialiser.items():
                self._add_or_update_parameter(name=name, value=value)
        elif SimpleParameterSet._is_valid_file(initialiser):
            with open(initialiser) as f:
                for line in filterfalse(SimpleParameterSet._empty_or_comment, f.readlines()):
                    name, value, comment = self._parse_parameter_from_line(line)
                    self._add_or_update_parameter(name=name, value=value, comment=comment)
            self.source_file = initialiser
        else:
            try:
                for line in filterfalse(SimpleParameterSet._empty_or_comment, initialiser.split("\n")):
                    name, value, comment = self._parse_parameter_from_line(line)
                    self._add_or_update_parameter(name=name, value=value, comment=comment)
            except (AttributeError, TypeError, ValueError):
                raise TypeError("Parameter set initialiser must be a filename, string or dict.")

    @staticmethod
    def _is_valid_file(path):
        try:
            path = Path(str(path))
            return path.exists() and path.is_file()
        except (TypeError, OSError, ValueError):
            return False

    @classmethod
    def _empty_or_comment(cls, line):
        line = line.strip()
        return len(line) == 0 or line.startswith(cls.COMMENT_CHAR)

    def _parse_parameter_from_line(self, line):
        line = line.strip()
        if "=" not in line:
            raise SyntaxError("File is not a valid simple parameter file. This line caused the error: %s" % line)
        name, value = line.split("=", 1)
        name = name.strip()
        comment = None
        if self.COMMENT_CHAR in value and not self._value_represents_string(value):
            value, comment = value.split(self.COMMENT_CHAR, 1)
        value = value.strip()
        try:
            value = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            value = str(value)
        return name, value, comment

    @staticmethod
    def _value_represents_string(value):
        stripped = value.strip()
        return (stripped.startswith("'") and stripped.endswith("'")) \
            or (stripped.startswith('"') and stripped.endswith('"'))

    def _add_or_update_parameter(self, name, value, comment=None):
        if value is not None and not isinstance(value, (int, float, str, bool, list, tuple)):
            raise TypeError("Value must be one of the basic types (a numeric value, bool, "
                            "string, list, tuple or None. Got: '{}' ({})".format(value, type(value)))
        self.values[name] = value
        self.types[name] = type(value)
        if comment is not None:
            self.comments[name] = comment

    def __str__(self):
        return self.pretty()

    def __getitem__(self, name):
        return self.values[name]

    def __eq__(self, other):
        return (self.values == other.values) and (self.types == other.types)

    def __ne__(self, other):
        return not self.__eq__(other)

    def keys(self):
        return self.values.keys()

    def pop(self, k, d=POP_NONE):
        if k in self.values:
            v = self.values.pop(k)
            self.types.pop(k)
            self.comments.pop(k, None)
            return v
        elif d is not POP_NONE:
            return d
        else:
            raise KeyError("%s not found" % k)

    def pretty(self):
        """
        Return a string representation of the parameter set, suitable for
        creating a new, identical parameter set.
        """
        output = []
        for name, value in self.values.items():
            if isinstance(value, str):
                output.append('%s = "%s"' % (name, value))
            else:
                output.append('%s = %s' % (name, value))
            if name in self.comments:
                output[-1] += ' #%s' % self.comments[name]
        return "\n".join(output)

    def as_dict(self):
        return dict(self.values)

    def save(self, filename, add_extension=False):
        if add_extension:
            filename += ".param"
        if os.path.exists(filename):
            shutil.copy(filename, filename + ".orig")
        with open(filename, 'w') as f:
            f.write(self.pretty())
        return filename

    def update(self, E, **F):
        if hasattr(E, "items"):
            for name, value in E.items():
                self._add_or_update_parameter(name, value)
        else:
            for name, value in E:
                self._add_or_update_parameter(name, value)
        for name, value in F.items():
            self._add_or_update_parameter(name, value)
    update.__doc__ = dict.update.__doc__


@component
class JSONParameterSet(ParameterSet):
    """
    Handles parameter files in JSON format, as parsed by the
    standard Python json module.
    """
    name = ".json"
    casts = (json.loads, )

    def __init__(self, initialiser):
        try:
            if os.path.exists(initialiser):
                with open(initialiser) as fid:
                    self.values = json.load(fid)
                self.source_file = initialiser
            elif initialiser:
                self.values = json.loads(initialiser)
            else:
                self.values = {}
        except ValueError:
            raise SyntaxError("Misformatted JSON file")
        if not isinstance(self.values, dict):
            raise SyntaxError("JSON file cannot be represented as a dict")

    def __str__(self):
        return self.pretty()

    def __getitem__(self, name):
        return self.values[name]

    def keys(self):
        return self.values.keys()

    def pretty(self):
        return json.dumps(self.values, sort_keys=True, indent=4)

    def as_dict(self):
        return dict(self.values)

    def save(self, filename, add_extension=False):
        if add_extension:
            filename += ".json"
        with open(filename, "w") as f:
            json.dump(self.values, f, sort_keys=True, indent=4)
        return filename

    def update(self, E, **F):
        self.values.update(E, **F)
    update.__doc__ = dict.update.__doc__


def build_parameters(filename):
    """
    Read a parameter file, choosing the format from the file extension or,
    failing that, trying every registered format in turn.
    """
    body, ext = os.path.splitext(filename)
    params = None
    extension_map = get_registered_components(ParameterSet)
    if ext in extension_map:
        params = extension_map[ext](filename)
    else:
        for parameter_set_class in extension_map.values():
            try:
                params = parameter_set_class(filename)
                break
            except (SyntaxError, NameError, TypeError, UnicodeDecodeError):
                pass
    if params is None:
        raise SyntaxError("Could not read parameter file %s in any known format" % filename)
    return params


# --- hyperparameters --------------------------------------------------------

LSTM = "lstm"
GRU = "gru"
LAYER_NORM_LSTM = "layer_norm_lstm"
UNIT_TYPES = (LSTM, GRU, LAYER_NORM_LSTM)

NO_ATTENTION = "none"
BAHDANAU = "bahdanau"
NORMED_BAHDANAU = "normed_bahdanau"
LUONG = "luong"
SCALED_LUONG = "scaled_luong"
ATTENTIONS = (NO_ATTENTION, BAHDANAU, NORMED_BAHDANAU, LUONG, SCALED_LUONG)

SGD = "sgd"
ADAM = "adam"
OPTIMIZERS = (SGD, ADAM)

UNIDIRECTIONAL = "uni"
BIDIRECTIONAL = "bi"
ENCODER_TYPES = (UNIDIRECTIONAL, BIDIRECTIONAL)

CHOICES = {
    "unit_type": UNIT_TYPES,
    "attention": ATTENTIONS,
    "optimizer": OPTIMIZERS,
    "encoder_type": ENCODER_TYPES,
    "src_lang": LANGUAGES,
    "tgt_lang": LANGUAGES,
}

# spellings accepted in parameter files and on the command line
ALIASES = {
    "layernormlstm": LAYER_NORM_LSTM,
    "normedbahdanau": NORMED_BAHDANAU,
    "scaledluong": SCALED_LUONG,
    "noattention": NO_ATTENTION,
    "unidirectional": UNIDIRECTIONAL,
    "bidirectional": BIDIRECTIONAL,
}

DEFAULT_LEARNING_RATE = {SGD: 1.0, ADAM: 0.001}

DEFAULTS = OrderedDict([
    ("unit_type", LSTM),
    ("attention", NO_ATTENTION),
    ("num_layers", 2),
    ("residual", False),
    ("optimizer", SGD),
    ("encoder_type", UNIDIRECTIONAL),
    ("num_units", 128),
    ("dropout", 0.2),
    ("forget_bias", 1.0),
    ("learning_rate", None),  # resolved from the optimizer
    ("batch_size", 128),
    ("train_steps", 12000),
    ("seed", 0),
    ("clip_norm", 5.0),
    ("max_src_len", 100),
    ("max_tgt_len", 100),
    ("src_lang", LATEX_SIDE),
    ("tgt_lang", MIZAR_SIDE),
])


def _normalize_choice(value):
    if value is None:
        return NO_ATTENTION
    key = str(value).strip().lower()
    compact = re.sub(r"[^a-z0-9]", "", key)
    if compact in ALIASES:
        return ALIASES[compact]
    return key.replace("-", "_").replace(" ", "_")


class HyperParams(object):
    """
    One point in the model configuration space.

    Unknown names raise ValueError; so do values outside their allowed
    range, see :meth:`validate`.
    """

    def __init__(self, **kwargs):
        unknown = set(kwargs) - set(DEFAULTS)
        if unknown:
            raise ValueError("Unknown hyperparameter(s): %s" % ", ".join(sorted(unknown)))
        for name, default in DEFAULTS.items():
            setattr(self, name, kwargs.get(name, default))
        for name in CHOICES:
            setattr(self, name, _normalize_choice(getattr(self, name)))
        # a rate left to the optimizer default follows later optimizer changes
        self.default_learning_rate = self.learning_rate is None
        if self.default_learning_rate:
            self.learning_rate = DEFAULT_LEARNING_RATE.get(self.optimizer, 1.0)
        self.validate()

    def validate(self):
        for name, allowed in CHOICES.items():
            if getattr(self, name) not in allowed:
                raise ValueError("%s must be one of %s, not %r"
                                 % (name, ", ".join(allowed), getattr(self, name)))
        for name in ("num_layers", "num_units", "batch_size", "max_src_len", "max_tgt_len"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError("%s must be a positive integer, not %r" % (name, value))
            setattr(self, name, int(value))
        if int(self.train_steps) != self.train_steps or self.train_steps < 0:
            raise ValueError("train_steps must be a non-negative integer")
        self.train_steps = int(self.train_steps)
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        self.seed = int(self.seed)
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.clip_norm <= 0:
            raise ValueError("clip_norm must be positive")
        self.residual = bool(self.residual)
        self.dropout = float(self.dropout)
        self.forget_bias = float(self.forget_bias)
        self.learning_rate = float(self.learning_rate)
        self.clip_norm = float(self.clip_norm)
        if self.encoder_type == BIDIRECTIONAL and self.num_layers % 2:
            raise ValueError("A bidirectional encoder needs an even number of layers")
        if self.src_lang == self.tgt_lang:
            raise ValueError("Source and target language must differ")
        return self

    @property
    def bidirectional(self):
        return self.encoder_type == BIDIRECTIONAL

    def as_dict(self):
        return OrderedDict((name, getattr(self, name)) for name in DEFAULTS)

    def replace(self, **changes):
        values = self.as_dict()
        if self.default_learning_rate and "learning_rate" not in changes:
            values["learning_rate"] = None
        values.update(changes)
        return HyperParams(**values)

    @classmethod
    def from_parameters(cls, parameter_set, **overrides):
        """
        Build from a ParameterSet (or a dict). Later sources win: the parameter
        set overrides the defaults and `overrides` override both; overrides
        that are None are ignored.
        """
        values = dict(parameter_set.as_dict() if hasattr(parameter_set, "as_dict") else parameter_set)
        values.update((k, v) for k, v in overrides.items() if v is not None)
        return cls(**values)

    def __eq__(self, other):
        return isinstance(other, HyperParams) and self.as_dict() == other.as_dict()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "HyperParams(%s)" % ", ".join("%s=%r" % item for item in self.as_dict().items())
