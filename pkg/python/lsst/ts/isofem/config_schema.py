# This file is part of ts_isofem.
#
# Developed for Vera C. Rubin Observatory Telescope and Site Systems.
# This product includes software developed by the LSST Project
# (https://www.lsst.org).
# See the COPYRIGHT file at the top-level directory of this distribution
# for details of code ownership.
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

__all__ = ["CONFIG_SCHEMA", "make_config", "read_config_file"]

import pathlib
import re
import types
import typing

import jsonschema
import yaml

from .assembly import check_parameters
from .errors import ConfigError
from .exact_solutions import get_exact_solution
from .geometry import make_domain
from .validation import DefaultingValidator

CONFIG_SCHEMA = yaml.safe_load(
    """
$schema: http://json-schema.org/draft-07/schema#
title: isofem study v1
description: Configuration for a convergence study of the generalized Robin problem
type: object
additionalProperties: false
properties:
  domain:
    description: Domain Ω.
    enum: [unit-disk, unit-ball]
    default: unit-disk
  degree:
    description: Polynomial degree k of the elements and of the boundary approximation.
    type: integer
    minimum: 1
    maximum: 4
    default: 1
  levels:
    description: Number of mesh levels; each level refines the previous one.
    type: integer
    minimum: 2
    default: 4
  h0:
    description: Target mesh size of the coarsest level.
    type: number
    exclusiveMinimum: 0
    default: 0.3
  alpha:
    description: Coefficient α >= 0 of the boundary mass term.
    type: number
    minimum: 0
    default: 1
  beta:
    description: Coefficient β >= 0 of the Laplace-Beltrami term.
    type: number
    minimum: 0
    default: 1
  kappa:
    description: Coefficient κ >= 0 of the bulk mass term.
    type: number
    minimum: 0
    default: 1
  variant:
    description: >-
      Problem variant. grp uses alpha, beta and kappa as given;
      robin sets beta to 0; neumann sets alpha and beta to 0 and requires kappa > 0.
    enum: [grp, robin, neumann]
    default: grp
  solution:
    description: >-
      Built-in manufactured solution. grp means grp2d on the disk
      and grp3d on the ball.
    enum: [grp, grp2d, grp3d, constant, linear, quadratic, zero]
    default: grp
  study:
    description: >-
      solve: solve the discrete problem at each level;
      interpolate: measure the error of the nodal interpolant instead.
    enum: [solve, interpolate]
    default: solve
  tol:
    description: Relative residual tolerance of the linear solver.
    type: number
    exclusiveMinimum: 0
    maximum: 0.0001
    default: 1.0e-12
  preconditioner:
    description: Preconditioner of the conjugate gradient solver.
    enum: [jacobi, none]
    default: jacobi
  out:
    description: Path of the convergence table (CSV).
    type: string
    minLength: 1
    default: study.csv
  diagnostics:
    description: Path of the geometry diagnostics table (CSV); blank to skip.
    type: string
    default: ""
  matrix_dir:
    description: >-
      Directory in which to write the system matrix of each level
      in Matrix Market format; blank to skip.
    type: string
    default: ""
"""
)


def _validation_field(error: jsonschema.ValidationError) -> str:
    if error.path:
        return str(error.path[-1])
    if error.validator == "additionalProperties":
        extra = set(error.instance) - set(error.schema.get("properties", {}))
        return ", ".join(sorted(extra))
    return "config"


def make_config(**kwargs: typing.Any) -> types.SimpleNamespace:
    """Make a study config from keyword arguments.

    Defaults are applied, then the variant rules: robin sets beta=0,
    neumann sets alpha=beta=0.

    Parameters
    ----------
    kwargs
        The configuration, as a dict of property: value. The allowed
        properties and values are specified by `CONFIG_SCHEMA`.

    Returns
    -------
    config : `types.SimpleNamespace`
        The validated configuration, with defaults applied.

    Raises
    ------
    ConfigError
        If the configuration is invalid; ``field`` names the offending
        property.
    """
    validator = DefaultingValidator(CONFIG_SCHEMA)
    try:
        config_dict = validator.validate(kwargs)
    except jsonschema.ValidationError as e:
        raise ConfigError(_validation_field(e), e.message) from e

    if config_dict["variant"] == "robin":
        config_dict["beta"] = 0.0
    elif config_dict["variant"] == "neumann":
        config_dict["alpha"] = 0.0
        config_dict["beta"] = 0.0
        if config_dict["kappa"] <= 0:
            raise ConfigError("kappa", "the neumann variant requires kappa > 0")
    try:
        check_parameters(
            config_dict["alpha"], config_dict["beta"], config_dict["kappa"]
        )
    except ValueError as e:
        raise ConfigError("alpha", str(e)) from e

    domain = make_domain(config_dict["domain"])
    try:
        get_exact_solution(config_dict["solution"], domain.dimension)
    except ValueError as e:
        raise ConfigError("solution", str(e)) from e
    return types.SimpleNamespace(**config_dict)


def read_config_file(path: str | pathlib.Path) -> dict[str, typing.Any]:
    """Read study configuration values from a file.

    Two formats are accepted: a YAML mapping, or ``key=value`` lines
    (blank lines and lines starting with ``#`` are ignored). Each value
    of a ``key=value`` line is parsed as a YAML scalar; an empty value
    is an empty string.

    Strings that look like numbers, such as ``1e-10`` (which YAML 1.1
    reads as a string), are converted for numeric properties.

    Parameters
    ----------
    path : `str` | `pathlib.Path`
        Path of the config file.

    Returns
    -------
    config_dict : `dict`
        The values read; not yet validated (see `make_config`).

    Raises
    ------
    ConfigError
        If the file cannot be read or parsed, or does not contain
        a mapping.
    """
    path = pathlib.Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError("config", f"could not read {path}: {e}") from e

    lines = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]
    if lines and all(_KEY_VALUE_RE.match(line) for line in lines):
        config_dict = _parse_key_value_lines(path, lines)
    else:
        try:
            config_dict = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigError("config", f"could not parse {path}: {e}") from e
        if config_dict is None:
            return {}
        if not isinstance(config_dict, dict):
            raise ConfigError("config", f"{path} must contain a mapping")
    return _convert_numbers(config_dict)


_KEY_VALUE_RE = re.compile(r"^([A-Za-z_]\w*)\s*=\s*(.*)$")

_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _parse_key_value_lines(path: pathlib.Path, lines: list[str]) -> dict:
    config_dict = dict()
    for line in lines:
        name, value_text = _KEY_VALUE_RE.match(line).groups()
        if name in config_dict:
            raise ConfigError(name, f"{path} sets {name} more than once")
        value_text = value_text.strip()
        if not value_text:
            config_dict[name] = ""
            continue
        try:
            config_dict[name] = yaml.safe_load(value_text)
        except yaml.YAMLError as e:
            raise ConfigError(name, f"could not parse {value_text!r}: {e}") from e
    return config_dict


def _convert_numbers(config_dict: dict) -> dict:
    """Convert number-like strings of numeric properties to numbers."""
    properties = CONFIG_SCHEMA["properties"]
    converted = dict()
    for name, value in config_dict.items():
        value_type = properties.get(name, {}).get("type")
        if (
            value_type in ("number", "integer")
            and isinstance(value, str)
            and _NUMBER_RE.match(value.strip())
        ):
            number = float(value)
            if value_type == "integer" and number.is_integer():
                number = int(number)
            value = number
        converted[name] = value
    return converted
