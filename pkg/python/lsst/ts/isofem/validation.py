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

__all__ = ["DefaultingValidator"]

import copy

import jsonschema


def _extend_with_default(validator_class):
    """Extend a jsonschema validator class to set defaults
    for missing properties.
    """
    validate_properties = validator_class.VALIDATORS["properties"]

    def set_defaults(validator, properties, instance, schema):
        if isinstance(instance, dict):
            for name, subschema in properties.items():
                if "default" in subschema:
                    instance.setdefault(name, copy.deepcopy(subschema["default"]))
        yield from validate_properties(validator, properties, instance, schema)

    return jsonschema.validators.extend(validator_class, {"properties": set_defaults})


class DefaultingValidator:
    """Validate a configuration dict against a schema, applying defaults.

    Parameters
    ----------
    schema : `dict`
        Draft 7 JSON schema.

    Raises
    ------
    jsonschema.SchemaError
        If ``schema`` is not a valid draft 7 schema.
    """

    def __init__(self, schema):
        jsonschema.Draft7Validator.check_schema(schema)
        self.schema = schema
        self.final_validator = jsonschema.Draft7Validator(schema)
        self.defaults_validator = _extend_with_default(jsonschema.Draft7Validator)(
            schema
        )

    def validate(self, data_dict):
        """Return a copy of ``data_dict`` with defaults applied.

        Parameters
        ----------
        data_dict : `dict` | `None`
            Data to validate. None is treated as an empty dict.

        Returns
        -------
        result : `dict`
            Validated data with defaults applied.

        Raises
        ------
        jsonschema.ValidationError
            If the data does not match the schema.
        """
        result = {} if data_dict is None else copy.deepcopy(data_dict)
        self.defaults_validator.validate(result)
        self.final_validator.validate(result)
        return result
