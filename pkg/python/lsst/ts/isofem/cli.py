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

__all__ = ["main", "make_parser", "run_isofem_study", "ExitCode"]

import argparse
import enum
import logging
import sys

from .config_schema import CONFIG_SCHEMA, make_config, read_config_file
from .errors import ConfigError, IsofemError
from .study import run_geometry_diagnostics, run_study


class ExitCode(enum.IntEnum):
    SUCCESS = 0
    CONFIG_ERROR = 1
    NUMERICAL_FAILURE = 2


# Command-line flags that map directly to config properties, with their types.
_CONFIG_FLAGS = dict(
    domain=str,
    degree=int,
    levels=int,
    h0=float,
    alpha=float,
    beta=float,
    kappa=float,
    variant=str,
    solution=str,
    study=str,
    tol=float,
    preconditioner=str,
    out=str,
    diagnostics=str,
    matrix_dir=str,
)


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports bad arguments as `ConfigError`."""

    def error(self, message):
        raise ConfigError("arguments", message)


def make_parser():
    """Make the argument parser for ``run_isofem_study``.

    Invalid arguments raise `ConfigError` instead of exiting.
    """
    parser = _ArgumentParser(
        description="Run a convergence study of isoparametric finite elements "
        "for the generalized Robin problem on the unit disk or ball, "
        "and write the results as CSV.",
    )
    properties = CONFIG_SCHEMA["properties"]
    for name, dtype in _CONFIG_FLAGS.items():
        schema = properties[name]
        parser.add_argument(
            f"--{name.replace('_', '-')}",
            dest=name,
            type=dtype,
            default=None,
            help=f"{schema['description']} Default: {schema['default']!r}.",
        )
    parser.add_argument(
        "--config",
        help="Config file (YAML mapping or key=value lines); flags override it.",
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level.",
    )
    return parser


def main(argv=None):
    """Run a study from command-line arguments.

    Parameters
    ----------
    argv : `list` [`str`], optional
        Arguments, excluding the program name; sys.argv[1:] if None.

    Returns
    -------
    exit_code : `ExitCode`
        0 on success, 1 for an invalid configuration,
        2 if a mesh, assembly or solver step failed.
    """
    try:
        args = make_parser().parse_args(argv)
        logging.basicConfig(
            level=args.log_level, format="%(levelname)s %(name)s: %(message)s"
        )
        config_dict = {} if args.config is None else read_config_file(args.config)
        for name in _CONFIG_FLAGS:
            value = getattr(args, name)
            if value is not None:
                config_dict[name] = value
        config = make_config(**config_dict)
    except ConfigError as e:
        print(f"Invalid configuration: {e}", file=sys.stderr)
        return ExitCode.CONFIG_ERROR

    log = logging.getLogger("isofem")
    try:
        report = run_study(config, log=log)
        log.info(f"Wrote {len(report.records)} levels to {config.out}")
        if config.diagnostics:
            run_geometry_diagnostics(config, log=log)
            log.info(f"Wrote geometry diagnostics to {config.diagnostics}")
    except (IsofemError, OSError) as e:
        print(f"Study failed: {type(e).__name__}: {e}", file=sys.stderr)
        return ExitCode.NUMERICAL_FAILURE
    return ExitCode.SUCCESS


def run_isofem_study():
    """Command-line entry point."""
    sys.exit(main())
