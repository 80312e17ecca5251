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

try:
    from .version import *
except ImportError:
    __version__ = "?"

from .errors import *
from .geometry import *
from .quadrature import *
from .reference_element import *
from .validation import *

from .mesh import *  # isort:skip
from .curved_map import *  # isort:skip
from .fe_space import *  # isort:skip
from .assembly import *  # isort:skip
from .solver import *  # isort:skip
from .exact_solutions import *  # isort:skip
from .error_norms import *  # isort:skip
from .config_schema import *  # isort:skip
from .study import *  # isort:skip
from .cli import *  # isort:skip
