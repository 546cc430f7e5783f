"""Sensor log calibration and utilization analytics."""

from ._spaceutil import *  # noqa: F401,F403
from ._spaceutil import __doc__  # noqa: F401
