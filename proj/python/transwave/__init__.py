"""Power-system transient wave lab.

Electromechanical (swing), electromagnetic (Bergeron EMT) and hybrid
simulation of wave propagation on transmission networks, with arrival
detection, speed fitting and least-squares event location.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__, presets  # noqa: F401
