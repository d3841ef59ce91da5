"""Exact computations in free groups: Stallings graphs, train track iteration,
translation lengths, counting-current frequencies, Property W certificates
and normal-closure witness families."""
from .currents import *  # noqa: F401,F403
from .dynamics import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .formats import *  # noqa: F401,F403
from .metric import *  # noqa: F401,F403
from .rigidity import *  # noqa: F401,F403
from .stallings import *  # noqa: F401,F403
from .words import *  # noqa: F401,F403

__version__ = "0.1.0"
