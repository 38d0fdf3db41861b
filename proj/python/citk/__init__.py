from ._citk import *  # noqa: F401,F403
from ._citk import __doc__  # noqa: F401
