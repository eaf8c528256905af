__version__ = '0.1.0'

from .mixlab import Mixlab  # noqa: F401
