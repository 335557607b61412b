from . import errors
from . import hashing
from . import configuration
from . import decorators
