from . import roles
from . import vocabulary
from . import records
from . import distributions
from . import retrieval
