from . import container
from . import bank
from . import heads
from . import reactions
from . import split
