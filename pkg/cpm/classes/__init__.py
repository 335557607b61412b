from . import util
from . import smiles
from . import model
from . import ingest
from . import fingerprint
from . import reprkernel
from . import index
from . import recommend
from . import evaluation
from . import service
from . import cli
