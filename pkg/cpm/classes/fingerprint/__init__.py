from . import drfp
