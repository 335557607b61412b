from . import precedent, store
