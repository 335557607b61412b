from . import state, handlers
