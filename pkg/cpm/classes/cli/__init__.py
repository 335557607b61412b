from . import arguments, manifest, commands
