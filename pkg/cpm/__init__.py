from . import classes
