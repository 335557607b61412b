from . import token
from . import tokenizer
from . import reaction
