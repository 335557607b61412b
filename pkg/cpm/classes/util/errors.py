#!/usr/bin/env python3
"""Exception hierarchy.  Every error knows the CLI exit code it maps to."""


class CpmError(Exception):
    exit_code = 4


class UsageError(CpmError, ValueError):
    exit_code = 2


class DataError(CpmError, ValueError):
    exit_code = 3


class VocabularyError(DataError, KeyError):
    def __init__(self, role, label):
        self.role = role
        self.label = label
        super().__init__("Label '{}' is not in the {} vocabulary.".format(label, role))

    def __str__(self):
        # KeyError would otherwise repr() the message
        return self.args[0]


class ReactionParseError(DataError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = "line {}: {}".format(line_number, message)
        super().__init__(message)


class SmilesParseError(DataError):
    def __init__(self, message, smiles, position):
        self.reason = message
        self.smiles = smiles
        self.position = position
        super().__init__("{} at position {} in '{}'".format(message, position, smiles))


class FormatError(DataError):
    pass


class DimensionError(DataError):
    pass


class NonFiniteError(DataError):
    def __init__(self, row, what="bank"):
        self.row = row
        super().__init__("Non-finite value in {} row {}.".format(what, row))


class UnknownReactionError(DataError, KeyError):
    def __init__(self, reaction_id):
        self.reaction_id = reaction_id
        super().__init__("Unknown reaction id '{}'.".format(reaction_id))

    def __str__(self):
        return self.args[0]


class NoNeighborsError(DataError):
    pass


class InvariantError(CpmError):
    exit_code = 4


class SplitLeakageError(InvariantError):
    pass


class SimplexError(InvariantError):
    pass


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, CpmError):
        return error.exit_code
    if isinstance(error, (FileNotFoundError, IsADirectoryError, NotADirectoryError, UnicodeDecodeError)):
        return 3
    return 4
