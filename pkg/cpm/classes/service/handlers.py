#!/usr/bin/env python3
"""Request handling without a web framework: dict in, (status, JSON text) out.

Request body for /v1/recommend, exactly one query form:
    {"id": "rxn00012"}
    {"vector": [0.1, ...]}
    {"reactants": ["CCO"], "products": ["CC=O"]}  or  {"smiles": "CCO>>CC=O"}
plus optional overrides "k", "t" ("uniform" or a positive number), "alpha" and "top".
Errors answer {"code": <status>, "message": <text>}."""
import json
import logging
import time
from typing import Tuple

from .state import ServiceState
from ..recommend.queries import Query
from ..smiles.reaction import split_reaction_smiles
from ..util.configuration import get_version
from ..util.errors import DataError, DimensionError, UnknownReactionError, UsageError

QUERY_FIELDS = {"id", "vector", "reactants", "products", "smiles"}
OVERRIDE_FIELDS = {"k", "t", "alpha", "top"}

Response = Tuple[int, str]


def _json(status: int, payload: dict) -> Response:
    return status, json.dumps(payload, sort_keys=True)


def error_response(status: int, message: str) -> Response:
    return _json(status, {"code": status, "message": message})


def status_for(error: Exception) -> int:
    if isinstance(error, UnknownReactionError):
        return 404
    if isinstance(error, DimensionError):
        return 422
    if isinstance(error, (UsageError, DataError)):
        return 400
    return 500


def _molecules(value, name: str):
    if isinstance(value, str):
        return [m for m in value.split(".") if m]
    if isinstance(value, list) and all(isinstance(m, str) for m in value):
        return value
    raise UsageError("'{}' must be a dot-joined SMILES string or a list of SMILES strings.".format(name))


def parse_query(body: dict) -> Query:
    unknown = set(body) - QUERY_FIELDS - OVERRIDE_FIELDS
    if unknown:
        raise UsageError("Unknown request fields: {}.".format(", ".join(sorted(unknown))))
    if "smiles" in body:
        if "reactants" in body or "products" in body:
            raise UsageError("Give either 'smiles' or 'reactants'/'products', not both.")
        if not isinstance(body["smiles"], str):
            raise UsageError("'smiles' must be a reaction SMILES string.")
        reactants, products = split_reaction_smiles(body["smiles"])
        body = dict(body, reactants=reactants, products=products)
    reaction_id = body.get("id")
    if reaction_id is not None and not isinstance(reaction_id, str):
        raise UsageError("'id' must be a string.")
    vector = body.get("vector")
    if vector is not None and not (isinstance(vector, list) and vector):
        raise UsageError("'vector' must be a non-empty list of numbers.")
    reactants = _molecules(body["reactants"], "reactants") if "reactants" in body else None
    products = _molecules(body["products"], "products") if "products" in body else None
    return Query(reaction_id, vector, reactants, products)


def _overrides(state: ServiceState, body: dict):
    config = state.engine.config
    k = body.get("k", config.k)
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise UsageError("'k' must be a positive integer.")
    if k > state.config.max_k:
        raise UsageError("k = {} exceeds max_k = {}.".format(k, state.config.max_k))
    t, alpha = body.get("t"), body.get("alpha")
    if t is not None and (isinstance(t, bool) or not isinstance(t, (str, int, float))):
        raise UsageError("'t' must be 'uniform' or a positive number.")
    if alpha is not None and (isinstance(alpha, bool) or not isinstance(alpha, (int, float))):
        raise UsageError("'alpha' must be a number in [0, 1].")
    top = body.get("top")
    if top is not None and (not isinstance(top, int) or isinstance(top, bool) or top < 1):
        raise UsageError("'top' must be a positive integer.")
    return config.with_overrides(k=k, temperature=t, alpha=alpha), top


class RequestTimeout(Exception):
    pass


class Deadline:
    """Checked between request stages on the serving thread; a stage in progress is never abandoned."""

    def __init__(self, seconds: float):
        self.seconds = seconds
        self.expires = time.monotonic() + seconds

    def check(self):
        if time.monotonic() > self.expires:
            raise RequestTimeout(self.seconds)


def _recommend(state: ServiceState, body: dict, deadline: Deadline) -> Response:
    query = parse_query(body)
    config, top = _overrides(state, body)
    deadline.check()
    recommendation = state.engine.recommend(query, config)
    deadline.check()
    return 200, recommendation.to_json(state.engine.vocabs, top)


def handle_recommend(state: ServiceState, body) -> Response:
    if not state.loaded:
        return error_response(503, "The precedent index is not loaded.")
    if not isinstance(body, dict):
        return error_response(400, "The request body must be a JSON object.")
    try:
        return _recommend(state, body, Deadline(state.config.request_timeout))
    except RequestTimeout:
        return error_response(504, "The request exceeded {} s.".format(state.config.request_timeout))
    except Exception as e:
        status = status_for(e)
        if status == 500:
            logging.exception("Unhandled error in /v1/recommend.")
        return error_response(status, str(e))


def handle_health(state: ServiceState) -> Response:
    if not state.loaded:
        message = "loading" if state.load_error is None else "failed: {}".format(state.load_error)
        return _json(503, {"status": message, "size": None, "dim": None, "version": get_version()})
    index = state.engine.index
    return _json(200, {"status": "ok", "size": len(index), "dim": index.dim, "version": get_version()})
