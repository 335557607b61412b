#!/usr/bin/env python3
"""HTTP surface over cpm.classes.service; all decisions live in the handlers."""
from flask import Flask, Response, request

from cpm.classes.service.handlers import error_response, handle_health, handle_recommend
from cpm.classes.service.state import ServiceState

JSON = "application/json"


def _respond(result) -> Response:
    status, body = result
    return Response(body, status=status, mimetype=JSON)


def create_app(state: ServiceState) -> Flask:
    app = Flask(__name__)
    app.config["SERVICE_STATE"] = state

    @app.route("/v1/health", methods=["GET"])
    def health():
        return _respond(handle_health(state))

    @app.route("/v1/recommend", methods=["POST"])
    def recommend():
        if not request.is_json:
            return _respond(error_response(415, "Send the request body as application/json."))
        body = request.get_json(silent=True)
        if body is None:
            return _respond(error_response(400, "The request body is not valid JSON."))
        return _respond(handle_recommend(state, body))

    @app.errorhandler(404)
    def not_found(_):
        return _respond(error_response(404, "No such endpoint."))

    @app.errorhandler(405)
    def not_allowed(_):
        return _respond(error_response(405, "Method not allowed."))

    return app


def serve(state: ServiceState):
    state.load_in_background()
    create_app(state).run(host=state.config.host, port=state.config.port, threaded=True)
