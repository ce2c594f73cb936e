#!/usr/bin/env python3
"""
Path Competition Simulator Web Interface

A Flask application exposing the equilibrium solvers, the competition
dynamics and the verification suites as JSON endpoints.
"""

import logging
import os
import sys
from datetime import datetime

import numpy as np
from flask import Flask, jsonify, request
from flask_cors import CORS
from werkzeug.exceptions import HTTPException

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from config.config import config
from core.errors import NUMERIC_ERRORS, ModelValidationError, SimulationError
from logic.experiments import run_suite, suite_names
from logic.model.network import check_attribute_matrix
from logic.model.serialization import model_from_dict
from logic.solvers import DynamicsConfig, DynamicsMode, simulate
from logic.solvers.dynamics import initial_state
from main import SOLVERS, solve_model, stability_report
from utils.utils import configure_logging

logger = logging.getLogger(__name__)

app = Flask(__name__)
CORS(app)  # Enable CORS for all routes
app.config['MAX_CONTENT_LENGTH'] = 16 * 1024 * 1024  # 16MB max model document
app.config['SECRET_KEY'] = config.secret_key

# Per-request ceiling on verification instances
MAX_VERIFY_COUNT = 2000


def _body() -> dict:
    body = request.get_json(silent=True)
    if not isinstance(body, dict):
        raise ModelValidationError("request body must be a JSON object")
    return body


def _model(body: dict):
    if not isinstance(body.get('model'), dict):
        raise ModelValidationError("'model' must be a model document")
    return model_from_dict(body['model'])


def _start(model, start):
    if isinstance(start, list):
        return model.clamp(check_attribute_matrix(model, np.asarray(start, dtype=float)))
    if start == 'zeros' or (isinstance(start, str) and start.startswith('random:')):
        return initial_state(model, start)
    raise ModelValidationError("'start' must be 'zeros', 'random:<seed>' or an attribute matrix")


@app.errorhandler(SimulationError)
def handle_simulation_error(error):
    if isinstance(error, NUMERIC_ERRORS):
        return jsonify({'error': str(error), 'kind': type(error).__name__}), 422
    return jsonify({'error': str(error), 'kind': type(error).__name__}), 400


@app.errorhandler(Exception)
def handle_unexpected_error(error):
    if isinstance(error, HTTPException):
        return jsonify({'error': error.description}), error.code
    logger.exception("unexpected error")
    return jsonify({'error': f'Unexpected error: {str(error)}'}), 500


@app.route('/solve', methods=['POST'])
def solve():
    """Solve a model document with one of the named solvers."""
    body = _body()
    solver = body.get('solver')
    if solver not in SOLVERS:
        return jsonify({'error': f"'solver' must be one of {', '.join(SOLVERS)}"}), 400
    result = solve_model(_model(body), solver, body.get('path'), body.get('seed', config.seed))
    return jsonify(result.to_dict())


@app.route('/dynamics', methods=['POST'])
def dynamics():
    """Run one trajectory and return its summary."""
    body = _body()
    model = _model(body)
    try:
        mode = DynamicsMode(body.get('mode', DynamicsMode.ROUND_ROBIN.value))
        settings = DynamicsConfig.for_mode(
            mode,
            step=body.get('eta') if mode == DynamicsMode.ROUND_ROBIN else body.get('step'),
            tol=body.get('tol'),
            max_rounds=body.get('max_rounds'),
            order=body.get('order'),
            seed=body.get('seed'),
            relative=body.get('relative'),
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, ModelValidationError):
            raise
        raise ModelValidationError(f"invalid dynamics settings: {e}")
    trace = simulate(model, _start(model, body.get('start', 'zeros')), settings)
    summary = trace.summary()
    if body.get('stability'):
        summary['stability'] = stability_report(model, trace.final).to_dict()
    return jsonify(summary)


@app.route('/verify', methods=['POST'])
def verify():
    """Run a verification suite with a bounded instance count."""
    body = _body()
    suite = body.get('suite', 'all')
    if suite not in suite_names():
        return jsonify({'error': f"'suite' must be one of {', '.join(suite_names())}"}), 400
    count = body.get('count')
    if count is not None and not (isinstance(count, int) and 1 <= count <= MAX_VERIFY_COUNT):
        return jsonify({'error': f"'count' must be an integer between 1 and {MAX_VERIFY_COUNT}"}), 400
    reports = run_suite(suite, count=count, seed=body.get('seed', config.seed))
    return jsonify({
        'ok': all(report.ok for report in reports),
        'reports': [report.to_dict() for report in reports],
    })


@app.route('/health')
def health_check():
    """Health check endpoint."""
    return jsonify({
        'status': 'healthy',
        'timestamp': datetime.now().isoformat(),
        'solvers': list(SOLVERS),
        'suites': suite_names(),
    })


if __name__ == '__main__':
    configure_logging(config.log_level, config.log_file)
    print("Starting Path Competition Simulator Web Interface...")
    app.run(debug=False, host='0.0.0.0', port=config.port)
