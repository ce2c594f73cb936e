"""
HTTP endpoints of the web interface.
"""

import math

import pytest

from api.app import app
from logic.model.serialization import model_to_dict

SQRT3_HALF = math.sqrt(3) / 2


@pytest.fixture
def client():
    app.config['TESTING'] = True
    with app.test_client() as client:
        yield client


@pytest.fixture
def two_path_document(symmetric_two_path):
    return model_to_dict(symmetric_two_path)


def test_health(client):
    response = client.get('/health')
    assert response.status_code == 200
    body = response.get_json()
    assert body['status'] == 'healthy'
    assert 'two-path' in body['solvers']
    assert 'all' in body['suites']


def test_solve(client, two_path_document):
    response = client.post('/solve', json={'model': two_path_document, 'solver': 'two-path'})
    assert response.status_code == 200
    body = response.get_json()
    assert body['path_valuations']['r'] == pytest.approx(SQRT3_HALF)
    assert body['solver'] == 'two-path'


def test_solve_rejects_unknown_solver(client, two_path_document):
    response = client.post('/solve', json={'model': two_path_document, 'solver': 'oracle'})
    assert response.status_code == 400
    assert 'solver' in response.get_json()['error']


@pytest.mark.parametrize("payload", [
    {'solver': 'two-path'},
    {'solver': 'two-path', 'model': {'isps': []}},
    {'solver': 'two-path', 'model': 'model.json'},
])
def test_solve_rejects_bad_models(client, payload):
    response = client.post('/solve', json=payload)
    assert response.status_code == 400
    assert response.get_json()['kind'] == 'ModelValidationError'


def test_solve_outside_the_solver_scope(client, monopoly):
    response = client.post('/solve', json={'model': model_to_dict(monopoly), 'solver': 'two-path'})
    assert response.status_code == 400
    assert response.get_json()['kind'] == 'UnsupportedScopeError'


def test_numeric_failures_are_unprocessable(client, monopoly):
    document = model_to_dict(monopoly)
    document['isps'][0]['gamma'] = [0.0]
    response = client.post('/solve', json={'model': document, 'solver': 'single-path'})
    assert response.status_code == 422
    assert response.get_json()['kind'] == 'DegenerateCostError'


def test_body_must_be_json(client):
    response = client.post('/solve', data='not json', content_type='text/plain')
    assert response.status_code == 400


def test_dynamics(client, two_path_document):
    response = client.post('/dynamics', json={
        'model': two_path_document, 'mode': 'round-robin', 'eta': 0.5, 'tol': 1e-10,
        'start': [[0.1], [2.0]], 'stability': True,
    })
    assert response.status_code == 200
    body = response.get_json()
    assert body['converged']
    assert [row[0] for row in body['final_state']] == pytest.approx([SQRT3_HALF, SQRT3_HALF], abs=1e-6)
    assert body['stability']['classification'] == 'stable'


@pytest.mark.parametrize("settings", [
    {'mode': 'gradient'},
    {'eta': 2.0},
    {'start': 'ones'},
    {'start': [[1.0]]},
])
def test_dynamics_rejects_bad_settings(client, two_path_document, settings):
    response = client.post('/dynamics', json={'model': two_path_document, **settings})
    assert response.status_code == 400


def test_verify(client):
    response = client.post('/verify', json={'suite': 'best-response', 'count': 5, 'seed': 3})
    assert response.status_code == 200
    body = response.get_json()
    assert body['ok']
    assert body['reports'][0]['suite'] == 'best-response'
    assert body['reports'][0]['passed'] > 0


@pytest.mark.parametrize("payload", [
    {'suite': 'everything'},
    {'suite': 'homogeneous', 'count': 0},
    {'suite': 'homogeneous', 'count': 5000},
    {'suite': 'homogeneous', 'count': 'ten'},
])
def test_verify_rejects_bad_requests(client, payload):
    response = client.post('/verify', json=payload)
    assert response.status_code == 400
