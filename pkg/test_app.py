import pytest

from app import create_app


@pytest.fixture
def client(tmp_path):
    app = create_app(f"sqlite:///{tmp_path / 'api.db'}")
    app.config['TESTING'] = True
    return app.test_client()


def test_health(client):
    response = client.get('/health')
    assert response.status_code == 200
    assert response.get_json()['status'] == 'healthy'


def test_index_lists_endpoints(client):
    data = client.get('/').get_json()
    assert data['endpoints']['census'] == '/api/v1/census'


def test_unknown_route(client):
    response = client.get('/api/v1/nothing')
    assert response.status_code == 404
    assert response.get_json() == {'success': False, 'message': 'Resource not found'}


class TestCensus:
    def test_tally(self, client):
        response = client.get('/api/v1/census/tally', query_string={'n': 4, 'class': 'reduced'})
        assert response.status_code == 200
        body = response.get_json()
        assert body['success'] is True
        assert body['data']['total'] == 4

    def test_size_guard(self, client):
        response = client.get('/api/v1/census/tally', query_string={'n': 9, 'class': 'all'})
        assert response.status_code == 400
        assert 'size guard' in response.get_json()['message']

    def test_missing_parameter(self, client):
        response = client.get('/api/v1/census/tally')
        assert response.status_code == 400
        assert response.get_json()['success'] is False

    def test_verify(self, client):
        data = client.get('/api/v1/census/verify', query_string={'n': 4}).get_json()['data']
        assert data['passed'] is True
        assert data['checks'][0]['status'] == 'PASS'

    def test_alon_tarsi(self, client):
        data = client.get('/api/v1/census/alon-tarsi', query_string={'n': 4}).get_json()['data']
        assert data['difference'] == 4


class TestFormulas:
    def test_gamma(self, client):
        data = client.get('/api/v1/formulas/gamma', query_string={'lambda': '3^1 2^1'}).get_json()['data']
        assert data['gamma'] == 20
        assert data['lambda'] == '2^1 3^1'

    def test_long_cycle_prob(self, client):
        data = client.get('/api/v1/formulas/long-cycle-prob', query_string={'n': 4}).get_json()['data']
        assert data['probability'] == '7/12'

    def test_wilf(self, client):
        data = client.get('/api/v1/formulas/wilf', query_string={'n': 4}).get_json()['data']
        assert data['proportion'] == '3/8'

    def test_split_set(self, client):
        data = client.get('/api/v1/formulas/split-set',
                          query_string={'lambda': '8^1 2^2', 'z': 8}).get_json()['data']
        assert data['splits'] == [{'a': 3, 'b': 5, 'mu': '2^2 3^1 5^1', 'ratio': '8/15'}]
        assert data['w'] == 1

    def test_split_bound(self, client):
        assert client.get('/api/v1/formulas/split-bound', query_string={'z': 10}).get_json()['data']['holds']
        assert client.get('/api/v1/formulas/split-bound', query_string={'z': 9}).status_code == 400


class TestSquares:
    def test_classify(self, client):
        response = client.post('/api/v1/squares/classify', json={'grid': [[1, 2], [2, 1]]})
        data = response.get_json()['data']
        assert data['parity'] == '111'
        assert 'SOLS' in data['properties']

    def test_classify_rejects_non_latin(self, client):
        response = client.post('/api/v1/squares/classify', json={'grid': [[1, 2], [1, 2]]})
        assert response.status_code == 400
        assert 'column 1 duplicate' in response.get_json()['message']

    def test_missing_grid(self, client):
        assert client.post('/api/v1/squares/classify', json={}).status_code == 400

    def test_cycles(self, client, switchable_five):
        response = client.post('/api/v1/squares/cycles',
                               json={'grid': [list(r) for r in switchable_five.grid], 'rows': [4, 5]})
        cycles = response.get_json()['data']['cycles']
        assert [c['columns'] for c in cycles] == [[1, 2], [3, 4, 5]]

    def test_involution(self, client, switchable_five, switched_five):
        response = client.post('/api/v1/squares/involution', json={'grid': [list(r) for r in switchable_five.grid]})
        data = response.get_json()['data']
        assert data['grid'] == [list(r) for r in switched_five.grid]

    def test_involution_outside_domain(self, client, cyclic_three):
        response = client.post('/api/v1/squares/involution',
                               json={'grid': [list(r) for r in cyclic_three.grid], 'extended': True})
        assert response.status_code == 200
        assert response.get_json()['data'] is None

    def test_switch_rejects_foreign_cycle(self, client, switchable_five):
        response = client.post('/api/v1/squares/switch', json={
            'grid': [list(r) for r in switchable_five.grid], 'rows': [4, 5], 'columns': [2, 3],
        })
        assert response.status_code == 400

    @pytest.mark.parametrize('payload', [
        {'rows': [4, 5], 'columns': 3},
        {'rows': [4, 5], 'columns': [None, 4]},
        {'rows': [None, 5], 'columns': [3, 4, 5]},
    ])
    def test_switch_rejects_malformed_fields(self, client, switchable_five, payload):
        payload = dict(payload, grid=[list(r) for r in switchable_five.grid])
        response = client.post('/api/v1/squares/switch', json=payload)
        assert response.status_code == 400
        assert response.get_json()['success'] is False

    def test_switch_rejects_repeated_column(self, client, switchable_five):
        response = client.post('/api/v1/squares/switch', json={
            'grid': [list(r) for r in switchable_five.grid], 'rows': [4, 5], 'columns': [3, 4, 5, 5],
        })
        assert response.status_code == 400
        assert 'repeated column' in response.get_json()['message']

    @pytest.mark.parametrize('grid', [5, [1, 2], [[1, None], [2, 1]]])
    def test_classify_rejects_malformed_grid(self, client, grid):
        response = client.post('/api/v1/squares/classify', json={'grid': grid})
        assert response.status_code == 400
        assert 'grid must be' in response.get_json()['message']


class TestRuns:
    def test_empty_list(self, client):
        response = client.get('/api/v1/runs')
        assert response.status_code == 200
        assert response.get_json()['data'] == []

    def test_unknown_run(self, client):
        assert client.get('/api/v1/runs/missing').status_code == 404

    def test_bad_status_filter(self, client):
        assert client.get('/api/v1/runs', query_string={'status': 'sleeping'}).status_code == 400
