"""
Square routes for latin-parity
Parity and classification of a posted grid, row cycles and switches
"""
import logging

from flask import Blueprint, jsonify, request

from services.cycles import RowCycle, extended_involution, involution, row_cycles, switch
from services.latin_square import classify, validate

logger = logging.getLogger(__name__)

# Create blueprint
squares_bp = Blueprint('squares', __name__, url_prefix='/api/v1/squares')


def _body() -> dict:
    data = request.get_json(silent=True)
    if not isinstance(data, dict) or 'grid' not in data:
        raise ValueError('Missing required field: grid')
    return data


def _rows(data: dict):
    rows = data.get('rows')
    if not isinstance(rows, list) or len(rows) != 2:
        raise ValueError('rows must be a list of two row indices')
    try:
        return int(rows[0]), int(rows[1])
    except TypeError:
        raise ValueError('rows must be a list of two row indices')


def _square_payload(square) -> dict:
    return {'n': square.n, 'grid': [list(row) for row in square.grid], 'parity': str(square.parity_triple())}


@squares_bp.route('/classify', methods=['POST'])
def classify_square():
    """
    Parity triple and properties of a grid

    Request Body:
    {
        "grid": [[1, 2], [2, 1]]
    }

    Response:
    {
        "success": true,
        "data": {"n": 2, "parity": "111", "properties": ["COLS", ...]}
    }
    """
    square = validate(_body()['grid'])
    props = sorted(p.value for p in classify(square))
    return jsonify({
        'success': True,
        'data': {'n': square.n, 'parity': str(square.parity_triple()), 'properties': props},
    }), 200


@squares_bp.route('/cycles', methods=['POST'])
def list_cycles():
    data = _body()
    square = validate(data['grid'])
    x, y = _rows(data)
    cycles = [{'rows': list(c.rows), 'columns': list(c.columns), 'length': c.length}
              for c in row_cycles(square, x, y)]
    return jsonify({'success': True, 'data': {'cycles': cycles}}), 200


@squares_bp.route('/switch', methods=['POST'])
def switch_cycle():
    """Switch the row cycle given by rows and columns"""
    data = _body()
    square = validate(data['grid'])
    columns = data.get('columns')
    if not isinstance(columns, list):
        raise ValueError('columns must be a list of column indices')
    try:
        cycle = RowCycle(_rows(data), tuple(int(c) for c in columns))
    except TypeError:
        raise ValueError('columns must be a list of column indices')
    result = switch(square, cycle)
    logger.info(f"switched {cycle}: {square.parity_triple()} -> {result.parity_triple()}")
    return jsonify({'success': True, 'data': _square_payload(result)}), 200


@squares_bp.route('/involution', methods=['POST'])
def apply_involution():
    """Apply the (extended) involution to a reduced square; data is null outside its domain"""
    data = _body()
    square = validate(data['grid'])
    fn = extended_involution if data.get('extended') else involution
    result = fn(square)
    if result is None:
        return jsonify({'success': True, 'message': 'square is outside the domain', 'data': None}), 200
    return jsonify({'success': True, 'data': _square_payload(result)}), 200
