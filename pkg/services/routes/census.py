"""
Census routes for latin-parity
Parity tallies, the table of identities and the class relations
"""
import logging

from flask import Blueprint, jsonify, request

from services.enumeration import alon_tarsi, class_relations, tally, verify_identities

logger = logging.getLogger(__name__)

# Create blueprint
census_bp = Blueprint('census', __name__, url_prefix='/api/v1/census')


def int_arg(name: str, default=None) -> int:
    value = request.args.get(name, default)
    if value is None:
        raise ValueError(f'Missing required parameter: {name}')
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ValueError(f'Parameter {name} must be an integer, got {value!r}')


def _report_payload(report) -> dict:
    return {
        'n': report.n,
        'title': report.title,
        'passed': report.passed,
        'checks': [
            {'lhs': c.lhs_expr, 'rhs': c.rhs_expr, 'lhs_value': c.lhs, 'rhs_value': c.rhs, 'status': c.status}
            for c in report.checks
        ],
    }


@census_bp.route('/tally', methods=['GET'])
def get_tally():
    """
    Parity-triple counts of a class

    Query: n (int), class (all|reduced|normalised_unipotent, default reduced)

    Response:
    {
        "success": true,
        "data": {"n": 4, "class": "reduced", "counts": {...}, "total": 4}
    }
    """
    n = int_arg('n')
    klass = request.args.get('class', 'reduced')
    logger.info(f"tally request: n={n}, class={klass}")
    result = tally(n, klass)
    return jsonify({'success': True, 'data': result.to_dict()}), 200


@census_bp.route('/alon-tarsi', methods=['GET'])
def get_alon_tarsi():
    n = int_arg('n')
    klass = request.args.get('class', 'reduced')
    return jsonify({'success': True, 'data': {'n': n, 'class': klass, 'difference': alon_tarsi(n, klass)}}), 200


@census_bp.route('/verify', methods=['GET'])
def get_verify():
    """Table of identities for reduced and normalised unipotent squares of order n"""
    n = int_arg('n')
    report = verify_identities(n)
    if not report.passed:
        logger.warning(f"identities failed for n={n}: {len(report.failures)} failure(s)")
    return jsonify({'success': True, 'data': _report_payload(report)}), 200


@census_bp.route('/relations', methods=['GET'])
def get_relations():
    n = int_arg('n')
    report = class_relations(n)
    return jsonify({'success': True, 'data': _report_payload(report)}), 200
