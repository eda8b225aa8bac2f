"""
Formula routes for latin-parity
Exact derangement and split formulas; rationals are returned as 'p/q' strings
"""
import logging

from flask import Blueprint, jsonify, request

from config import config
from services.partitions import (
    Partition,
    gamma,
    gamma_ratio,
    long_cycle_prob,
    split_bound,
    split_set,
    wilf_no_odd,
)
from services.routes.census import int_arg

logger = logging.getLogger(__name__)

# Create blueprint
formulas_bp = Blueprint('formulas', __name__, url_prefix='/api/v1/formulas')


def _partition_arg() -> Partition:
    text = request.args.get('lambda')
    if not text:
        raise ValueError('Missing required parameter: lambda')
    return Partition.parse(text)


@formulas_bp.route('/gamma', methods=['GET'])
def get_gamma():
    """
    Derangements with a given cycle type

    Query: lambda, e.g. "3^1 2^1"
    """
    lam = _partition_arg()
    return jsonify({'success': True, 'data': {'lambda': str(lam), 'm': lam.m, 'gamma': gamma(lam)}}), 200


@formulas_bp.route('/long-cycle-prob', methods=['GET'])
def get_long_cycle_prob():
    n = int_arg('n')
    log_base = request.args.get('log_base', config.LOG_BASE)
    value = long_cycle_prob(n, log_base)
    return jsonify({'success': True, 'data': {'n': n, 'probability': str(value), 'float': float(value)}}), 200


@formulas_bp.route('/wilf', methods=['GET'])
def get_wilf():
    n = int_arg('n')
    value = wilf_no_odd(n)
    return jsonify({'success': True, 'data': {'n': n, 'proportion': str(value), 'float': float(value)}}), 200


@formulas_bp.route('/split-set', methods=['GET'])
def get_split_set():
    """Odd splits of one part z of an all-even partition, with their γ ratios"""
    lam = _partition_arg()
    z = int_arg('z')
    result = split_set(lam, z)
    return jsonify({
        'success': True,
        'data': {
            'lambda': str(lam),
            'z': z,
            'w': result.w,
            'splits': [
                {'a': a, 'b': b, 'mu': str(mu), 'ratio': str(gamma_ratio(lam, z, a))}
                for a, b, mu in result
            ],
            'excluded': [{'a': a, 'b': b, 'reason': reason} for a, b, reason in result.excluded],
        },
    }), 200


@formulas_bp.route('/split-bound', methods=['GET'])
def get_split_bound():
    z = int_arg('z')
    result = split_bound(z)
    return jsonify({
        'success': True,
        'data': {
            'z': z,
            'w': result.w,
            'sum': float(result.sum),
            'bound': float(result.bound),
            'holds': result.holds,
        },
    }), 200
