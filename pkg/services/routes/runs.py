"""
Stored experiment runs (written by the CLI with --store)
"""
import logging

from flask import Blueprint, jsonify, request
from sqlalchemy.orm import Session

from database import get_db
from models import ExperimentRun, RunStatus

logger = logging.getLogger(__name__)

runs_bp = Blueprint('runs', __name__, url_prefix='/api/v1/runs')


@runs_bp.route('', methods=['GET'])
def list_runs():
    """Most recent runs first; optional filters: command, status"""
    db: Session = next(get_db())
    query = db.query(ExperimentRun)
    command = request.args.get('command')
    if command:
        query = query.filter(ExperimentRun.command == command)
    status = request.args.get('status')
    if status:
        try:
            query = query.filter(ExperimentRun.status == RunStatus(status.upper()))
        except ValueError:
            raise ValueError(f'Invalid status: {status}. Must be one of {[s.value for s in RunStatus]}')
    runs = query.order_by(ExperimentRun.created_at.desc()).limit(100).all()
    return jsonify({'success': True, 'data': [r.to_dict() for r in runs]}), 200


@runs_bp.route('/<run_id>', methods=['GET'])
def get_run(run_id):
    db: Session = next(get_db())
    run = db.query(ExperimentRun).filter(ExperimentRun.id == run_id).first()
    if not run:
        logger.warning(f"run not found: {run_id}")
        return jsonify({'success': False, 'message': 'Run not found'}), 404
    return jsonify({'success': True, 'data': run.to_dict()}), 200
