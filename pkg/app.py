"""
Flask application for latin-parity
Serves the censuses, formulas and square operations over HTTP
"""
import logging
import sys
from datetime import datetime

from flask import Flask, jsonify, request

from config import config
from database import init_db
from services.routes.census import census_bp
from services.routes.formulas import formulas_bp
from services.routes.runs import runs_bp
from services.routes.squares import squares_bp


def create_app(database_url: str = None):
    """Create and configure the Flask application"""

    app = Flask(__name__)
    app.config.from_object(config)

    try:
        config.validate_config()
        app.logger.info("✓ Configuration validated successfully")
    except ValueError as e:
        app.logger.error(f"✗ Configuration error: {e}")
        raise

    with app.app_context():
        try:
            init_db(database_url)
            app.logger.info("✓ Database initialized")
        except Exception as e:
            app.logger.error(f"✗ Database initialization failed: {e}")
            raise

    app.register_blueprint(census_bp)
    app.register_blueprint(formulas_bp)
    app.register_blueprint(squares_bp)
    app.register_blueprint(runs_bp)
    app.logger.info("✓ Blueprints registered")

    if not app.debug:
        app.logger.setLevel(logging.INFO)

    @app.before_request
    def log_request_info():
        if request.path.startswith('/api/'):
            app.logger.info(f"API Request: {request.method} {request.path}")

    @app.errorhandler(ValueError)
    def bad_request(error):
        app.logger.warning(f"Rejected request {request.path}: {error}")
        return jsonify({
            'success': False,
            'message': str(error)
        }), 400

    @app.errorhandler(404)
    def not_found(error):
        return jsonify({
            'success': False,
            'message': 'Resource not found'
        }), 404

    @app.errorhandler(500)
    def internal_error(error):
        app.logger.error(f"Internal server error: {str(error)}")
        return jsonify({
            'success': False,
            'message': 'Internal server error'
        }), 500

    @app.route('/health', methods=['GET'])
    def health_check():
        """Health check endpoint for monitoring"""
        return jsonify({
            'status': 'healthy',
            'service': 'latin-parity',
            'version': config.VERSION,
            'timestamp': datetime.now().isoformat(),
            'python_version': sys.version,
        }), 200

    @app.route('/', methods=['GET'])
    def index():
        """Root endpoint with API information"""
        return jsonify({
            'service': 'latin-parity',
            'version': config.VERSION,
            'status': 'running',
            'endpoints': {
                'census': '/api/v1/census',
                'formulas': '/api/v1/formulas',
                'squares': '/api/v1/squares',
                'runs': '/api/v1/runs',
                'health': '/health'
            },
        }), 200

    app.logger.info("✓ Flask application created successfully")
    return app


if __name__ == '__main__':
    print("Starting latin-parity API in development mode...")
    create_app().run(
        host='0.0.0.0',
        port=5000,
        debug=config.DEBUG
    )
