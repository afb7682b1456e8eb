from flask import Flask, jsonify, url_for

import segmentkit.convergence  # noqa: F401 registers the solver, optimizer and sweep settings
from segmentkit.api.oracle import api as api_oracle
from segmentkit.api.segment import api as api_segment
from segmentkit.api.settings import api as api_settings
from segmentkit.api.system import api as api_system
from segmentkit.errors import ArgumentError, ResourceError
from segmentkit.logger import log

app = Flask(__name__)
app.register_blueprint(api_segment, url_prefix='/api/segment', name='segment')
app.register_blueprint(api_oracle, url_prefix='/api/oracle', name='oracle')
app.register_blueprint(api_settings, url_prefix='/api/settings', name='settings')
app.register_blueprint(api_system, url_prefix='/api/system', name='system')


@app.errorhandler(ArgumentError)
def argument_error(e: ArgumentError):
    log.error(f"Rejected request: {e}")
    return jsonify(success=False, error=str(e)), 400


@app.errorhandler(ResourceError)
def resource_error(e: ResourceError):
    log.error(f"Request exceeds a size cap: {e}")
    return jsonify(success=False, error=str(e)), 507


@app.route('/')
def index():
    """List the GET endpoints without parameters"""
    links = sorted(url_for(rule.endpoint) for rule in app.url_map.iter_rules()
                   if "GET" in (rule.methods or set()) and not rule.arguments and rule.endpoint != 'static')
    return jsonify(success=True, endpoints=links)


if __name__ == '__main__':
    app.run()
