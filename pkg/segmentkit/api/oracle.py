from flask import Blueprint, current_app, jsonify, request

from segmentkit import documents
from segmentkit.cli import RunConfig, oracle_document
from segmentkit.errors import ArgumentError

api = Blueprint('api', __name__)


@api.route('', methods=['POST'])
def oracle():
    """API endpoint to cross-check the dynamic program against brute force on random instances"""
    data = request.get_json(silent=True) or {}
    fields = {key: data[key] for key in ('seed', 'instances', 'n', 'gamma', 'mu', 'cap') if data.get(key) is not None}
    try:
        cfg = RunConfig('oracle', **fields)
    except TypeError as e:
        raise ArgumentError(f"Malformed request: {e}") from e

    doc = oracle_document(cfg)
    agreed = not doc['payload']['mismatches']
    if not agreed:
        return jsonify(success=False, error="Dynamic program and brute force disagree",
                       mismatches=doc['payload']['mismatches']), 409
    return current_app.response_class(documents.dumps({'success': True, 'result': doc}),
                                      mimetype='application/json')
