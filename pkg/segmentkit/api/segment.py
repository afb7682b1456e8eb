from flask import Blueprint, current_app, jsonify, request

from segmentkit import documents
from segmentkit.cli import RunConfig, segment_document, solve_partition_document
from segmentkit.errors import ArgumentError
from segmentkit.grid import ContinuousSignal, DiscreteSignal
from segmentkit.logger import log

api = Blueprint('api', __name__)

REQUEST_FIELDS = ('gamma', 'mu', 'n', 't', 'model', 'nref', 'modes', 'cap', 'partition')


def signal_from_request(data: dict) -> DiscreteSignal | ContinuousSignal:
    if 'samples' in data:
        return DiscreteSignal.from_values(data['samples'])
    if 'pieces' in data:
        return ContinuousSignal.from_pieces(data['pieces'])
    raise ArgumentError("Request needs 'samples' or 'pieces'")


def config_from_request(command: str, data: dict) -> RunConfig:
    unknown = set(data) - set(REQUEST_FIELDS) - {'samples', 'pieces'}
    if unknown:
        raise ArgumentError(f"Unknown fields: {', '.join(sorted(unknown))}")
    try:
        return RunConfig(command, **{key: data[key] for key in REQUEST_FIELDS if data.get(key) is not None})
    except TypeError as e:
        raise ArgumentError(f"Malformed request: {e}") from e


def document_response(doc: dict):
    return current_app.response_class(documents.dumps({'success': True, 'result': doc}),
                                      mimetype='application/json')


@api.route('', methods=['POST'])
def segment():
    """API endpoint to globally minimize a functional"""
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        return jsonify(success=False, error="Expected a JSON object"), 400

    doc = segment_document(signal_from_request(data), config_from_request('segment', data))
    log.debug(f"Segment request answered: {doc['payload']['partition']['points']}")
    return document_response(doc)


@api.route('/partition', methods=['POST'])
def solve_partition():
    """API endpoint to solve on a fixed partition"""
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        return jsonify(success=False, error="Expected a JSON object"), 400
    if isinstance(data.get('partition'), list):
        data = {**data, 'partition': ','.join(str(x) for x in data['partition'])}

    doc = solve_partition_document(signal_from_request(data), config_from_request('solve-partition', data))
    return document_response(doc)
