import os
import platform
import threading
import time

import psutil
from flask import Blueprint, jsonify

import segmentkit
import segmentkit.persistent_storage as persistent_storage

api = Blueprint('api', __name__)


@api.route('/info', methods=['GET'])
def info():
    """API endpoint to get host and process information"""
    memory = psutil.virtual_memory()
    process = psutil.Process()

    return jsonify({
        'success': True,
        'version': segmentkit.__version__,
        'python': platform.python_version(),
        'hostname': platform.node(),
        'architecture': platform.machine(),
        'persistent_storage_dir': persistent_storage.PERSISTENT_STORAGE_DIR,
        'system_uptime': time.time() - psutil.boot_time(),
        'cpu_count': psutil.cpu_count(),
        'cpu_percent': psutil.cpu_percent(),
        'memory': {
            'total': memory.total,
            'used': memory.used,
            'free': memory.available,
            'percent_used_%': memory.percent,
        },
        'threads': [{'name': t.name, 'id': t.ident} for t in threading.enumerate()],
        'process': {
            'pid': os.getpid(),
            'memory_info': process.memory_info()._asdict(),
            'cpu_times': process.cpu_times()._asdict(),
            'process_uptime': time.time() - process.create_time(),
            'num_threads': process.num_threads(),
        },
    })
