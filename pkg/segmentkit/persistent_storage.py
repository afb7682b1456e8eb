"""Directory for state that outlives a run (settings.json)."""
import os

PERSISTENT_STORAGE_DIR = os.path.join(os.path.dirname(__file__), ".persistent_storage")


def get_filename(filename: str) -> str:
    """ Path of a file under the storage directory; missing parent directories are created. """
    full_name = os.path.join(PERSISTENT_STORAGE_DIR, filename)
    os.makedirs(os.path.dirname(full_name), exist_ok=True)
    return full_name


def set_persistent_storage_dir(path: str) -> None:
    global PERSISTENT_STORAGE_DIR
    PERSISTENT_STORAGE_DIR = os.path.abspath(os.path.expanduser(path))
