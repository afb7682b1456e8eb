import contextlib
import json
from typing import Any, Iterator
from segmentkit.logger import log
import segmentkit.persistent_storage as persistent_storage


class _Setting:
    def __init__(self, name: str, default: Any, description: str = "", minimum: float | None = None):
        self.name = name
        self._default = default
        self.description = description
        self.type = type(default)
        self.minimum = minimum
        self.value = default

    @property
    def default(self) -> Any:
        return self._default

    def parse(self, value: object) -> Any:
        """ Coerce a raw value (JSON, command line) to the setting's type and check its bound. """
        if self.type is int and isinstance(value, float) and not value.is_integer():
            raise ValueError(f"Setting '{self.name}' expects an integer, got {value}")
        try:
            parsed = self.type(value)
        except (TypeError, ValueError) as e:
            raise ValueError(f"Setting '{self.name}' expects {self.type.__name__}, got {value!r}") from e

        if self.minimum is not None and parsed < self.minimum:
            raise ValueError(f"Setting '{self.name}' must be >= {self.minimum}, got {parsed}")
        return parsed

    def to_json(self) -> dict:
        return {
            'name': self.name,
            'value': self.value,
            'default': self.default,
            'description': self.description,
            'type': self.type.__name__
        }


class _Settings:
    def __init__(self, settings_file: str = 'settings.json'):
        self._settings: dict[str, _Setting] = {}
        self._settings_file: str = settings_file
        self._loaded_settings: dict[str, Any] = {}
        self._load()

    def __getitem__(self, key: str) -> Any:
        return self.get(key).value

    def __setitem__(self, key: str, value: object):
        self.set(key, value)

    @property
    def all_settings(self) -> dict[str, _Setting]:
        return self._settings

    def get(self, key: str) -> _Setting:
        try:
            return self._settings[key]
        except KeyError as e:
            raise KeyError(f"Setting '{key}' not found") from e

    def register(self, key: str, default: object, description: str = "", minimum: float | None = None):
        if key in self._settings:
            raise KeyError(f"Setting '{key}' is already registered")

        setting = _Setting(key, default, description, minimum)
        self._settings[key] = setting

        if key in self._loaded_settings:
            setting.value = setting.parse(self._loaded_settings[key])
            log.info(f"Loaded setting '{key}' with value '{setting.value}' from file")

        log.debug(f"Registered setting '{key}' with default '{default}'")

    def set(self, key: str, value: object, save: bool = True):
        setting = self.get(key)
        setting.value = setting.parse(value)
        log.info(f"Set setting '{key}' to '{setting.value}'")
        if save:
            self._save()

    @contextlib.contextmanager
    def override(self, **values: object) -> Iterator[None]:
        """ Temporarily set values without persisting; keys use '__' for '.'. """
        previous = {}
        try:
            for name, value in values.items():
                key = name.replace('__', '.')
                previous[key] = self.get(key).value
                self.set(key, value, save=False)
            yield
        finally:
            for key, value in previous.items():
                self._settings[key].value = value

    def _save(self):
        filename = persistent_storage.get_filename(self._settings_file)

        save_data = {}
        for key, setting in self._settings.items():
            if setting.value is not None and setting.value != setting.default:
                save_data[key] = setting.value

        with open(filename, 'w') as f:
            json.dump(save_data, f, indent=4)
        log.info(f"Saved settings to {filename}")

    def _load(self):
        filename = persistent_storage.get_filename(self._settings_file)
        try:
            with open(filename, 'r') as f:
                self._loaded_settings = json.load(f)
                log.info(f"Loaded settings from {filename}")
        except FileNotFoundError:
            self._loaded_settings = {}
            log.debug(f"Settings file {filename} not found, using defaults")

    def reload(self):
        """ Re-read the settings file, e.g. after the persistent storage directory changed. """
        self._load()
        for key, setting in self._settings.items():
            if key in self._loaded_settings:
                setting.value = setting.parse(self._loaded_settings[key])
            else:
                setting.value = setting.default

    def restore_defaults(self):
        for _, setting in self._settings.items():
            setting.value = setting.default
        log.info("Restored all settings to default values")
        self._save()


settings = _Settings()
