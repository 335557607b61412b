import configparser
import logging
import logging.handlers
import os.path
from enum import Enum
from os import path

from .errors import UsageError


class Section(str, Enum):
    """Enum specifying required keys for config.ini"""
    version = "version"
    logging = "logging"
    data = "data"
    retrieval = "retrieval"
    fingerprint = "fingerprint"
    index = "index"
    bootstrap = "bootstrap"
    selection = "selection"
    audit = "audit"
    service = "service"


# noinspection SpellCheckingInspection
class Subsection(str, Enum):
    """Enum specifying required subsection keys for config.ini"""
    # version
    major = "major"
    minor = "minor"
    patch = "patch"
    last_updated = "last_updated"
    # logging
    cpm_level = "cpm_level"
    console_level = "console_level"
    file_log_level = "file_log_level"
    logs_directory = "logs_directory"
    filename = "filename"
    format_string = "format_string"
    time_format = "time_format"
    backup_count = "backup_count"
    # data
    schema_version = "schema_version"
    vocab_dir = "vocab_dir"
    # retrieval
    key = "key"
    k = "k"
    temperature = "temperature"
    alpha = "alpha"
    # fingerprint
    nbits = "nbits"
    n_min = "n_min"
    n_max = "n_max"
    # index
    block_size = "block_size"
    threads = "threads"
    # bootstrap
    resamples = "resamples"
    seed = "seed"
    confidence = "confidence"
    # selection
    validation_fraction = "validation_fraction"
    grid_keys = "grid_keys"
    grid_k = "grid_k"
    grid_t = "grid_t"
    target_metric = "target_metric"
    # audit
    exclusion = "exclusion"
    audit_k = "audit_k"
    role = "role"
    # service
    host = "host"
    port = "port"
    max_k = "max_k"
    request_timeout = "request_timeout"


# Kept in step with config.ini; tests/configuration_test.py checks both against the enums.
DEFAULTS = {
    Section.version: {
        Subsection.major: "1",
        Subsection.minor: "0",
        Subsection.patch: "0",
        Subsection.last_updated: "2026-10-18",
    },
    Section.logging: {
        Subsection.cpm_level: "DEBUG",
        Subsection.console_level: "INFO",
        Subsection.file_log_level: "DEBUG",
        Subsection.logs_directory: "logs",
        Subsection.filename: "cpm.log",
        Subsection.format_string: "[%%(levelname)s] %%(name)s (%%(asctime)s): %%(message)s",
        Subsection.time_format: "%%Y-%%m-%%d @ %%H:%%M:%%S",
        Subsection.backup_count: "90",
    },
    Section.data: {
        Subsection.schema_version: "1",
        Subsection.vocab_dir: "",
    },
    Section.retrieval: {
        Subsection.key: "rxn",
        Subsection.k: "10",
        Subsection.temperature: "uniform",
        Subsection.alpha: "0.5",
    },
    Section.fingerprint: {
        Subsection.nbits: "2048",
        Subsection.n_min: "1",
        Subsection.n_max: "3",
    },
    Section.index: {
        Subsection.block_size: "8192",
        Subsection.threads: "1",
    },
    Section.bootstrap: {
        Subsection.resamples: "10000",
        Subsection.seed: "20240607",
        Subsection.confidence: "0.95",
    },
    Section.selection: {
        Subsection.validation_fraction: "0.1",
        Subsection.grid_keys: "rxn, rxn+delta",
        Subsection.grid_k: "1, 5, 10, 31",
        Subsection.grid_t: "uniform, 0.05, 0.07, 0.1",
        Subsection.target_metric: "mean_acc@1",
    },
    Section.audit: {
        Subsection.exclusion: "all",
        Subsection.audit_k: "5",
        Subsection.role: "reagent",
    },
    Section.service: {
        Subsection.host: "127.0.0.1",
        Subsection.port: "8080",
        Subsection.max_k: "100",
        Subsection.request_timeout: "10",
    },
}


class Config:
    """Singleton container wrapping configparser calls."""
    config = configparser.ConfigParser()
    files_loaded = []

    @classmethod
    def __init__(cls, *in_files, clear_before_load=False):
        if clear_before_load or not cls.config.sections():
            cls.clear()

        for f in in_files:
            cls.load_file(f)

    @classmethod
    def __str__(cls):
        # noinspection SpellCheckingInspection
        fillable = ", ".join(["{!r}"] * len(cls.files_loaded))
        return "Config({})".format(fillable.format(*cls.files_loaded))

    @classmethod
    def clear(cls):
        """Drops every loaded file and falls back to the built-in defaults."""
        cls.config.clear()
        cls.config.read_dict({section.value: {key.value: value for key, value in keys.items()}
                              for section, keys in DEFAULTS.items()})
        cls.files_loaded = []

    @classmethod
    def get(cls, *items):
        c = cls.config
        for item in items:
            c = c[item]
        return c

    def __getitem__(self, item):
        return self.config[item]

    @classmethod
    def set(cls, section, key, value):
        """Overrides a single value, e.g. from a command-line flag."""
        cls.config[section][key] = str(value)

    @classmethod
    def get_int(cls, section, key) -> int:
        return cls._typed(section, key, int)

    @classmethod
    def get_float(cls, section, key) -> float:
        return cls._typed(section, key, float)

    @classmethod
    def get_list(cls, section, key) -> list:
        raw = cls.get(section, key)
        return [item.strip() for item in raw.split(",") if item.strip()]

    @classmethod
    def _typed(cls, section, key, cast):
        raw = cls.get(section, key)
        try:
            return cast(raw)
        except ValueError:
            raise UsageError("Config value [{}] {} = '{}' is not a valid {}.".format(
                getattr(section, "value", section), getattr(key, "value", key), raw, cast.__name__))

    @classmethod
    def load_file(cls, f):
        if not path.exists(f):
            raise FileNotFoundError("Cannot find configuration file '{}'.".format(f))
        cls.files_loaded.append(f)
        cls.config.read(f)


Config.clear()


def get_version_and_updated():
    info = Config()[Section.version]
    major = info.get("major")
    minor = info.get("minor")
    patch = info.get("patch")
    version_string = "{}.{}.{}".format(major, minor, patch)
    return version_string, Config.get(Section.version, Subsection.last_updated)


def get_version():
    return get_version_and_updated()[0]


def configure_logging(log_to_file=True):
    logging_config = Config.get(Section.logging)
    root_logger = logging.getLogger()
    set_log_levels(logging_config)

    formatter = logging.Formatter(logging_config.get(Subsection.format_string))
    formatter.datefmt = logging_config.get(Subsection.time_format)

    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(formatter)
    stream_handler.setLevel(logging_config.get(Subsection.console_level))
    root_logger.addHandler(stream_handler)

    if not log_to_file:
        return

    logs_directory = Config.get(Section.logging, Subsection.logs_directory)
    if not os.path.exists(logs_directory):
        os.makedirs(logs_directory)
    elif not os.path.isdir(logs_directory):
        raise FileExistsError("Non-directory file '{}' already exists.".format(logs_directory))

    log_filename = logs_directory + os.sep + Config.get(Section.logging, Subsection.filename)
    file_handler = logging.handlers.TimedRotatingFileHandler(
        filename=log_filename, when='midnight',
        backupCount=Config.get_int(Section.logging, Subsection.backup_count))
    file_handler.setFormatter(formatter)
    file_handler.setLevel(logging_config.get(Subsection.file_log_level))
    root_logger.addHandler(file_handler)


def set_log_levels(logging_config):
    root = logging.getLogger()
    cpm = logging.getLogger("cpm")
    werkzeug = logging.getLogger("werkzeug")

    root.setLevel(logging.DEBUG)
    cpm.setLevel(logging_config.get(Subsection.cpm_level))
    werkzeug.setLevel(logging.WARNING)
