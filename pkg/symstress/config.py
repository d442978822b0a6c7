import os
basedir = os.path.abspath(os.path.dirname(__file__))


def _flag(name, default="false"):
    return os.environ.get(name, default).lower() in ("1", "true", "yes", "on")


class Config(object):
    LOGLEVEL = os.environ.get("LOGLEVEL", "DEBUG")

    # Resource guards
    CELL_BUDGET = int(os.environ.get("SYMSTRESS_CELL_BUDGET", "20000"))
    DENSE_LIMIT = int(os.environ.get("SYMSTRESS_DENSE_LIMIT", "4000"))  # unknowns

    # Per-cell element construction
    THREADS = int(os.environ.get("SYMSTRESS_THREADS", "1"))
    DETERMINISTIC_REDUCTION = _flag("SYMSTRESS_DETERMINISTIC")

    # Acceptance policy
    INFSUP_FLOOR = float(os.environ.get("SYMSTRESS_INFSUP_FLOOR", "1e-4"))
    INFSUP_RATIO = float(os.environ.get("SYMSTRESS_INFSUP_RATIO", "2.0"))
    RATE_SLACK = float(os.environ.get("SYMSTRESS_RATE_SLACK", "0.3"))

    OUTPUT_DIR = os.environ.get("SYMSTRESS_OUTPUT_DIR", os.getcwd())


class Development(Config):
    LOGLEVEL = os.environ.get("LOGLEVEL", "DEBUG")
    DEBUG = True


class Testing(Config):
    LOGLEVEL = os.environ.get("LOGLEVEL", "WARNING")
    TESTING = True
    DETERMINISTIC_REDUCTION = True


class Production(Config):
    LOGLEVEL = os.environ.get("LOGLEVEL", "INFO")


CONFIG_MAP = {"local": Development, "development": Development, "testing": Testing, "production": Production}
