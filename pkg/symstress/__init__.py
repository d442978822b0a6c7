__version__ = "1.0.0"

from dotenv import load_dotenv, find_dotenv
from flask import Flask

from symstress.config import CONFIG_MAP
from symstress.logger import configure_logger


def create_app(env):
    app = Flask(__name__)
    if env in ["development", "local"]:
        load_dotenv(find_dotenv())

    configuration = CONFIG_MAP[env]
    app.config.from_object(configuration)

    configure_logger(app.logger, app.config["LOGLEVEL"])

    from symstress.mod_cli import cli_bp

    app.register_blueprint(cli_bp)

    return app
