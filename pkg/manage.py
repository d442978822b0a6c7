#!/usr/bin/env python
"""
Command line entry point.

Usage:
    python manage.py verify --dim 2 --degree 3
    python manage.py convergence --dim 2 --degree 3 --levels 4 --seed 7 --out conv.csv
    python manage.py infsup --dim 2 --degree 3 --levels 3
    python manage.py solve --problem problem.json --out solution.json
    python manage.py export-mesh --dim 3 --resolution 2 --out mesh.json
"""
import os

from flask.cli import FlaskGroup

from symstress import create_app


def create_cli_app():
    env = os.getenv("ENV", "production")
    return create_app(env)


cli = FlaskGroup(create_app=create_cli_app, add_default_commands=False)

if __name__ == "__main__":
    cli()
