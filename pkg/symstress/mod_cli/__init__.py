from .commands import bp as cli_bp

__all__ = ("cli_bp",)
