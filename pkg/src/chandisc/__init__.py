"""Sequential binary discrimination of finite-dimensional quantum channels:
divergence quantities, adaptive SPRT strategies with Monte-Carlo simulation,
and achievable / converse error-exponent regions."""

__version__ = "0.1.0"

from .errors import ChandiscError  # noqa: F401
