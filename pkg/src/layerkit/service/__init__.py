"""HTTP edit-session service."""

from .app import DEFAULT_MAX_IMAGE_SIDE, DEFAULT_PORT, ServiceConfig, create_app

__all__ = ["DEFAULT_MAX_IMAGE_SIDE", "DEFAULT_PORT", "ServiceConfig", "create_app"]
