"""HTTP facade, session store, configuration, and the unified CLI."""

from .app import create_app
from .config import CONFIG_KEYS, AppConfig, load_config, parse_config_text
from .sessions import MemorySessionStore, Session, SessionStore

__all__ = [
    "AppConfig",
    "CONFIG_KEYS",
    "MemorySessionStore",
    "Session",
    "SessionStore",
    "create_app",
    "load_config",
    "parse_config_text",
]
