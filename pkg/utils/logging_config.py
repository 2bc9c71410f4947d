import logging
import os

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler

from utils.config import get_profile

load_dotenv()

THIRD_PARTY_LOGGERS = ["asyncio", "matplotlib", "numba", "scipy"]


def setup_logging(level: str | None = None) -> None:
    """Install one rich handler on stderr. BITLEVEL_LOG_LEVEL overrides the profile."""
    log_type = (level or os.getenv("BITLEVEL_LOG_LEVEL") or get_profile().logging.level).upper()
    if log_type not in ("DEBUG", "INFO", "WARNING", "ERROR"):
        log_type = "INFO"

    root = logging.getLogger()
    if any(isinstance(h, RichHandler) for h in root.handlers):
        root.setLevel(log_type)
        return

    handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=False)
    handler.setFormatter(logging.Formatter("[%(name)s] %(message)s"))
    root.handlers = [handler]
    root.setLevel(log_type)

    for logger_name in THIRD_PARTY_LOGGERS:
        third_party = logging.getLogger(logger_name)
        third_party.setLevel(logging.ERROR)
        third_party.propagate = False
