import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

import config
from handlers.commands import EXIT_INVARIANT, EXIT_USER_ERROR, build_parser
from models.errors import EddError, InvariantViolationError

# Load environment variables from project root explicitly
_dotenv_path = Path(__file__).parent / ".env"

logger = logging.getLogger()
_configured = False


def configure_logging() -> None:
    """Console + rotating file handlers on the root logger, installed once."""
    global _configured
    if _configured:
        return
    # Use utf-8-sig to handle potential BOM
    load_dotenv(dotenv_path=_dotenv_path, encoding="utf-8-sig")
    settings = config.reload_settings()

    logger.setLevel(settings.log_level)
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    # stdout carries results (CSV, JSON); logs go to stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if settings.log_file:
        try:
            Path(settings.log_file).parent.mkdir(parents=True, exist_ok=True)
            file_handler = RotatingFileHandler(settings.log_file, maxBytes=5_000_000, backupCount=3)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except OSError:
            # If logs dir missing or unwritable, continue with console logging only
            pass
    logger.debug("dotenv_path=%s exists=%s cwd=%s", _dotenv_path, _dotenv_path.exists(), os.getcwd())
    _configured = True


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InvariantViolationError as e:
        logger.error("invariant violated: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (EddError, ValidationError, OSError) as e:
        print(f"error: {' '.join(str(e).split())}", file=sys.stderr)
        return EXIT_USER_ERROR


def main() -> int:
    try:
        configure_logging()
    except ValidationError as e:
        print(f"error: invalid settings: {' '.join(str(e).split())}", file=sys.stderr)
        return EXIT_USER_ERROR
    return run()


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Stopped by user")
        sys.exit(130)
