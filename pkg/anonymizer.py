import logging
import sys

from src.cli import main
from src.utils.constants import LOG_LEVEL

logging.basicConfig(
    format="%(asctime)s %(levelname)-8s %(message)s",
    level=LOG_LEVEL,
    datefmt="%Y-%m-%d %H:%M:%S",
    stream=sys.stderr,
)

if __name__ == "__main__":
    sys.exit(main())
