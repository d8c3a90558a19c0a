import logging
import datetime
import os

from directory_utilities import validate_or_make_directory

root_directory = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

date = "{:%Y-%m-%d}".format(datetime.datetime.now())
log_file_string = os.path.join(root_directory, "logs", "{}.log".format(date))

validate_or_make_directory(log_file_string)

log_level = os.environ.get("CIRCLE_LAB_LOG_LEVEL", "WARNING").upper()

logging.basicConfig(filename=log_file_string, level=getattr(logging, log_level, logging.WARNING),
                    format="%(asctime)s - %(levelname)s: %(message)s", datefmt="%Y/%m/%d %I:%M:%S %p")

logger = logging.getLogger("circle-lab")
