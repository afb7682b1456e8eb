import logging
import sys


class ColoredFormatter(logging.Formatter):
    COLORS = {
        'DEBUG': '\033[94m',    # Blue
        'INFO': '\033[92m',     # Green
        'WARNING': '\033[93m',  # Yellow
        'ERROR': '\033[91m',    # Red
        'CRITICAL': '\033[95m',  # Magenta
    }
    RESET = '\033[0m'

    def __init__(self, fmt: str, use_color: bool = True):
        super().__init__(fmt)
        self.use_color = use_color

    def format(self, record):
        message = super().format(record)
        if not self.use_color:
            return message
        color = self.COLORS.get(record.levelname, self.RESET)
        return f"{color}{message}{self.RESET}"


log = logging.getLogger("segmentkit")
log.setLevel(logging.INFO)
log.propagate = False

log_format = ColoredFormatter(
    '%(asctime)s %(levelname)s (%(threadName)s): %(message)s',
    use_color=sys.stderr.isatty(),
)

# stdout carries result documents when --output is omitted
console_handler = logging.StreamHandler(sys.stderr)
console_handler.setLevel(logging.DEBUG)
console_handler.setFormatter(log_format)

log.addHandler(console_handler)

log.debug("Logger initialized")
