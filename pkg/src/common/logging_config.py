import logging

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(debug: bool = False) -> None:
    """Configure root logging for command-line use"""
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    if debug:
        logging.getLogger().setLevel(logging.DEBUG)
