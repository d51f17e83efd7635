import logging
import os
import sys

PACKAGE_LOGGER = 'mlnpde'


def configure_logging():
    logging_level = os.getenv('LOGGING_LEVEL', 'INFO')
    logger = logging.getLogger(PACKAGE_LOGGER)
    if not logger.handlers:
        logger.setLevel(logging.getLevelName(logging_level.upper()))
        formatter = logging.Formatter(
            '%(asctime)s %(levelname)-8s %(name)s %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S')
        stream_handler = logging.StreamHandler(sys.stdout)
        stream_handler.setFormatter(formatter)
        logger.addHandler(stream_handler)
        logger.propagate = False
    return logger


def get_logger(name=None):
    """
    Package logger, or its child ``mlnpde.<name>`` when a name is given.
    Handlers live on the package logger only.
    """
    logger = configure_logging()
    if name:
        return logger.getChild(name)
    return logger
