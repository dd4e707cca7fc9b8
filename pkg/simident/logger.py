import logging

logger = logging.getLogger("simident")
