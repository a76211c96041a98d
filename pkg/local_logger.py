import logging
from logging.handlers import QueueHandler, QueueListener
from queue import Queue


class RunLogger:
    """
    Thread-safe logging for scenario runs. Worker threads only push records
    onto a queue; a single listener thread writes them to the console and,
    optionally, to a log file.
    """

    FORMAT = "%(asctime)s - %(threadName)s - %(levelname)s - %(message)s"

    def __init__(self, log_file=None, console_level=logging.INFO):
        self.log_queue = Queue()
        self.logger = logging.getLogger()
        self.logger.setLevel(logging.DEBUG)

        formatter = logging.Formatter(self.FORMAT)

        # Console Handler
        console_handler = logging.StreamHandler()
        console_handler.setLevel(console_level)
        console_handler.setFormatter(formatter)
        handlers = [console_handler]

        # File Handler
        if log_file:
            file_handler = logging.FileHandler(log_file, encoding="utf-8")
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            handlers.append(file_handler)

        # Queue Handler and Listener
        self.queue_handler = QueueHandler(self.log_queue)
        self.logger.addHandler(self.queue_handler)
        self.listener = QueueListener(self.log_queue, *handlers, respect_handler_level=True)
        self.listener.start()

    def log_info(self, message):
        self.logger.info(message)

    def log_error(self, message):
        self.logger.error(message)

    def shutdown(self):
        self.listener.stop()
        self.logger.removeHandler(self.queue_handler)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.shutdown()
        return False
