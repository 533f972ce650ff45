from datetime import datetime

from core.logger import logger


class PerformanceLogger:
    """Wall-clock timer for a named task"""

    def __init__(self, task_name: str):
        self.task_name = task_name
        self.start_time = datetime.now()

    def start(self):
        self.start_time = datetime.now()
        logger.info(f"Starting {self.task_name}...")

    def end(self) -> float:
        """Log and return the elapsed seconds"""
        duration = (datetime.now() - self.start_time).total_seconds()
        logger.info(f"Finished {self.task_name} in {duration:.2f}s")
        return duration
