"""
Progress tracking with tqdm integration.
"""

from tqdm import tqdm
from typing import Optional


class ProgressTracker:
    """
    Progress tracker for realization loops.
    """

    def __init__(self, total: int, desc: str = "Realizations", enabled: bool = True):
        """
        Initialize progress tracker.

        Args:
            total: Total number of items to process
            desc: Description for progress bar
            enabled: When False the tracker only counts
        """
        self.total = total
        self.desc = desc
        self.enabled = enabled
        self.pbar: Optional[tqdm] = None
        self.current = 0

    def __enter__(self):
        """Start progress tracking."""
        if self.enabled:
            self.pbar = tqdm(
                total=self.total,
                desc=self.desc,
                unit="real",
                bar_format="{l_bar}{bar}| {n_fmt}/{total_fmt} [{elapsed}<{remaining}]"
            )
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        """Clean up progress tracker."""
        if self.pbar:
            self.pbar.close()

    def update(self, n: int = 1, **kwargs):
        """
        Update progress.

        Args:
            n: Number of items processed
            **kwargs: Additional fields to display (e.g., delta values)
        """
        self.current += n
        if self.pbar:
            if kwargs:
                postfix_str = ", ".join(f"{k}={v}" for k, v in kwargs.items())
                self.pbar.set_postfix_str(postfix_str)

            self.pbar.update(n)


def format_duration(seconds: float) -> str:
    """
    Format a wall-clock duration for display.

    Args:
        seconds: Duration in seconds

    Returns:
        Human readable string such as ``"2 min 05.3 s"``
    """
    minutes, rest = divmod(seconds, 60.0)
    if minutes >= 1:
        return f"{int(minutes)} min {rest:04.1f} s"
    return f"{rest:.2f} s"
