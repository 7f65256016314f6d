"""Runtime settings for the recovering bandits toolkit

This module provides the size guards and the log level used by the
planners, the knapsack solvers and the command line. Every value can be
passed explicitly or retrieved from environment variables, so long
experiment runs can be tuned without code changes.

Classes:
    - RuntimeSettings: Holds the guards and the log level, reading defaults
      from the environment.

Usage:
    Create a `RuntimeSettings` instance, optionally passing overrides. The
    module-level helper `get_settings` returns one built from the current
    environment.
"""

import os
from typing import Optional

LOG_LEVEL_ENV = "RECOVERING_BANDITS_LOG_LEVEL"
WINDOW_CAP_ENV = "RECOVERING_BANDITS_WINDOW_CAP"
ENUMERATION_CAP_ENV = "RECOVERING_BANDITS_ENUMERATION_CAP"
DP_CAP_ENV = "RECOVERING_BANDITS_DP_CAP"

DEFAULT_LOG_LEVEL = "WARNING"
DEFAULT_WINDOW_CAP = 1_000_000
DEFAULT_ENUMERATION_CAP = 1_000_000
DEFAULT_DP_CAP = 50_000_000

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class RuntimeSettings:
    # pylint: disable=too-few-public-methods
    """
    Runtime Settings

    Each setting can be provided as an argument or retrieved from the
    environment variables 'RECOVERING_BANDITS_LOG_LEVEL',
    'RECOVERING_BANDITS_WINDOW_CAP', 'RECOVERING_BANDITS_ENUMERATION_CAP'
    and 'RECOVERING_BANDITS_DP_CAP'.
    """

    def __init__(
        self,
        log_level: Optional[str] = None,
        window_cap: Optional[int] = None,
        enumeration_cap: Optional[int] = None,
        dp_cap: Optional[int] = None,
    ):
        """
        Parameters
        ----------
        log_level : str, optional
            Logging level name used by the command line
        window_cap : int, optional
            Longest feasibility verification window, in time steps
        enumeration_cap : int, optional
            Largest number of joint choices the knapsack brute force enumerates
        dp_cap : int, optional
            Largest number of cells of an exact knapsack DP table

        Returns
        -------
        NoneType
            None
        """
        self.log_level = self._get_log_level(log_level)
        self.window_cap = self._get_positive_int(window_cap, WINDOW_CAP_ENV, DEFAULT_WINDOW_CAP)
        self.enumeration_cap = self._get_positive_int(
            enumeration_cap, ENUMERATION_CAP_ENV, DEFAULT_ENUMERATION_CAP
        )
        self.dp_cap = self._get_positive_int(dp_cap, DP_CAP_ENV, DEFAULT_DP_CAP)

    def _get_log_level(self, log_level: Optional[str] = None) -> str:
        """Get the log level from the environment variables if not given.

        Parameters
        ----------
        log_level : str, optional
            Log level to use, by default None

        Returns
        -------
        str
            Upper-case logging level name
        """
        if log_level is None:
            log_level = os.environ.get(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL)

        log_level = log_level.strip().upper()
        if log_level not in _LOG_LEVELS:
            raise ValueError(
                f"Log level must be one of {', '.join(_LOG_LEVELS)}, got '{log_level}'"
            )
        return log_level

    def _get_positive_int(self, value: Optional[int], env_name: str, default: int) -> int:
        """Get a positive integer from the argument, the environment or the default."""
        if value is None:
            raw = os.environ.get(env_name, None)
            if raw is None:
                return default
            try:
                value = int(raw)
            except ValueError as err:
                raise ValueError(f"{env_name} must be an integer, got '{raw}'") from err

        if value < 1:
            raise ValueError(f"{env_name} must be a positive integer, got {value}")
        return value


def get_settings() -> RuntimeSettings:
    """Settings built from the current environment"""
    return RuntimeSettings()
