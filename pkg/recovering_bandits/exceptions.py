"""
Exceptions Module

This module defines custom exception classes for use throughout the project.

Exceptions:
    - InstanceParseException: Exception raised when an instance, policy or
      config document cannot be parsed
    - InstanceValidationException: Exception raised when a recovery instance
      violates its invariants
    - PolicyValidationException: Exception raised when a periodic policy is
      not valid for its budget
    - CapacityGuardException: Exception raised when a computation would exceed
      one of the configured size guards
    - ScheduleConstructionException: Exception raised when a scheduling step
      reaches a state its construction rules out
"""


class InstanceParseException(Exception):
    """Exception raised when an instance, policy or config document cannot be parsed"""

    def __init__(self, message="The document could not be parsed."):
        self.message = message
        super().__init__(self.message)


class InstanceValidationException(Exception):
    """Exception raised when a recovery instance violates its invariants"""

    def __init__(self, message="The recovery instance is not valid."):
        self.message = message
        super().__init__(self.message)


class PolicyValidationException(Exception):
    """Exception raised when a periodic policy is not valid for its budget"""

    def __init__(self, message="The periodic policy is not valid."):
        self.message = message
        super().__init__(self.message)


class CapacityGuardException(ValueError):
    """Exception raised when a computation would exceed one of the size guards

    It is an argument error: the inputs are valid but too large to process.
    """

    def __init__(self, message="The requested computation exceeds a size guard."):
        self.message = message
        super().__init__(self.message)


class ScheduleConstructionException(Exception):
    """Exception raised when a scheduling step reaches an impossible state"""

    def __init__(self, message="The schedule could not be constructed."):
        self.message = message
        super().__init__(self.message)
