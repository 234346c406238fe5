"""Exception hierarchy shared across the package.

Everything raised on bad *domain* input (as opposed to programming errors)
derives from FriendPlanError so the CLI can map it to exit code 2.
"""


class FriendPlanError(Exception):
    """Base class for domain-level failures."""


class GraphFormatError(FriendPlanError):
    """Malformed edge-list input; message carries the offending line number."""


class GraphParameterError(FriendPlanError):
    """Out-of-range parameters for graph generation."""


class TargetInFriendSetError(FriendPlanError):
    """The target is already a friend of the initiator; nothing to plan."""


class TargetUnreachableError(FriendPlanError):
    """No influence can reach the target: no friend path and no similarity edge."""


class InstanceTooLargeError(FriendPlanError):
    """An exact/enumerative routine refused an instance beyond its size guard."""


class SamplingError(FriendPlanError):
    """A constrained random draw could not be satisfied within the retry bound."""
