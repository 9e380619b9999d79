"""Exception types shared across the package."""


class InvalidRuleError(ValueError):
    """A rule violates one of the RuleSpec invariants."""


class SizeGuardError(ValueError):
    """A requested computation exceeds a configured size limit."""
