"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside its documented range."""


class SpecError(ValueError):
    """A protocol specification is malformed or misused."""


class BudgetExceeded(RuntimeError):
    """A party asked more distinct oracle queries than its budget allows."""

    def __init__(self, party, count, budget):
        super().__init__(f"party {party} made {count} distinct queries, budget is {budget}")
        self.party = party
        self.count = count
        self.budget = budget


class UnsupportedPolicy(ValueError):
    """The requested analysis needs a query policy the protocol does not provide."""


class InsufficientSamples(RuntimeError):
    """Rejection sampling accepted fewer draws than required."""

    def __init__(self, accepted, required, draws):
        super().__init__(f"accepted {accepted} of {draws} draws, need {required}")
        self.accepted = accepted
        self.required = required
        self.draws = draws


class NoGapError(RuntimeError):
    """Calibration found no intersection size with a usable agreement gap."""
