"""Exception types raised across the package.

Everything derives from EpsComplexError so callers can catch the whole
family with one clause; batch drivers (cohort extraction, the CLI) rely
on that.
"""


class EpsComplexError(Exception):
    """Base class for all errors raised by this package."""


# --- ingest ---------------------------------------------------------------

class ParseError(EpsComplexError):
    """A record or manifest file contained a non-numeric / malformed token."""


class ShapeError(EpsComplexError):
    """File contents do not match the declared layout or channel count."""


# --- signals --------------------------------------------------------------

class DegenerateChannelError(EpsComplexError):
    """A channel is identically zero, so it cannot be normalized."""


class TooShortError(EpsComplexError):
    """Record has too few samples for the requested difference order."""


class BadParamsError(EpsComplexError):
    """Invalid parameters passed to a generator or configuration."""


# --- recon ----------------------------------------------------------------

class TooFewPointsError(EpsComplexError):
    """Retention fraction leaves too few points to build a subsample plan."""


class InsufficientSupportError(EpsComplexError):
    """A placement has fewer retained points than a polynomial fit needs."""


# --- complexity -----------------------------------------------------------

class FTrivialRecordError(EpsComplexError):
    """Record is exactly recoverable by the method family at every fraction."""


class DegenerateFitError(EpsComplexError):
    """Fewer than two usable spectrum points, no log-log fit possible."""


# --- classify / evaluation ------------------------------------------------

class DegenerateCohortError(EpsComplexError):
    """A class is absent (or too small) in the training cohort."""


class NoOOBVotesError(EpsComplexError):
    """Some subject appeared in every bootstrap sample, so it has no OOB vote."""


class SchemaMismatchError(EpsComplexError):
    """Feature names of a vector do not match the model's training schema."""


class EmptyTrainError(EpsComplexError):
    """Nearest-neighbor baseline was given an empty training set."""


class BadKError(EpsComplexError):
    """Invalid fold count for cross-validation."""
