"""Exception types shared across the toolkit."""


class PhonauditError(Exception):
    """Base class for all toolkit errors."""


class EmptyTranscript(PhonauditError):
    """Raw transcript contains no phone content."""


class DomainError(PhonauditError):
    """Numeric argument outside its valid domain."""


class EmptyGold(PhonauditError):
    """Gold transcript has zero phones; error rates are undefined."""


class PhoneNotFound(PhonauditError):
    """Queried phone never occurs in the gold side of the corpus."""


class EmptyScoreList(PhonauditError):
    """Aggregation requested over zero utterance scores."""


class InsufficientAnnotations(PhonauditError):
    """Too few decided (non-abstain) annotations to run the test."""


class MismatchedItems(PhonauditError):
    """Agreement requested over record sets covering different items."""


class MissingPredictions(PhonauditError):
    """A model set covers too few of a language's utterances."""


class InsufficientUtterances(PhonauditError):
    """A language has fewer usable utterances than the requested sample."""


class UnknownTask(PhonauditError):
    """A record references a task id that was never issued."""


class DuplicateRecord(PhonauditError):
    """Same annotator submitted the same task twice in one record set."""


class InvalidChoice(PhonauditError):
    """Submitted preference violates the record invariants."""


class StaleSession(PhonauditError):
    """Session id is unknown or no longer active."""


class SessionComplete(PhonauditError):
    """All tasks in the session have been submitted."""


class AudioNotFound(PhonauditError):
    """Requested utterance has no audio in the loaded manifest."""
