"""Exception types shared across the package."""


class ReadgradeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ReadgradeError):
    """Input data violates a documented invariant (bad grade, duplicate id, ...)."""


class FormatError(ReadgradeError):
    """A stream or file could not be parsed.

    ``line`` / ``sentence`` carry the offending position when known.
    """

    def __init__(self, message, line=None, sentence=None):
        parts = [message]
        if line is not None:
            parts.append(f"(line {line})")
        if sentence is not None:
            parts.append(f"(sentence {sentence})")
        super().__init__(" ".join(parts))
        self.line = line
        self.sentence = sentence


class DegenerateInputError(ValidationError):
    """Input is empty or too degenerate to process (no text, no words, ...)."""


class DivergenceError(ReadgradeError):
    """Training produced a non-finite loss; a smaller learning rate is needed."""


class ModelFormatError(FormatError):
    """A serialized model is truncated, malformed, or has an unsupported version."""
