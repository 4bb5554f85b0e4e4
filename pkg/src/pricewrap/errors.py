"""Exception types raised across the pipeline."""


class PricewrapError(Exception):
    """Base class for all package errors."""


class EmptyDocument(PricewrapError):
    """The HTML input had no element or text content."""


class BlankName(PricewrapError, ValueError):
    """A product name was empty after whitespace normalization."""


class ProviderUnavailable(PricewrapError):
    """The search provider could not answer a query."""


class FetchError(PricewrapError):
    """A page could not be retrieved."""

    def __init__(self, url: str, reason: str, status: int | None = None) -> None:
        super().__init__(f"{url}: {reason}")
        self.url = url
        self.reason = reason
        self.status = status


class UnparseablePrice(PricewrapError, ValueError):
    """The price text does not follow the number grammar for its currency."""


class AmbiguousCurrency(PricewrapError, ValueError):
    """No currency marker was found near the price number."""


class EmptyGold(PricewrapError, ValueError):
    """Evaluation was requested against an empty gold set."""


class StoreUnavailable(PricewrapError):
    """A JSON-lines store could not be opened or written."""


class ConfigError(PricewrapError):
    """A configuration file is missing or invalid."""
