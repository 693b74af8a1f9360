class AasError(Exception):
    """Base for registry/model errors; http_status drives the API layer."""

    http_status = 500


class BadRequest(AasError):
    http_status = 400


class NotFound(AasError):
    http_status = 404


class Conflict(AasError):
    http_status = 409


class TypeMismatch(BadRequest):
    pass


class HandlerError(AasError):
    """Wraps a failure raised by a bound operation handler."""

    http_status = 500
