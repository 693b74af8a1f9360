from .errors import AasError, BadRequest, Conflict, HandlerError, NotFound, TypeMismatch
from .model import (
    Collection,
    Operation,
    Property,
    Shell,
    Submodel,
    deserialize_shell,
    serialize_shell,
    shell_from_json,
)
from .registry import Registry, RegistryEntry
from .server import RegistryServer
from .client import RegistryClient

__all__ = [
    "AasError",
    "BadRequest",
    "Conflict",
    "HandlerError",
    "NotFound",
    "TypeMismatch",
    "Collection",
    "Operation",
    "Property",
    "Shell",
    "Submodel",
    "deserialize_shell",
    "serialize_shell",
    "shell_from_json",
    "Registry",
    "RegistryEntry",
    "RegistryServer",
    "RegistryClient",
]
