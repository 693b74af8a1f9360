"""Product AAS lookup: turns a product shell into a ProductSpec record."""

from __future__ import annotations

from dataclasses import dataclass

from ..aas.errors import NotFound

WHEEL_COLORS = ("red", "green", "yellow", "black")


class MalformedSpec(Exception):
    """The product shell exists but its ProductSpec submodel is unusable."""


@dataclass(frozen=True)
class ProductSpec:
    productId: str
    wheelColor: str
    engraving: bool
    windows: int

    def __post_init__(self):
        if self.wheelColor not in WHEEL_COLORS:
            raise MalformedSpec(f"unknown wheel color {self.wheelColor!r}")
        if not 1 <= self.windows <= 3:
            raise MalformedSpec(f"window count {self.windows} outside [1, 3]")


def product_shell_id(product_id: str) -> str:
    return f"car-{product_id}"


def product_shell(spec: ProductSpec):
    """Build the AAS for one product: shell "car-{productId}" with a
    ProductSpec submodel holding the three specified properties."""
    from ..aas import Property, Shell, Submodel

    return Shell(
        product_shell_id(spec.productId),
        "product",
        [
            Submodel(
                "ProductSpec",
                [
                    Property("wheelColor", "string", spec.wheelColor),
                    Property("engraving", "bool", spec.engraving),
                    Property("windows", "int", spec.windows),
                ],
            )
        ],
    )


def register_product(registry, spec: ProductSpec) -> None:
    registry.register(product_shell(spec))


def fetch_product(registry, product_id: str) -> ProductSpec:
    """Read ProductSpec properties from shell "car-{productId}".

    `registry` is anything exposing get_property(shellId, submodel, path):
    the in-process Registry or a RegistryClient. Raises NotFound for an
    unknown product, MalformedSpec for missing or mistyped properties.
    """
    shell_id = product_shell_id(product_id)
    values = {}
    for name, value_type in (("wheelColor", "string"), ("engraving", "bool"), ("windows", "int")):
        try:
            vt, value = registry.get_property(shell_id, "ProductSpec", [name])
        except NotFound as exc:
            if "shell" in str(exc):
                raise
            raise MalformedSpec(f"property {name!r} missing: {exc}") from exc
        if vt != value_type:
            raise MalformedSpec(f"property {name!r} has valueType {vt!r}, expected {value_type!r}")
        values[name] = value
    try:
        return ProductSpec(productId=product_id, **values)
    except MalformedSpec:
        raise
    except (TypeError, ValueError) as exc:
        raise MalformedSpec(str(exc)) from exc
