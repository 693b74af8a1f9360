"""In-process registry: registration semantics, property access, operations."""

import threading

import pytest

from flowplant.aas import Collection, Operation, Property, Shell, Submodel
from flowplant.aas.errors import Conflict, HandlerError, NotFound, TypeMismatch
from flowplant.aas.registry import Registry
from flowplant.clock import FakeClock


def make_shell(shell_id="car-0001"):
    return Shell(
        shell_id,
        "product",
        [
            Submodel(
                "ProductSpec",
                [
                    Property("wheelColor", "string", "red"),
                    Property("engraving", "bool", True),
                    Property("windows", "int", 2),
                ],
            ),
            Submodel("control", [Operation("reset", [], ["ok"])]),
        ],
    )


class TestRegistration:
    def test_register_and_resolve(self):
        reg = Registry(clock=FakeClock(1000))
        entry = reg.register(make_shell(), endpoint="10.0.0.5:80")
        assert entry.endpoint == "10.0.0.5:80"
        assert entry.registeredAt == 1000
        assert reg.resolve("car-0001") == "10.0.0.5:80"

    def test_reregister_same_endpoint_is_idempotent(self):
        reg = Registry()
        first = reg.register(make_shell(), endpoint="a")
        again = reg.register(make_shell(), endpoint="a")
        assert first == again
        assert len(reg.list_entries()) == 1

    def test_reregister_other_endpoint_conflicts(self):
        reg = Registry()
        reg.register(make_shell(), endpoint="a")
        with pytest.raises(Conflict):
            reg.register(make_shell(), endpoint="b")

    def test_deregister_removes_everything(self):
        reg = Registry()
        reg.register(make_shell())
        reg.bind_handler("car-0001", "control", "reset", lambda args: {"ok": True})
        reg.deregister("car-0001")
        with pytest.raises(NotFound):
            reg.get_shell("car-0001")
        with pytest.raises(NotFound):
            reg.resolve("car-0001")

    def test_deregister_unknown(self):
        with pytest.raises(NotFound):
            Registry().deregister("nope")

    def test_list_entries_sorted(self):
        reg = Registry()
        for sid in ("b", "a", "c"):
            reg.register(Shell(sid, "device", []))
        assert [e.id for e in reg.list_entries()] == ["a", "b", "c"]


class TestProperties:
    def test_get_and_set(self):
        reg = Registry()
        reg.register(make_shell())
        assert reg.get_property("car-0001", "ProductSpec", ["wheelColor"]) == ("string", "red")
        reg.set_property("car-0001", "ProductSpec", ["windows"], 3)
        assert reg.get_property("car-0001", "ProductSpec", ["windows"]) == ("int", 3)

    def test_set_checks_type(self):
        reg = Registry()
        reg.register(make_shell())
        with pytest.raises(TypeMismatch):
            reg.set_property("car-0001", "ProductSpec", ["windows"], "three")

    def test_nested_path_through_collection(self):
        reg = Registry()
        shell = Shell(
            "s", "platform", [Submodel("m", [Collection("grp", [Property("x", "int", 7)])])]
        )
        reg.register(shell)
        assert reg.get_property("s", "m", ["grp", "x"]) == ("int", 7)

    def test_missing_paths(self):
        reg = Registry()
        reg.register(make_shell())
        with pytest.raises(NotFound):
            reg.get_property("car-0001", "ProductSpec", ["nope"])
        with pytest.raises(NotFound):
            reg.get_property("car-0001", "NoSuchSubmodel", ["wheelColor"])
        with pytest.raises(NotFound):
            reg.get_property("ghost", "ProductSpec", ["wheelColor"])

    def test_operation_is_not_a_property(self):
        reg = Registry()
        reg.register(make_shell())
        with pytest.raises(NotFound):
            reg.get_property("car-0001", "control", ["reset"])


class TestElements:
    def test_upsert_replaces_in_place(self):
        reg = Registry()
        reg.register(make_shell())
        reg.upsert_element("car-0001", "runs", Property("r1", "int", 1))
        reg.upsert_element("car-0001", "runs", Property("r2", "int", 2))
        reg.upsert_element("car-0001", "runs", Property("r1", "int", 99))
        sm = reg.get_shell("car-0001").submodel("runs")
        assert [(e.idShort, e.value) for e in sm.elements] == [("r1", 99), ("r2", 2)]

    def test_remove_element(self):
        reg = Registry()
        reg.register(make_shell())
        reg.upsert_element("car-0001", "runs", Property("r1", "int", 1))
        assert reg.remove_element("car-0001", "runs", "r1") is True
        assert reg.remove_element("car-0001", "runs", "r1") is False


class TestInvoke:
    def test_invoke_bound_handler(self):
        reg = Registry()
        reg.register(make_shell())
        reg.bind_handler("car-0001", "control", "reset", lambda args: {"ok": True, "echo": args})
        result = reg.invoke("car-0001", "control", "reset", {"x": 1})
        assert result == {"ok": True, "echo": {"x": 1}}

    def test_invoke_without_handler(self):
        reg = Registry()
        reg.register(make_shell())
        with pytest.raises(NotFound):
            reg.invoke("car-0001", "control", "reset", {})

    def test_invoke_non_operation(self):
        reg = Registry()
        reg.register(make_shell())
        with pytest.raises(NotFound):
            reg.invoke("car-0001", "ProductSpec", "wheelColor", {})

    def test_handler_errors_are_wrapped(self):
        reg = Registry()
        reg.register(make_shell())

        def boom(args):
            raise RuntimeError("kaput")

        reg.bind_handler("car-0001", "control", "reset", boom)
        with pytest.raises(HandlerError, match="kaput"):
            reg.invoke("car-0001", "control", "reset", {})

    def test_handler_may_reenter_registry(self):
        """Handlers run outside the registry lock, so reads from inside work."""
        reg = Registry()
        reg.register(make_shell())
        reg.bind_handler(
            "car-0001",
            "control",
            "reset",
            lambda args: reg.get_property("car-0001", "ProductSpec", ["windows"])[1],
        )
        assert reg.invoke("car-0001", "control", "reset", {}) == 2


def test_concurrent_register_and_read():
    reg = Registry()
    errors = []

    def writer(base):
        try:
            for i in range(50):
                reg.register(Shell(f"s-{base}-{i}", "device", []))
        except Exception as exc:  # noqa: BLE001
            errors.append(exc)

    def reader():
        try:
            for _ in range(200):
                reg.list_entries()
                reg.shell_kinds()
        except Exception as exc:  # noqa: BLE001
            errors.append(exc)

    threads = [threading.Thread(target=writer, args=(b,)) for b in range(4)]
    threads += [threading.Thread(target=reader) for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert len(reg.list_entries()) == 200
