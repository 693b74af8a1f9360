"""Device onboarding and heartbeat liveness over the transport."""

import time

import pytest

from flowplant.aas import Shell, Submodel
from flowplant.aas.registry import Registry
from flowplant.clock import FakeClock
from flowplant.configmodel.model import DeviceDef
from flowplant.runtime.devices import (
    ONBOARDING_TOPIC,
    DeviceAgent,
    DeviceManager,
    DuplicateDevice,
    device_shell_id,
    heartbeat_topic,
)
from flowplant.transport import TransportStack


def edge(name="edge01"):
    return DeviceDef(name=name, kind="edge", ram_mb=2048, disk_mb=16000, cpu_class="atom")


@pytest.fixture
def setup():
    clock = FakeClock()
    registry = Registry(clock=clock)
    registry.register(Shell("platform", "platform", [Submodel("devices", [])]))
    stack = TransportStack("in_memory")
    manager = DeviceManager(registry, stack.client(), "platform", clock=clock)
    yield clock, registry, stack, manager
    stack.close()


class TestOnboarding:
    def test_direct_onboarding_registers_shell(self, setup):
        _clock, registry, _stack, manager = setup
        manager.onboard_device(edge())
        shell = registry.get_shell(device_shell_id("edge01"))
        plate = shell.submodel("nameplate")
        assert plate.find("kind").value == "edge"
        assert plate.find("ramMb").value == 2048
        assert shell.submodel("status").find("online").value is True
        listed = registry.get_shell("platform").submodel("devices").find("edge01")
        assert listed.value == device_shell_id("edge01")

    def test_duplicate_rejected(self, setup):
        _clock, _registry, _stack, manager = setup
        manager.onboard_device(edge())
        with pytest.raises(DuplicateDevice):
            manager.onboard_device(edge())

    def test_announce_over_transport(self, setup):
        _clock, _registry, stack, manager = setup
        client = stack.client()
        client.publish(
            ONBOARDING_TOPIC,
            {"name": "edge02", "kind": "edge", "ramMb": 1024, "diskMb": 8000},
        )
        deadline = time.monotonic() + 5
        while manager.device("edge02") is None and time.monotonic() < deadline:
            time.sleep(0.01)
        assert manager.device("edge02") is not None
        client.close()

    def test_malformed_announce_dropped(self, setup):
        _clock, _registry, stack, manager = setup
        client = stack.client()
        client.publish(ONBOARDING_TOPIC, {"kind": "edge"})  # no name
        client.publish(ONBOARDING_TOPIC, {"name": "x", "kind": "edge", "ramMb": "many", "diskMb": 1})
        time.sleep(0.2)
        assert manager.device_names() == []
        client.close()

    def test_duplicate_announce_keeps_single_entry(self, setup):
        _clock, _registry, stack, manager = setup
        client = stack.client()
        doc = {"name": "edge03", "kind": "edge", "ramMb": 1, "diskMb": 1}
        client.publish(ONBOARDING_TOPIC, doc)
        client.publish(ONBOARDING_TOPIC, doc)
        time.sleep(0.3)
        assert manager.device_names() == ["edge03"]
        client.close()


class TestLiveness:
    def test_lost_after_missed_heartbeats(self, setup):
        clock, registry, _stack, manager = setup
        manager.onboard_device(edge())
        clock.advance(2000 * 3 + 1)  # three missed intervals
        manager.check_liveness()
        runtime = manager.device("edge01")
        assert runtime.state == "lost"
        assert registry.get_property(runtime.shell_id, "status", ["online"]) == ("bool", False)

    def test_heartbeat_restores(self, setup):
        clock, registry, _stack, manager = setup
        manager.onboard_device(edge())
        clock.advance(10_000)
        manager.check_liveness()
        assert manager.device("edge01").state == "lost"
        manager.record_heartbeat("edge01")
        runtime = manager.device("edge01")
        assert runtime.state == "onboarded"
        assert registry.get_property(runtime.shell_id, "status", ["online"]) == ("bool", True)

    def test_fresh_device_stays_onboarded(self, setup):
        clock, _registry, _stack, manager = setup
        manager.onboard_device(edge())
        clock.advance(5000)
        manager.record_heartbeat("edge01")
        clock.advance(5000)
        manager.check_liveness()  # only 5 s since last beat
        assert manager.device("edge01").state == "onboarded"


def test_agent_announces_and_heartbeats(setup):
    _clock, _registry, stack, manager = setup
    agent = DeviceAgent(edge("edge09"), stack.client())
    agent.start(interval_ms=50)
    try:
        deadline = time.monotonic() + 5
        while manager.device("edge09") is None and time.monotonic() < deadline:
            time.sleep(0.01)
        runtime = manager.device("edge09")
        assert runtime is not None
        first = runtime.last_heartbeat_ms
        # wall-clock heartbeats keep arriving even though manager uses FakeClock
        time.sleep(0.2)
        assert manager.device("edge09").state == "onboarded"
    finally:
        agent.stop()


def test_heartbeat_topic_naming():
    assert heartbeat_topic("edge01") == "platform/heartbeat/edge01"
