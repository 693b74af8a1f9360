"""Platform assembly: full in-process wiring of registry, transport, machine,
camera, analyzers and supervisor."""

import time

import pytest

from flowplant.aas.client import RegistryClient
from flowplant.app.appshell import APP_SHELL_ID, CONTROL_SUBMODEL, RUNS_SUBMODEL, START_OPERATION
from flowplant.connectors.product import ProductSpec
from flowplant.platform import (
    APP_NAME,
    PLATFORM_SHELL_ID,
    PLATFORM_SUBMODELS,
    SERVICE_NAMES,
    Platform,
    PlatformOptions,
    build_platform_shell,
)


@pytest.fixture
def platform(small_dataset):
    options = PlatformOptions(
        transport="in_memory",
        stage_dir=str(small_dataset["stage"]),
        move_latency_s=0.01,
    )
    with Platform(options) as plat:
        for pid, truth in small_dataset["truths"].items():
            plat.add_product(
                ProductSpec(pid, truth["wheelColor"], truth["engraving"], truth["windows"])
            )
        yield plat


class TestAssembly:
    def test_platform_shell_submodels(self):
        shell = build_platform_shell("tcp")
        assert tuple(sm.idShort for sm in shell.submodels) == PLATFORM_SUBMODELS
        assert shell.submodel("platform").find("transport").value == "tcp"
        assert shell.submodel("applications").find(APP_NAME).value == APP_SHELL_ID

    def test_all_services_running(self, platform):
        status = platform.status()
        assert status["running"] is True
        assert set(status["services"]) == set(SERVICE_NAMES)
        assert all(state == "Running" for state in status["services"].values())

    def test_service_states_mirrored_into_aas(self, platform):
        services = platform.registry.get_shell(PLATFORM_SHELL_ID).submodel("services")
        for name in SERVICE_NAMES:
            assert services.find(name).value == "Running"

    def test_app_shell_registered(self, platform):
        shell = platform.registry.get_shell(APP_SHELL_ID)
        assert shell.submodel(CONTROL_SUBMODEL).find(START_OPERATION) is not None

    def test_double_start_is_noop(self, platform):
        assert platform.start() is platform

    def test_unknown_ai_mode_rejected(self):
        with pytest.raises(ValueError):
            Platform(PlatformOptions(ai="psychic")).start()


class TestTriggerPaths:
    def test_api_trigger_end_to_end(self, platform, small_dataset):
        pid = small_dataset["pids"][0]
        outcome = platform.trigger(product_hint=pid, timeout_s=30)
        assert outcome.error is None
        assert outcome.trace.terminal == "published"
        assert outcome.report.conformance is True

    def test_operation_invoke_trigger(self, platform, small_dataset):
        pid = small_dataset["pids"][1]
        result = platform.registry.invoke(
            APP_SHELL_ID, CONTROL_SUBMODEL, START_OPERATION, {"productHint": pid}
        )
        assert result["accepted"] is True
        outcome = platform.decider.wait_run(result["runId"], timeout_s=30)
        assert outcome.trace.terminal == "published"

    def test_button_press_trigger(self, platform, small_dataset):
        pid = small_dataset["pids"][2]
        platform.cam.set_current_product(pid)
        before = platform.decider._run_seq
        platform.machine_model.write(["Button", "Pressed"], True)
        deadline = time.monotonic() + 10
        while platform.decider._run_seq == before and time.monotonic() < deadline:
            time.sleep(0.02)
        assert platform.decider._run_seq == before + 1
        outcome = platform.decider.wait_run(f"run-{before + 1:04d}", timeout_s=30)
        assert outcome.trace.terminal == "published"

    def test_run_lands_in_app_shell_history(self, platform, small_dataset):
        outcome = platform.trigger(product_hint=small_dataset["pids"][0], timeout_s=30)
        runs = platform.registry.get_shell(APP_SHELL_ID).submodel(RUNS_SUBMODEL)
        assert runs.find(outcome.run_id) is not None

    def test_sla_annotation(self, small_dataset):
        options = PlatformOptions(
            stage_dir=str(small_dataset["stage"]),
            move_latency_s=0.01,
            sla_ms=0.0,  # impossible to meet: annotation must appear
        )
        with Platform(options) as plat:
            pid = small_dataset["pids"][0]
            truth = small_dataset["truths"][pid]
            plat.add_product(
                ProductSpec(pid, truth["wheelColor"], truth["engraving"], truth["windows"])
            )
            outcome = plat.trigger(product_hint=pid, timeout_s=30)
        assert outcome.trace.steps[-1].payload.get("slaExceeded") is True


class TestHttpFacade:
    def test_registry_served_over_http(self, small_dataset):
        options = PlatformOptions(
            stage_dir=str(small_dataset["stage"]),
            move_latency_s=0.01,
            http_registry=True,
        )
        with Platform(options) as plat:
            pid = small_dataset["pids"][0]
            truth = small_dataset["truths"][pid]
            plat.add_product(
                ProductSpec(pid, truth["wheelColor"], truth["engraving"], truth["windows"])
            )
            client = RegistryClient(plat.registry_server.endpoint)
            result = client.invoke(
                APP_SHELL_ID, CONTROL_SUBMODEL, START_OPERATION, {"productHint": pid}
            )
            assert result["accepted"] is True
            outcome = plat.decider.wait_run(result["runId"], timeout_s=30)
            assert outcome.trace.terminal == "published"
            shell = client.get_shell(APP_SHELL_ID)
            assert shell.submodel(RUNS_SUBMODEL).find(result["runId"]) is not None


class TestTeardown:
    def test_stop_releases_everything(self, small_dataset):
        options = PlatformOptions(stage_dir=str(small_dataset["stage"]), move_latency_s=0.01)
        plat = Platform(options).start()
        plat.stop()
        assert plat.status()["running"] is False
        # second stop is harmless
        plat.stop()

    def test_trigger_after_stop_rejected(self, small_dataset):
        from flowplant.app.decider import NotReady

        options = PlatformOptions(stage_dir=str(small_dataset["stage"]), move_latency_s=0.01)
        plat = Platform(options).start()
        plat.stop()
        with pytest.raises(NotReady):
            plat.decider.trigger_inspection()
