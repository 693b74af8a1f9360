import pathlib

import pytest

from flowplant.clock import FakeClock

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fake_clock():
    return FakeClock()


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """A 12-sample dataset plus its staged layout, shared across tests."""
    from flowplant.vision.render import gen_dataset, load_truth, stage_dataset

    root = tmp_path_factory.mktemp("dataset")
    dataset_dir = root / "ds"
    stage_dir = root / "stage"
    pids = gen_dataset(12, 42, dataset_dir)
    stage_dataset(dataset_dir, stage_dir, ids=pids)
    truths = {pid: load_truth(dataset_dir, pid) for pid in pids}
    return {"dataset": dataset_dir, "stage": stage_dir, "pids": pids, "truths": truths}
