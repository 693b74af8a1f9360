import pytest


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory):
    from flowplant.vision.render import gen_dataset

    root = tmp_path_factory.mktemp("dataset") / "ds"
    gen_dataset(200, 42, root)
    return root


@pytest.fixture(scope="session")
def models_dir(tmp_path_factory, dataset_dir):
    """All three task models trained at the default 50 epochs."""
    from ai_service.train import TrainingConfig, train

    out = tmp_path_factory.mktemp("models")
    metrics = {}
    for task in ("scratch", "engraving", "windows"):
        metrics[task] = train(task, dataset_dir, TrainingConfig(), out_dir=out)
    return out, metrics
