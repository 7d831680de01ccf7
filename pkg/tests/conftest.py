import numpy as np
import pytest

from condrisk.data import SyntheticSpec, generate_synthetic, load_manifest, write_csv

# Shapes of the real benchmark tables; surrogate stand-ins are generated at
# exactly these sizes so runtime-budget tests exercise the true workload.
BENCHMARK_SHAPES = {
    "concrete": (1030, 8),
    "wine": (1599, 11),
    "airfoil": (1503, 5),
    "energy": (768, 8),
    "housing": (506, 13),
    "solar": (1066, 10),
    "forest": (517, 12),
    "parkinsons": (5875, 20),
}

REAL_MANIFEST = "datasets/manifest.toml"


def real_entries():
    from pathlib import Path
    root = Path(__file__).resolve().parent.parent
    return load_manifest(root / REAL_MANIFEST)


def missing_real_datasets():
    return sorted(name for name, e in real_entries().items() if not e.available())


def require_real_data():
    missing = missing_real_datasets()
    if missing:
        pytest.skip(
            "benchmark CSVs not present: "
            + ", ".join(missing)
            + " (convert the upstream UCI files to plain CSV as described in "
            "datasets/manifest.toml and place them next to it)")


@pytest.fixture(scope="session")
def surrogate_benchmark(tmp_path_factory):
    """A manifest of synthetic datasets at the exact benchmark shapes."""
    root = tmp_path_factory.mktemp("surrogate")
    (root / "data").mkdir()
    lines = []
    for i, (name, (n, d)) in enumerate(sorted(BENCHMARK_SHAPES.items())):
        ds, _ = generate_synthetic(
            SyntheticSpec("regression-with-noise", n=n, d=d, seed=1000 + i))
        write_csv(ds, root / "data" / f"{name}.csv")
        lines.append(
            f'[datasets.{name}]\npath = "data/{name}.csv"\n'
            f'target_column = "target"\nkind = "regression"\n'
            f"expected_rows = {n}\nexpected_cols = {d}\n")
    manifest = root / "manifest.toml"
    manifest.write_text("\n".join(lines))
    return manifest


@pytest.fixture()
def toy_regression():
    ds, gt = generate_synthetic(SyntheticSpec("regression-with-noise", n=300, d=4, seed=9))
    return ds, gt


@pytest.fixture()
def toy_classification():
    ds, gt = generate_synthetic(
        SyntheticSpec("known-density-classification", n=400, d=3, K=3, seed=9))
    return ds, gt


@pytest.fixture()
def toy_rwr_setup(tmp_path):
    """A one-dataset manifest plus a small rwr config, for runner tests."""
    ds, _ = generate_synthetic(SyntheticSpec("regression-with-noise", n=400, d=5, seed=21))
    (tmp_path / "data").mkdir()
    write_csv(ds, tmp_path / "data" / "toy.csv")
    (tmp_path / "manifest.toml").write_text(
        '[datasets.toy]\npath = "data/toy.csv"\ntarget_column = "target"\n'
        'kind = "regression"\nexpected_rows = 400\nexpected_cols = 5\n')
    (tmp_path / "cfg.toml").write_text(
        'manifest = "manifest.toml"\ndatasets = ["toy"]\n'
        'regressors = ["lr", "rf"]\ncalibrators = ["lr", "rf"]\n'
        "costs = [0.2, 0.5]\nfolds = 2\nmaster_seed = 11\n"
        'output_dir = "out"\nworkers = 1\n')
    return tmp_path
