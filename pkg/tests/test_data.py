import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from condrisk import rng
from condrisk.data import (
    Dataset,
    SyntheticSpec,
    apply_standardizer,
    fetch_datasets,
    fit_standardizer,
    generate_synthetic,
    load_csv,
    load_from_manifest,
    load_manifest,
    make_split_plans,
    write_csv,
)


def test_load_csv_with_header(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("x1,x2,y\n1.0,2.0,3.0\n4.0,5.0,6.0\n")
    ds = load_csv(p, target="y")
    assert ds.n == 2 and ds.d == 2
    np.testing.assert_array_equal(ds.features, [[1.0, 2.0], [4.0, 5.0]])
    np.testing.assert_array_equal(ds.targets, [3.0, 6.0])


def test_load_csv_without_header_defaults_to_last_column(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("1.0,2.0,3.0\n4.0,5.0,6.0\n")
    ds = load_csv(p)
    assert ds.d == 2
    np.testing.assert_array_equal(ds.targets, [3.0, 6.0])


def test_load_csv_target_by_index(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("1.0,2.0,3.0\n4.0,5.0,6.0\n")
    ds = load_csv(p, target=0)
    np.testing.assert_array_equal(ds.targets, [1.0, 4.0])
    np.testing.assert_array_equal(ds.features, [[2.0, 3.0], [5.0, 6.0]])


def test_load_csv_rejects_non_numeric_cell(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("x,y\n1.0,2.0\noops,4.0\n")
    with pytest.raises(ValueError, match="non-numeric"):
        load_csv(p, target="y")


def test_load_csv_rejects_non_finite(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("x,y\n1.0,2.0\nnan,4.0\n")
    with pytest.raises(ValueError):
        load_csv(p, target="y")


def test_write_then_load_roundtrip_is_exact(toy_regression, tmp_path):
    ds, _ = toy_regression
    write_csv(ds, tmp_path / "r.csv")
    back = load_csv(tmp_path / "r.csv", target="target")
    np.testing.assert_array_equal(back.features, ds.features)
    np.testing.assert_array_equal(back.targets, ds.targets)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(name="x", features=np.ones(3), targets=np.ones(3), kind="regression")
    with pytest.raises(ValueError):
        Dataset(name="x", features=np.ones((3, 2)), targets=np.ones(4), kind="regression")
    with pytest.raises(ValueError):
        Dataset(name="x", features=np.ones((2, 2)), targets=np.array([0, 5]),
                kind="classification", num_classes=3)


def test_standardizer_hand_case():
    f = np.array([[0.0, 1.0], [2.0, 1.0], [4.0, 1.0]])
    s = fit_standardizer(f)
    np.testing.assert_allclose(s.means, [2.0, 1.0])
    # population standard deviation, and constant columns get scale 1
    np.testing.assert_allclose(s.scales, [np.sqrt(8.0 / 3.0), 1.0])
    out = apply_standardizer(s, f)
    np.testing.assert_allclose(out.mean(axis=0), [0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(out[:, 1], 0.0)


@given(st.integers(0, 2**32 - 1), st.integers(3, 40), st.integers(1, 6))
@settings(max_examples=50, deadline=None)
def test_standardized_columns_are_centered_unit(seed, n, d):
    f = np.random.default_rng(seed).normal(size=(n, d)) * 3.0 + 1.0
    out = apply_standardizer(fit_standardizer(f), f)
    np.testing.assert_allclose(out.mean(axis=0), np.zeros(d), atol=1e-9)
    sd = out.std(axis=0)
    keep = f.std(axis=0) > 0
    np.testing.assert_allclose(sd[keep], 1.0, atol=1e-9)


def test_split_plans_structure():
    plans = make_split_plans(103, seed=5)
    assert len(plans) == 10
    all_test = np.concatenate([p.test_rows for p in plans])
    assert sorted(all_test) == list(range(103))
    for p in plans:
        rows = np.concatenate([p.test_rows, p.regressor_rows, p.calibrator_rows])
        assert sorted(rows) == list(range(103))
        rest = 103 - len(p.test_rows)
        assert len(p.calibrator_rows) == (4 * rest) // 9
        assert len(p.regressor_rows) == rest - (4 * rest) // 9


def test_split_plans_deterministic():
    a = make_split_plans(250, seed=7)
    b = make_split_plans(250, seed=7)
    for pa, pb in zip(a, b):
        np.testing.assert_array_equal(pa.test_rows, pb.test_rows)
        np.testing.assert_array_equal(pa.regressor_rows, pb.regressor_rows)
    c = make_split_plans(250, seed=8)
    assert not np.array_equal(a[0].regressor_rows, c[0].regressor_rows)


@given(st.integers(20, 5000), st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_split_plans_disjoint_and_covering(n, seed):
    plans = make_split_plans(n, seed)
    seen_test = []
    for p in plans:
        test, reg, cal = set(p.test_rows), set(p.regressor_rows), set(p.calibrator_rows)
        assert not (test & reg) and not (test & cal) and not (reg & cal)
        assert test | reg | cal == set(range(n))
        seen_test.append(test)
    covered = set().union(*seen_test)
    assert covered == set(range(n))
    assert sum(len(t) for t in seen_test) == n


def test_known_density_ground_truth_rows_are_distributions(toy_classification):
    ds, gt = toy_classification
    assert ds.kind == "classification"
    assert gt.true_p.shape == (400, 3)
    np.testing.assert_allclose(gt.true_p.sum(axis=1), 1.0, atol=1e-12)
    assert (gt.true_p >= 0).all()
    assert set(np.unique(ds.targets)) <= {0, 1, 2}


def test_known_density_labels_match_conditional_distribution():
    # with many samples, empirical class frequency in a thin slice of
    # probability space tracks the stated probability
    ds, gt = generate_synthetic(
        SyntheticSpec("known-density-classification", n=60_000, d=3, K=3, seed=4))
    p0 = gt.true_p[:, 0]
    band = (p0 > 0.55) & (p0 < 0.75)
    assert band.sum() > 500
    freq = (ds.targets[band] == 0).mean()
    assert abs(freq - p0[band].mean()) < 0.03


def test_separable_labels_are_deterministic():
    ds, gt = generate_synthetic(
        SyntheticSpec("separable-classification", n=2000, d=4, K=3, seed=2, margin=0.5))
    assert np.array_equal(gt.h_values, ds.targets)
    assert np.array_equal(gt.h(ds.features), ds.targets)
    counts = np.bincount(ds.targets, minlength=3)
    assert counts.min() > 0


def test_separable_margin_too_wide_raises():
    with pytest.raises(ValueError):
        generate_synthetic(SyntheticSpec("separable-classification", n=100, d=2, K=8,
                                         seed=0, margin=10.0))


def test_regression_noise_ground_truth_formula():
    ds, gt = generate_synthetic(
        SyntheticSpec("regression-with-noise", n=500, d=5, seed=3, noise=0.2))
    x = ds.features
    expect = np.sin(2.0 * x[:, 0]) + 0.5 * x[:, 1] ** 2 + 0.5 * x[:, 2]
    np.testing.assert_allclose(gt.f0_values, expect, atol=1e-12)
    resid = ds.targets - gt.f0_values
    assert abs(resid.mean()) < 0.05
    assert abs(resid.std() - 0.2) < 0.05


def test_generate_synthetic_is_deterministic():
    a, _ = generate_synthetic(SyntheticSpec("regression-with-noise", n=50, d=3, seed=12))
    b, _ = generate_synthetic(SyntheticSpec("regression-with-noise", n=50, d=3, seed=12))
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.targets, b.targets)


def test_unknown_generator_rejected():
    with pytest.raises(ValueError, match="unknown generator"):
        generate_synthetic(SyntheticSpec("nope", n=10, d=2))


def test_manifest_roundtrip(tmp_path):
    (tmp_path / "d.csv").write_text("a,b\n1.0,2.0\n3.0,4.0\n")
    (tmp_path / "m.toml").write_text(
        '[datasets.demo]\npath = "d.csv"\ntarget_column = "b"\n'
        'kind = "regression"\nexpected_rows = 2\nexpected_cols = 1\n')
    entries = load_manifest(tmp_path / "m.toml")
    assert set(entries) == {"demo"}
    ds = load_from_manifest(entries["demo"])
    assert ds.n == 2 and ds.d == 1


def test_manifest_unknown_key_rejected(tmp_path):
    (tmp_path / "m.toml").write_text('[datasets.demo]\npath = "d.csv"\nbogus = 1\n')
    with pytest.raises(ValueError, match="unknown keys"):
        load_manifest(tmp_path / "m.toml")


def test_manifest_shape_enforced(tmp_path):
    (tmp_path / "d.csv").write_text("a,b\n1.0,2.0\n3.0,4.0\n")
    (tmp_path / "m.toml").write_text(
        '[datasets.demo]\npath = "d.csv"\nexpected_rows = 99\n')
    with pytest.raises(ValueError, match="expected 99 rows"):
        load_from_manifest(load_manifest(tmp_path / "m.toml")["demo"])


def test_fetch_datasets_with_file_url(tmp_path):
    src = tmp_path / "src.csv"
    src.write_text("1.0,2.0\n3.0,4.0\n")
    (tmp_path / "m.toml").write_text(
        f'[datasets.demo]\npath = "dl/demo.csv"\nurl = "file://{src}"\n')
    entries = load_manifest(tmp_path / "m.toml")
    status = fetch_datasets(entries)
    assert status == {"demo": "fetched"}
    assert (tmp_path / "dl" / "demo.csv").read_text() == src.read_text()
    assert fetch_datasets(entries) == {"demo": "present"}


def test_shipped_manifest_parses():
    from conftest import real_entries, BENCHMARK_SHAPES

    entries = real_entries()
    assert set(entries) == set(BENCHMARK_SHAPES)
    for name, entry in entries.items():
        n, d = BENCHMARK_SHAPES[name]
        assert entry.expected_rows == n
        assert entry.expected_cols == d


def test_scope_seed_is_order_sensitive_and_stable():
    a = rng.scope_seed("a", 1, "b")
    assert a == rng.scope_seed("a", 1, "b")
    assert a != rng.scope_seed("b", 1, "a")
    assert a != rng.scope_seed("a", 1, "b", 0)
    draws = rng.stream("x", 3).integers(0, 100, 4)
    np.testing.assert_array_equal(draws, rng.stream("x", 3).integers(0, 100, 4))
