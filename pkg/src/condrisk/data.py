"""Dataset ingestion, standardization, splitting, and synthetic generators.

The unit of work is an immutable Dataset (features, targets, kind). Real
tabular data arrives through headered or headerless CSV files, optionally
listed in a TOML manifest that records where each file lives and what shape
it must have. Synthetic distributions with known ground truth (exact class
probabilities, a perfect labeling function, or a noiseless regression
surface) back the theory checks in ``condrisk.verify``.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import urllib.request
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import rng


@dataclasses.dataclass(frozen=True)
class Dataset:
    """A dense tabular dataset.

    features is (n, d) float64, targets is length n. For classification,
    targets hold integer class indices in [0, num_classes). Arrays are
    treated as immutable after construction.
    """

    name: str
    features: np.ndarray
    targets: np.ndarray
    kind: str = "regression"
    num_classes: int | None = None

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        t = np.asarray(self.targets)
        if f.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {f.shape}")
        if t.ndim != 1 or len(t) != f.shape[0]:
            raise ValueError("targets length must equal feature row count")
        if self.kind not in ("regression", "classification"):
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if not np.all(np.isfinite(f)):
            raise ValueError(f"dataset {self.name!r}: non-finite feature values")
        if self.kind == "classification":
            if self.num_classes is None or self.num_classes < 2:
                raise ValueError("classification dataset needs num_classes >= 2")
            ti = t.astype(np.int64)
            if not np.array_equal(ti, t):
                raise ValueError("classification targets must be integers")
            if ti.min() < 0 or ti.max() >= self.num_classes:
                raise ValueError("classification targets outside [0, num_classes)")
            t = ti
        else:
            t = t.astype(np.float64)
            if not np.all(np.isfinite(t)):
                raise ValueError(f"dataset {self.name!r}: non-finite targets")
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "targets", t)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclasses.dataclass(frozen=True)
class Standardizer:
    """Column-wise (x - mean) / scale transform, population standard deviation."""

    means: np.ndarray
    scales: np.ndarray


@dataclasses.dataclass(frozen=True)
class SplitPlan:
    """One cross-validation fold: disjoint test / regressor / calibrator rows."""

    fold_index: int
    test_rows: np.ndarray
    regressor_rows: np.ndarray
    calibrator_rows: np.ndarray


@dataclasses.dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for one synthetic distribution.

    generator selects the family:
      "known-density-classification": class probabilities are available in
        closed form for every sampled x (``coef`` forces a plain logistic
        link for K=2; otherwise a random smooth link is drawn from the seed).
      "separable-classification": blob mixture admitting a labeling function
        h with P(h(X) = Y) = 1; ``margin`` is the gap between blob edges.
      "regression-with-noise": y = f0(x) + noise * eps with f0 fixed and
        smooth, eps standard normal.
    """

    generator: str
    n: int
    d: int
    K: int = 2
    seed: int = 0
    noise: float = 0.1
    margin: float = 0.5
    coef: tuple | None = None


@dataclasses.dataclass(frozen=True)
class GroundTruth:
    """Row-aligned sidecar emitted next to each synthetic Dataset.

    Only the fields relevant to the generator are populated.
    """

    true_p: np.ndarray | None = None
    h: object | None = None
    h_values: np.ndarray | None = None
    f0: object | None = None
    f0_values: np.ndarray | None = None
    noise: float | None = None


def load_csv(path, target=None, kind="regression", num_classes=None, name=None) -> Dataset:
    """Load a comma-separated file into a Dataset.

    The file may start with a header row (detected by non-numeric cells).
    ``target`` selects the target column by header name or integer index and
    defaults to the last column. Every remaining column becomes a feature.
    Non-numeric or non-finite data cells raise ValueError.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: empty file")

    header = None
    first = rows[0]
    try:
        [float(c) for c in first]
    except ValueError:
        header = [c.strip() for c in first]
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")

    ncol = len(rows[0])
    if target is None:
        tcol = ncol - 1
    elif isinstance(target, int):
        tcol = target if target >= 0 else ncol + target
    else:
        if header is None or target not in header:
            raise ValueError(f"{path}: target column {target!r} not in header")
        tcol = header.index(target)
    if not 0 <= tcol < ncol:
        raise ValueError(f"{path}: target column index {tcol} out of range")

    data = np.empty((len(rows), ncol), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != ncol:
            raise ValueError(f"{path}: row {i} has {len(row)} cells, expected {ncol}")
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(f"{path}: non-numeric cell {cell!r} at row {i}, column {j}") from None
            if not math.isfinite(v):
                raise ValueError(f"{path}: non-finite value {cell!r} at row {i}, column {j}")
            data[i, j] = v

    feat = np.delete(data, tcol, axis=1)
    targ = data[:, tcol]
    if kind == "classification" and num_classes is None:
        num_classes = int(targ.max()) + 1
    return Dataset(name=name or path.stem, features=feat, targets=targ,
                   kind=kind, num_classes=num_classes)


def write_csv(dataset: Dataset, path) -> None:
    """Write a Dataset back to CSV (feature columns f0..f{d-1}, then target)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([f"f{j}" for j in range(dataset.d)] + ["target"])
        for i in range(dataset.n):
            w.writerow([repr(float(v)) for v in dataset.features[i]] + [repr(float(dataset.targets[i]))])


def fit_standardizer(features) -> Standardizer:
    """Fit column means and population standard deviations.

    Constant columns get scale 1 so they map to exactly 0 after centering.
    """
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] < 2:
        raise ValueError("standardizer needs at least 2 rows")
    means = f.mean(axis=0)
    sd = f.std(axis=0)  # population (divide by n)
    scales = np.where(sd > 0.0, sd, 1.0)
    return Standardizer(means=means, scales=scales)


def apply_standardizer(s: Standardizer, features) -> np.ndarray:
    f = np.asarray(features, dtype=np.float64)
    if f.shape[1] != len(s.means):
        raise ValueError("standardizer dimension mismatch")
    return (f - s.means) / s.scales


def make_split_plans(n: int, seed: int) -> list[SplitPlan]:
    """Build the 10 cross-validation fold plans for n rows.

    Each plan holds roughly n/10 test rows; the remaining rows are split
    5:9 / 4:9 into regressor and calibrator rows by a per-fold seeded
    shuffle, with integer remainders going to the regressor set. Plans are
    deterministic in (n, seed).
    """
    if n < 20:
        raise ValueError(f"need at least 20 rows for 10-fold plans, got {n}")
    perm = rng.stream("splits", n, seed).permutation(n)
    base, extra = divmod(n, 10)
    bounds = []
    start = 0
    for i in range(10):
        size = base + (1 if i < extra else 0)
        bounds.append((start, start + size))
        start += size

    plans = []
    for i, (lo, hi) in enumerate(bounds):
        test = perm[lo:hi]
        rest = np.concatenate([perm[:lo], perm[hi:]])
        shuffled = rng.stream("splits", n, seed, i).permutation(rest)
        n_cal = (4 * len(rest)) // 9
        n_reg = len(rest) - n_cal
        plans.append(SplitPlan(
            fold_index=i,
            test_rows=test,
            regressor_rows=shuffled[:n_reg],
            calibrator_rows=shuffled[n_reg:],
        ))
    return plans


def _softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _known_density(spec: SyntheticSpec, gen):
    X = gen.normal(size=(spec.n, spec.d))
    if spec.coef is not None:
        if spec.K != 2:
            raise ValueError("coef parameter requires K=2")
        coef = np.asarray(spec.coef, dtype=np.float64)
        if coef.shape != (spec.d,):
            raise ValueError(f"coef must have length d={spec.d}")
        logits = np.column_stack([np.zeros(spec.n), X @ coef])
    else:
        # random smooth link: bounded tanh component plus a linear term,
        # scaled so probabilities are informative but not saturated
        B = gen.normal(size=(spec.d, spec.K)) / math.sqrt(spec.d)
        C = gen.normal(size=(spec.d, spec.K)) / math.sqrt(spec.d)
        a = gen.uniform(1.0, 2.0, size=spec.K)
        logits = a * np.tanh(X @ B) + X @ C
    p = _softmax(logits)
    u = gen.uniform(size=spec.n)
    y = (p.cumsum(axis=1) < u[:, None]).sum(axis=1)
    y = np.minimum(y, spec.K - 1)
    ds = Dataset(name=f"known-density-{spec.seed}", features=X, targets=y,
                 kind="classification", num_classes=spec.K)
    return ds, GroundTruth(true_p=p)


def _separable(spec: SyntheticSpec, gen):
    if spec.d < 2:
        raise ValueError("separable generator needs d >= 2")
    m = 2 * spec.K  # blob count; class of blob j is j mod K
    radius = 3.0
    angles = 2.0 * math.pi * np.arange(m) / m
    centers = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    chord = 2.0 * radius * math.sin(math.pi / m)
    blob_r = (chord - spec.margin) / 2.0
    if blob_r <= 0:
        raise ValueError(f"margin {spec.margin} too large for K={spec.K} blobs")

    which = gen.integers(0, m, size=spec.n)
    theta = gen.uniform(0.0, 2.0 * math.pi, size=spec.n)
    rad = blob_r * np.sqrt(gen.uniform(size=spec.n))
    X = np.empty((spec.n, spec.d))
    X[:, 0] = centers[which, 0] + rad * np.cos(theta)
    X[:, 1] = centers[which, 1] + rad * np.sin(theta)
    if spec.d > 2:
        X[:, 2:] = gen.normal(scale=0.5, size=(spec.n, spec.d - 2))
    y = which % spec.K

    class_of_blob = np.arange(m) % spec.K

    def h(points):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))[:, :2]
        d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        return class_of_blob[d2.argmin(axis=1)]

    ds = Dataset(name=f"separable-{spec.seed}", features=X, targets=y,
                 kind="classification", num_classes=spec.K)
    return ds, GroundTruth(h=h, h_values=y.astype(np.int64))


def _regression_noise(spec: SyntheticSpec, gen):
    X = gen.normal(size=(spec.n, spec.d))

    def f0(points):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        out = np.sin(2.0 * pts[:, 0])
        if pts.shape[1] >= 2:
            out = out + 0.5 * pts[:, 1] ** 2
        if pts.shape[1] >= 3:
            out = out + 0.5 * pts[:, 2]
        return out

    f0_vals = f0(X)
    y = f0_vals + spec.noise * gen.normal(size=spec.n)
    ds = Dataset(name=f"regression-noise-{spec.seed}", features=X, targets=y,
                 kind="regression")
    return ds, GroundTruth(f0=f0, f0_values=f0_vals, noise=spec.noise)


_GENERATORS = {
    "known-density-classification": _known_density,
    "separable-classification": _separable,
    "regression-with-noise": _regression_noise,
}


def generate_synthetic(spec: SyntheticSpec):
    """Sample a synthetic Dataset plus its row-aligned GroundTruth sidecar."""
    if spec.n <= 0:
        raise ValueError("n must be positive")
    if spec.generator not in _GENERATORS:
        raise ValueError(f"unknown generator {spec.generator!r}")
    if spec.generator.endswith("classification") and spec.K < 2:
        raise ValueError("classification generators need K >= 2")
    gen = rng.stream("synthetic", spec.generator, spec.seed)
    return _GENERATORS[spec.generator](spec, gen)


@dataclasses.dataclass(frozen=True)
class ManifestEntry:
    """One dataset listed in a TOML manifest."""

    name: str
    path: Path
    target: object = None
    kind: str = "regression"
    expected_rows: int | None = None
    expected_cols: int | None = None
    url: str | None = None

    def available(self) -> bool:
        return self.path.exists()


def load_manifest(path) -> dict[str, ManifestEntry]:
    """Parse a dataset manifest.

    Expected shape::

        [datasets.energy]
        path = "energy.csv"           # relative to the manifest file
        target_column = -1            # header name or integer index
        kind = "regression"
        expected_rows = 768
        expected_cols = 8
        url = "https://..."           # optional, used by `data fetch`
    """
    path = Path(path)
    with path.open("rb") as fh:
        doc = tomllib.load(fh)
    table = doc.get("datasets")
    if not isinstance(table, dict) or not table:
        raise ValueError(f"{path}: manifest has no [datasets.*] tables")
    entries = {}
    for name, row in table.items():
        known = {"path", "target_column", "kind", "expected_rows", "expected_cols", "url"}
        bad = set(row) - known
        if bad:
            raise ValueError(f"{path}: dataset {name!r} has unknown keys {sorted(bad)}")
        if "path" not in row:
            raise ValueError(f"{path}: dataset {name!r} missing 'path'")
        entries[name] = ManifestEntry(
            name=name,
            path=(path.parent / row["path"]).resolve(),
            target=row.get("target_column"),
            kind=row.get("kind", "regression"),
            expected_rows=row.get("expected_rows"),
            expected_cols=row.get("expected_cols"),
            url=row.get("url"),
        )
    return entries


def load_from_manifest(entry: ManifestEntry) -> Dataset:
    """Load a manifest entry and enforce its recorded shape."""
    ds = load_csv(entry.path, target=entry.target, kind=entry.kind, name=entry.name)
    if entry.expected_rows is not None and ds.n != entry.expected_rows:
        raise ValueError(f"{entry.name}: expected {entry.expected_rows} rows, file has {ds.n}")
    if entry.expected_cols is not None and ds.d != entry.expected_cols:
        raise ValueError(f"{entry.name}: expected {entry.expected_cols} feature columns, file has {ds.d}")
    return ds


def fetch_datasets(entries: dict[str, ManifestEntry], overwrite=False) -> dict[str, str]:
    """Download manifest entries that declare a url. Returns name -> status."""
    status = {}
    for name, entry in entries.items():
        if entry.path.exists() and not overwrite:
            status[name] = "present"
            continue
        if not entry.url:
            status[name] = "no url"
            continue
        try:
            entry.path.parent.mkdir(parents=True, exist_ok=True)
            urllib.request.urlretrieve(entry.url, entry.path)
            status[name] = "fetched"
        except OSError as exc:
            status[name] = f"error: {exc}"
    return status
