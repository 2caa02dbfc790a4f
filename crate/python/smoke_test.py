"""Smoke test for the flowsieve_py extension.

Build the library first with `cargo build -p flowsieve-py`. The script copies
`target/<profile>/libflowsieve_py.so` next to a temporary import path, or uses
an already importable `flowsieve_py` (for example a maturin wheel).
"""

import importlib
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    try:
        return importlib.import_module("flowsieve_py")
    except ImportError:
        pass
    profile = os.environ.get("FLOWSIEVE_PROFILE", "debug")
    built = ROOT / "target" / profile / "libflowsieve_py.so"
    if not built.exists():
        sys.exit(f"{built} not found; run `cargo build -p flowsieve-py` first")
    where = Path(tempfile.mkdtemp(prefix="flowsieve_py_"))
    shutil.copy(built, where / "flowsieve_py.so")
    sys.path.insert(0, str(where))
    return importlib.import_module("flowsieve_py")


def main():
    fs = load_module()

    d = fs.Dataset.synthetic(800, 4, 12, balance=0.5, seed=7)
    assert len(d) == 800
    assert len(d.feature_names) == 16
    assert sorted(set(d.labels)) == [0, 1]

    raw = fs.score_all(d, seed=1, rfe_estimators=5)
    assert sorted(raw) == ["chi_squared", "dispersion_ratio", "info_gain", "mad", "rfe"]
    assert all(len(v) == 16 for v in raw.values())

    pairs, top = fs.rank(d, k=4, seed=1, rfe_estimators=5)
    assert len(pairs) == 16 and len(top) == 4
    assert abs(sum(p for _, p in pairs) - 100.0) < 1e-6
    assert [name for name, _ in pairs[:4]] == top
    assert fs.rank(d, k=4, seed=1, rfe_estimators=5) == (pairs, top)

    small = d.select_features(top)
    for family in ("random_forest", "gbm_histogram", "gbm_goss"):
        model = fs.Model.fit(small, family, seed=3, n_estimators=20)
        pred = model.predict(small)
        m = fs.metrics(small.labels, pred)
        assert m["tp"] + m["fp"] + m["tn"] + m["fn"] == 800
        assert 0.0 <= m["acc"] <= 100.0
        proba = model.predict_proba(small)
        assert all(0.0 <= p <= 1.0 for p in proba)
        assert abs(sum(model.feature_importances) - 1.0) < 1e-9
        again = fs.Model.from_json(model.to_json())
        assert again.predict(small) == pred
        print(f"{family}: acc {m['acc']:.1f}% macro-F1 {m['macro_f1']:.1f}%")

    try:
        fs.Model.fit(d, "not-a-family")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown family accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
