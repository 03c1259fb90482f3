"""Smoke tests for the Python bindings.

Runnable directly (python3 test_smoke.py) or under pytest. The built module
must be importable; the CMake build places it under <build>/python.
"""

import math
import sys

import lgfmltg


def test_pearson():
    assert lgfmltg.pearson([1, 2, 3], [2, 4, 6]) == 1.0
    assert lgfmltg.pearson([1, 2, 3], [6, 4, 2]) == -1.0
    assert abs(lgfmltg.pearson([1, 2, 3, 4], [1, 3, 2, 4]) - 0.8) < 1e-12
    assert lgfmltg.pearson([5, 5, 5], [1, 2, 3]) == 0.0


def test_pearson_errors():
    try:
        lgfmltg.pearson([1, 2], [1, 2, 3])
    except lgfmltg.LgfError:
        pass
    else:
        raise AssertionError("expected LgfError for mismatched lengths")


def test_correlation_adjacency():
    window = [[0.0, 0.0, 1.0], [1.0, 1.0, 0.5], [2.0, 2.0, 0.7], [3.0, 3.0, 0.1]]
    adj = lgfmltg.correlation_adjacency(window, 0.5)
    n = len(adj)
    assert n == 3
    assert adj[0][1] == 1.0  # identical columns
    for i in range(n):
        assert adj[i][i] == 0.0
        for j in range(n):
            assert adj[i][j] == adj[j][i]
            if adj[i][j] != 0.0:
                assert abs(adj[i][j]) >= 0.5


def test_synth_dataset_determinism():
    a = lgfmltg.synth_dataset(classes=2, variables=5, runs_per_class=1, run_length=12, seed=9)
    b = lgfmltg.synth_dataset(classes=2, variables=5, runs_per_class=1, run_length=12, seed=9)
    assert a["values"] == b["values"]
    assert a["run_labels"] == [1, 2]
    assert len(a["values"]) == 24
    assert len(a["values"][0]) == 5


def test_class_metrics_reference_rows():
    r = lgfmltg.class_metrics([[640, 360], [140, 1000]])
    cm = r["per_class"][0]
    assert abs(cm["fdr"] - 64.0) < 1e-9
    assert abs(cm["f1"] - 71.9) <= 0.05
    r15 = lgfmltg.class_metrics([[855, 145], [310, 1000]])
    assert abs(r15["per_class"][0]["f1"] - 79.0) <= 0.05


def test_cross_entropy():
    assert abs(lgfmltg.cross_entropy([0.0] * 20, 7) - math.log(20.0)) < 1e-12
    want = math.log(math.exp(1) + math.exp(2) + math.exp(3)) - 3.0
    assert abs(lgfmltg.cross_entropy([1.0, 2.0, 3.0], 3) - want) < 1e-12


def test_gradcheck():
    assert lgfmltg.gradcheck_max_error() <= 1e-4


def test_train_synthetic_learns():
    out = lgfmltg.train_synthetic(classes=2, variables=6, runs_per_class=2, run_length=24,
                                  window_length=8, epochs=15, seed=42)
    assert out["windows"] > 0
    assert len(out["loss"]) == 15
    assert out["loss"][-1] < out["loss"][0]
    assert out["train_accuracy"][-1] >= 0.9
    assert out["report"]["averages"]["fdr"] >= 90.0


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_") and callable(v)]
    for t in tests:
        t()
        print(f"ok: {t.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())
