import importlib.util
from pathlib import Path

import pytest

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


@pytest.fixture(scope="module")
def bench():
    spec = importlib.util.spec_from_file_location("bench_kernels", BENCH)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def test_benchmark_smoke(bench, capsys):
    res = bench.bench(t_end=1.0, repeat=1)
    assert res["python"]["steps"] > 0
    if "compiled" in res:
        assert res["max_abs_diff"] <= 1e-11
        assert res["compiled"]["steps"] == res["python"]["steps"]
    assert bench.main(["--t-end", "0.5", "--repeat", "1"]) == 0
    assert "python" in capsys.readouterr().out
