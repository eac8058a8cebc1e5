import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from stable_tmle.core.errors import ConfigError
from stable_tmle.core.reports import (
    load_series,
    read_csv,
    read_key_values,
    summarize,
    summary_table,
    trimmed_summary,
    write_csv,
    write_key_values,
)


def test_summary_of_three_points():
    s = summarize([-1.0, 0.0, 1.0])
    assert s.count == 3
    assert s.mean == 0.0
    assert s.sd == pytest.approx(1.0)
    assert s.skew == pytest.approx(0.0)
    assert s.kurtosis == pytest.approx(1.5)


def test_constant_column_has_no_shape_statistics():
    s = summarize([2.0] * 5)
    assert (s.mean, s.sd, s.skew, s.kurtosis) == (2.0, 0.0, None, None)
    with pytest.raises(ValueError):
        summarize([1.0])


def test_gaussian_kurtosis_is_three():
    x = np.random.default_rng(0).standard_normal(1_000_000)
    assert summarize(x).kurtosis == pytest.approx(3.0, abs=0.02)


def test_trimmed_summary_drops_smallest_values():
    s = trimmed_summary([-100.0, 1.0, 2.0, 3.0], trim=1)
    assert s.count == 3
    assert s.mean == pytest.approx(2.0)
    with pytest.raises(ValueError):
        trimmed_summary([1.0, 2.0], trim=-1)


def _rows():
    return pd.DataFrame(
        {
            "replication": [0, 0, 1, 1, 2, 2],
            "estimator": ["tmle", "gmm", "tmle", "gmm", "tmle", "gmm"],
            "alpha": [1.2, 1.25, 1.4, 1.35, 1.3, 1.3],
            "lambda_star": [-0.5, 0.1, 0.2, -0.2, 0.3, 0.15],
        }
    )


def test_summary_table_layout():
    table = summary_table(_rows(), ["alpha"], trim=1)
    assert list(table.columns) == ["estimator", "parameter", "count", "mean", "sd", "skew", "kurtosis"]
    assert list(table["estimator"]) == ["gmm"] * 3 + ["tmle"] * 3
    assert list(table["parameter"]) == ["alpha", "lambda_star", "lambda_star_trim1"] * 2
    tmle_alpha = table[(table.estimator == "tmle") & (table.parameter == "alpha")].iloc[0]
    assert tmle_alpha["mean"] == pytest.approx(1.3)
    assert tmle_alpha["count"] == 3


def test_csv_round_trip_and_schema_line(tmp_path):
    rows = _rows()
    rows["skew"] = [0.1, None, 0.2, 0.3, 0.4, 0.5]
    path = write_csv(rows, tmp_path / "out" / "rows.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "# stable-tmle schema=1"
    assert "NA" in lines[3]

    back = read_csv(path)
    assert_allclose(back["alpha"], rows["alpha"], rtol=0, atol=0)
    assert np.isnan(back["skew"][1])


def test_summary_recomputes_from_written_rows(tmp_path):
    rows = _rows()
    write_csv(rows, tmp_path / "rows.csv")
    write_csv(summary_table(rows, ["alpha"], trim=1), tmp_path / "summary.csv")
    recomputed = summary_table(read_csv(tmp_path / "rows.csv"), ["alpha"], trim=1)
    pd.testing.assert_frame_equal(recomputed, read_csv(tmp_path / "summary.csv"), check_dtype=False)


def test_write_csv_to_stdout(capsys):
    assert write_csv(pd.DataFrame({"x": [0.1]}), "-") is None
    assert capsys.readouterr().out == "# stable-tmle schema=1\nx\n0.10000000000000001\n"


def test_key_values(tmp_path):
    path = write_key_values({"mode": "sample", "n": 10}, tmp_path / "config.txt")
    lines = path.read_text().splitlines()
    assert lines == ["mode=sample", "n=10"]
    assert read_key_values(["# comment", "", " seed = 3 "] + lines) == {"seed": "3", "mode": "sample", "n": "10"}
    with pytest.raises(ConfigError):
        read_key_values(["no separator"])


def test_load_series(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("# stable-tmle schema=1\nx\n1.5\n-2\n3e-1\n")
    assert_allclose(load_series(path), [1.5, -2.0, 0.3])

    empty = tmp_path / "empty.csv"
    empty.write_text("x\ny\n")
    with pytest.raises(ConfigError):
        load_series(empty)


@pytest.mark.parametrize("body", ["x\n1.2\n1.2.3\n0.5\n", "1.2\n-0.4\nNA\n", "x\n1.0\n\n# note\ny\n", ""])
def test_load_series_rejects_non_numeric_rows(tmp_path, body):
    path = tmp_path / "data.csv"
    path.write_text(body)
    with pytest.raises(ConfigError):
        load_series(path)
