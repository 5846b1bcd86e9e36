import os
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

import mql

FIXTURES = Path(os.environ.get("MQL_FIXTURES_DIR", Path(__file__).resolve().parents[2] / "tests" / "fixtures"))
HOME_QUERY = (FIXTURES / "home_values.mql").read_text()


def test_parse_and_pretty_round_trip():
    statements = mql.parse(HOME_QUERY)
    assert len(statements) == 1
    assert mql.parse(mql.pretty(HOME_QUERY)) == statements


def test_parse_error_raises():
    with pytest.raises(mql.MqlError):
        mql.parse("GENERATE PREDICTION FROM;")


@pytest.mark.parametrize("n,seed", [(1, 0), (10, 42), (506, 42), (8802, 7)])
def test_permutation_matches_numpy(n, seed):
    assert list(mql.permutation(n, seed)) == list(np.random.RandomState(seed).permutation(n))


def test_split_counts():
    assert tuple(mql.split_counts(506)) == (404, 102)
    assert tuple(mql.split_counts(8802)) == (7041, 1761)


def test_fit_linear_agrees_with_sklearn():
    from sklearn.linear_model import LinearRegression

    rng = np.random.RandomState(3)
    x = rng.normal(size=(120, 4))
    y = x @ np.array([1.0, -2.0, 0.5, 3.0]) + 0.7 + rng.normal(scale=0.3, size=120)
    intercept, coef = mql.fit_linear(x.tolist(), y.tolist())
    ref = LinearRegression().fit(x, y)
    assert abs(intercept - ref.intercept_) < 1e-6
    assert np.max(np.abs(np.array(coef) - ref.coef_)) < 1e-6


def test_run_returns_outcomes(tmp_path):
    report = mql.run(HOME_QUERY, data_dir=str(FIXTURES), out_dir=str(tmp_path / "out"),
                     model_store=str(tmp_path / "models"))
    assert report["ok"]
    table = report["statements"][0]["table"]
    assert table["HomeNo"] == [1.0, 2.0, 3.0, 4.0]
    assert table["prediction"][0] == pytest.approx(29.0818, abs=1e-4)

    svg = next(p for p in report["statements"][0]["artifacts"] if p.endswith(".svg"))
    root = ET.parse(svg).getroot()
    rects = [e for e in root.iter() if e.tag.endswith("rect")]
    assert len(rects) == 1 + 4


def test_bad_option_raises():
    with pytest.raises(ValueError):
        mql.run(HOME_QUERY, missing="median")


def test_emitted_script_header_and_predictions(tmp_path):
    scripts = mql.emit(HOME_QUERY, data_dir=str(FIXTURES), out_dir=str(tmp_path / "out"),
                       model_store=str(tmp_path / "models"), missing="impute")
    script = scripts[1]
    header = dict(line[len("# mql:"):].split("=", 1) for line in script.splitlines() if line.startswith("# mql:"))
    assert header["kind"] == "gen"
    assert header["missing"] == "impute"
    assert header["seed"] == "42"

    path = tmp_path / "backend.py"
    path.write_text(script)
    done = subprocess.run([sys.executable, str(path)], capture_output=True, text=True, check=True)
    emitted = [float(line.split(":", 1)[1]) for line in done.stdout.splitlines() if line.startswith("PRED:")]

    native = mql.run(HOME_QUERY, data_dir=str(FIXTURES), out_dir=str(tmp_path / "native"),
                     model_store=str(tmp_path / "models"), missing="impute")
    predictions = native["statements"][0]["table"]["prediction"]
    assert len(emitted) == len(predictions) == 4
    assert max(abs(a - b) for a, b in zip(emitted, predictions)) < 1e-6
