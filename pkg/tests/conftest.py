"""Shared fixtures.

The bundled scenario suite takes tens of seconds, so it runs once per
session; the acceptance tests, the CLI golden test and the heat-chain
checks all read from the same run.
"""

import json
import time

import pytest

from ineqlab import cli


@pytest.fixture(scope="session")
def suite_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    t0 = time.monotonic()
    code = cli.main(["verify", "--config", "paper-suite", "--out", str(out), "--jobs", "1"])
    elapsed = time.monotonic() - t0
    return {
        "exit_code": code,
        "out_dir": out,
        "elapsed": elapsed,
        "report": json.loads((out / "report.json").read_text()),
        "json_bytes": (out / "report.json").read_bytes(),
        "csv_text": (out / "report.csv").read_text(),
    }


@pytest.fixture(scope="session")
def suite_config():
    return cli._load_config("paper-suite")
