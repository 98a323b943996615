import json

import numpy as np
import pytest


def write_manifest(tmp_path, tables, channels, labels=None, name="manifest.json"):
    """Write CSV files (rows = observations) plus a manifest; returns the manifest path."""
    entries = []
    for k, table in enumerate(tables):
        header, rows = table if isinstance(table, tuple) else (channels, table)
        path = tmp_path / f"ds{k}.csv"
        lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        entry = {"id": f"ds{k}", "path": path.name}
        if labels is not None:
            entry["label"] = labels[k]
        entries.append(entry)
    manifest = tmp_path / name
    manifest.write_text(json.dumps({"channels": list(channels), "datasets": entries}), encoding="utf-8")
    return manifest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
