#!/usr/bin/env python3
"""Runs the mrflow binary on the shipped configs and checks outputs against docs/schemas."""
import csv
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

binary, root = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])
schemas = {p.name.split(".")[0]: json.loads(p.read_text()) for p in (root / "docs/schemas").glob("*.json")}

SMALL_GYRE = """
field.kind = double_gyre
[particle]
R = 0.5
St = 0.5
Re = 100
g = [0, -1]
y0 = [0.6, 0.3]
[time]
t_end = 0.3
[solver]
mode = strong
nodes_per_window = 8
window = 0.1
[probe]
pairs = 20
window = 0.2
[ftle]
resolution = [4, 3]
T = 0.2
"""


def run(cmd, config, out, expect=0):
    r = subprocess.run([str(binary), cmd, "--config", str(config), "--out", str(out)], capture_output=True, text=True)
    if r.returncode != expect:
        sys.exit(f"{cmd} {config}: exit {r.returncode}, expected {expect}\n{r.stdout}\n{r.stderr}")
    return r


def check(name, path):
    jsonschema.validate(json.loads(path.read_text()), schemas[name])


def header(path):
    with path.open() as f:
        return next(csv.reader(f))


with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    small = tmp / "small.conf"
    small.write_text(SMALL_GYRE)

    run("validate", root / "configs/validate.conf", tmp / "v")
    check("validation", tmp / "v/validation.json")

    for out in ("s1", "s2"):
        run("simulate", root / "configs/example_quiescent.conf", tmp / out)
    check("simulate", tmp / "s1/summary.json")
    assert header(tmp / "s1/trajectory.csv") == ["t", "y1", "y2", "w1", "w2", "v1", "v2"]
    for f in ("trajectory.csv", "summary.json"):
        assert (tmp / "s1" / f).read_bytes() == (tmp / "s2" / f).read_bytes(), f

    run("simulate", small, tmp / "g")
    check("simulate", tmp / "g/summary.json")

    # Uncertified probe window: reported and flagged, not an error.
    r = run("probe", small, tmp / "p")
    check("probe", tmp / "p/probe.json")
    probe = json.loads((tmp / "p/probe.json").read_text())
    assert not probe["certified"] and probe["warnings"], probe["warnings"]

    run("ftle", small, tmp / "f")
    check("ftle", tmp / "f/ftle.json")
    assert header(tmp / "f/ftle.csv") == ["x", "y", "ftle"]

print("outputs ok")
