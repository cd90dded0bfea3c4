"""Fixtures: run the tastenet pipeline and share its CSV outputs.

The figures package consumes tastenet only through its command line and
file formats, so the fixtures shell out to the installed CLI. Two
pipelines are provided: the built-in synthetic-default population (what
the acceptance checks render from), and a denser custom population whose
within-group overlaps are rich enough that every audience panel of the
correlation plane is defined.
"""

import subprocess
import sys

import pytest

DENSE_SPEC = """
items = 40
archetypes = 3
seed = 6
group.critic.count = 8
group.critic.density = 0.8
group.critic.noise_sd = 0.4
group.critic.anchor_weight = 0.9
group.amateur.count = 16
group.amateur.density = 0.35
group.amateur.noise_sd = 1.2
group.amateur.anchor_weight = 0.5
"""


def run_tastenet(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "tastenet.cli", *args],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, f"tastenet {' '.join(args)} failed:\n{proc.stdout}\n{proc.stderr}"
    return proc


def run_report(root, ratings, **overrides):
    out = root / "report"
    args = {
        "--k-list": "1,5",
        "--rho-list": "0,1",
        "--overlap-threshold": "5",
        "--holdout": "5",
        "--repetitions": "2",
        "--highlight-k": "5",
    }
    args.update(overrides)
    flat = [x for pair in args.items() for x in pair]
    run_tastenet("--out", str(out), "--seed", "11", "report", "--ratings", str(ratings), *flat)
    return out


@pytest.fixture(scope="session")
def pipeline(tmp_path_factory):
    """Report bundle from the built-in synthetic-default population."""
    root = tmp_path_factory.mktemp("default_pipeline")
    run_tastenet("--out", str(root), "--seed", "11", "synth")
    return run_report(root, root / "ratings.csv")


@pytest.fixture(scope="session")
def dense_pipeline(tmp_path_factory):
    """Report bundle from a denser population where every correlation-plane
    audience has observed entries for both groups."""
    root = tmp_path_factory.mktemp("dense_pipeline")
    spec = root / "pop.spec"
    spec.write_text("\n".join(line.strip() for line in DENSE_SPEC.strip().splitlines()) + "\n")
    run_tastenet("--out", str(root), "synth", "--spec", str(spec))
    return run_report(
        root,
        root / "ratings.csv",
        **{"--k-list": "1,3,5", "--overlap-threshold": "2", "--holdout": "3", "--highlight-k": "3"},
    )
