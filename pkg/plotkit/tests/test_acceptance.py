"""Secondary acceptance: all five figure kinds render from a real
reference run and a real 3x3 sweep, byte-identical across repeated
invocations.  The runs are produced through the simulator CLI, so this
module exercises only the public file interfaces."""

import hashlib
import subprocess
import sys
from pathlib import Path

import pytest

from plotkit import FigureSpec, render

REPO_ROOT = Path(__file__).resolve().parent.parent.parent
SCENARIOS = REPO_ROOT / "scenarios"

chemoblow_missing = subprocess.run(
    [sys.executable, "-c", "import chemoblow"], capture_output=True
).returncode != 0

pytestmark = pytest.mark.skipif(
    chemoblow_missing, reason="simulator CLI not installed")


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "chemoblow", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr + proc.stdout
    return proc


@pytest.fixture(scope="session")
def reference_outputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("refrun")
    run_cli("run", str(SCENARIOS / "reference_blowup.ini"),
            "--out", str(out))
    return out


@pytest.fixture(scope="session")
def sweep_outputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweeprun")
    run_cli("sweep", str(SCENARIOS / "sweep_dominance.ini"),
            "--out", str(out))
    return out


def digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_all_five_kinds_render_byte_identical(reference_outputs,
                                              sweep_outputs, tmp_path):
    jobs = {
        "profiles": reference_outputs / "reference_blowup.profiles.csv",
        "psi_history": reference_outputs / "reference_blowup.csv",
        "decomposition": reference_outputs / "reference_blowup.csv",
        "bound_vs_observed": sweep_outputs / "sweep_dominance.csv",
        "sweep_heatmap": sweep_outputs / "sweep_dominance.csv",
    }
    for kind, source in jobs.items():
        assert source.is_file(), f"missing simulator output {source}"
        spec = FigureSpec(kind=kind, inputs=[source],
                          output=tmp_path / f"{kind}.png")
        render(spec)
        first = digest(spec.output)
        render(spec)
        assert digest(spec.output) == first, f"{kind} not byte-stable"
        assert spec.output.stat().st_size > 2000
        print(f"[PASS] plotkit {kind}: byte-identical render")


def test_sweep_rows_cover_grid(sweep_outputs):
    lines = (sweep_outputs / "sweep_dominance.csv").read_text().splitlines()
    assert len(lines) == 10   # header + 3x3 rows


def test_cli_end_to_end(reference_outputs, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "plotkit.cli", "psi_history",
         str(reference_outputs / "reference_blowup.csv"),
         "-o", str(tmp_path / "history.png")],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "history.png").is_file()
