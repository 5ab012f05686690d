import json

from chemoblow.verify import format_report, run_suite, write_report


def test_fast_suite_passes_quickly():
    report = run_suite("fast")
    assert report["all_pass"], format_report(report)
    assert report["wall_time_s"] < 60.0
    names = [c["name"] for c in report["checks"]]
    assert "mutation_sanity" in names
    assert "elliptic_mms_order" in names


def test_full_suite_includes_refinement_studies():
    report = run_suite("full")
    assert report["all_pass"], format_report(report)
    names = [c["name"] for c in report["checks"]]
    # the full suite adds the refinement and cross-formulation studies
    for required in ("parabolic_mms_order", "grid_consistency_t_num",
                     "cross_formulation_u_agreement", "energy_identity"):
        assert required in names


def test_report_roundtrip(tmp_path):
    report = run_suite("fast")
    path = tmp_path / "report.json"
    write_report(report, path)
    assert json.loads(path.read_text())["suite"] == "fast"
