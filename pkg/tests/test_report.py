import pytest

from model import AlignConfig, AlignResult, CoderKind, LevelStats, Motion, NormalizationMode
from report import (
    RunReport,
    SlaveRecord,
    format_report,
    parse_report,
    read_report,
    read_truth,
    write_report,
    write_truth,
)


@pytest.fixture
def report():
    result = AlignResult(
        motion=Motion.from_degrees(4.93, 10.2, 29.7),
        per_level=[LevelStats(1, 6, 812.0, 0.91), LevelStats(0, 3, 2210.5, 0.88, True)],
        converged=True,
    )
    cfg = AlignConfig(coder=CoderKind.CENSUS_GE, max_pyramid_levels=3, normalization=NormalizationMode.NONE)
    record = SlaveRecord.from_result("in/b.png", "out/b_aligned.png", result, mi_before=0.41, mi_after=1.37)
    return RunReport(reference="in/a.png", config=cfg.to_dict(), records=[record])


def test_field_order(report):
    text = format_report(report)
    lines = text.splitlines()
    assert lines[:3] == ["tool=exposure-align", "version=0.1.0", "reference=in/a.png"]
    assert "config.coder=census" in lines
    section = lines[lines.index("[slave]") + 1:]
    assert [line.split("=", 1)[0] for line in section] == [
        "path", "output", "theta_deg", "tx", "ty", "levels", "final_cost",
        "converged", "swapped", "mi_before", "mi_after",
    ]
    assert "levels=1:6:812.0:0.91,0:3:2210.5:0.88" in section


def test_written_report_parses_back(tmp_path, report):
    path = write_report(str(tmp_path / "nested" / "report.txt"), report)
    parsed = read_report(path)
    assert parsed.reference == "in/a.png"
    assert parsed.records == report.records
    assert parsed.align_config() == AlignConfig(
        coder=CoderKind.CENSUS_GE, max_pyramid_levels=3, normalization=NormalizationMode.NONE
    )


def test_one_section_per_slave(report):
    report.records.append(report.records[0])
    parsed = parse_report(format_report(report))
    assert len(parsed.records) == 2


def test_malformed_line():
    with pytest.raises(ValueError):
        parse_report("tool=exposure-align\nnot a key value line\n")


class TestTruth:
    def test_values_written_exactly(self, tmp_path):
        path = write_truth(str(tmp_path / "t.txt"), "pair_synth.png", 5, 10, 30, -2)
        assert (tmp_path / "t.txt").read_text() == "slave=pair_synth.png\ntheta_deg=5.0\ntx=10.0\nty=30.0\nev=-2.0\n"
        assert read_truth(path)["theta_deg"] == "5.0"

    def test_missing_field(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("slave=x.png\ntheta_deg=1.0\n")
        with pytest.raises(ValueError, match="tx"):
            read_truth(str(path))
