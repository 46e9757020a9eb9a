import pytest

from ccgauge import harness as h
from ccgauge.cli import main


def test_run_is_byte_identical(tmp_path, scenario_path):
    noisy = tmp_path / "noisy.txt"
    noisy.write_text(scenario_path("cold_cycle").read_text() + "set adc.noise_lsb 1.5\n")
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert main(["run", "--scenario", str(noisy), "--out", str(a), "--seed", "3"]) == 0
    assert main(["run", "--scenario", str(noisy), "--out", str(b), "--seed", "3"]) == 0
    assert main(["run", "--scenario", str(noisy), "--out", str(c), "--seed", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_run_summary_matches_rows(tmp_path, scenario_path, capsys):
    out = tmp_path / "run.csv"
    assert main(["run", "--scenario", str(scenario_path("cold_cycle")), "--out", str(out)]) == 0
    rows = h.read_csv(out)
    errs = [abs(float(r["err_pct"])) for r in rows]
    printed = capsys.readouterr().out
    assert f"max_abs_err={max(errs):.6f}" in printed
    assert f"mean_abs_err={sum(errs) / len(errs):.6f}" in printed


def test_compare_writes_capacity_columns(tmp_path, scenario_path, capsys):
    out = tmp_path / "cmp.csv"
    code = main(["compare", "--scenario", str(scenario_path("charge_1c")), "--out", str(out), "--lsb-mv", "0.5"])
    assert code == 0
    rows = h.read_csv(out)
    assert {"cap_ideal_mAh", "cap_quant_mAh", "cap_err_pct"} <= set(rows[0])
    assert "lsb_mV=0.5" in capsys.readouterr().out


@pytest.mark.parametrize(
    "ocv, temp, printed",
    [("3.60", "25", "13.40"), ("4.132", "25", "99.70"), ("3.40", "25", "1.67")],
)
def test_soc_lookup(ocv, temp, printed, capsys):
    assert main(["soc-lookup", "--ocv", ocv, "--temp", temp]) == 0
    assert capsys.readouterr().out.strip() == printed


def test_soc_lookup_out_of_range(capsys):
    assert main(["soc-lookup", "--ocv", "3.40", "--temp", "0"]) != 0
    assert "out of range" in capsys.readouterr().err


def test_validate_table(tmp_path, capsys):
    good = tmp_path / "t.txt"
    good.write_text(
        "3.300 3.452 26.55 88.6\n3.452 3.508 125 431.1\n3.508 3.595 149 516.1\n"
        "3.595 3.676 344 1225\n3.676 3.739 229.5 800.9\n3.739 3.967 111.9 359.9\n"
        "3.967 4.039 104.8 332\n4.039 4.132 90.61 274.7\n"
    )
    assert main(["validate-table", "--table", str(good)]) == 0
    assert capsys.readouterr().out.count("discontinuity") == 7
    bad = tmp_path / "bad.txt"
    bad.write_text(good.read_text().replace("3.508 3.595", "3.51 3.595"))
    assert main(["validate-table", "--table", str(bad)]) == 1


def test_bad_scenario_exit_code(tmp_path):
    sc = tmp_path / "bad.txt"
    sc.write_text("storage -3\n")
    assert main(["run", "--scenario", str(sc), "--out", str(tmp_path / "x.csv")]) == 1
