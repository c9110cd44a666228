import shutil
import subprocess

import numpy as np
import pytest

from mapflow import cli


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch):
    monkeypatch.delenv(cli.ENV_CONFIG, raising=False)


def run(argv, capsys):
    rc = cli.main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


# -- verify ---------------------------------------------------------------


def test_verify_passes_for_bundled_pair(capsys):
    rc, out, _ = run(["verify", "--map", "lyness", "--a", "2",
                      "--samples", "40", "--measure-samples", "20000"], capsys)
    assert rc == 0
    assert "condition_mu[map=lyness(a=2), mu=xy, power=1]: PASS" in out
    assert "condition_X[map=lyness(a=2), mu=xy, power=1]: PASS" in out
    assert "classification[power=1]: PASS verdict=plus claimed=plus" in out
    assert "measure[power=1]: PASS" in out


def test_verify_skip_measure(capsys):
    rc, out, _ = run(["verify", "--map", "lyness", "--a", "1",
                      "--samples", "20", "--skip-measure"], capsys)
    assert rc == 0
    assert "measure: SKIP (requested)" in out


def test_verify_fails_on_wrong_power_and_hints(capsys):
    rc, out, _ = run(["verify", "--map", "todd", "--a", "1", "--mu", "xyz",
                      "--power", "1", "--samples", "20", "--skip-measure"], capsys)
    assert rc == 1
    assert "condition_mu[map=todd(a=1), mu=xyz, power=1]: FAIL" in out
    assert "re-run with --power 2" in out


def test_verify_minus_multiplier_passes_at_even_power(capsys):
    rc, out, _ = run(["verify", "--map", "todd", "--a", "1", "--mu", "xyz",
                      "--samples", "20", "--skip-measure"], capsys)
    assert rc == 0
    assert "power=2]: PASS" in out
    assert "verdict=minus claimed=minus" in out


def test_verify_counterexample_note(capsys):
    rc, out, _ = run(["verify", "--map", "tilde_lyness", "--samples", "20",
                      "--skip-measure"], capsys)
    assert rc == 0
    assert "non-diffeomorphism counterexample" in out


def test_verify_unknown_multiplier(capsys):
    rc, _, err = run(["verify", "--map", "lyness", "--a", "1",
                      "--mu", "nope"], capsys)
    assert rc == 2
    assert "error:" in err


# -- usage errors ----------------------------------------------------------


def test_no_command_prints_help(capsys):
    rc, _, err = run([], capsys)
    assert rc == 2
    assert "usage:" in err


def test_unknown_map(capsys):
    rc, _, err = run(["verify", "--map", "moebius"], capsys)
    assert rc == 2
    assert "error:" in err


def test_map_required(capsys):
    rc, _, err = run(["rotnum", "--seed", "1,1"], capsys)
    assert rc == 2
    assert "no map given" in err


def test_rotnum_requires_seed(capsys):
    rc, _, err = run(["rotnum", "--map", "lyness", "--a", "1"], capsys)
    assert rc == 2
    assert "--seed" in err


def test_seed_dimension_checked(capsys):
    rc, _, err = run(["rotnum", "--map", "lyness", "--a", "1",
                      "--seed", "1,1,1"], capsys)
    assert rc == 2
    assert "2 components" in err


# -- rotnum -----------------------------------------------------------------


def test_rotnum_reports_all_quantities(capsys):
    rc, out, _ = run(["rotnum", "--map", "lyness", "--a", "1",
                      "--seed", "1,1", "--birkhoff", "2000"], capsys)
    assert rc == 0
    assert "period:         T = 1.19" in out
    assert "flight time:    tau = -0.238" in out
    assert "multiplicity:   m = 1" in out
    assert "rho = 0.199999" in out
    assert "birkhoff:" in out
    assert "|diff|" in out


def test_rotnum_outside_domain_is_exit_3(capsys):
    rc, _, err = run(["rotnum", "--map", "lyness", "--a", "1",
                      "--seed=-1,1"], capsys)
    assert rc == 3
    assert "domain" in err


def test_rotnum_at_fixed_point_is_exit_4(capsys):
    rc, _, err = run(["rotnum", "--map", "lyness", "--a", "2",
                      "--seed", "2,2"], capsys)
    assert rc == 4
    assert "no closure" in err


def test_rotnum_non_invariant_is_exit_5(capsys):
    rc, _, err = run(["rotnum", "--map", "tilde_lyness", "--seed", "1,1"], capsys)
    assert rc == 5
    assert "not invariant" in err


# -- sweep -------------------------------------------------------------------


SWEEP_HEADER_2D = "h1,seed1,seed2,T,tau,rho,m,res_mu,res_X,res_V,status"


def test_sweep_writes_csv_with_fixed_schema(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    rc, text, _ = run(["sweep", "--map", "lyness", "--a", "2",
                       "--count", "5", "--out", str(out)], capsys)
    assert rc == 0
    assert f"wrote {out}: 5 rows, 5 usable, 0 flagged, 0 failed" in text
    assert "monotonicity: decreasing" in text
    assert "endpoint:" in text
    lines = out.read_text().splitlines()
    assert lines[0] == SWEEP_HEADER_2D
    assert len(lines) == 6
    for line in lines[1:]:
        cells = line.split(",")
        assert len(cells) == 11
        assert cells[-1] == "ok"
        # numeric cells round-trip through repr exactly
        for cell in cells[:-1]:
            float(cell)


def test_sweep_csv_is_byte_deterministic(tmp_path, capsys):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["sweep", "--map", "lyness", "--a", "2", "--count", "4",
         "--out", str(out1)], capsys)
    run(["sweep", "--map", "lyness", "--a", "2", "--count", "4",
         "--out", str(out2)], capsys)
    assert out1.read_bytes() == out2.read_bytes()


def test_sweep_three_dimensional_schema(tmp_path, capsys):
    out = tmp_path / "todd.csv"
    rc, _, _ = run(["sweep", "--map", "todd", "--a", "1", "--count", "3",
                    "--out", str(out)], capsys)
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "h1,h2,seed1,seed2,seed3,T,tau,rho,m,res_mu,res_X,res_V,status"
    assert len(lines) == 4
    assert all(line.split(",")[8] == "2" for line in lines[1:])  # multiplicity


def test_sweep_plot_rendered_alongside_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    png = tmp_path / "s.png"
    rc, text, _ = run(["sweep", "--map", "lyness", "--a", "2", "--count", "4",
                       "--out", str(out), "--plot", str(png)], capsys)
    assert rc == 0
    assert f"wrote {png}" in text
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_sweep_non_invariant_levels_exit_5(tmp_path, capsys):
    out = tmp_path / "tilde.csv"
    rc, text, _ = run(["sweep", "--map", "tilde_lyness", "--count", "3",
                       "--ray-base", "0,0", "--ray-dir", "1,1",
                       "--s-min", "0.6", "--s-max", "1.4",
                       "--out", str(out)], capsys)
    assert rc == 5
    assert "0 usable" in text
    lines = out.read_text().splitlines()
    assert len(lines) == 4
    assert all(line.endswith("not_invariant") for line in lines[1:])


def test_sweep_fully_outside_ray_exit_3(tmp_path, capsys):
    out = tmp_path / "out.csv"
    rc, _, _ = run(["sweep", "--map", "lyness", "--a", "2", "--count", "3",
                    "--ray-base", "0,0", "--ray-dir", "1,1",
                    "--s-min=-3", "--s-max=-1", "--out", str(out)], capsys)
    assert rc == 3


def test_sweep_ray_flags_go_together(capsys):
    rc, _, err = run(["sweep", "--map", "lyness", "--a", "2",
                      "--ray-base", "0,0"], capsys)
    assert rc == 2
    assert "go together" in err


def test_sweep_needs_ray_for_maps_without_default(capsys):
    rc, _, err = run(["sweep", "--map", "tilde_lyness", "--count", "3"], capsys)
    assert rc == 2
    assert "ray" in err


# -- portrait ------------------------------------------------------------------


def test_portrait_svg_content(tmp_path, capsys):
    out = tmp_path / "p.svg"
    rc, text, _ = run(["portrait", "--map", "lyness", "--a", "2",
                       "--grid", "3x3", "--markers", "10", "--out", str(out)], capsys)
    assert rc == 0
    assert f"wrote {out}" in text
    svg = out.read_text()
    assert svg.startswith("<svg xmlns=")
    assert "map: lyness(a=2)" in svg
    assert "<polyline" in svg
    assert "<circle" in svg
    assert svg.rstrip().endswith("</svg>")


def test_portrait_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    args = ["portrait", "--map", "lyness", "--a", "2", "--grid", "2x2",
            "--markers", "5"]
    run(args + ["--out", str(a)], capsys)
    run(args + ["--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_portrait_projection_for_three_dimensions(tmp_path, capsys):
    out = tmp_path / "t.svg"
    rc, _, _ = run(["portrait", "--map", "todd", "--a", "1", "--grid", "2x2",
                    "--markers", "5", "--projection", "xz", "--out", str(out)], capsys)
    assert rc == 0
    assert "projection: (0, 2)" in out.read_text()


def test_portrait_projection_needs_enough_coordinates(capsys):
    rc, _, err = run(["portrait", "--map", "lyness", "--a", "1",
                      "--projection", "xz"], capsys)
    assert rc == 2
    assert "projection" in err


def test_portrait_bad_grid(capsys):
    rc, _, err = run(["portrait", "--map", "lyness", "--a", "1",
                      "--grid", "wide"], capsys)
    assert rc == 2
    assert "--grid" in err


# -- config files ----------------------------------------------------------------


def write_config(tmp_path, text):
    path = tmp_path / "mapflow.ini"
    path.write_text(text)
    return str(path)


def test_config_supplies_defaults(tmp_path, capsys):
    cfgfile = write_config(tmp_path, "[common]\nmap = lyness\na = 2\n\n[sweep]\ncount = 4\n")
    out = tmp_path / "s.csv"
    rc, text, _ = run(["sweep", "--config", cfgfile, "--out", str(out)], capsys)
    assert rc == 0
    assert "4 rows" in text
    assert len(out.read_text().splitlines()) == 5


def test_explicit_flags_beat_config(tmp_path, capsys):
    cfgfile = write_config(tmp_path, "[common]\nmap = lyness\na = 2\n\n[sweep]\ncount = 4\n")
    out = tmp_path / "s.csv"
    rc, text, _ = run(["sweep", "--config", cfgfile, "--count", "3",
                       "--out", str(out)], capsys)
    assert rc == 0
    assert "3 rows" in text


def test_config_via_environment(tmp_path, capsys, monkeypatch):
    cfgfile = write_config(tmp_path, "[common]\nmap = lyness\na = 1\n")
    monkeypatch.setenv(cli.ENV_CONFIG, cfgfile)
    rc, out, _ = run(["rotnum", "--seed", "1,1"], capsys)
    assert rc == 0
    assert "map:            lyness(a=1)" in out


def test_config_section_scoping(tmp_path, capsys):
    # a [sweep] key must not leak into rotnum
    cfgfile = write_config(tmp_path, "[common]\nmap = lyness\na = 1\n\n[sweep]\ncount = 4\n")
    rc, out, _ = run(["rotnum", "--config", cfgfile, "--seed", "1,1"], capsys)
    assert rc == 0


def test_config_unknown_key_rejected(tmp_path, capsys):
    cfgfile = write_config(tmp_path, "[common]\nmap = lyness\nwibble = 3\n")
    rc, _, err = run(["rotnum", "--config", cfgfile, "--seed", "1,1"], capsys)
    assert rc == 2
    assert "unknown config key" in err


def test_config_file_missing(capsys):
    rc, _, err = run(["rotnum", "--map", "lyness", "--a", "1",
                      "--seed", "1,1", "--config", "/nonexistent.ini"], capsys)
    assert rc == 2
    assert "not found" in err


# -- installed entry point ---------------------------------------------------------


def test_console_script_smoke():
    exe = shutil.which("mapflow")
    assert exe, "console script not installed"
    proc = subprocess.run([exe, "rotnum", "--map", "lyness", "--a", "1",
                           "--seed", "1,1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "rho = 0.199999" in proc.stdout
