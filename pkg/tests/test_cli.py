from crenrich.cli import main


class TestConverge:
    def test_writes_csv_and_plot(self, tmp_path, capsys):
        out = tmp_path / "report.csv"
        plot = tmp_path / "plot.gp"
        code = main(
            [
                "converge",
                "--functions",
                "f1",
                "--elements",
                "cr,gn:2",
                "--mesh",
                "structured:2,4",
                "--out",
                str(out),
                "--plot",
                str(plot),
            ]
        )
        assert code == 0
        assert out.exists() and plot.exists()
        captured = capsys.readouterr().out
        assert "unnormalized" in captured
        assert "f1" in captured

    def test_inadmissible_row_still_succeeds(self, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = main(
            ["converge", "--functions", "f1", "--elements", "gn:0,cr", "--mesh", "structured:2", "--out", str(out)]
        )
        assert code == 0
        assert "InadmissibleFunctionals" in capsys.readouterr().out

    def test_bad_element_is_validation_error(self, tmp_path):
        assert main(["converge", "--elements", "gn:abc", "--mesh", "structured:2", "--out", str(tmp_path / "r.csv")]) == 1

    def test_bad_mesh_is_validation_error(self, tmp_path):
        assert main(["converge", "--mesh", "structured:", "--out", str(tmp_path / "r.csv")]) == 1

    def test_unwritable_out_is_runtime_error(self):
        code = main(["converge", "--functions", "f1", "--elements", "cr", "--mesh", "structured:2", "--out", "/no-such-dir/r.csv"])
        assert code == 2

    def test_config_file(self, tmp_path, capsys):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text(
            "# experiment\n"
            "functions = f1\n"
            "elements = cr\n"
            "mesh = structured:2,4\n"
            f"out = {tmp_path / 'c.csv'}\n"
        )
        assert main(["converge", "--config", str(cfgfile)]) == 0
        assert (tmp_path / "c.csv").exists()

    def test_cli_overrides_config(self, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("functions = f1,f2\nelements = cr\nmesh = structured:2\n")
        out = tmp_path / "o.csv"
        assert main(["converge", "--config", str(cfgfile), "--functions", "f1", "--out", str(out)]) == 0
        text = out.read_text()
        assert "f2" not in text

    def test_missing_config_file(self):
        assert main(["converge", "--config", "/no/such/file"]) == 1


class TestCheck:
    def test_all_pass(self, capsys):
        assert main(["check"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out


class TestInfo:
    def test_gn2(self, capsys):
        assert main(["info", "--element", "gn:2"]) == 0
        out = capsys.readouterr().out
        assert "N =" in out and "N_inv =" in out and "det(N)" in out
        assert "delta" in out

    def test_cr(self, capsys):
        assert main(["info", "--element", "cr"]) == 0
        assert "edge-mean" in capsys.readouterr().out

    def test_af3(self, capsys):
        assert main(["info", "--element", "af3"]) == 0
        assert "N =" in capsys.readouterr().out

    def test_gn_zero_is_validation_error(self):
        assert main(["info", "--element", "gn:0"]) == 1

    def test_unknown_element(self):
        assert main(["info", "--element", "bogus"]) == 1


class TestParsing:
    def test_bad_subcommand(self):
        assert main(["frobnicate"]) == 1

    def test_help_exits_zero(self):
        assert main(["--help"]) == 0

    def test_no_args(self):
        assert main([]) == 1
