from edmtools.console import oracle, solve
from edmtools.console.report import RunReport
from edmtools.console.solve import Strategy, cmd_solve
from edmtools.verdict import Answer, CertificateKind, Verdict
import pytest


def report_fields(path):
    with open(path) as inp:
        return dict(line.split(": ", 1) for line in inp.read().splitlines())


@pytest.mark.parametrize(
    "instance_file,dim,exit_code,first_line",
    [
        pytest.param("worked.edm", None, 0, "yes", id="worked_yes"),
        pytest.param("triangle.edm", 1, 1, "no", id="triangle_on_line"),
        pytest.param("triangle.edm", 2, 0, "yes", id="triangle_in_plane"),
        pytest.param("malformed.edm", None, 3, None, id="malformed"),
    ],
)
def test_solve_exit_codes(instance_file, dim, exit_code, first_line, datapath, capsys):
    """Mimics the following command

    ```
    edmtools solve -i <instance_file> [-d <dim>]
    ```
    """
    with pytest.raises(SystemExit) as err:
        solve.solve(instance=datapath[instance_file], dim=dim)
    assert err.value.code == exit_code
    out = capsys.readouterr().out.splitlines()
    if first_line is None:
        assert out == []
    else:
        assert out[0] == first_line


def test_solve_witness(datapath, capsys):
    with pytest.raises(SystemExit):
        solve.solve(instance=datapath["triangle.edm"], dim=1)
    assert "witness: 0 1 2" in capsys.readouterr().out.splitlines()


def test_solve_report(datapath, request, tmp_path):
    """Mimics the following command

    ```
    edmtools solve -i triangle.edm -d 1 -r <test_name>.report
    ```
    """
    instance_file = datapath["triangle.edm"]
    report_file = tmp_path / "{}.report".format(request.node.name)

    with pytest.raises(SystemExit):
        solve.solve(instance=instance_file, dim=1, report=report_file)

    fields = report_fields(report_file)
    assert fields["instance"] == str(instance_file)
    assert fields["command"] == "solve"
    assert fields["answer"] == "no"
    assert fields["certified"] == "true"
    assert fields["certificate"] == "failing clique"
    assert fields["witness"] == "0 1 2"
    assert fields["parameters"] == (
        "dim=1 strategy=auto kmax=4 exact_cap=8 restarts=64 seed=0"
    )
    assert fields["removed"] == "-"
    assert float(fields["wall_time"]) >= 0
    assert list(fields)[-1] == "wall_time"


def test_cmd_solve_strategies(datapath):
    worked = datapath["worked.edm"]
    chordal = cmd_solve(worked, strategy=Strategy.CHORDAL, verify=True)
    assert chordal.answer is Answer.YES
    assert chordal.certificate is CertificateKind.REALIZATION
    exact = cmd_solve(worked, strategy=Strategy.EXACT, restarts=8)
    assert exact.answer is Answer.YES
    assert exact.format(include_time=False).splitlines()[0] == "instance: {}".format(
        worked
    )


@pytest.mark.parametrize("verify", [True, False])
def test_chordal_strategy_precondition(verify, datapath, capsys):
    with pytest.raises(SystemExit) as err:
        solve.solve(
            instance=datapath["unit9.edm"], strategy=Strategy.CHORDAL, verify=verify
        )
    assert err.value.code == 3
    assert capsys.readouterr().out == ""


def test_report_exit_code_follows_verdict():
    report = RunReport("instance.edm", "solve")
    assert report.exit_code == 2
    verdicts = [
        (Verdict.no(witness=(0, 1, 2)), 1),
        (Verdict.no(certified=False), 2),
        (Verdict.unknown("budget"), 2),
    ]
    for verdict, code in verdicts:
        assert report.record(verdict).exit_code == verdict.exit_code == code


def test_oracle_command(datapath, capsys):
    """Mimics the following command

    ```
    edmtools oracle -i triangle.edm -d 1
    ```
    """
    with pytest.raises(SystemExit) as err:
        oracle.oracle(instance=datapath["triangle.edm"], dim=1)
    assert err.value.code == 1
    out = capsys.readouterr().out.splitlines()
    assert out[:2] == ["no", "witness: 0 1 2"]
    assert out[2].endswith("residual inf")
