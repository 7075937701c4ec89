import json

import pytest
from click.testing import CliRunner

from epr_couplings.cli import main
from epr_couplings.model import (
    ConnectionVector,
    connection_marginals,
    marginal_spec_to_json,
)


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    return result


def test_compat_incompatible_pr_box(runner):
    result = invoke(runner, ["compat", "--p", "1/2,1/2,1/2,0", "--eps", "0,0,0,0"])
    assert result.exit_code == 1
    payload = json.loads(result.output)
    assert payload["compatible"] is False


def test_compat_compatible_with_crosscheck(runner):
    result = invoke(
        runner,
        ["compat", "--p", "1/4,1/4,1/4,1/4", "--eps", "0,0,0,0", "--lp-crosscheck"],
    )
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["compatible"] is True
    assert payload["lp_feasible"] is True
    assert payload["lp_agrees"] is True


def test_compat_input_errors(runner):
    result = invoke(runner, ["compat", "--p", "1/2,1/2", "--eps", "0,0,0,0"])
    assert result.exit_code == 2
    assert "error" in json.loads(result.output)
    result = invoke(runner, ["compat", "--p", "3/4,0,0,0", "--eps", "0,0,0,0"])
    assert result.exit_code == 2
    result = invoke(runner, ["compat", "--p", "zebra,0,0,0", "--eps", "0,0,0,0"])
    assert result.exit_code == 2


def test_qm_angle_example(runner):
    result = invoke(runner, ["qm", "--angles", "0,pi/2,pi/4,-pi/4"])
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["p"] == [
        "(2-1*sqrt2)/8", "(2-1*sqrt2)/8", "(2-1*sqrt2)/8", "(2+1*sqrt2)/8",
    ]
    assert payload["mode"] == "exact"
    assert payload["qm_classification"] == "boundary"


def test_feasible_with_witness_file(runner, tmp_path):
    specs = [
        marginal_spec_to_json(s)
        for s in connection_marginals(ConnectionVector(0, 0, 0, 0))
    ]
    marg = tmp_path / "marginals.json"
    marg.write_text(json.dumps(specs))
    witness = tmp_path / "witness.json"

    result = invoke(
        runner,
        ["feasible", "--marginals", str(marg), "--p", "1/4,1/4,1/4,1/4",
         "--witness", str(witness)],
    )
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["feasible"] is True
    stored = json.loads(witness.read_text())
    assert len(stored) == 256

    result = invoke(
        runner, ["feasible", "--marginals", str(marg), "--p", "1/2,1/2,1/2,0"]
    )
    assert result.exit_code == 1
    assert json.loads(result.output)["feasible"] is False


def test_support_command(runner, tmp_path):
    eps_t = ConnectionVector(*(["(-1+1*sqrt2)/8"] * 4))
    specs = [marginal_spec_to_json(s) for s in connection_marginals(eps_t)]
    marg = tmp_path / "marginals.json"
    marg.write_text(json.dumps({"marginals": specs}))
    result = invoke(
        runner, ["support", "--marginals", str(marg), "--direction", "1,1,1,-2"]
    )
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["value"] == "(1+1*sqrt2)/2"


def test_regions_command(runner, tmp_path):
    out = tmp_path / "grid.csv"
    result = invoke(
        runner,
        ["regions", "--fix", "1/4,1/4", "--grid", "9", "--out", str(out)],
    )
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["cells"] == 81
    assert payload["inclusion_holds"] is True
    lines = out.read_text().splitlines()
    assert lines[0] == "free_x,free_y,chsh,qm,tsirelson"
    assert len(lines) == 82


def test_regions_csv_to_stdout(runner):
    result = invoke(runner, ["regions", "--fix", "1/4,1/4", "--grid", "4",
                             "--format", "csv"])
    assert result.exit_code == 0
    assert result.output.splitlines()[0] == "free_x,free_y,chsh,qm,tsirelson"
    assert len(result.output.splitlines()) == 17


def test_verify_command(runner):
    result = invoke(runner, ["verify", "e0", "--trials", "50", "--seed", "3"])
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["pass"] is True
    assert payload["member_count"] == 8


def test_verify_byte_determinism(runner):
    args = ["verify", "lemma1", "--trials", "40", "--seed", "11"]
    first = invoke(runner, args)
    second = invoke(runner, args)
    assert first.output == second.output
    assert first.exit_code == second.exit_code == 0


def test_qm_max_chsh_command(runner):
    result = invoke(runner, ["qm-max-chsh", "--resolution", "16", "--refine", "2"])
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["value"] <= 1.2071067811865476 + 1e-9


def test_verify_all_small(runner):
    result = invoke(
        runner,
        ["verify", "all", "--trials", "30", "--seed", "7", "--grid", "21"],
    )
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["pass"] is True
    assert set(payload["suites"]) == {"lemma1", "fine", "e0", "noforcing", "nomatching"}


def test_verify_unknown_suite_rejected(runner):
    result = runner.invoke(main, ["verify", "everything"])
    assert result.exit_code == 2
