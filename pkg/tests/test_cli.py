import json
from pathlib import Path

import pytest

from main import main
from utils.logger import configure_logging

BASE = Path(__file__).resolve().parent.parent
INPUTS = BASE / 'config' / 'inputs'
CONTEXTS = BASE / 'config' / 'contexts'


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ('ENDO_SETTINGS', 'ENDO_MAX_DEPTH', 'ENDO_ENUM_CAP', 'ENDO_LOG_LEVEL'):
        monkeypatch.setenv(name, "placeholder")
        monkeypatch.delenv(name)
    yield monkeypatch
    # handlers created under capsys point at its closed stream
    configure_logging()


def run_json(capsys, *argv):
    code = main([*argv, "--json"])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


# ========== ALGEBRA COMMANDS ==========

def test_normalize_prints_normal_form(capsys):
    code, report = run_json(capsys, "normalize", "u[1] s s* u[-1] + u[0] - u[0]")
    assert code == 0
    assert report['command'] == 'normalize'
    assert report['result']['normal_form'] == "u[1] s^1 s*^1 u[-1]"
    assert report['context']['matrix'] == [[3]]


def test_normalize_text_output(capsys):
    assert main(["normalize", "s s*"]) == 0
    assert "normal_form: s^1 s*^1" in capsys.readouterr().out


def test_equal_partition_of_unity(capsys):
    code, report = run_json(capsys, "equal", "u[0] s s* + u[1] s s* u[-1] + u[2] s s* u[-2]", "1")
    assert code == 0
    assert report['result']['equal'] is True


def test_unequal_expressions_exit_one(capsys):
    code, report = run_json(capsys, "equal", "s s*", "1")
    assert code == 1
    assert report['verdicts'] == {'equal': False}


def test_mul_and_adjoint(capsys):
    code, report = run_json(capsys, "mul", "s*", "s")
    assert code == 0
    assert report['result']['product'] == "1"
    code, report = run_json(capsys, "adjoint", "u[1] s")
    assert report['result']['adjoint'] == "s*^1 u[-1]"


def test_expect_reports_diagonal_norm(capsys):
    code, report = run_json(capsys, "expect", "s s* + u[1] s")
    assert code == 0
    assert report['result']['expectation'] == "s^1 s*^1"
    assert report['result']['diagonal_norm_sq'] == "1"


def test_oracle_check_pair(capsys):
    code, report = run_json(capsys, "oracle-check", "s s*", "1", "--window", "4")
    assert code == 1
    assert report['result']['window_points'] == 9
    assert report['result']['separating_point'] is not None


# ========== GROUP COMMANDS ==========

def test_cosets_listing(capsys):
    code, report = run_json(capsys, "cosets", "--levels", "2")
    assert code == 0
    rows = report['result']['levels']
    assert [row['index'] for row in rows] == [1, 3, 9]
    assert rows[1]['transversal'] == ['0', '1', '2']


def test_enum_cap_from_environment_exits_three(capsys, clean_env):
    clean_env.setenv('ENDO_ENUM_CAP', '10')
    assert main(["cosets", "--levels", "3"]) == 3
    assert "CapExceeded" in capsys.readouterr().err


def test_purity_verdicts(capsys):
    code, report = run_json(capsys, "purity")
    assert code == 0
    assert report['result']['kind'] == "PureUpToDepth"
    code, report = run_json(capsys, "purity", "--config", str(CONTEXTS / 'identity.conf'))
    assert code == 1
    assert report['result']['kind'] == "NotPure"
    assert report['result']['witness'] == "1"


def test_purity_uses_configured_extras(capsys, tmp_path):
    conf = tmp_path / "fixed_line.conf"
    conf.write_text("version = 1\nrank = 2\nmatrix = 3, 1; 0, 1\nmax_depth = 8\n", encoding='utf-8')
    assert run_json(capsys, "purity", "--config", str(conf))[0] == 0
    conf.write_text(conf.read_text(encoding='utf-8') + "purity_extras = 1, -2\n", encoding='utf-8')
    code, report = run_json(capsys, "purity", "--config", str(conf))
    assert code == 1
    assert report['result']['witness'] == "[1,-2]"
    assert report['context']['purity_extras'] == [[1, -2]]


# ========== ORTHOGONALIZER ==========

def test_orthogonalize_example_file(capsys):
    code, report = run_json(capsys, "orthogonalize", f"@{INPUTS / 'three_term_qform.alg'}")
    assert code == 0
    result = report['result']
    assert (result['M'], result['p']) == (4, 6)
    keys = [k for k in result if k in ('M', 'N', 'companions', 'per_term_exponents', 'p')]
    assert keys == ['M', 'N', 'companions', 'per_term_exponents', 'p']
    assert sorted(result['per_term_exponents']) == [1, 6]
    assert result['companions'][0] == "86"
    assert report['verdicts'] == {'i': True, 'ii': True, 'iii': True, 'iv': True}


def test_orthogonalize_small_exponent_fails(capsys):
    code, report = run_json(capsys, "orthogonalize", f"@{INPUTS / 'three_term_qform.alg'}", "--exponent", "1")
    assert code == 1
    assert report['verdicts']['iv'] is False


# ========== DYNAMICS ==========

def test_freeness_translation(capsys):
    code, report = run_json(capsys, "freeness", "(1, 0, 0)", "V[1]{0}")
    assert code == 0
    assert report['result']['kind'] == "Witness"


def test_orbit_and_ore(capsys):
    code, report = run_json(capsys, "orbit", "7@3", "V[2]{5}")
    assert code == 0
    assert report['verdicts'] == {'lands_in_cylinder': True}
    code, report = run_json(capsys, "ore", "(1, 0, 2)", "(4, 0, 1)")
    assert code == 0
    assert report['result']['common'] == "(0, 0, 3)"


# ========== ERRORS AND FLAGS ==========

@pytest.mark.parametrize("argv", [
    ["mul", "s"],
    ["normalize", "u[1"],
    ["normalize"],
    ["frobnicate"],
    ["freeness", "(0, 0, 0)", "V[1]{0}"],
    ["ore", "(1, 1, 0)", "(0, 0, 1)"],
    ["orbit", "7@99", "V[1]{0}"],
    ["cosets", "--config", "/nonexistent/context.conf"],
])
def test_usage_errors_exit_two(capsys, argv):
    assert main(argv) == 2
    assert capsys.readouterr().out == ""


def test_timing_flag(capsys):
    code, report = run_json(capsys, "normalize", "s", "--timing")
    assert code == 0
    assert 'normalize' in report['timing']['stages_ms']
    _, plain = run_json(capsys, "normalize", "s")
    assert 'timing' not in plain


@pytest.mark.slow
def test_report_all_with_input(capsys):
    code, report = run_json(capsys, "report-all", "--levels", "1", "--bound", "0",
                            "--input", str(INPUTS / 'three_term_qform.alg'))
    assert code == 0
    assert report['result']['orthogonalize']['p'] == 6
    assert all(report['verdicts'].values())


def test_identical_invocations_are_byte_identical(capsys):
    argv = ["orthogonalize", f"@{INPUTS / 'three_term_qform.alg'}", "--json"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
