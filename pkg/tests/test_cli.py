import math
import subprocess
import sys

import pytest

from carmichael.cli import main
from carmichael.resultfile import parse_nat, read_results


def data_lines(text):
    return [l for l in text.splitlines() if l and not l.startswith("#")]


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def file_1e10(tmp_path_factory):
    path = tmp_path_factory.mktemp("res") / "c10.txt"
    assert main(["enumerate", "--bound", "1e10", "--out", str(path)]) == 0
    return str(path)


# -- enumerate ---------------------------------------------------------------


def test_enumerate_1e4(capsys):
    code, out, _ = call(capsys, "enumerate", "--bound", "10000")
    lines = data_lines(out)
    assert code == 0
    assert len(lines) == 7
    assert lines[0] == "561 = 3 * 11 * 17"
    assert lines[-1] == "8911 = 7 * 19 * 67"


def test_enumerate_small_bounds(capsys):
    assert data_lines(call(capsys, "enumerate", "--bound", "561")[1]) == ["561 = 3 * 11 * 17"]
    code, out, _ = call(capsys, "enumerate", "--bound", "100")
    assert code == 0 and data_lines(out) == []


@pytest.mark.parametrize("bound", ["-5", "abc", "1.25e1", "18446744073709551616"])
def test_enumerate_invalid_bound(capsys, bound):
    with pytest.raises(SystemExit) as exc:
        main(["enumerate", "--bound", bound])
    assert exc.value.code == 2


def test_enumerate_zero_bound_exit_2(capsys):
    code = main(["enumerate", "--bound", "0"])
    assert code == 2


def test_enumerate_bad_config_exit_2(capsys):
    code, _, err = call(capsys, "enumerate", "--bound", "1e6", "--d-min", "5", "--d-max", "4")
    assert code == 2 and "d_min" in err


def test_manifest(capsys, tmp_path):
    out = tmp_path / "r.txt"
    assert main(["enumerate", "--bound", "1e6", "--out", str(out), "--self-check"]) == 0
    manifest, nums = read_results(str(out))
    assert int(manifest["count"]) == len(nums) == 43
    assert int(manifest["bound"]) == 10**6
    assert sum(int(v) for k, v in manifest.items() if k.startswith("strategy.")) == 43
    assert {"tool", "version", "started", "finished", "d_min", "d_max", "large_prime_floor"} <= set(manifest)
    assert out.read_bytes().endswith(b"\n") and b"\r" not in out.read_bytes()


def test_jobs_identical_output(capsys):
    one = data_lines(call(capsys, "enumerate", "--bound", "1e8", "--large-prime-floor", "1000")[1])
    two = data_lines(call(capsys, "enumerate", "--bound", "1e8", "--large-prime-floor", "1000", "--jobs", "2")[1])
    assert one == two
    assert len(one) == 255


def test_interrupt_and_resume(capsys, tmp_path):
    ck = str(tmp_path / "run.ckpt")
    args = ["enumerate", "--bound", "1e8", "--checkpoint", ck]
    code, out, err = call(capsys, *args, "--stop-after", "500")
    assert code == 130 and "resume" in err and out == ""
    code, resumed, _ = call(capsys, *args)
    assert code == 0
    plain = call(capsys, "enumerate", "--bound", "1e8")[1]
    assert data_lines(resumed) == data_lines(plain)


def test_checkpoint_mismatch_exit_2(capsys, tmp_path):
    ck = str(tmp_path / "run.ckpt")
    assert call(capsys, "enumerate", "--bound", "1e4", "--checkpoint", ck)[0] == 0
    assert call(capsys, "enumerate", "--bound", "1e5", "--checkpoint", ck)[0] == 2


# -- verify ------------------------------------------------------------------


def test_verify_561(capsys):
    code, out, _ = call(capsys, "verify", "561")
    assert code == 0
    assert out == "CARMICHAEL 561 3*11*17 index=7 lehmer=1.75000\n"


def test_verify_rejects(capsys):
    code, out, _ = call(capsys, "verify", "561", "562", "1105")
    assert code == 1
    assert out.splitlines()[1] == "NOT-CARMICHAEL 562 even"


def test_verify_large(capsys):
    code, out, _ = call(capsys, "verify", "90256390764228001", "1886616373665")
    assert code == 0
    first, second = out.splitlines()
    assert first.startswith("CARMICHAEL 90256390764228001 380251*410671*577981 ")
    index = 1886616373664 // math.lcm(2, 4, 16, 22, 82, 352, 10978)
    assert second == f"CARMICHAEL 1886616373665 3*5*17*23*83*353*10979 index={index} lehmer=2.11432"


@pytest.mark.parametrize("token", ["12x", "", "1e", "2^70"])
def test_verify_unparsable(capsys, token):
    assert call(capsys, "verify", token)[0] == 2


def test_verify_nothing(capsys):
    assert call(capsys, "verify")[0] == 2


def test_round_trip(capsys, tmp_path):
    out = tmp_path / "r.txt"
    assert main(["enumerate", "--bound", "1e7", "--out", str(out)]) == 0
    capsys.readouterr()
    code, text, _ = call(capsys, "verify", "--file", str(out))
    assert code == 0
    lines = text.splitlines()
    assert len(lines) == 105 and all(l.startswith("CARMICHAEL ") for l in lines)


# -- tables ------------------------------------------------------------------


def test_tables_k(capsys, file_1e10):
    code, out, _ = call(capsys, "tables", "--in", file_1e10, "--table", "k")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,C,k"
    assert lines[1] == "3,1,2.93319"
    assert lines[-1] == "10,1547,1.86870"


def test_tables_dcounts(capsys, file_1e10):
    out = call(capsys, "tables", "--in", file_1e10, "--table", "dcounts")[1].splitlines()
    assert out[0] == "n,d3,d4,d5,d6,d7,d8,d9,d10,d11,total"
    assert out[-1] == "10,335,619,492,99,2,0,0,0,0,1547"


def test_tables_are_deterministic(capsys, file_1e10):
    for table in ("counts", "swift", "power", "occurrence", "index", "records"):
        a = call(capsys, "tables", "--in", file_1e10, "--table", table)[1]
        b = call(capsys, "tables", "--in", file_1e10, "--table", table)[1]
        assert a == b and a.count("\n") >= 2


def test_tables_residue_and_cutoffs(capsys, file_1e10):
    code, out, _ = call(capsys, "tables", "--in", file_1e10, "--table", "residue", "--modulus", "5",
                        "--cutoffs", "1e8", "1e10")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "m,class,100000000,10000000000"
    assert len(lines) == 6
    assert sum(int(l.split(",")[-1]) for l in lines[1:]) == 1547
    assert call(capsys, "tables", "--in", file_1e10, "--table", "residue")[0] == 2


def test_tables_index_lehmer(capsys, file_1e10):
    out = call(capsys, "tables", "--in", file_1e10, "--table", "index", "--max-index", "19")[1]
    assert out.splitlines() == [
        "index,N,factors", "5,6601,7*23*41", "7,561,3*11*17", "18,55462177,17*23*83*1709",
        "18,8885251441,11*47*1109*15497"]
    assert call(capsys, "tables", "--in", file_1e10, "--table", "lehmer")[1] == "lehmer,N,factors\n"
    low = call(capsys, "tables", "--in", file_1e10, "--table", "lehmer", "--threshold", "9/5")[1]
    assert low.count("\n") > 1


def test_tables_beyond_complete_bound(capsys, file_1e10):
    code, _, err = call(capsys, "tables", "--in", file_1e10, "--table", "counts", "--cutoffs", "1e11")
    assert code == 2 and "complete" in err


def test_tables_restricted_file_is_incomplete(capsys, tmp_path):
    out = tmp_path / "d4.txt"
    assert main(["enumerate", "--bound", "1e6", "--d-min", "4", "--out", str(out)]) == 0
    assert call(capsys, "tables", "--in", str(out), "--table", "k", "--cutoffs", "1e5")[0] == 2


def test_tables_empty_file(capsys, tmp_path):
    out = tmp_path / "empty.txt"
    assert main(["enumerate", "--bound", "100", "--out", str(out)]) == 0
    assert call(capsys, "tables", "--in", str(out), "--table", "counts")[1] == "n,C\n"


# -- smallest ----------------------------------------------------------------


def test_smallest(capsys):
    code, out, _ = call(capsys, "smallest", "--d", "3")
    assert code == 0 and out == "S_3 = 561 ratio=3.293621188\n"
    assert call(capsys, "smallest", "--d", "5")[1].startswith("S_5 = 825265 ")


def test_smallest_not_found(capsys):
    assert call(capsys, "smallest", "--d", "5", "--cap", "800000")[1] == "NOT-FOUND-BELOW 800000\n"


def test_smallest_bad_d(capsys):
    assert call(capsys, "smallest", "--d", "2")[0] == 2


# -- parsing and entry points -----------------------------------------------------


@pytest.mark.parametrize("text, n", [("1e12", 10**12), ("25e9", 25 * 10**9), ("2^20", 2**20), ("1_000", 1000),
                                     ("4.3e10", 43 * 10**9), ("2**64", 2**64)])
def test_parse_nat(text, n):
    assert parse_nat(text) == n


@pytest.mark.parametrize("text", ["1.5", "1e-3", "x", "-3", "1.25e1"])
def test_parse_nat_rejects(text):
    with pytest.raises(ValueError):
        parse_nat(text)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "carmichael", "verify", "1729"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("CARMICHAEL 1729 7*13*19 index=48 ")
