import itertools
import math

import numpy as np
import pytest

from qec_lab.errors import InvalidCode
from qec_lab.qubit_codes import (CODE_NAMES, CODE_STABILIZERS, DampingMonomial, NQubitState,
                                 PauliString, apply_op, build_code, census, correctable_set,
                                 detectable, enumerate_errors, shor_prime_main_text,
                                 single_qubit_paulis, stabilizer_check, write_census_csv)


def dense(code):
    return [w.dense() for w in code]


@pytest.mark.parametrize("name", CODE_NAMES)
def test_codes_orthonormal(name):
    a, b = dense(build_code(name))
    assert abs(np.linalg.norm(a) - 1) < 1e-12 and abs(np.linalg.norm(b) - 1) < 1e-12
    assert abs(np.vdot(a, b)) < 1e-12


def test_code_amplitudes():
    p, m = build_code("shor")
    assert len(p.amps) == 4 and all(abs(v - 0.5) < 1e-15 for v in p.amps.values())
    z, o = build_code("stn'")
    assert abs(o.amps["1111111"] + 1 / math.sqrt(8)) < 1e-15
    assert sum(abs(v - 1 / math.sqrt(8)) < 1e-15 for v in o.amps.values()) == 7
    sp, sm = build_code("shor'")
    assert np.allclose(sm.dense(), build_code("shor")[1].dense())


def test_unknown_code():
    with pytest.raises(InvalidCode):
        build_code("golay")


def test_pauli_action():
    v = np.zeros(2, complex)
    v[0] = 1
    assert np.allclose(apply_op(PauliString("X"), v), [0, 1])
    assert np.allclose(apply_op(PauliString("Y"), v), [0, 1j])
    assert np.allclose(apply_op(PauliString("Z"), [0, 1]), [0, -1])
    # qubit 1 is the leftmost bit
    e = NQubitState(2, {"10": 1.0}).dense()
    assert np.allclose(apply_op(PauliString("XI"), e), NQubitState(2, {"00": 1.0}).dense())


def test_damping_action():
    s = NQubitState(3, {"110": 1.0}).dense()
    out = apply_op(DampingMonomial(3, {1}), s)
    assert np.allclose(out, NQubitState(3, {"010": 1.0}).dense())
    assert np.allclose(apply_op(DampingMonomial(3, {3}), s), 0)
    with pytest.raises(InvalidCode):
        DampingMonomial(3, set())


def test_detectable_examples():
    E = PauliString("XXXIIIIII")
    ok, c = detectable(build_code("shor"), E)
    assert not ok
    ok, c = detectable(build_code("shor'"), E)
    assert ok and abs(c) < 1e-12
    ok, _ = detectable(build_code("stn'"), DampingMonomial(7, {2, 4, 6}))
    assert ok
    ok, _ = detectable(build_code("steane"), DampingMonomial(7, {2, 4, 6}))
    assert not ok


@pytest.mark.parametrize("name", CODE_NAMES)
def test_single_qubit_correctability(name):
    code = build_code(name)
    ok, worst = correctable_set(code, single_qubit_paulis(code[0].n))
    assert ok, worst


def test_stabilizers_and_logicals():
    assert stabilizer_check(build_code("shor"), CODE_STABILIZERS["shor"])
    assert stabilizer_check(build_code("shor'"), CODE_STABILIZERS["shor'"])
    assert not stabilizer_check(build_code("shor"), ["YXXYXXZII"])
    p, m = dense(build_code("shor'"))
    Xbar = PauliString("Z" * 9)
    assert np.allclose(apply_op(Xbar, p), p) and np.allclose(apply_op(Xbar, m), -m)
    Zbar = PauliString("XXXZIIIII")
    assert abs(np.vdot(m, apply_op(Zbar, p))) > 1 - 1e-12
    assert abs(np.vdot(p, apply_op(Zbar, m))) > 1 - 1e-12


def test_main_text_presentation_equivalent():
    main = shor_prime_main_text()
    supp = build_code("shor'")
    X9 = PauliString("X" * 9)
    # X^9 exchanges the two presentations (logical labels swapped)
    assert abs(np.vdot(supp[0].dense(), apply_op(X9, main[1].dense()))) > 1 - 1e-12
    assert abs(np.vdot(supp[1].dense(), apply_op(X9, main[0].dense()))) > 1 - 1e-12
    for alph in ("X-only", "XY-hybrid", "Z-only"):
        assert census(main, 3, alph)["undetectable"] == census(supp, 3, alph)["undetectable"]


def test_census_counts():
    shor, shorp = build_code("shor"), build_code("shor'")
    r = census(shor, 3, "X-only")
    assert r["total"] == 84 and r["undetectable"] == 3
    assert sorted(r["undetectable_ops"]) == sorted(["XXXIIIIII", "IIIXXXIII", "IIIIIIXXX"])
    assert census(shorp, 3, "X-only")["undetectable"] == 0
    hs, hp = census(shor, 3, "XY-hybrid"), census(shorp, 3, "XY-hybrid")
    assert hs["total"] == hp["total"] == 84 * 8
    assert hp["undetectable"] < hs["undetectable"]
    for w in (1, 2, 3):
        assert census(shor, w, "Z-only")["undetectable_ops"] == census(shorp, w, "Z-only")["undetectable_ops"]
    assert census(build_code("stn'"), 3, "damping") == {**census(build_code("stn'"), 3, "damping")}
    d = census(build_code("stn'"), 3, "damping")
    assert d["total"] == 35 and d["undetectable"] == 0


def test_census_rejects_bad_input():
    with pytest.raises(InvalidCode):
        list(enumerate_errors(9, 0, "X-only"))
    with pytest.raises(InvalidCode):
        list(enumerate_errors(9, 2, "W-only"))


def test_detectability_invariant_under_relabeling():
    code = build_code("shor'")
    perm = [2, 0, 1, 5, 3, 4, 8, 6, 7]  # cyclic shift inside each block

    def permute_state(st):
        amps = {"".join(b[perm[i]] for i in range(9)): v for b, v in st.amps.items()}
        return NQubitState(9, amps)

    pcode = [permute_state(w) for w in code]
    for E in itertools.islice(enumerate_errors(9, 3, "XY-hybrid"), 200):
        pe = PauliString("".join(E.letters[perm[i]] for i in range(9)))
        assert detectable(code, E)[0] == detectable(pcode, pe)[0]


def test_shor_double_prime_diagnostic():
    E = DampingMonomial(9, {1, 2, 3})
    for name in ("shor", "shor''"):
        p, m = dense(build_code(name))
        assert abs(np.vdot(m, apply_op(E, p))) > 1e-3
    p, m = dense(build_code("shor''"))
    assert abs(np.vdot(p, apply_op(E, m))) < 1e-12
    p, m = dense(build_code("shor"))
    assert abs(np.vdot(p, apply_op(E, m))) > 1e-3


def test_census_csv(tmp_path):
    rows = []
    for name in ("shor", "shor'"):
        r = census(build_code(name), 3, "X-only")
        r["code"] = name
        rows.append(r)
    csv_path, js = tmp_path / "c.csv", tmp_path / "c.json"
    write_census_csv(csv_path, rows, js)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "code,alphabet,weight,total,detectable,undetectable"
    assert lines[1] == "shor,X-only,3,84,81,3"
    import json
    doc = json.loads(js.read_text())
    assert doc[0]["undetectable"] == rows[0]["undetectable_ops"]
