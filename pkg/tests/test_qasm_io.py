from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionshuttle.circuit_gen import gen_qft
from ionshuttle.errors import QasmSyntaxError, RegisterError, UnsupportedFeature
from ionshuttle.qasm_io import Circuit, Gate, emit, lower_toffolis, parse
from oracles import unitary

HDR = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


class TestParse:
    def test_simple(self):
        c = parse(HDR + "qreg q[2]; h q[0]; cx q[0],q[1];")
        assert c.num_qubits == 2
        assert [(g.name, g.qubits, g.kind) for g in c.gates] == [
            ("h", (0,), "one_qubit"), ("cx", (0, 1), "two_qubit")]

    def test_toffoli(self):
        c = parse(HDR + "qreg q[3]; ccx q[0],q[1],q[2];")
        assert c.gates[0].kind == "toffoli" and c.gates[0].qubits == (0, 1, 2)

    def test_params_kept_as_text(self):
        c = parse(HDR + "qreg q[2]; cp(pi/4) q[0],q[1]; rz(-0.5) q[1];")
        assert c.gates[0].params == "pi/4"
        assert c.gates[1].params == "-0.5"

    def test_cu1_alias(self):
        assert parse(HDR + "qreg q[2]; cu1(pi) q[0],q[1];").gates[0].name == "cp"

    def test_classical_parts_dropped_with_warning(self):
        c = parse(HDR + "qreg q[2]; creg c[2]; h q[0]; barrier q[0],q[1]; measure q[0] -> c[0];")
        assert len(c.gates) == 1
        assert len(c.warnings) == 3

    def test_comments_and_multiline(self):
        c = parse(HDR + "// hi\nqreg q[2];\ncx q[0],\n   q[1]; // trailing\n")
        assert c.gates[0].qubits == (0, 1)

    @pytest.mark.parametrize("src,exc", [
        ("qreg q[2]; if(c==1) x q[0];", UnsupportedFeature),
        ("qreg q[2]; gate foo a { x a; }", UnsupportedFeature),
        ("qreg q[2]; reset q[0];", UnsupportedFeature),
        ("qreg q[2]; u3(1,2,3) q[0];", UnsupportedFeature),
        ("qreg q[2]; x q;", UnsupportedFeature),
        ("qreg q[2]; qreg r[2];", RegisterError),
        ("qreg q[2]; x q[5];", RegisterError),
        ("qreg q[2]; x r[0];", RegisterError),
        ("h q[0];", RegisterError),
        ("qreg q[2]; cx q[0];", QasmSyntaxError),
        ("qreg q[2]; cx q[0],q[0];", QasmSyntaxError),
        ("qreg q[2]; h q[0]", QasmSyntaxError),
        ("qreg q[2]; rz q[0];", QasmSyntaxError),
    ])
    def test_errors(self, src, exc):
        with pytest.raises(exc):
            parse(HDR + src)

    def test_missing_header(self):
        with pytest.raises(QasmSyntaxError):
            parse("qreg q[1];")

    def test_syntax_error_carries_line(self):
        with pytest.raises(QasmSyntaxError) as ei:
            parse(HDR + "qreg q[2];\n\ncx q[0];\n")
        assert ei.value.line == 5

    def test_wrong_version(self):
        with pytest.raises(UnsupportedFeature):
            parse("OPENQASM 3.0;\nqreg q[1];")


class TestEmit:
    def test_empty_circuit(self):
        text = emit(Circuit("empty", 1))
        assert text.startswith(HDR)
        assert "qreg q[1];" in text
        assert parse(text) == Circuit("empty", 1)

    def test_qft_round_trip(self):
        c = gen_qft(4)
        assert parse(emit(c)) == c

    def test_toffoli_round_trip(self):
        c = Circuit.from_ops("t", 3, [("ccx", (2, 0, 1))])
        assert parse(emit(c)).gates[0].qubits == (2, 0, 1)


_names1 = ["h", "x", "y", "z", "s", "sdg", "t", "tdg"]
_names2 = ["cx", "cz", "swap"]


@st.composite
def circuits(draw):
    n = draw(st.integers(3, 7))
    ops = []
    for _ in range(draw(st.integers(0, 20))):
        arity = draw(st.sampled_from([1, 2, 3]))
        qs = tuple(draw(st.permutations(range(n)))[:arity])
        if arity == 1:
            name = draw(st.sampled_from(_names1 + ["rz"]))
            ops.append((name, qs, "pi/8" if name == "rz" else None))
        elif arity == 2:
            ops.append((draw(st.sampled_from(_names2)), qs))
        else:
            ops.append(("ccx", qs))
    return Circuit.from_ops("rand", n, ops)


@given(circuits())
@settings(max_examples=100, deadline=None)
def test_round_trip_property(c):
    assert parse(emit(c)) == c


class TestLowering:
    def test_pairwise(self):
        c = lower_toffolis(Circuit.from_ops("t", 3, [("ccx", (0, 1, 2))]), "pairwise")
        assert [g.qubits for g in c.gates] == [(0, 1), (1, 2), (0, 2)]

    def test_cnot6_counts(self):
        c = lower_toffolis(Circuit.from_ops("t", 3, [("ccx", (0, 1, 2))]), "cnot6")
        assert sum(g.arity == 2 for g in c.gates) == 6
        assert sum(g.arity == 1 for g in c.gates) == 9

    @pytest.mark.parametrize("qubits", [(0, 1, 2), (2, 0, 1), (1, 2, 0)])
    def test_cnot6_unitary_oracle(self, qubits):
        tof = Circuit.from_ops("t", 3, [("ccx", qubits)])
        low = lower_toffolis(tof, "cnot6")
        u_ref, u_low = unitary(tof.gates, 3), unitary(low.gates, 3)
        # equal up to global phase
        phase = np.vdot(u_low.flatten(), u_ref.flatten())
        phase /= abs(phase)
        assert np.allclose(u_low * phase, u_ref, atol=1e-9)

    def test_no_toffoli_unchanged(self):
        c = gen_qft(3)
        assert lower_toffolis(c) is c

    def test_order_and_qubits_preserved(self):
        c = Circuit.from_ops("m", 4, [("h", (3,)), ("ccx", (0, 1, 2)), ("cx", (2, 3))])
        low = lower_toffolis(c)
        assert low.gates[0].name == "h" and low.gates[-1].qubits == (2, 3)
        touched = {q for g in low.gates for q in g.qubits}
        assert touched == {q for g in c.gates for q in g.qubits}

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            lower_toffolis(gen_qft(2), "nope")


def test_gate_invariants():
    with pytest.raises(ValueError):
        Gate(0, "cx", (1, 1))
    with pytest.raises(ValueError):
        Circuit("c", 2, (Gate(1, "h", (0,)),))
    with pytest.raises(ValueError):
        Circuit("c", 2, (Gate(0, "h", (5,)),))
