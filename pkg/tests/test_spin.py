import numpy as np
import pytest
from scipy.optimize import minimize_scalar
from hypothesis import given, settings, strategies as st

import oracles
from kipa_esr import NumericalError, spin

TP = 2 * np.pi
SYS = spin.SpinSystem()
MAIN = ((4.0, -4.0), (5.0, -5.0))
fields = st.floats(min_value=0.0, max_value=0.5, allow_nan=False)


def test_dimension_and_constants():
    assert SYS.dim == 20
    assert SYS.A > 0 and SYS.gamma_e > 0 and SYS.gamma_n < 0


def test_negative_field_rejected():
    with pytest.raises(ValueError):
        spin.build_hamiltonian(SYS, -1e-3)


def test_zero_field_two_degenerate_sets():
    H = spin.build_hamiltonian(SYS, 0.0)
    assert abs(np.trace(H)) < 1e-6 * np.abs(H).max()
    sol = spin.diagonalize(H, SYS, 0.0)
    e = sol.energies
    assert np.ptp(e[:9]) < 1e-9 * SYS.A and np.ptp(e[9:]) < 1e-9 * SYS.A
    assert e[9] - e[8] == pytest.approx(5 * SYS.A, rel=1e-9)
    assert (e[9] - e[8]) / TP == pytest.approx(7.39e9, rel=1e-9)


def test_high_field_top_level_is_stretched_state():
    e = spin.solve(SYS, 1.0).energies
    expected = SYS.gamma_e / 2 + SYS.gamma_n * 4.5 + 4.5 * SYS.A / 2
    assert e[-1] == pytest.approx(expected, rel=1e-12)


def test_jacobi_matches_independent_complex_eigensolver_at_operating_field():
    ref = oracles.eigvals_reference(6.78e-3)
    got = spin.solve(SYS, 6.78e-3).energies
    assert np.max(np.abs(got - ref)) < 1e-9 * np.max(np.abs(ref))


def test_jacobi_reports_nonconvergence():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((20, 20))
    with pytest.raises(NumericalError, match="sweep"):
        spin.jacobi_eigh(M + M.T, max_sweeps=1)


@settings(max_examples=20, deadline=None)
@given(fields)
def test_breit_rabi_oracle(B):
    got = spin.solve(SYS, B).energies
    ref = oracles.breit_rabi(B)
    assert np.max(np.abs(got - ref)) <= 1e-8 * np.max(np.abs(ref))


@settings(max_examples=25, deadline=None)
@given(fields)
def test_eigensystem_invariants(B):
    H = spin.build_hamiltonian(SYS, B)
    sol = spin.diagonalize(H, SYS, B)
    V = sol.states
    assert np.max(np.abs(V.T @ V - np.eye(20))) < 1e-10
    assert np.max(np.abs(H @ V - V * sol.energies)) < 1e-9 * np.abs(H).max()
    assert abs(sol.energies.sum()) < 1e-9 * np.abs(sol.energies).sum()
    assert np.all(np.diff(sol.energies) >= 0)
    Fs = [lab[0] for lab in sol.labels]
    assert Fs.count(4.0) == 9 and Fs.count(5.0) == 11
    assert len(set(sol.labels)) == 20


@settings(max_examples=15, deadline=None)
@given(fields)
def test_sx_sum_rule(B):
    sol = spin.solve(SYS, B)
    Sx = SYS.operators()["Sx"]
    M = sol.states.T @ Sx @ sol.states
    lhs = np.sum(M ** 2, axis=0)
    rhs = np.diag(sol.states.T @ Sx @ Sx @ sol.states)
    assert np.allclose(lhs, rhs, atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=1e-4, max_value=0.5), st.sampled_from(["Sx", "Sz"]))
def test_transition_frequencies_are_eigenvalue_differences(B, op):
    sol = spin.solve(SYS, B)
    for tr in spin.transitions(sol, op, 0.05):
        assert tr.frequency == sol.energy(tr.upper) - sol.energy(tr.lower)
        assert tr.frequency >= 0
        assert 0 <= tr.mx <= 0.5 + 1e-12 and 0 <= tr.mz <= 0.5 + 1e-12


def test_threshold_precondition():
    sol = spin.solve(SYS, 0.01)
    for bad in (0.0, 0.5, -0.1):
        with pytest.raises(ValueError):
            spin.transitions(sol, "Sx", bad)


def test_zero_field_sx_lines_all_at_5A():
    trs = spin.transitions(spin.solve(SYS, 0.0), "Sx", 0.05)
    assert trs
    for tr in trs:
        assert tr.frequency == pytest.approx(5 * SYS.A, rel=1e-9)


def _sz_interlevel(B):
    sol = spin.solve(SYS, B)
    M = sol.states.T @ SYS.operators()["Sz"] @ sol.states
    return np.array([abs(M[sol.index((4.0, float(m))), sol.index((5.0, float(m)))]) for m in range(-4, 5)])


@pytest.mark.xfail(strict=True, reason="hyperfine mixing leaves |<4,m|Sz|5,m>| near 0.1 at 1 T; it only falls as 1/B")
def test_sz_lines_between_manifolds_below_1e_3_at_one_tesla():
    assert np.all(_sz_interlevel(1.0) < 1e-3)


def test_sz_lines_between_manifolds_suppressed_as_inverse_field():
    m10, m100 = _sz_interlevel(10.0), _sz_interlevel(100.0)
    assert np.all(m100 < m10)
    np.testing.assert_allclose(10 * m100, m10, rtol=0.03)


def test_main_transition_matrix_element():
    # the probed line carries the M = 0.473 used in the coupling budget
    mx, _ = spin.matrix_elements(SYS, MAIN, 6.78e-3)
    assert mx == pytest.approx(0.473, abs=0.001)


def test_gradient_at_operating_field():
    g = spin.transition_gradient(SYS, MAIN, 6.78e-3)
    assert g / TP * 1e-3 / 1e6 == pytest.approx(-25.06, rel=0.005)


def test_gradient_step_halving():
    g1 = spin.transition_gradient(SYS, MAIN, 6.78e-3, step=1e-6)
    g2 = spin.transition_gradient(SYS, MAIN, 6.78e-3, step=0.5e-6)
    assert abs(g1 - g2) <= 1e-4 * abs(g1)


def test_gradient_vanishes_at_clock_transition():
    sel = ((4.0, -1.0), (5.0, -2.0))

    def f(b):
        return spin.transition_frequency(SYS, sel, b)

    # this branch has a frequency minimum between its two 7.2 GHz crossings
    res = minimize_scalar(f, bounds=(0.03, 0.13), method="bounded", options={"xatol": 1e-9})
    g = spin.transition_gradient(SYS, sel, res.x)
    assert abs(g) / TP * 1e-3 < 10e3


def test_resonant_field_near_zero_for_zero_field_splitting():
    b = spin.resonant_field(SYS, MAIN, 5 * SYS.A, 0.0, 0.05)
    assert b < 1e-6


def test_resonant_field_reaches_tolerance():
    b = spin.resonant_field(SYS, MAIN, TP * 7.203e9)
    assert abs(spin.transition_frequency(SYS, MAIN, b) - TP * 7.203e9) < TP * 1e3


def test_no_crossing_error():
    with pytest.raises(spin.NoCrossingError):
        spin.resonant_field(SYS, MAIN, TP * 20e9, 0.0, 0.4)


def test_crossing_scan_step_refinement():
    target = TP * 7.2e9
    a = spin.find_crossings(SYS, target, 0.0, 0.02, step=2e-4, operators=("Sx",))
    b = spin.find_crossings(SYS, target, 0.0, 0.02, step=1e-4, operators=("Sx",))
    assert [c.transition.lower for c in a] == [c.transition.lower for c in b]
    for x, y in zip(a, b):
        assert abs(x.field - y.field) < 1e-5  # 0.01 mT


def test_empty_scan_range():
    with pytest.raises(ValueError):
        spin.find_crossings(SYS, TP * 7.2e9, 0.01, 0.01)


def test_sweep_csv_columns(tmp_path):
    rows = spin.sweep(SYS, [0.005, 0.006], ("Sx", "Sz"))
    path = tmp_path / "s.csv"
    spin.write_sweep_csv(rows, path)
    header = path.read_text().splitlines()[0]
    assert header == "B0_T,freq_Hz,mx,mz,F_lower,mF_lower,F_upper,mF_upper"
