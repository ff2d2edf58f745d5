import numpy as np
import pytest

from nonlocal_net.bell import (
    chsh_report,
    fb_report,
    lnl,
    mbk_angle,
    mbk_canonical_settings,
    mbk_operator,
    mbk_phase_settings,
    mbk_recursive_operator,
    mbk_value,
    optimal_settings,
)
from nonlocal_net.measurement import (
    LocalSetting,
    OutcomeBranch,
    measure_all,
    star_state,
)
from nonlocal_net.xstate import (
    XState,
    ghz_xstate,
    werner_dense,
    xstate_from_dense,
    xstate_to_dense,
)

EQ = LocalSetting(np.pi / 2, 0.0)


class TestChsh:
    def test_singlet_maximal(self):
        r = chsh_report(werner_dense(1.0))
        assert abs(r.M - 2.0) < 1e-12
        assert abs(r.BV - 1.0) < 1e-12

    def test_werner_m_is_2p_squared(self):
        for p in (0.0, 0.3, 1 / np.sqrt(2), 0.9):
            r = chsh_report(werner_dense(p))
            assert abs(r.M - 2 * p * p) < 1e-12

    def test_violation_flips_at_the_boundary(self):
        eps = 1e-9
        bound = 1 / np.sqrt(2)
        assert not chsh_report(werner_dense(bound - eps)).violating
        assert chsh_report(werner_dense(bound + eps)).violating

    def test_xstate_equals_dense(self):
        for p in (0.5, 0.9):
            branches = measure_all(star_state(p, 4), [0, 1], LocalSetting(1.2, 0.7))
            for b in branches:
                rx = chsh_report(b.state)
                rd = chsh_report(xstate_to_dense(b.state))
                assert abs(rx.M - rd.M) < 1e-12
                assert np.abs(rx.T - rd.T).max() < 1e-12

    def test_star_branch_eigenvalues(self):
        # Two largest eigenvalues of T^T T: p^4 and the coherence term.
        p, n = 0.9, 4
        thetas = [1.0, 1.3]
        settings = [LocalSetting(t, 0.0) for t in thetas]
        branches = measure_all(star_state(p, n), [0, 1], settings)
        for b in branches:
            m = 2
            one_minus_f = (2**m) * b.probability
            expected_coherence = (
                p ** (2 * n) * np.prod(np.sin(thetas)) ** 2 / one_minus_f**2
            )
            t_mat = chsh_report(b.state).T
            eigs = np.sort(np.linalg.eigvalsh(t_mat.T @ t_mat))
            assert abs(eigs[-1] - p**4) < 1e-12
            assert abs(eigs[-2] - expected_coherence) < 1e-12

    def test_wrong_qubit_count(self):
        with pytest.raises(ValueError):
            chsh_report(ghz_xstate(3))


class TestMbkClosedForm:
    def test_pure_ghz_value(self):
        for n in (2, 3, 4, 5):
            rep = mbk_value(ghz_xstate(n))
            expected = 2 ** ((n - 1) / 2) * np.cos(mbk_angle(n))
            assert abs(rep.value - expected) < 1e-12
            assert rep.violating

    def test_star_value(self):
        p = 0.95
        rep = mbk_value(star_state(p, 3))
        assert abs(rep.value - 2 * p**3 * np.cos(np.pi / 8)) < 1e-12
        assert abs(rep.value - 1.5842224283737287) < 1e-9

    def test_optimal_phase_uses_magnitude(self):
        s = XState(2, np.array([0.5, 0, 0, 0.5]), 0.5j)
        raw = mbk_value(s).value
        opt = mbk_value(s, optimal_phase=True).value
        assert opt > raw
        assert abs(opt - np.sqrt(2)) < 1e-12

    def test_quantum_bound(self):
        for n in (2, 3, 4):
            assert mbk_value(ghz_xstate(n), optimal_phase=True).value <= 2 ** ((n - 1) / 2) + 1e-12


class TestMbkRecursion:
    def test_phase_zero_settings_reach_chsh_maximum(self):
        op = mbk_recursive_operator(2, mbk_phase_settings(2, 0.0))
        ghz2 = xstate_to_dense(ghz_xstate(2)).matrix
        assert abs(abs(np.trace(op @ ghz2)) - np.sqrt(2)) < 1e-12

    def test_canonical_settings_match_closed_form(self):
        for n in (2, 3, 4):
            rec = mbk_recursive_operator(n, mbk_canonical_settings(n))
            assert np.abs(rec - mbk_operator(n)).max() < 1e-12

    def test_closed_form_value_equals_operator_trace(self):
        for n in (2, 3, 4):
            for p in (0.6, 0.95):
                s = star_state(p, n)
                op = mbk_recursive_operator(n, mbk_canonical_settings(n))
                trace = abs(np.trace(op @ xstate_to_dense(s).matrix))
                assert abs(trace - mbk_value(s).value) < 1e-12

    def test_random_settings_respect_quantum_bound(self):
        rng = np.random.default_rng(11)
        ghz3 = xstate_to_dense(ghz_xstate(3)).matrix
        for _ in range(25):
            settings = []
            for _ in range(3):
                v = rng.normal(size=(2, 3))
                v /= np.linalg.norm(v, axis=1, keepdims=True)
                settings.append((v[0], v[1]))
            op = mbk_recursive_operator(3, settings)
            assert abs(np.trace(op @ ghz3)) <= 2.0 + 1e-9

    def test_hermitian(self):
        op = mbk_recursive_operator(3, mbk_canonical_settings(3))
        assert np.abs(op - op.conj().T).max() < 1e-12

    def test_non_unit_direction_rejected(self):
        bad = [(np.array([1.0, 0, 0]), np.array([0.0, 2.0, 0]))] * 2
        with pytest.raises(ValueError):
            mbk_recursive_operator(2, bad)


class TestFb:
    def test_plain_star_threshold_flip(self):
        for n in (3, 5, 7):
            p_cr = 2 ** (1 / n) * (2 / np.pi)
            for p, expect in ((p_cr - 1e-9, False), (p_cr + 1e-9, True)):
                branches = measure_all(star_state(p, n), [], EQ)
                assert fb_report(branches, collaborative=False).violating is expect

    def test_collaborative_threshold_flip(self):
        n, m = 5, 2
        p_cr = 2 ** (1.5 / n) * (2 / np.pi) ** ((n - m) / n)
        for p, expect in ((p_cr - 1e-9, False), (p_cr + 1e-9, True)):
            branches = measure_all(star_state(p, n), [0, 1], EQ)
            assert fb_report(branches, collaborative=True).violating is expect

    def test_superadditive_star(self):
        # Seven copies at p = 0.706 < 1/sqrt(2) already violate.
        assert 0.706 < 1 / np.sqrt(2)
        branches = measure_all(star_state(0.706, 7), [], EQ)
        assert fb_report(branches, collaborative=False).violating

    def test_quantities(self):
        p, n = 0.9, 4
        branches = measure_all(star_state(p, n), [0], EQ)
        rep = fb_report(branches, collaborative=True)
        assert abs(rep.qm_norm - p ** (2 * n) * (2 * np.pi) ** 3 / 2) < 1e-9
        assert abs(rep.lhv_bound - np.sqrt(2) * p**n * 4**3) < 1e-9

    def test_mixed_qubit_counts_rejected(self):
        b1 = OutcomeBranch((1,), 0.5, ghz_xstate(2))
        b2 = OutcomeBranch((-1,), 0.5, ghz_xstate(3))
        with pytest.raises(ValueError):
            fb_report([b1, b2], collaborative=True)


class TestLnl:
    def test_star_chsh_closed_form(self):
        p = 0.9
        branches = measure_all(star_state(p, 3), [0], EQ)
        assert abs(lnl(branches, "chsh") - (p**4 + p**6 - 1)) < 1e-9

    def test_star_mbk_closed_form(self):
        p = 0.9
        branches = measure_all(star_state(p, 4), [0], optimal_settings("mbk", 3, 1))
        assert abs(lnl(branches, "mbk") - (2 * p**4 - 1)) < 1e-9

    def test_coherence_free_states_never_violate(self):
        diag = np.array([0.4, 0.1, 0.1, 0.4])
        branches = [
            OutcomeBranch((1,), 0.5, XState(2, diag, 0.0)),
            OutcomeBranch((-1,), 0.5, XState(2, diag, 0.0)),
        ]
        assert lnl(branches, "chsh") <= 0.0
        assert lnl(branches, "mbk") <= 0.0
        assert lnl(branches, "fb") <= 0.0

    def test_branch_relabeling_invariance(self):
        branches = measure_all(star_state(0.9, 4), [0, 1], LocalSetting(1.2, 0.5))
        for ineq in ("mbk", "fb"):
            assert abs(lnl(branches, ineq) - lnl(branches[::-1], ineq)) < 1e-12

    def test_global_corner_phase_invariance_at_optimum(self):
        # With the free overall phase absorbed, rotating every corner is moot.
        branches = measure_all(star_state(0.9, 4), [0], EQ)
        rotated = [
            OutcomeBranch(
                b.outcome_signs,
                b.probability,
                XState(b.state.n, b.state.diag, b.state.offdiag * np.exp(0.8j)),
            )
            for b in branches
        ]
        a = lnl(branches, "mbk", optimal_phase=True)
        b = lnl(rotated, "mbk", optimal_phase=True)
        assert abs(a - b) < 1e-12

    def test_unknown_inequality(self):
        branches = measure_all(star_state(0.9, 3), [0], EQ)
        with pytest.raises(ValueError):
            lnl(branches, "ghz")
