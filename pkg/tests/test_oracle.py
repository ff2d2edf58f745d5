import itertools

import numpy as np
import pytest

from nonlocal_net.bell import optimal_settings
from nonlocal_net.measurement import LocalSetting, ghz_ket, measure_all, star_state
from nonlocal_net.oracle import (
    CapacityError,
    OracleConfig,
    chain_collapse_dense,
    default_config,
    dense_fb_quantities,
    local_branches_dense,
    oracle_chain_lnl,
    oracle_lnl,
    oracle_star_lnl,
    partial_trace,
    project,
    run_validation,
    star_collapse_dense,
    tensor,
)
from nonlocal_net.thresholds import ChainSpec, bisect_root, pcr_chain_fb
from nonlocal_net.xstate import (
    DenseState,
    ghz_xstate,
    werner_corner_dense,
    werner_dense,
    xstate_to_dense,
)


class TestTensor:
    def test_identity_product(self):
        half = DenseState(1, np.eye(2) / 2)
        assert np.allclose(tensor([half, half]).matrix, np.eye(4) / 4)

    def test_trace_preserved(self):
        prod = tensor([werner_dense(0.8), werner_dense(0.8)])
        assert abs(np.trace(prod.matrix).real - 1.0) < 1e-12

    def test_triple_werner_entry_by_expansion(self):
        # Independent route: expand (p S + (1-p) I/4)^(x3) term by term.
        p = 0.8
        singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
        s_mat = np.outer(singlet, singlet)
        eye4 = np.eye(4) / 4
        entry = 0.0
        for picks in itertools.product((0, 1), repeat=3):
            term = 1.0
            for pick in picks:
                term *= (p * s_mat if pick else (1 - p) * eye4)[0, 0]
            entry += term
        triple = tensor([werner_dense(p)] * 3)
        assert abs(triple.matrix[0, 0] - entry) < 1e-15

    def test_capacity(self):
        with pytest.raises(CapacityError):
            tensor([werner_dense(0.5)] * 7, OracleConfig(max_qubits=12))


class TestProject:
    def test_perfect_swapping(self):
        # Noise-free pairs + canonical collapse leave a pure GHZ behind
        # (corner sign alternates with the pair count: (-1)^n / 2).
        _, state = star_collapse_dense(1.0, 3)
        purity = np.trace(state.matrix @ state.matrix).real
        assert abs(purity - 1.0) < 1e-12
        diag = state.matrix.diagonal().real
        assert np.abs(diag - np.array([0.5, 0, 0, 0, 0, 0, 0, 0.5])).max() < 1e-12
        assert abs(state.matrix[0, -1] + 0.5) < 1e-12

    def test_all_outcomes_equally_likely(self):
        rho = tensor([werner_corner_dense(0.85)] * 3)
        probs = [
            project(rho, [0, 2, 4], ghz_ket(3, k))[0] for k in range(8)
        ]
        assert np.abs(np.array(probs) - 1 / 8).max() < 1e-12

    def test_local_projector_matches_fast_path(self):
        p = 0.9
        setting = LocalSetting(1.2, 0.4)
        _, dense = star_collapse_dense(p, 3)
        fast = measure_all(star_state(p, 3), [1], setting)
        for b, sign in zip(fast, (1, -1)):
            prob, sub = project(dense, [1], setting.ket(sign))
            assert abs(prob - b.probability) < 1e-12
            assert np.abs(sub.matrix - xstate_to_dense(b.state).matrix).max() < 1e-12

    def test_projector_pair_probabilities(self):
        _, dense = star_collapse_dense(0.7, 3)
        setting = LocalSetting(0.9, 2.0)
        total = sum(project(dense, [0], setting.ket(s))[0] for s in (1, -1))
        assert abs(total - 1.0) < 1e-12

    def test_unnormalized_vector_rejected(self):
        with pytest.raises(ValueError):
            project(werner_dense(0.5), [0], np.array([1.0, 1.0]))


class TestPartialTrace:
    def test_ghz_reduction(self):
        reduced = partial_trace(xstate_to_dense(ghz_xstate(3)), [0])
        assert np.allclose(reduced.matrix, np.diag([0.5, 0, 0, 0.5]), atol=1e-12)

    def test_werner_marginal(self):
        reduced = partial_trace(werner_dense(0.9), [1])
        assert np.allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)

    def test_trace_preserved(self):
        _, dense = star_collapse_dense(0.8, 4)
        reduced = partial_trace(dense, [0, 2])
        assert abs(np.trace(reduced.matrix).real - 1.0) < 1e-12


class TestOracleLnl:
    def test_star_chsh_value(self):
        value = oracle_star_lnl(0.9, 3, 1, "chsh")
        assert abs(value - (0.9**4 + 0.9**6 - 1)) < 1e-9

    def test_star_mbk_plain(self):
        value = oracle_star_lnl(0.95, 3, 0, "mbk")
        assert abs(value - (2 * 0.95**3 * np.cos(np.pi / 8) - 1)) < 1e-9

    def test_dispatch_forms(self):
        star = oracle_lnl((3, 1), 0.9, "chsh")
        assert abs(star - (0.9**4 + 0.9**6 - 1)) < 1e-9
        spec = ChainSpec.default(2, 3)
        chain = oracle_lnl(spec, 0.95, "mbk")
        assert abs(chain - (2 * 0.95**5 - 1)) < 1e-9

    def test_chain_fb_threshold_by_dense_bisection(self):
        spec = ChainSpec.default(2, 3)

        def value_at(p):
            return oracle_chain_lnl(p, spec, "fb")

        root = bisect_root(value_at, 0.85, 1.0, tol=1e-5)
        assert abs(root - pcr_chain_fb(spec).p_cr) < 1e-4

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            oracle_star_lnl(0.9, 6, 1, "chsh", config=OracleConfig(max_qubits=10))


class TestFbQuantities:
    def test_matches_quadrature(self):
        # Midpoint quadrature of the squared correlation over both angles.
        s = star_state(0.8, 2)
        qm_closed, amplitude = dense_fb_quantities(xstate_to_dense(s))
        grid = np.linspace(0, 2 * np.pi, 241)[:-1]
        dx = grid[1] - grid[0]
        total = 0.0
        for eta1 in grid:
            c = amplitude * np.cos(eta1 + grid + np.angle(s.offdiag))
            total += np.sum(c**2) * dx * dx
        assert abs(total - qm_closed) < 1e-9
        assert abs(amplitude - 2 * abs(s.offdiag)) < 1e-15


class TestValidationSuite:
    def test_clean_run_passes(self):
        results = run_validation(scope="all")
        assert all(r.passed for r in results)
        assert max(r.max_deviation for r in results) < 1e-9

    def test_fault_injection_names_the_check(self):
        results = run_validation(scope="star", corrupt=True)
        failing = [r.name for r in results if not r.passed]
        assert failing == ["star_branches_match_dense"]

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("NONLOCAL_NET_MAX_QUBITS", "12")
        assert default_config().max_qubits == 12
        monkeypatch.setenv("NONLOCAL_NET_MAX_QUBITS", "20")
        with pytest.raises(ValueError):
            default_config()


class TestGhzOutcomeProbabilities:
    def test_equality_extends_beyond_three_pairs(self):
        for n in (2, 3, 4, 5):
            rho = tensor([werner_corner_dense(0.75)] * n)
            node = [2 * j for j in range(n)]
            probs = [project(rho, node, ghz_ket(n, k))[0] for k in range(2**n)]
            assert np.abs(np.array(probs) - 0.5**n).max() < 1e-12

    def test_chain_collapse_probability(self):
        prob, _ = chain_collapse_dense(0.9, 2, 3)
        assert abs(prob - 0.5**6) < 1e-14
