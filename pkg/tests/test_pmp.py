import numpy as np

from idnc_cde.pmp import pmp_combination, pmp_critical, pmp_step, run_pmp_episode


def test_lossless_crossed_needs_one_slot():
    S0 = np.array([[0, 1], [1, 0]])
    T, _, _, censored = run_pmp_episode(2, 2, 0.0, np.random.default_rng(0), S0=S0)
    assert (T, censored) == (1, False)


def test_empty_frame():
    T, _, _, censored = run_pmp_episode(3, 0, 0.3, np.random.default_rng(0))
    assert T == 0 and not censored


def test_lossless_clique_count():
    # three players missing three distinct packets: one XOR serves everyone
    S0 = np.eye(3, dtype=np.uint8)
    T, _, _, _ = run_pmp_episode(3, 3, 0.0, np.random.default_rng(0), S0=S0)
    assert T == 1


def test_deterministic():
    a = run_pmp_episode(10, 12, 0.3, np.random.default_rng(9))
    b = run_pmp_episode(10, 12, 0.3, np.random.default_rng(9))
    assert a == b


def test_censoring():
    T, _, _, censored = run_pmp_episode(5, 10, 0.9, np.random.default_rng(0), slot_cap=2)
    assert T == 2 and censored


def test_step_charges_untargeted():
    S = np.array([[1, 1], [1, 0]])
    S2, inc, kappa = pmp_step(S, 0.0, np.random.default_rng(0))
    assert inc.sum() + (S2.sum() < S.sum()) >= 1
    assert kappa.sum() >= 1


def test_large_frame_uses_multistart():
    rng = np.random.default_rng(4)
    S = (rng.random((30, 25)) < 0.3).astype(np.uint8)
    q = np.full(30, 0.2)
    k = pmp_combination(S, q, S.sum(axis=1), np.zeros(30))
    t = (S.astype(int) @ k.astype(int)) == 1
    assert t.sum() >= 1


def test_critical_includes_max():
    S = np.array([[1, 0], [1, 1]])
    crit = pmp_critical(S, np.array([0.1, 0.1]), np.array([1, 2]), np.zeros(2))
    assert crit.tolist() == [1]
