import math

import pytest

import zerohold as z
from zerohold.errors import PreconditionError

# closed-form values for p = 1/2, k = 2: the dominant root is (1+sqrt(5))/4
# and the prefactor is 1 + 1/sqrt(5) (quadratic-formula oracle)
S2_HALF = (1.0 + math.sqrt(5.0)) / 4.0
C2_HALF = 1.0 + 1.0 / math.sqrt(5.0)


def _brute_force_no_run(p, k, n):
    # walk every coin sequence; float products, so exact to ~1e-15
    total = 0.0
    for mask in range(1 << n):
        run = 0
        longest = 0
        prob = 1.0
        for i in range(n):
            if (mask >> i) & 1:
                run += 1
                longest = max(longest, run)
                prob *= p
            else:
                run = 0
                prob *= 1.0 - p
        if longest < k:
            total += prob
    return total


def test_fair_coin_pair_root_and_constant():
    s = z.coin_root(0.5, 2)
    assert s == pytest.approx(S2_HALF, abs=1e-12)
    c = z.coin_constant(0.5, 2, s)
    assert c == pytest.approx(C2_HALF, abs=1e-11)


def test_exact_small_board_enumeration():
    assert z.coin_exact(0.5, 2, 4) == 0.5
    assert z.coin_exact(0.6, 3, 10) == pytest.approx(_brute_force_no_run(0.6, 3, 10), abs=1e-12)


def test_dp_satisfies_first_tail_decomposition():
    p, k = 0.37, 3
    q = 1.0 - p
    vals = [z.coin_exact(p, k, n) for n in range(0, 25)]
    for n in range(k, 25):
        rhs = sum(q * p**j * vals[n - 1 - j] for j in range(k))
        assert vals[n] == pytest.approx(rhs, abs=1e-14)


def test_log_ratio_settles_on_the_root():
    s = z.coin_root(0.5, 2)
    prev = z.coin_exact(0.5, 2, 40)
    for n in range(41, 81):
        cur = z.coin_exact(0.5, 2, n)
        assert abs(math.log(cur / prev) - math.log(s)) < 1e-6
        prev = cur


def test_asymptote_matches_dp_deep():
    p, k, n = 0.6, 3, 60
    s = z.coin_root(p, k)
    c = z.coin_constant(p, k, s)
    exact = z.coin_exact(p, k, n)
    assert c * s ** (n + 1) == pytest.approx(exact, rel=1e-4)


def test_run_length_one_collapses_to_all_tails():
    p = 0.3
    q = 1.0 - p
    s = z.coin_root(p, 1)
    assert s == q
    c = z.coin_constant(p, 1, s)
    # c = 1/q makes c s^{n+1} = q^n, so the asymptote is exact at every n
    assert c == pytest.approx(1.0 / q, abs=1e-12)
    for n in (1, 4, 9):
        assert z.coin_exact(p, 1, n) == pytest.approx(q**n, abs=1e-14)
        assert c * s ** (n + 1) == pytest.approx(q**n, abs=1e-14)


def test_coin_result_table_shape():
    res = z.coin_result(0.5, 2, 20)
    assert res.s_k == pytest.approx(S2_HALF, abs=1e-12)
    assert res.c_k == pytest.approx(C2_HALF, abs=1e-11)
    assert len(res.table) == 21
    n20, exact20, asym20 = res.table[20]
    assert n20 == 20
    assert exact20 == z.coin_exact(0.5, 2, 20)
    assert asym20 == pytest.approx(exact20, rel=1e-8)


def test_poisson_unit_rate_is_exact():
    res = z.poisson_phi(1.0)
    assert res.phi_r == 1.0
    assert res.c_r == 2.0


def test_poisson_rate_two_frozen_value():
    # scalar bisection on the defining fixed-point equation, frozen:
    assert z.poisson_phi(2.0).phi_r == pytest.approx(0.4063757399599599, abs=1e-10)
    assert z.poisson_phi(2.0).c_r == pytest.approx(1.3422836357231676, abs=1e-10)
    assert z.poisson_phi(0.5).phi_r == pytest.approx(1.7564312086261693, abs=1e-10)


def test_poisson_agrees_with_chain_solver():
    for r in (0.5, 1.0, 2.0):
        res = z.poisson_phi(r)
        spec = z.ChainSpec(n_states=1, rates=[[r]], wait_threshold=1.0)
        sol = z.solve_phi(spec)
        assert res.phi_r == pytest.approx(sol.phi, abs=1e-8)
        assert res.c_r == pytest.approx(sol.kappa, abs=1e-8)


def test_domain_errors():
    with pytest.raises(PreconditionError):
        z.coin_root(0.0, 2)
    with pytest.raises(PreconditionError):
        z.coin_root(1.0, 2)
    with pytest.raises(PreconditionError):
        z.coin_root(0.5, 0)
    with pytest.raises(PreconditionError):
        z.coin_exact(1.3, 2, 5)
    with pytest.raises(PreconditionError):
        z.poisson_phi(0.0)
    with pytest.raises(PreconditionError):
        z.coin_result(0.5, 2, -1)
