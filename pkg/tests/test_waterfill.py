import numpy as np
import pytest
from hypothesis import given, strategies as st

from wpansched.waterfill import WaterfillProblem, bound_throughput, solve_waterfill


def bisect_level(gains, budget, tol=1e-15):
    """Water level by bisection on the budget residual; independent of the solver."""
    floors = 1.0 / np.asarray(gains, float)
    lo, hi = floors.min(), floors.min() + budget
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.maximum(mid - floors, 0).sum() > budget:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol:
            break
    mu = 0.5 * (lo + hi)
    return np.maximum(mu - floors, 0.0), mu


def kkt_residual(gains, budget, sol):
    floors = 1.0 / np.asarray(gains, float)
    n = sol.allocations
    active = n > 0
    r = [abs(n.sum() - budget)]
    if active.any():
        r.append(np.abs(n[active] - (sol.water_level - floors[active])).max())
    if (~active).any():
        r.append(max(0.0, (sol.water_level - floors[~active]).max()))
    return max(r)


def test_single_gain():
    sol = solve_waterfill(WaterfillProblem((2.0,), 10.0))
    assert sol.allocations.tolist() == [10.0]
    assert sol.water_level == pytest.approx(10.5)


def test_three_gains_match_bisection():
    gains, budget = (1.0, 0.5, 0.1), 3.0
    sol = solve_waterfill(WaterfillProblem(gains, budget))
    ref, _ = bisect_level(gains, budget)
    np.testing.assert_allclose(sol.allocations, ref, atol=1e-12)
    assert sol.allocations[2] == 0.0  # floor 10 sits above the level


def test_equal_gains_doubled():
    a = solve_waterfill(WaterfillProblem((2.0, 2.0, 2.0), 9.0))
    b = solve_waterfill(WaterfillProblem((4.0, 4.0, 4.0), 9.0))
    np.testing.assert_allclose(a.allocations, b.allocations)
    r = [1e9, 1e9, 1e9]
    assert bound_throughput((4, 4, 4), r, 9, 1e-3) > bound_throughput((2, 2, 2), r, 9, 1e-3)


def test_bad_input():
    with pytest.raises(ValueError):
        WaterfillProblem((), 1.0)
    with pytest.raises(ValueError):
        WaterfillProblem((1.0, -1.0), 1.0)


def test_single_direct_flow_bound():
    # gain 1 and the whole budget -> the direct-link throughput
    rate, t, budget = 5e9, 65.536e-6, 1000
    assert bound_throughput([1.0], [rate], budget, t) == pytest.approx(rate * budget * t)


def test_thousand_random_problems():
    rng = np.random.default_rng(20)
    for _ in range(1000):
        k = int(rng.integers(1, 40))
        gains = rng.uniform(0.05, 20, k)
        budget = float(rng.uniform(0.1, 2000))
        sol = solve_waterfill(WaterfillProblem(tuple(gains), budget))
        ref, _ = bisect_level(gains, budget)
        assert np.abs(sol.allocations - ref).max() <= 1e-9
        assert kkt_residual(gains, budget, sol) <= 1e-9


@given(gains=st.lists(st.floats(0.1, 10), min_size=1, max_size=12),
       budget=st.floats(0.5, 100), k=st.integers(0, 11), bump=st.floats(1.0, 3.0))
def test_raising_a_gain_never_lowers_its_share(gains, budget, k, bump):
    k %= len(gains)
    before = solve_waterfill(WaterfillProblem(tuple(gains), budget)).allocations[k]
    raised = list(gains)
    raised[k] *= bump
    after = solve_waterfill(WaterfillProblem(tuple(raised), budget)).allocations[k]
    assert after >= before - 1e-9
