import pytest

from nols.core import ElementSet, EXACT_POLICY, FLOAT_POLICY, RandomSource
from nols.matroids import ExplicitMatroid, UniformMatroid, lift
from nols.objectives import (
    LiftedGuide,
    ModularFunction,
    guide_weights,
    make_tracker,
)
from nols.solvers import DETERMINISTIC, SolverConfig, non_oblivious_solve
from nols.verify import (
    approximation_report,
    brute_force_opt,
    check_certificate,
    check_matroid_axioms,
    check_value_oracle,
    exhaustive_gap,
    localopt_gap,
    projected_value_bound,
)
from suite import tiny_coverage


def _es(n, items):
    return ElementSet.from_iterable(n, items)


class SquaredCardinality:
    """f(S) = |S|^2: monotone but supermodular, for negative tests."""

    def __init__(self, n):
        self.ground_size = n

    def eval(self, s):
        return len(s) ** 2


class NoisyCoverage:
    """Coverage with one non-monotone dip, for negative tests."""

    def __init__(self, inner, poison_mask):
        self.inner = inner
        self.ground_size = inner.ground_size
        self.poison = poison_mask

    def eval(self, s):
        if s.mask == self.poison:
            return 0
        return self.inner.eval(s)


def test_brute_force_on_tiny_fixture():
    f, m = tiny_coverage()
    truth = brute_force_opt(f, m)
    assert truth.opt_value == 5
    assert truth.opt_set == _es(4, [1, 3])
    assert truth.enumerated == 11  # empty + 4 singletons + 6 pairs
    with pytest.raises(ValueError):
        brute_force_opt(f, UniformMatroid(5, 2))


def test_brute_force_scale_guard():
    f = ModularFunction([1] * 23)
    m = UniformMatroid(23, 2)
    with pytest.raises(ValueError):
        brute_force_opt(f, m)


def test_localopt_gap_zero_at_modular_optimum():
    f = ModularFunction([3, 1, 4, 1, 5])
    m = UniformMatroid(5, 2)
    cert = localopt_gap(f, m, _es(5, [2, 4]))  # the true optimum
    assert cert.gap == 0.0
    assert cert.witness == _es(5, [2, 4])
    worse = localopt_gap(f, m, _es(5, [1, 3]))
    assert worse.gap == 7.0  # witness {2,4} scores 9, current scores 2


def test_exhaustive_gap_agrees_with_greedy_witness():
    rng = RandomSource(13)
    for trial in range(50):
        n = 4 + rng.randrange(5)
        f = ModularFunction([rng.randrange(20) for _ in range(n)])
        m = UniformMatroid(n, 1 + rng.randrange(3))
        s = ElementSet.from_iterable(
            n, [u for u in range(n) if rng.randrange(3) == 0][: 2]
        )
        cert = localopt_gap(f, m, s)
        assert exhaustive_gap(f, m, s) == pytest.approx(cert.gap, abs=1e-9)


def test_exhaustive_gap_on_lifted_instance():
    f, m = tiny_coverage()
    rep = non_oblivious_solve(f, m, SolverConfig(eps=0.5, variant=DETERMINISTIC, seed=0))
    guide = LiftedGuide(f, guide_weights(rep.levels))
    lifted_m = lift(m, rep.levels)
    cert = localopt_gap(guide, lifted_m, rep.lifted_solution)
    assert cert.gap == pytest.approx(rep.certificate.gap, abs=0)
    assert exhaustive_gap(guide, lifted_m, rep.lifted_solution) == pytest.approx(
        cert.gap, abs=1e-9
    )


def test_solver_gap_within_eps_of_warm_value():
    # the certified inequality: no challenger beats the output by more than
    # eps_inner times the warm start's guide value
    f, m = tiny_coverage()
    for eps in (0.5, 0.25):
        rep = non_oblivious_solve(f, m, SolverConfig(eps=eps, variant=DETERMINISTIC, seed=0))
        cert = rep.certificate
        assert cert.gap <= cert.bound + 1e-9
        assert cert.bound == pytest.approx(rep.eps_inner * rep.warm_value)
        assert cert.passes(FLOAT_POLICY)


def test_matroid_axiom_checker_accepts_real_matroids():
    assert check_matroid_axioms(UniformMatroid(5, 2)) == []
    good = ExplicitMatroid(3, [0b000, 0b001, 0b010, 0b100, 0b011, 0b101])
    assert check_matroid_axioms(good) == []


def test_matroid_axiom_checker_catches_exchange_violation():
    # {0,1} independent but neither {2,0} nor {2,1} independent: the
    # singleton {2} cannot be grown, violating exchange
    bad = ExplicitMatroid(
        3, [0b000, 0b001, 0b010, 0b100, 0b011], validate=False
    )
    issues = check_matroid_axioms(bad)
    assert issues
    assert any("exchange" in msg for msg in issues)


def test_matroid_axiom_checker_catches_downward_violation():
    bad = ExplicitMatroid(2, [0b00, 0b11], validate=False)
    issues = check_matroid_axioms(bad)
    assert any("downward closure" in msg for msg in issues)


def test_value_oracle_checker_accepts_submodular():
    f, _ = tiny_coverage()
    assert check_value_oracle(f) == []
    guide = LiftedGuide(f, guide_weights(2))
    assert check_value_oracle(guide) == []


def test_value_oracle_checker_catches_supermodular():
    issues = check_value_oracle(SquaredCardinality(5))
    assert any("submodularity" in msg for msg in issues)


def test_value_oracle_checker_catches_non_monotone():
    f, _ = tiny_coverage()
    noisy = NoisyCoverage(f, poison_mask=0b1010)
    issues = check_value_oracle(noisy)
    assert any("monotonicity" in msg for msg in issues)


def test_value_oracle_checker_sampled_mode():
    big = SquaredCardinality(40)  # too big for exhaustive, sampling must catch it
    issues = check_value_oracle(big, trials=2000, rng=RandomSource(3))
    assert any("submodularity" in msg for msg in issues)


def test_approximation_report_conventions():
    f, m = tiny_coverage()
    truth = brute_force_opt(f, m)
    rep = non_oblivious_solve(f, m, SolverConfig(eps=0.25, variant=DETERMINISTIC, seed=0))
    report = approximation_report(rep, truth)
    assert report.passed
    assert report.ratio == pytest.approx(rep.objective_value / truth.opt_value)
    q = (rep.levels / (rep.levels + 1)) ** rep.levels
    assert report.target == pytest.approx(1 - q - 0.25)
    zero_truth = brute_force_opt(ModularFunction([0, 0]), UniformMatroid(2, 1))
    zero_rep = non_oblivious_solve(
        ModularFunction([0, 0]),
        UniformMatroid(2, 1),
        SolverConfig(eps=0.25, variant=DETERMINISTIC, seed=0),
    )
    assert approximation_report(zero_rep, zero_truth).ratio == 1.0
    with pytest.raises(ValueError):
        approximation_report(rep, zero_truth)


def test_projected_value_bound_matches_manual():
    # levels=1: floor is opt/2 + empty/2 - eps*opt
    assert projected_value_bound(10.0, 0.0, 1, 0.1) == pytest.approx(4.0)
    assert projected_value_bound(9.0, 3.0, 2, 0.0) == pytest.approx(
        (1 - (2 / 3) ** 2) * 9 + (2 / 3) ** 2 * 3
    )


def test_check_certificate_detects_tampering():
    f, m = tiny_coverage()
    rep = non_oblivious_solve(f, m, SolverConfig(eps=0.5, variant=DETERMINISTIC, seed=0))
    guide = LiftedGuide(f, guide_weights(rep.levels))
    lifted_m = lift(m, rep.levels)
    assert check_certificate(rep.certificate, guide, lifted_m, rep.lifted_solution) == []
    from dataclasses import replace

    forged = replace(rep.certificate, gap=rep.certificate.gap - 1.0)
    issues = check_certificate(forged, guide, lifted_m, rep.lifted_solution)
    assert issues
