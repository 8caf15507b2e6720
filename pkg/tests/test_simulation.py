"""Unit tests for the Monte Carlo harness: distributions, adversary,
replication determinism, and CSV rendering."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from winsormean.simulation import (
    MomentDoesNotExist,
    NoAdversary,
    ParetoMixture,
    ReplaceWithQuantile,
    SampleMeanSpec,
    SimConfig,
    StudentT,
    WinsorizedSpec,
    Lm21Spec,
    contaminate,
    raw_errors_csv,
    run_replication,
    run_study,
    sample_pareto,
    summary_csv,
)


class TestParetoMixture:
    def test_inverse_cdf_point(self):
        assert sample_pareto(2.0, 2.0, 0.75) == pytest.approx(4.0, rel=1e-12)

    def test_pareto_mean_over_u_grid(self):
        t, gamma = 2.0, 3.0
        u = (np.arange(200_000) + 0.5) / 200_000
        draws = t * (1.0 - u) ** (-1.0 / gamma)
        assert draws.mean() == pytest.approx(gamma * t / (gamma - 1.0), rel=1e-3)

    def test_atom_and_median(self):
        d = ParetoMixture(t=2.0, gamma=2.01)
        assert d.b == pytest.approx(1.990099, rel=1e-6)
        assert d.quantile(0.3) == pytest.approx(-d.b)
        rng = np.random.default_rng(0)
        xs = d.sample(rng, 400_000)
        # the cdf sits at exactly 1/2 on the whole gap [-b, t-b), so -b is
        # the (lowest) median; check the atom carries half the mass
        assert float(np.quantile(xs, 0.499)) == pytest.approx(-d.b, abs=1e-9)
        assert (xs == -d.b).mean() == pytest.approx(0.5, abs=5e-3)

    def test_mean_zero(self):
        d = ParetoMixture(t=2.0, gamma=3.01)
        rng = np.random.default_rng(1)
        xs = d.sample(rng, 1_000_000)
        se = xs.std() / math.sqrt(xs.size)
        assert abs(xs.mean()) <= 3.0 * se

    def test_quantiles(self):
        assert ParetoMixture(t=2.0, gamma=2.01).quantile(0.99) == pytest.approx(
            12.016, abs=1e-3
        )
        d = ParetoMixture(t=2.0, gamma=3.01)
        exact = 2.0 * 0.02 ** (-1.0 / 3.01) - d.b
        assert d.quantile(0.99) == pytest.approx(exact, rel=1e-12)
        assert d.quantile(0.99) == pytest.approx(5.834, abs=5e-3)

    def test_sigma2_closed_form(self):
        # E X^2 = 0.5*E P^2 - b^2 with E P^2 = gamma*t^2/(gamma-2); a Monte
        # Carlo cross-check is hopeless here (X^2 has no finite variance)
        d = ParetoMixture(t=2.0, gamma=2.01)
        exact = math.sqrt(0.5 * 2.01 * 4.0 / 0.01 - d.b**2)
        assert d.sigma_m(2.0) == pytest.approx(exact, rel=1e-8)

    def test_sigma_m_against_mc_oracle(self):
        # tamer exponent so the Monte Carlo average of |X|^m concentrates
        d = ParetoMixture(t=2.0, gamma=3.01)
        m = 1.2
        want = d.sigma_m(m)
        rng = np.random.default_rng(2)
        am = np.abs(d.sample(rng, 10_000_000)) ** m
        mc = float(am.mean())
        se = float(am.std()) / math.sqrt(am.size)
        assert abs(want**m - mc) <= 3.0 * se

    def test_sigma_m_nonexistent(self):
        with pytest.raises(MomentDoesNotExist):
            ParetoMixture(t=2.0, gamma=2.01).sigma_m(2.01)


class TestStudentT:
    def test_sigma2_closed_form(self):
        d = StudentT(df=3.01)
        assert d.sigma_m(2.0) ** 2 == pytest.approx(3.01 / 1.01, rel=1e-6)
        assert d.sigma_m(2.0) == pytest.approx(1.7263, abs=1e-4)

    def test_sample_moments(self):
        d = StudentT(df=5.0)
        rng = np.random.default_rng(3)
        xs = d.sample(rng, 1_000_000)
        assert abs(xs.mean()) < 5e-3
        assert xs.var() == pytest.approx(5.0 / 3.0, rel=2e-2)

    def test_sigma_m_nonexistent(self):
        with pytest.raises(MomentDoesNotExist):
            StudentT(df=3.0).sigma_m(3.0)


class TestAdversary:
    def test_none_is_identity(self):
        xs = np.arange(10.0)
        d = ParetoMixture(t=2.0, gamma=2.01)
        out, count = contaminate(xs, NoAdversary(), d, np.random.default_rng(0))
        assert count == 0
        assert out is xs

    def test_replacement_count_and_value(self):
        d = ParetoMixture(t=2.0, gamma=2.01)
        xs = np.zeros(200)
        adv = ReplaceWithQuantile(fraction=0.1, quantile_p=0.99)
        out, count = contaminate(xs, adv, d, np.random.default_rng(4))
        assert count == 20
        changed = out != 0.0
        assert changed.sum() == 20
        assert np.all(out[changed] == d.quantile(0.99))
        assert np.all(out[~changed] == xs[~changed])

    def test_same_stream_reproduces(self):
        d = ParetoMixture(t=2.0, gamma=2.01)
        xs = np.arange(100.0)
        adv = ReplaceWithQuantile(fraction=0.13, quantile_p=0.99)
        a, _ = contaminate(xs, adv, d, np.random.default_rng(9))
        b, _ = contaminate(xs, adv, d, np.random.default_rng(9))
        assert np.array_equal(a, b)

    def test_budget(self):
        d = ParetoMixture(t=2.0, gamma=2.01)
        for n, frac in ((7, 0.1), (50, 0.13), (200, 0.1)):
            _, count = contaminate(
                np.zeros(n), ReplaceWithQuantile(fraction=frac, quantile_p=0.9),
                d, np.random.default_rng(0),
            )
            assert count <= math.floor(frac * n)


def _cfg(**overrides):
    base = dict(
        n=200,
        m=2.0,
        delta=0.01,
        distribution=ParetoMixture(t=2.0, gamma=2.01),
        adversary=NoAdversary(),
        estimators=[SampleMeanSpec(), WinsorizedSpec(lambda2=0.2)],
        replications=5,
        master_seed=42,
    )
    base.update(overrides)
    return SimConfig(**base)


class TestReplication:
    def test_deterministic(self):
        cfg = _cfg()
        assert run_replication(cfg, 3) == run_replication(cfg, 3)

    def test_n1_sample_mean(self):
        cfg = _cfg(n=1, estimators=[SampleMeanSpec()])
        (label, error, status) = run_replication(cfg, 0)[0]
        rng = np.random.default_rng(np.random.SeedSequence((42, 0)))
        x1 = cfg.distribution.sample(rng, 1)[0]
        assert status == "ok"
        assert error == pytest.approx(x1 - 0.0)

    def test_lm21_failure_marker(self):
        cfg = _cfg(estimators=[Lm21Spec()])
        (_, error, status) = run_replication(cfg, 0)[0]
        assert error is None
        assert status == "not_implementable"


class TestStudy:
    def test_single_replication_echo(self):
        cfg = _cfg(replications=1)
        result = run_study(cfg, keep_raw=True)
        records = run_replication(cfg, 0)
        for summary, (label, error, status) in zip(result.estimators, records):
            assert summary.label == label
            assert summary.mae == pytest.approx(abs(error))
            assert all(q == pytest.approx(error) for q in summary.quantiles)

    def test_worker_invariance(self):
        cfg = _cfg(replications=64)
        csv1 = summary_csv(run_study(cfg, workers=1))
        csv3 = summary_csv(run_study(cfg, workers=3))
        assert csv1 == csv3

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError):
            run_study(_cfg(estimators=[SampleMeanSpec(), SampleMeanSpec()]))

    def test_schema_rejects_unknown_estimator(self):
        with pytest.raises(ValidationError) as err:
            SimConfig.model_validate(
                {
                    "n": 10, "m": 2.0, "delta": 0.01,
                    "distribution": {"kind": "pareto_mixture", "t": 2.0, "gamma": 2.01},
                    "estimators": [{"name": "bogus"}],
                    "replications": 1, "master_seed": 0,
                }
            )
        assert any("estimators" in str(e["loc"]) for e in err.value.errors())


class TestCsv:
    def test_summary_layout_and_determinism(self):
        cfg = _cfg()
        a = summary_csv(run_study(cfg))
        b = summary_csv(run_study(cfg))
        assert a == b
        lines = a.splitlines()
        assert lines[0] == (
            "n,m,eta_min,estimator,mae,q05,q25,q50,q75,q95,failures,replications,seed"
        )
        assert len(lines) == 1 + len(cfg.estimators)
        # values round-trip exactly through repr
        mae_field = lines[1].split(",")[4]
        assert repr(float(mae_field)) == mae_field

    def test_raw_layout(self):
        cfg = _cfg(replications=3)
        out = raw_errors_csv(run_study(cfg, keep_raw=True))
        lines = out.splitlines()
        assert lines[0] == "rep,estimator,error,status"
        assert len(lines) == 1 + 3 * len(cfg.estimators)

    def test_raw_requires_flag(self):
        with pytest.raises(ValueError):
            raw_errors_csv(run_study(_cfg()))
