import math

import numpy as np
import pytest

from oracles import dense_tensor_normal_logpdf, jittered, sigma3_matrix, sqe_loop
from tvgp.covariance import Sigma3Params, SqeKernelParams
from tvgp.errors import DomainError
from tvgp.likelihood import log_likelihood_augmented
from tvgp.posterior import (
    GP_NAMES,
    JointPosterior,
    ParamVector,
    PredictivePosterior,
    PriorSpec,
    Scheme,
    TrainingPosterior,
    log_posterior_joint,
    log_posterior_predictive,
    log_posterior_training,
    log_prior,
    make_target,
)
from tvgp.tensor import DenseTensor

SPEC = PriorSpec()
GP = dict(q11=3.0, q22=1.5, sigma11=0.9, sigma22=1.4, rho=0.25)
S = dict(s1=2.0, s2=0.7)


def _toy(rng, m1=2):
    d = DenseTensor(rng.standard_normal((m1, 2, 2)))
    design = np.column_stack([rng.uniform(1.8, 2.2, m1), rng.uniform(0.2, 1.3, m1)])
    return d, design


def _oracle_loglik(arr, pts, gp):
    r = arr - arr.mean(axis=0, keepdims=True)
    e = np.einsum("sbt,sct->bc", r, r) / (arr.shape[0] * (arr.shape[2] - 1))
    covs = [
        jittered(sqe_loop(pts, (gp["q11"], gp["q22"]))),
        jittered(e),
        jittered(sigma3_matrix(gp["sigma11"], gp["sigma22"], gp["rho"])),
    ]
    return dense_tensor_normal_logpdf(r, covs)


class TestParamVector:
    def test_masks(self):
        assert ParamVector.for_scheme("train-only", **GP).active_names == GP_NAMES
        assert ParamVector.for_scheme("joint", **GP, **S).active_names == ("s1", "s2", *GP_NAMES)
        assert ParamVector.for_scheme("predictive", **S).active_names == ("s1", "s2")

    def test_with_active_leaves_inactive(self):
        p = ParamVector.for_scheme("predictive", **S, **GP)
        q = p.with_active([2.1, 0.3])
        assert q["s1"] == 2.1 and q["q11"] == GP["q11"]
        assert p["s1"] == S["s1"]

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            ParamVector.for_scheme("joint", bogus=1.0)


class TestPrior:
    def test_s2_above_bound(self):
        p = ParamVector.for_scheme("joint", **GP, s1=2.0, s2=2.0)
        assert log_prior(p, SPEC) == -math.inf

    def test_interior_finite(self):
        assert math.isfinite(log_prior(ParamVector.for_scheme("joint", **GP, **S), SPEC))

    def test_doubling_sigma11(self):
        p = ParamVector.for_scheme("train-only", **GP)
        a = log_prior(p, SPEC)
        b = log_prior(p.with_values(sigma11=2 * GP["sigma11"]), SPEC)
        assert a - b == pytest.approx(math.log(2), rel=1e-14)

    def test_q_lower_bound_excluded(self):
        p = ParamVector.for_scheme("train-only", **{**GP, "q11": 0.0})
        assert log_prior(p, SPEC) == -math.inf

    @pytest.mark.parametrize("rho", [1.0, -1.0])
    def test_rho_endpoints_excluded(self, rho):
        p = ParamVector.for_scheme("train-only", **{**GP, "rho": rho})
        assert log_prior(p, SPEC) == -math.inf

    def test_inactive_components_ignored(self):
        p = ParamVector.for_scheme("predictive", **S)  # GP entries are NaN
        assert math.isfinite(log_prior(p, SPEC))

    def test_jeffreys_style(self):
        spec = PriorSpec(sigma3_prior="jeffreys-style")
        p = ParamVector.for_scheme("train-only", **GP)
        s11, s22, rho = GP["sigma11"], GP["sigma22"], GP["rho"]
        det = s11 * s22 * (1 - rho**2)
        expected = -1.5 * math.log(det) + 0.5 * math.log(s11 * s22) - 2 * math.log(1e6)
        assert log_prior(p, spec) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("kw", [dict(q_bounds=((1.0, 1.0), (0.0, 1.0))),
                                    dict(s_bounds=((2.0, 1.0), (0.0, 1.0))),
                                    dict(q_bounds=((-1.0, 1.0), (0.0, 1.0))),
                                    dict(sigma3_prior="wishart")])
    def test_prior_spec_validation(self, kw):
        with pytest.raises(DomainError):
            PriorSpec(**kw)


class TestTraining:
    def test_short_circuit(self, rng):
        d, design = _toy(rng)
        target = TrainingPosterior(d, design)
        calls = []
        target.log_likelihood = lambda p: calls.append(p) or 0.0
        assert target(ParamVector.for_scheme("train-only", **{**GP, "rho": 2.0})) == -math.inf
        assert not calls

    def test_additivity(self, rng):
        d, design = _toy(rng)
        target = TrainingPosterior(d, design)
        p = ParamVector.for_scheme("train-only", **GP)
        assert target(p) == log_prior(p, SPEC) + target.log_likelihood(p)
        assert log_posterior_training(p, d, design) == target(p)

    def test_ratio_against_dense_oracle(self, rng):
        d, design = _toy(rng)
        target = TrainingPosterior(d, design)
        p = ParamVector.for_scheme("train-only", **GP)
        p2 = p.with_values(q11=5.0, rho=-0.4)
        direct = (_oracle_loglik(d.array, design, p2.as_dict()) + log_prior(p2, SPEC)) - (
            _oracle_loglik(d.array, design, p.as_dict()) + log_prior(p, SPEC))
        assert math.exp(target(p2) - target(p)) == pytest.approx(math.exp(direct), rel=1e-10)

    def test_mode1_constant_shift(self, rng):
        d, design = _toy(rng, m1=3)
        shift = np.repeat(rng.standard_normal((1, 2, 2)), 3, axis=0)
        a = TrainingPosterior(d, design)
        b = TrainingPosterior(DenseTensor(d.array + shift), design)
        p = ParamVector.for_scheme("train-only", **GP)
        p2 = p.with_values(q22=0.4, sigma22=0.3)
        assert b(p2) - b(p) == pytest.approx(a(p2) - a(p), rel=1e-10, abs=1e-10)

    def test_deterministic(self, rng):
        d, design = _toy(rng)
        target = TrainingPosterior(d, design)
        p = ParamVector.for_scheme("train-only", **GP)
        assert target(p) == target(p)


class TestJoint:
    def test_short_circuit_and_additivity(self, rng):
        d, design = _toy(rng, m1=3)
        target = JointPosterior(d, design[:2])
        bad = ParamVector.for_scheme("joint", **GP, s1=5.0, s2=0.5)
        assert target(bad) == -math.inf
        p = ParamVector.for_scheme("joint", **GP, **S)
        expected = log_prior(p, SPEC) + log_likelihood_augmented(
            d, (S["s1"], S["s2"]), design[:2], SqeKernelParams((GP["q11"], GP["q22"])),
            Sigma3Params(GP["sigma11"], GP["sigma22"], GP["rho"]))
        assert target(p) == expected
        assert log_posterior_joint(p, d, design[:2]) == expected

    def test_ratio_against_dense_oracle(self, rng):
        d, design = _toy(rng, m1=3)
        train = design[:2]
        target = JointPosterior(d, train)
        p = ParamVector.for_scheme("joint", **GP, **S)
        p2 = p.with_values(s1=1.9, s2=1.1, q22=2.5)

        def oracle(q):
            pts = np.vstack([train, [q["s1"], q["s2"]]])
            return _oracle_loglik(d.array, pts, q.as_dict()) + log_prior(q, SPEC)

        assert math.exp(target(p2) - target(p)) == pytest.approx(math.exp(oracle(p2) - oracle(p)), rel=1e-10)


class TestPredictive:
    def test_outside_bounds(self, rng):
        d, design = _toy(rng, m1=3)
        target = PredictivePosterior(d, design[:2], GP)
        assert target(ParamVector.for_scheme("predictive", s1=2.0, s2=-0.1)) == -math.inf

    def test_reflection_symmetry(self, rng):
        d = DenseTensor(rng.standard_normal((2, 3, 2)))
        centre = (2.0, 0.8)
        gp = {**GP, "q11": 4.0, "q22": 4.0}
        target = PredictivePosterior(d, [centre], gp)
        for dx, dy in rng.uniform(-0.2, 0.2, size=(10, 2)):
            a = target(ParamVector.for_scheme("predictive", s1=centre[0] + dx, s2=centre[1] + dy))
            b = target(ParamVector.for_scheme("predictive", s1=centre[0] - dx, s2=centre[1] - dy))
            assert a == pytest.approx(b, rel=1e-12)

    def test_matches_joint_up_to_gp_prior(self, rng):
        d, design = _toy(rng, m1=3)
        pred = PredictivePosterior(d, design[:2], GP)
        joint = JointPosterior(d, design[:2])
        pj = ParamVector.for_scheme("joint", **GP, **S)
        pc = ParamVector.for_scheme("predictive", **S)
        gp_prior = log_prior(pj, SPEC) - log_prior(pc, SPEC)
        assert pred(pc) == pytest.approx(joint(pj) - gp_prior, rel=1e-13)
        assert log_posterior_predictive(pc, d, design[:2], GP) == pred(pc)

    def test_missing_gp(self, rng):
        d, design = _toy(rng, m1=3)
        with pytest.raises(KeyError):
            PredictivePosterior(d, design[:2], {"q11": 1.0})


def test_make_target(rng):
    d, design = _toy(rng, m1=3)
    assert isinstance(make_target("train-only", d, design), TrainingPosterior)
    assert isinstance(make_target(Scheme.JOINT, d, design[:2]), JointPosterior)
    assert isinstance(make_target("predictive", d, design[:2], fixed_gp=GP), PredictivePosterior)
    with pytest.raises(ValueError):
        make_target("predictive", d, design[:2])
