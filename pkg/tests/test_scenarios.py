import numpy as np
import pytest

from gexpect.errors import GExpectError
from gexpect.gamma import UncertaintyInterval
from gexpect.pde import SolverConfig
from gexpect.scenarios import (run_asymmetric_independence, run_diag_not_indep,
                               run_invertible_scan, run_quadratic_form,
                               run_reverse_independence_witness,
                               run_symmetry_identity)

IV = UncertaintyInterval(1.0, 4.0)
# coarse but fine enough that strict-positivity floors (10x the error
# estimate, which scales like h^2) stay below the computed third moments
FAST = SolverConfig(h=0.15, refine=None)


class TestAsymmetricIndependence:
    def test_passes_and_reports(self):
        out = run_asymmetric_independence(IV, IV, cfg=FAST)
        assert out.passed
        assert out.name == "asymmetric-independence"
        labels = [q.label for q in out.quantities]
        assert labels[0] == "E[Y2 Y1^2]" and labels[1] == "E[Y1 Y2^2]"
        assert out.runtime_ms > 0

    def test_requires_variance_uncertainty_on_second(self):
        classical = UncertaintyInterval(1.0, 1.0)
        with pytest.raises(GExpectError, match="variance uncertainty"):
            run_asymmetric_independence(classical, classical, cfg=FAST)


class TestSymmetryIdentity:
    def test_alpha_one(self):
        out = run_symmetry_identity(IV, alpha=1.0, cfg=FAST)
        assert out.passed

    def test_classical_limit_tags_zero_rows(self):
        out = run_symmetry_identity(UncertaintyInterval(2.0, 2.0), alpha=4.0, cfg=FAST)
        assert out.passed
        assert any(a.classical_zero for a in out.assertions)

    def test_rejects_bad_alpha(self):
        with pytest.raises(GExpectError):
            run_symmetry_identity(IV, alpha=0.0, cfg=FAST)


class TestDiagNotIndep:
    def test_classical_limit(self):
        out = run_diag_not_indep(UncertaintyInterval(2.0, 2.0), cfg=FAST)
        assert out.passed
        tagged = [a for a in out.assertions if a.classical_zero]
        assert len(tagged) == 2


class TestQuadraticForm:
    def test_pure_cross_term_gives_zero(self):
        out = run_quadratic_form((IV, IV), np.array([[0.0, 1.0], [1.0, 0.0]]), cfg=FAST)
        assert out.passed
        nested = out.quantities[0]
        assert abs(nested.value) < 1e-2

    def test_three_variables(self):
        ivs = (IV, IV.scaled(2.0), UncertaintyInterval(0.5, 1.0))
        out = run_quadratic_form(ivs, np.diag([1.0, -1.0, 2.0]), cfg=SolverConfig(h=0.4, refine=None))
        assert out.passed

    def test_rejects_shape_mismatch(self):
        with pytest.raises(GExpectError):
            run_quadratic_form((IV, IV), np.eye(3), cfg=FAST)


class TestReverseIndependence:
    def test_both_conditions(self):
        out = run_reverse_independence_witness((IV, IV), 0, 1, cfg=FAST)
        assert out.passed

    def test_condition_a_only(self):
        # position i has width, position j is classical: reversed witness path
        out = run_reverse_independence_witness(
            (IV, UncertaintyInterval(2.0, 2.0)), 0, 1, cfg=FAST)
        assert out.passed
        assert any("forced" in q.label for q in out.quantities)

    def test_rejects_degenerate_pair(self):
        classical = UncertaintyInterval(1.0, 1.0)
        with pytest.raises(GExpectError, match="neither hypothesis"):
            run_reverse_independence_witness((classical, classical), 0, 1, cfg=FAST)

    def test_index_validation(self):
        with pytest.raises(GExpectError):
            run_reverse_independence_witness((IV, IV), 1, 1, cfg=FAST)


class TestInvertibleScan:
    def test_catalog_all_rejected(self):
        out = run_invertible_scan(IV)
        assert out.passed
        assert len(out.assertions) >= 10

    def test_user_sample_appended(self):
        extra = np.array([[1.0, 0.5], [0.5, 1.0]])
        base = run_invertible_scan(IV)
        out = run_invertible_scan(IV, sample=[extra])
        assert len(out.assertions) == len(base.assertions) + 1

    def test_singular_matrices_skipped(self):
        out = run_invertible_scan(IV, sample=[np.ones((2, 2))])
        assert any("skipped" in q.label for q in out.quantities)

    def test_requires_strict_interval(self):
        with pytest.raises(GExpectError):
            run_invertible_scan(UncertaintyInterval(2.0, 2.0))
