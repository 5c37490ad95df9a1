"""Full-space/subspace conversions.

The discipline throughout: fit the same data twice -- once in the full
space, once on the hatted set inside the frame -- and require the lift
of the second to match the first (and the restriction of the first to
match the second). These are exact identities, so tolerances are tight.
"""

import numpy as np
import pytest

from conftest import axis_frame, unit_square_set
from subquad import linalg
from subquad.bridge import (
    coincidence_check,
    hat_directions,
    lift_lfu,
    lift_mfn,
    lift_mn,
    lift_simplex,
    restrict,
)
from subquad.errors import (
    NotInSubspaceError,
    ReferenceMismatchError,
    VariantPreconditionError,
)
from subquad.geometry import (
    SampleSet,
    SubspaceFrame,
    hat_sampleset,
)
from subquad.models import fit_lfu, fit_mfn, fit_mn
from subquad.simplex import DirectionBundle, fit_qgsd, gsg, gsh


def planted_instance(rng, n=5, d=2, m=4):
    """Sample a non-quadratic function on a d-dimensional displacement set."""
    q, _ = linalg.orthonormal_columns(rng.standard_normal((n, d)))
    dhat = rng.standard_normal((m, d))
    disp = dhat @ q.T
    x0 = rng.standard_normal(n)
    f = lambda x: float(np.sin(x).sum() + 0.25 * (x @ x))
    values = np.array([f(x0)] + [f(x0 + dd) for dd in disp])
    full_set = SampleSet(x0, disp, values)
    frame = SubspaceFrame(x0, q, dhat=dhat)
    return full_set, frame


class TestIdentityFrame:
    """With Q = I the conversions must be the identity map."""

    def test_mn_round_trip(self, rng):
        n, m = 3, 4
        disp = rng.standard_normal((m, n))
        values = rng.standard_normal(m + 1)
        ss = SampleSet(np.zeros(n), disp, values)
        frame = SubspaceFrame(np.zeros(n), np.eye(n), dhat=disp)
        sub = fit_mn(hat_sampleset(ss, frame))
        lifted = lift_mn(sub, frame)
        direct = fit_mn(ss)
        np.testing.assert_allclose(lifted.model.g, direct.model.g, atol=1e-12)
        np.testing.assert_allclose(lifted.model.H, direct.model.H, atol=1e-12)


class TestMinNormLift:
    def test_agrees_with_direct_full_fit(self, rng):
        for _ in range(8):
            full_set, frame = planted_instance(rng)
            sub = fit_mn(hat_sampleset(full_set, frame))
            lifted = lift_mn(sub, frame)
            direct = fit_mn(full_set)
            np.testing.assert_allclose(lifted.model.g, direct.model.g, atol=1e-9)
            np.testing.assert_allclose(lifted.model.H, direct.model.H, atol=1e-9)

    def test_values_agree_everywhere(self, rng):
        """On and off the subspace: the lifted and direct models are the
        same polynomial."""
        full_set, frame = planted_instance(rng)
        sub = fit_mn(hat_sampleset(full_set, frame))
        lifted = lift_mn(sub, frame)
        direct = fit_mn(full_set)
        for _ in range(10):
            x = full_set.x0 + rng.standard_normal(frame.n)
            assert lifted.model(x) == pytest.approx(direct.model(x), abs=1e-9)

    def test_rejects_wrong_kind(self, rng):
        full_set, frame = planted_instance(rng)
        sub = fit_mfn(hat_sampleset(full_set, frame))
        with pytest.raises(VariantPreconditionError):
            lift_mn(sub, frame)


class TestMinFrobeniusLift:
    def test_hessian_and_family(self, rng):
        for _ in range(8):
            full_set, frame = planted_instance(rng)
            sub = fit_mfn(hat_sampleset(full_set, frame))
            lifted = lift_mfn(sub, frame)
            direct = fit_mfn(full_set)
            np.testing.assert_allclose(lifted.model.H, direct.model.H, atol=1e-9)
            np.testing.assert_allclose(
                lifted.gradients.canonical, direct.gradients.canonical, atol=1e-9
            )
            # ambiguity bases span the same subspace
            pa = lifted.gradients.ambiguity_basis @ lifted.gradients.ambiguity_basis.T
            pb = direct.gradients.ambiguity_basis @ direct.gradients.ambiguity_basis.T
            np.testing.assert_allclose(pa, pb, atol=1e-9)

    def test_ambiguity_contains_complement(self, rng):
        """Every direction orthogonal to the frame is invisible to the
        displacements, hence ambiguous for the lifted gradient."""
        full_set, frame = planted_instance(rng, n=6, d=2, m=5)
        lifted = lift_mfn(fit_mfn(hat_sampleset(full_set, frame)), frame)
        amb = lifted.gradients.ambiguity_basis
        comp = frame.complement
        # comp columns are reproduced by projecting onto the ambiguity span
        np.testing.assert_allclose(amb @ (amb.T @ comp), comp, atol=1e-10)

    def test_worked_example_family(self):
        square, frame = unit_square_set(), axis_frame()
        sub = fit_mfn(hat_sampleset(square, frame))
        lifted = lift_mfn(sub, frame)
        np.testing.assert_allclose(lifted.gradients.canonical, [1, 1, 0], atol=1e-12)
        amb = lifted.gradients.ambiguity_basis
        assert amb.shape == (3, 1)
        np.testing.assert_allclose(np.abs(amb[:, 0]), [0, 0, 1], atol=1e-12)


class TestLeastChangeLift:
    def test_correction_formula(self, rng):
        """Lifted Hessian must be Q Hsub Q^T + (href - P href P)."""
        for _ in range(8):
            full_set, frame = planted_instance(rng)
            href = rng.standard_normal((frame.n, frame.n))
            href = (href + href.T) / 2
            href_hat = linalg.sym_part(frame.Q.T @ href @ frame.Q)
            sub = fit_lfu(hat_sampleset(full_set, frame), href_hat)
            lifted = lift_lfu(sub, frame, href)
            p = frame.Q @ frame.Q.T
            expected = frame.Q @ sub.model.H @ frame.Q.T + href - p @ href @ p
            np.testing.assert_allclose(lifted.model.H, expected, atol=1e-10)
            direct = fit_lfu(full_set, href)
            np.testing.assert_allclose(lifted.model.H, direct.model.H, atol=1e-8)

    def test_supported_reference_needs_no_correction(self, rng):
        full_set, frame = planted_instance(rng)
        inner = rng.standard_normal((2, 2))
        href = frame.Q @ ((inner + inner.T) / 2) @ frame.Q.T
        href = linalg.sym_part(href)
        sub = fit_lfu(hat_sampleset(full_set, frame),
                      linalg.sym_part(frame.Q.T @ href @ frame.Q))
        lifted = lift_lfu(sub, frame, href)
        assert lifted.correction_applied is False
        np.testing.assert_allclose(
            lifted.model.H, frame.Q @ sub.model.H @ frame.Q.T, atol=1e-10
        )

    def test_reference_mismatch_detected(self, rng):
        full_set, frame = planted_instance(rng)
        href = np.eye(frame.n)
        sub = fit_lfu(hat_sampleset(full_set, frame), 2.0 * np.eye(frame.d))
        with pytest.raises(ReferenceMismatchError):
            lift_lfu(sub, frame, href)

    def test_worked_example(self):
        square, frame = unit_square_set(), axis_frame()
        sub = fit_lfu(hat_sampleset(square, frame), np.eye(2))
        lifted = lift_lfu(sub, frame, np.eye(3))
        np.testing.assert_allclose(lifted.model.H, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(lifted.model.g, [0.5, 0.5, 0.0], atol=1e-12)
        assert lifted.correction_applied is True  # I_3 bulges off the plane


class TestRestrict:
    def test_round_trip_through_lift(self, rng):
        full_set, frame = planted_instance(rng)
        sub = fit_mfn(hat_sampleset(full_set, frame))
        lifted = lift_mfn(sub, frame)
        back = restrict(lifted, frame)
        np.testing.assert_allclose(back.model.g, sub.model.g, atol=1e-10)
        np.testing.assert_allclose(back.model.H, sub.model.H, atol=1e-10)
        np.testing.assert_allclose(
            back.gradients.canonical, sub.gradients.canonical, atol=1e-10
        )

    def test_restrict_full_fit_matches_sub_fit(self, rng):
        """Restricting the directly fitted full-space model recovers the
        subspace fit -- Hessian block and canonical gradient."""
        full_set, frame = planted_instance(rng)
        direct = fit_mfn(full_set)
        sub = fit_mfn(hat_sampleset(full_set, frame))
        back = restrict(direct, frame)
        np.testing.assert_allclose(back.model.H, sub.model.H, atol=1e-9)
        np.testing.assert_allclose(
            back.gradients.canonical, sub.gradients.canonical, atol=1e-9
        )

    def test_values_on_subspace(self, rng):
        full_set, frame = planted_instance(rng)
        direct = fit_mfn(full_set)
        back = restrict(direct, frame)
        for _ in range(6):
            xhat = rng.standard_normal(frame.d)
            x = frame.x0 + frame.Q @ xhat
            assert back.model(xhat) == pytest.approx(direct.model(x), abs=1e-9)

    def test_plain_arrays(self, frame, rng):
        g = rng.standard_normal(3)
        np.testing.assert_allclose(restrict(g, frame), frame.Q.T @ g, atol=1e-14)
        h = rng.standard_normal((3, 3))
        np.testing.assert_allclose(
            restrict(h, frame), frame.Q.T @ h @ frame.Q, atol=1e-14
        )


class TestSimplexBridge:
    def test_gsg_lift_identity(self, rng):
        """Gradients from in-subspace directions: estimating in hat
        coordinates and lifting equals estimating in the full space."""
        n, d, p = 5, 2, 3
        q, _ = linalg.orthonormal_columns(rng.standard_normal((n, d)))
        shat = rng.standard_normal((d, p))
        s = q @ shat
        x0 = rng.standard_normal(n)
        frame = SubspaceFrame(x0, q)
        f = lambda x: float(np.sin(x).sum())
        g_full = gsg(x0, s, f)
        from subquad.geometry import hat_function

        g_hat = gsg(np.zeros(d), shat, hat_function(f, frame))
        np.testing.assert_allclose(lift_simplex(g_hat, frame), g_full, atol=1e-10)

    def test_gsh_lift_identity(self, rng):
        n, d, p = 5, 2, 2
        q, _ = linalg.orthonormal_columns(rng.standard_normal((n, d)))
        shat = rng.standard_normal((d, p))
        s = q @ shat
        x0 = rng.standard_normal(n)
        frame = SubspaceFrame(x0, q)
        f = lambda x: float(np.cos(x).sum() + x @ x)
        h_full = gsh(x0, DirectionBundle(s, s), f)
        from subquad.geometry import hat_function

        h_hat = gsh(
            np.zeros(d), DirectionBundle(shat, shat), hat_function(f, frame)
        )
        np.testing.assert_allclose(lift_simplex(h_hat, frame), h_full, atol=1e-9)

    def test_hat_directions_round_trip(self, rng):
        q, _ = linalg.orthonormal_columns(rng.standard_normal((6, 3)))
        frame = SubspaceFrame(np.zeros(6), q)
        shat = rng.standard_normal((3, 4))
        s = q @ shat
        np.testing.assert_allclose(hat_directions(s, frame), shat, atol=1e-11)

    def test_hat_directions_rejects_outside(self, rng):
        q = np.eye(4)[:, :2]
        frame = SubspaceFrame(np.zeros(4), q)
        s = np.eye(4)[:, 2:3]  # orthogonal to the frame
        with pytest.raises(NotInSubspaceError):
            hat_directions(s, frame)

    def test_qgsd_restrict_matches_sub_fit(self, rng):
        n, d, p = 4, 2, 2
        q, _ = linalg.orthonormal_columns(rng.standard_normal((n, d)))
        shat = rng.standard_normal((d, p))
        s = q @ shat
        x0 = rng.standard_normal(n)
        frame = SubspaceFrame(x0, q)
        f = lambda x: float((x ** 2).sum() + np.sin(x[0]))
        from subquad.geometry import hat_function

        full = fit_qgsd(x0, DirectionBundle(s, s), f)
        sub = fit_qgsd(
            np.zeros(d), DirectionBundle(shat, shat), hat_function(f, frame)
        )
        np.testing.assert_allclose(
            q.T @ full.model.g, sub.model.g, atol=1e-9
        )
        np.testing.assert_allclose(
            q.T @ full.model.H @ q, sub.model.H, atol=1e-9
        )


class TestCoincidenceReport:
    def test_exact_coincidence(self, rng):
        full_set, frame = planted_instance(rng)
        sub = fit_mn(hat_sampleset(full_set, frame))
        lifted = lift_mn(sub, frame)
        report = coincidence_check(lifted.model, sub.model, frame, seed=3)
        assert report.subspace_value_gap < 1e-10
        assert report.orthogonal_value_gap < 1e-10

    def test_unsupported_reference_breaks_off_subspace(self):
        """The square example with href = I_3: perfect agreement on the
        plane, a gap of exactly 1/2 one unit off it."""
        square, frame = unit_square_set(), axis_frame()
        sub = fit_lfu(hat_sampleset(square, frame), np.eye(2))
        lifted = lift_lfu(sub, frame, np.eye(3))
        report = coincidence_check(lifted.model, sub.model, frame, seed=11)
        assert report.subspace_value_gap < 1e-12
        assert report.orthogonal_value_gap > 0.4
        assert report.complement_probe_gaps[0] == pytest.approx(0.5, abs=1e-12)
        assert report.correction_applied is True

    def test_correction_detected_from_model_alone(self, rng):
        """correction_applied is inferred from the full model's Hessian,
        not from fit metadata."""
        full_set, frame = planted_instance(rng)
        href = np.eye(frame.n)
        direct = fit_lfu(full_set, href)
        sub = fit_lfu(hat_sampleset(full_set, frame),
                      linalg.sym_part(frame.Q.T @ href @ frame.Q))
        report = coincidence_check(direct.model, sub.model, frame, seed=5)
        assert report.correction_applied is True

    def test_full_dimensional_frame_has_no_orthogonal_gap(self, rng):
        n, m = 3, 5
        disp = rng.standard_normal((m, n))
        values = rng.standard_normal(m + 1)
        ss = SampleSet(np.zeros(n), disp, values)
        frame = SubspaceFrame(np.zeros(n), np.eye(n), dhat=disp)
        sub = fit_mn(hat_sampleset(ss, frame))
        direct = fit_mn(ss)
        report = coincidence_check(direct.model, sub.model, frame, seed=2)
        assert report.orthogonal_value_gap == report.subspace_value_gap
        assert report.complement_probe_gaps == ()

    def test_deterministic_given_seed(self, rng):
        full_set, frame = planted_instance(rng)
        sub = fit_mfn(hat_sampleset(full_set, frame))
        lifted = lift_mfn(sub, frame)
        a = coincidence_check(lifted.model, sub.model, frame, seed=9)
        b = coincidence_check(lifted.model, sub.model, frame, seed=9)
        assert a.to_dict() == b.to_dict()
