r"""Exact conversions between full-space and subspace model objects.

For a frame with orthonormal basis ``Q`` (columns spanning the displacement
subspace) the fitted objects convert as

* minimum-norm:       ``g = Q ghat``, ``H = Q Hhat Q^T``;
* minimum-Frobenius:  ``H = Q Hhat Q^T`` and the full gradient family is
  ``{Q ahat : ahat in subspace family} + col(Q)^perp``;
* least-change:       ``H = Q Hhat Q^T + Href - P Href P`` with
  ``P = Q Q^T`` (the correction vanishes iff ``Href`` is supported on the
  subspace);
* simplex gradient/Hessian: ``g = Q ghat`` and ``H = Q Hhat Q^T`` whenever
  the stencil directions lie in ``col(Q)``.

``coincidence_check`` probes two models numerically: full-space and
subspace models must agree at ``x0 + Q xhat`` and, for the minimum-norm
pairing, also at ``x0 + Q xhat + v`` with ``v`` orthogonal to the subspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatchError,
    NotInSubspaceError,
    ReferenceMismatchError,
    VariantPreconditionError,
)
from .geometry import SubspaceFrame
from .models import GradientFamily, ModelResult, QuadraticModel

#: Frobenius-norm threshold above which a least-change correction "counts".
CORRECTION_TOL = 1e-12

#: Tolerance for comparing a stored reference Hessian with ``Q^T Href Q``.
REFERENCE_RTOL = 1e-10


@dataclass(frozen=True)
class ConversionReport:
    """Numerical gaps between a full-space and a subspace model.

    ``complement_probe_gaps`` holds one entry per complement basis vector:
    the value mismatch one unit step along that direction from the base
    point. ``value_scale`` is the largest subspace-model magnitude over the
    probes (useful for relative comparisons); ``probe_scale`` is the step
    length used for random probes.
    """

    gradient_gap: float
    hessian_gap: float
    subspace_value_gap: float
    orthogonal_value_gap: float
    correction_applied: bool
    complement_probe_gaps: tuple
    value_scale: float
    probe_scale: float
    probes: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "gradient_gap": float(self.gradient_gap),
            "hessian_gap": float(self.hessian_gap),
            "subspace_value_gap": float(self.subspace_value_gap),
            "orthogonal_value_gap": float(self.orthogonal_value_gap),
            "correction_applied": bool(self.correction_applied),
            "complement_probe_gaps": [
                float(v) for v in self.complement_probe_gaps
            ],
            "value_scale": float(self.value_scale),
            "probe_scale": float(self.probe_scale),
            "probes": int(self.probes),
            "seed": int(self.seed),
        }


def _check_sub_result(sub: ModelResult, frame: SubspaceFrame, kinds):
    if sub.kind not in kinds:
        raise VariantPreconditionError(
            f"expected a result of kind {' or '.join(kinds)}, "
            f"got {sub.kind!r}"
        )
    if sub.n != frame.d:
        raise DimensionMismatchError(
            f"subspace result has dimension {sub.n} but the frame's "
            f"subspace has dimension {frame.d}"
        )


def _lift_family(family: GradientFamily,
                 frame: SubspaceFrame) -> GradientFamily:
    """Lift a subspace gradient family and append the complement basis."""
    lifted = frame.Q @ family.ambiguity_basis
    ambiguity = np.hstack([lifted, frame.complement])
    return GradientFamily(frame.Q @ family.canonical, ambiguity)


def lift_mn(sub: ModelResult, frame: SubspaceFrame) -> ModelResult:
    """Lift a subspace minimum-norm (or determined) fit to full space.

    The lifted model coincides with the full-space minimum-norm fit at
    *every* point of the form ``x0 + Q xhat + v``, ``v`` orthogonal to
    the subspace.
    """
    _check_sub_result(sub, frame, ("mn", "dqi"))
    grad = frame.Q @ sub.model.g
    hess = linalg.sym_part(frame.Q @ sub.model.H @ frame.Q.T)
    model = QuadraticModel(frame.x0, sub.model.c, grad, hess)
    family = GradientFamily(grad, np.zeros((frame.n, 0)))
    return ModelResult(model, family, "mn")


def lift_mfn(sub: ModelResult, frame: SubspaceFrame) -> ModelResult:
    """Lift a subspace minimum-Frobenius fit to full space.

    The Hessian maps to ``Q Hhat Q^T``; every direction orthogonal to the
    subspace joins the gradient ambiguity.
    """
    _check_sub_result(sub, frame, ("mfn",))
    hess = linalg.sym_part(frame.Q @ sub.model.H @ frame.Q.T)
    family = _lift_family(sub.gradients, frame)
    model = QuadraticModel(frame.x0, sub.model.c, family.canonical, hess)
    return ModelResult(model, family, "mfn")


def lift_lfu(sub: ModelResult, frame: SubspaceFrame,
             href_full) -> ModelResult:
    """Lift a subspace least-change fit given the full-space reference.

    Checks that the subspace fit used ``Q^T Href Q`` as its reference, then
    applies ``H = Q Hhat Q^T + Href - P Href P``. ``correction_applied``
    records whether the last two terms contributed.
    """
    _check_sub_result(sub, frame, ("lfu",))
    href = linalg.sym_part(linalg.as_matrix(href_full, "reference Hessian"))
    if href.shape != (frame.n, frame.n):
        raise DimensionMismatchError(
            f"reference Hessian shape {href.shape} does not match the "
            f"full dimension {frame.n}"
        )
    restricted = frame.Q.T @ href @ frame.Q
    stored = sub.reference_hessian
    if stored is None:
        raise ReferenceMismatchError(
            "subspace result carries no reference Hessian"
        )
    drift = np.linalg.norm(stored - restricted)
    if drift > REFERENCE_RTOL * max(1.0, np.linalg.norm(restricted)):
        raise ReferenceMismatchError(
            f"stored subspace reference differs from Q^T Href Q by {drift:.3e}"
        )
    projector = frame.Q @ frame.Q.T
    correction = href - projector @ href @ projector
    hess = linalg.sym_part(
        frame.Q @ sub.model.H @ frame.Q.T + correction
    )
    family = _lift_family(sub.gradients, frame)
    model = QuadraticModel(frame.x0, sub.model.c, family.canonical, hess)
    applied = bool(np.linalg.norm(correction) > CORRECTION_TOL)
    return ModelResult(
        model, family, "lfu",
        reference_hessian=href, correction_applied=applied,
    )


def lift_simplex(obj, frame: SubspaceFrame) -> np.ndarray:
    """Lift a subspace simplex gradient (1-D) or Hessian (2-D).

    Valid whenever the stencil directions that produced ``obj`` lie in
    ``col(Q)`` (see :func:`hat_directions`). Hessians are lifted raw, so a
    nonsymmetric simplex Hessian stays nonsymmetric.
    """
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 1:
        vec = linalg.as_vector(arr, "subspace gradient")
        if vec.shape[0] != frame.d:
            raise DimensionMismatchError(
                f"gradient dimension {vec.shape[0]} does not match the "
                f"subspace dimension {frame.d}"
            )
        return frame.Q @ vec
    mat = linalg.as_matrix(arr, "subspace Hessian")
    if mat.shape != (frame.d, frame.d):
        raise DimensionMismatchError(
            f"Hessian shape {mat.shape} does not match the subspace "
            f"dimension {frame.d}"
        )
    return frame.Q @ mat @ frame.Q.T


def hat_directions(directions, frame: SubspaceFrame,
                   tol: float = 1e-10) -> np.ndarray:
    """Express direction columns in frame coordinates.

    Raises :class:`NotInSubspaceError` when a column leaves ``col(Q)`` by
    more than ``tol`` relative to its length.
    """
    mat = linalg.as_matrix(directions, "directions")
    if mat.shape[0] != frame.n:
        raise DimensionMismatchError(
            f"directions live in dimension {mat.shape[0]}, "
            f"frame in dimension {frame.n}"
        )
    hatted = frame.Q.T @ mat
    residual = mat - frame.Q @ hatted
    norms = np.linalg.norm(mat, axis=0)
    worst = float(np.max(
        np.linalg.norm(residual, axis=0) / np.maximum(norms, 1e-300)
    ))
    if worst > tol:
        raise NotInSubspaceError(
            f"directions leave the frame span (relative residual "
            f"{worst:.3e} > {tol:.1e})"
        )
    return hatted


def _restrict_family(family: GradientFamily, frame: SubspaceFrame,
                     drop_tol: float = 1e-12) -> GradientFamily:
    projected = frame.Q.T @ family.ambiguity_basis
    if projected.shape[1]:
        norms = np.linalg.norm(projected, axis=0)
        projected = projected[:, norms > drop_tol]
    if projected.shape[1]:
        projected, _ = linalg.orthonormal_columns(projected)
    return GradientFamily(frame.Q.T @ family.canonical, projected)


def restrict(obj, frame: SubspaceFrame):
    """Restrict a full-space object to the frame's subspace.

    Accepts a gradient vector (returns ``Q^T g``), a square matrix
    (returns ``Q^T H Q``), a :class:`QuadraticModel`, or a whole
    :class:`ModelResult`; models are re-anchored at the subspace origin
    with unchanged constant term.
    """
    if isinstance(obj, ModelResult):
        model = restrict(obj.model, frame)
        family = _restrict_family(obj.gradients, frame)
        href = obj.reference_hessian
        if href is not None:
            href = linalg.sym_part(frame.Q.T @ href @ frame.Q)
        return ModelResult(model, family, obj.kind, reference_hessian=href)
    if isinstance(obj, QuadraticModel):
        if obj.n != frame.n:
            raise DimensionMismatchError(
                f"model dimension {obj.n} does not match frame "
                f"dimension {frame.n}"
            )
        return QuadraticModel(
            np.zeros(frame.d),
            obj.c,
            frame.Q.T @ obj.g,
            frame.Q.T @ obj.H @ frame.Q,
        )
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 1:
        vec = linalg.as_vector(arr, "gradient")
        if vec.shape[0] != frame.n:
            raise DimensionMismatchError(
                f"gradient dimension {vec.shape[0]} does not match frame "
                f"dimension {frame.n}"
            )
        return frame.Q.T @ vec
    mat = linalg.as_matrix(arr, "Hessian")
    if mat.shape != (frame.n, frame.n):
        raise DimensionMismatchError(
            f"Hessian shape {mat.shape} does not match frame "
            f"dimension {frame.n}"
        )
    return frame.Q.T @ mat @ frame.Q


def _unwrap_model(obj) -> QuadraticModel:
    return obj.model if isinstance(obj, ModelResult) else obj


def coincidence_check(full, sub, frame: SubspaceFrame,
                      probes: int = 16, seed: int = 0) -> ConversionReport:
    """Measure where a full-space and a subspace model (dis)agree.

    Draws ``probes`` standard-normal subspace points scaled by the median
    displacement length of the frame and, independently, complement
    vectors of the same scale; reports the worst value mismatch on the
    subspace (``subspace_value_gap``) and off it
    (``orthogonal_value_gap``). One deterministic unit probe per
    complement basis vector is always included and reported separately.
    Deterministic for a given seed.
    """
    full_model = _unwrap_model(full)
    sub_model = _unwrap_model(sub)
    if full_model.n != frame.n or sub_model.n != frame.d:
        raise DimensionMismatchError(
            f"models of dimensions {full_model.n}/{sub_model.n} do not "
            f"match frame dimensions {frame.n}/{frame.d}"
        )
    if frame.dhat is not None and frame.dhat.shape[0]:
        probe_scale = float(
            np.median(np.linalg.norm(frame.dhat, axis=1))
        )
        probe_scale = max(probe_scale, 1e-8)
    else:
        probe_scale = 1.0
    rng = np.random.default_rng(seed)
    complement = frame.complement
    n_comp = complement.shape[1]

    sub_gap = 0.0
    orth_gap = 0.0
    value_scale = 1.0
    for _ in range(int(probes)):
        xhat = probe_scale * rng.standard_normal(frame.d)
        sub_value = sub_model(xhat)
        value_scale = max(value_scale, abs(sub_value))
        on_subspace = frame.x0 + frame.Q @ xhat
        sub_gap = max(sub_gap, abs(full_model(on_subspace) - sub_value))
        if n_comp:
            v = complement @ (probe_scale * rng.standard_normal(n_comp))
            orth_gap = max(
                orth_gap, abs(full_model(on_subspace + v) - sub_value)
            )
    base_value = sub_model(np.zeros(frame.d))
    comp_gaps = np.array([
        abs(full_model(frame.x0 + complement[:, j]) - base_value)
        for j in range(n_comp)
    ])
    if n_comp:
        orth_gap = max(orth_gap, float(np.max(comp_gaps)))
    else:
        orth_gap = sub_gap

    lifted_g = frame.Q @ sub_model.g
    lifted_h = frame.Q @ sub_model.H @ frame.Q.T
    projector = frame.Q @ frame.Q.T
    correction = full_model.H - projector @ full_model.H @ projector
    return ConversionReport(
        gradient_gap=float(np.linalg.norm(full_model.g - lifted_g)),
        hessian_gap=float(np.linalg.norm(full_model.H - lifted_h)),
        subspace_value_gap=float(sub_gap),
        orthogonal_value_gap=float(orth_gap),
        correction_applied=bool(
            np.linalg.norm(correction) > CORRECTION_TOL
        ),
        complement_probe_gaps=tuple(float(v) for v in comp_gaps),
        value_scale=float(value_scale),
        probe_scale=probe_scale,
        probes=int(probes),
        seed=int(seed),
    )
