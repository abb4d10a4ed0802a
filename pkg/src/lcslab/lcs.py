"""Locally conformally symplectic structures on a single chart.

A structure is a pair (omega, theta) with ``d omega = theta ^ omega`` and
``d theta = 0``; ``twisted_derivative`` is the operator ``d_theta = d - theta ^ .``
All verification is pointwise over seeded samples and returns a
:class:`~lcslab.report.Report` rather than raising, except where an operation
is genuinely unusable (odd dimension, degenerate input).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import dual
from .charts import Chart, check_same_chart
from .errors import DegenerateInputError, UsageError
from .forms import (
    DifferentialForm,
    ScalarField,
    differential_1form,
    exterior_derivative,
    wedge,
)
from .report import DEFAULT_TOL, CheckResult, Report, form_residual

# fraction of sample points allowed to fail evaluation before a check is
# demoted from pass/fail to "inconclusive"
_SKIP_FRACTION = 0.2


@dataclass(frozen=True)
class LCSStructure:
    """A chart, a nondegenerate 2-form and its closed Lee form.

    ``potential`` (optional) is a 1-form eta with ``omega = d_theta eta``;
    keeping it around is what makes the momentum constructions of the action
    module possible.
    """

    chart: Chart
    omega: DifferentialForm
    lee: DifferentialForm
    potential: DifferentialForm | None = None
    name: str = ""

    def __post_init__(self):
        check_same_chart(self.chart, self.omega.chart, "structure members")
        check_same_chart(self.chart, self.lee.chart, "structure members")
        if self.omega.degree != 2 or self.lee.degree != 1:
            raise UsageError("an LCS structure needs a 2-form and a 1-form")
        if self.potential is not None:
            check_same_chart(self.chart, self.potential.chart, "structure members")
            if self.potential.degree != 1:
                raise UsageError("the potential must be a 1-form")


def twisted_derivative(theta: DifferentialForm, form: DifferentialForm) -> DifferentialForm:
    """``d_theta form = d form - theta ^ form``.

    Well defined for any 1-form theta; it squares to zero only when theta is
    closed, which callers check separately (see :func:`verify_lcs`).
    """
    check_same_chart(theta.chart, form.chart, "twisted derivative arguments")
    if theta.degree != 1:
        raise UsageError("the twisting form must be a 1-form")
    return exterior_derivative(form) - wedge(theta, form)


# --------------------------------------------------------------------------
# nondegeneracy


class Nondegeneracy(NamedTuple):
    determinant: float
    note: str = ""

    def __float__(self) -> float:
        return float(self.determinant)


def nondegeneracy(omega: DifferentialForm, p) -> Nondegeneracy:
    """Determinant of the skew coefficient matrix of ``omega`` at ``p``.

    Equals the square of the Pfaffian; a value above threshold certifies the
    form nondegenerate at the point.  Odd-dimensional charts yield 0 with an
    explanatory note (skew matrices of odd size are always singular).
    """
    if omega.degree != 2:
        raise UsageError("nondegeneracy applies to 2-forms")
    n = omega.chart.dim
    if n % 2 == 1:
        return Nondegeneracy(0.0, "odd-dimensional chart: skew matrices of odd size are singular")
    return Nondegeneracy(float(np.linalg.det(omega.coeff_matrix(p))))


def normalized_determinant(M: np.ndarray) -> float:
    """Determinant after dividing every row by its largest absolute entry.

    Scale-free nondegeneracy score used by the verify routines: the raw
    determinant of a 2-form with coefficients ~1e3 would dwarf any fixed
    threshold, the normalized one stays in [-1, 1]-ish territory.
    """
    M = np.asarray(M, dtype=float)
    scales = np.abs(M).max(axis=1)
    if M.shape[0] != M.shape[1] or M.shape[0] % 2 == 1:
        return 0.0
    if np.any(scales == 0.0) or not np.all(np.isfinite(scales)):
        return 0.0
    return float(np.linalg.det(M / scales[:, None]))


def _nondegeneracy_check(
    omega: DifferentialForm, points: np.ndarray, tol: float, check_id: str = "nondegenerate"
) -> CheckResult:
    """Minimum normalized determinant over the samples, as a check row."""
    n = omega.chart.dim
    if n % 2 == 1:
        return CheckResult(
            check_id,
            "2-form nondegenerate at samples",
            residual=0.0,
            threshold=tol,
            passed=False,
            verdict="fail",
            details={"note": nondegeneracy(omega, np.asarray(points)[0]).note},
        )
    dets, skipped = [], 0
    for p in np.asarray(points, dtype=float):
        try:
            d = normalized_determinant(omega.coeff_matrix(p))
        except (ZeroDivisionError, FloatingPointError, ValueError, OverflowError):
            skipped += 1
            continue
        if not np.isfinite(d):
            skipped += 1
            continue
        dets.append(abs(d))
    worst = min(dets) if dets else 0.0
    result = CheckResult(
        check_id,
        "2-form nondegenerate at samples (min normalized |det|)",
        residual=worst,
        threshold=tol,
        passed=bool(worst > tol),
        details={"min_abs_det": worst, "skipped": skipped, "points": len(points)},
    )
    return _demote_if_sparse(result, skipped, len(points))


def _demote_if_sparse(check: CheckResult, skipped: int, total: int) -> CheckResult:
    if total and skipped > _SKIP_FRACTION * total:
        return CheckResult(
            check.id,
            check.claim,
            residual=check.residual,
            threshold=check.threshold,
            passed=False,
            verdict="inconclusive",
            details={**check.details, "skipped": skipped, "points": total},
        )
    return check


def residual_check(
    check_id: str,
    claim: str,
    a: DifferentialForm,
    b: DifferentialForm | None,
    points: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> CheckResult:
    """Pointwise scaled residual of ``a - b`` (or ``a`` alone) as a check row."""
    res, skipped = form_residual(a, b, points)
    out = CheckResult.from_residual(check_id, claim, res, tol, skipped=skipped, points=len(points))
    return _demote_if_sparse(out, skipped, len(points))


# --------------------------------------------------------------------------
# verification


def verify_lcs(
    s: LCSStructure,
    points: np.ndarray | None = None,
    n: int = 64,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> Report:
    """Closedness of the Lee form, the structure identity, nondegeneracy.

    When the structure carries a potential, the identity
    ``omega = d eta - theta ^ eta`` is verified as well.
    """
    pts = s.chart.sample(n, seed) if points is None else np.asarray(points, dtype=float)
    rep = Report(f"verify_lcs({s.name or s.chart.name})")
    rep.add(residual_check("lee-closed", "d(lee form) = 0", exterior_derivative(s.lee), None, pts, tol))
    rep.add(
        residual_check(
            "lcs-identity", "d(omega) = lee ^ omega", exterior_derivative(s.omega), wedge(s.lee, s.omega), pts, tol
        )
    )
    rep.add(_nondegeneracy_check(s.omega, pts, tol))
    if s.potential is not None:
        rep.add(
            residual_check(
                "potential",
                "omega = d(eta) - lee ^ eta",
                s.omega,
                twisted_derivative(s.lee, s.potential),
                pts,
                tol,
            )
        )
    return rep


# --------------------------------------------------------------------------
# Lee form recovery


class LeeSolution(NamedTuple):
    coefficients: np.ndarray
    residual: float


def solve_lee_form(omega: DifferentialForm, p, tol: float = DEFAULT_TOL) -> LeeSolution:
    """The covector solving ``d omega = theta ^ omega`` at one point.

    Least-squares solve of the overdetermined linear system in the unknown
    coefficients of theta; for a nondegenerate 2-form in dimension >= 4 the
    solution is unique, and the returned residual is ~0 exactly when omega
    is compatible with *some* Lee form at the point.
    """
    if omega.degree != 2:
        raise UsageError("solve_lee_form applies to 2-forms")
    nd = omega.chart.dim
    if nd < 4:
        raise UsageError(
            "Lee form recovery needs chart dimension >= 4 "
            "(in dimension 2 the wedge with omega has a kernel)"
        )
    if nd % 2 == 1:
        raise UsageError("Lee form recovery needs an even-dimensional chart")
    M = omega.coeff_matrix(p)
    if abs(normalized_determinant(M)) <= tol:
        raise DegenerateInputError(f"2-form is degenerate at {list(p)!r}; cannot recover a Lee form")

    dw = exterior_derivative(omega)
    pp = [float(c) for c in p]
    triples = [K for K in _increasing_triples(nd)]
    A = np.zeros((len(triples), nd))
    b = np.zeros(len(triples))
    omega_at = {I: float(f(pp)) for I, f in omega.coeffs.items()}
    for r, K in enumerate(triples):
        b[r] = float(dw.coefficient(K)(pp)) if K in dw.coeffs else 0.0
        for t, i in enumerate(K):
            rest = K[:t] + K[t + 1 :]
            A[r, i] += (-1.0) ** t * omega_at.get(rest, 0.0)
    theta, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < nd:
        raise DegenerateInputError("normal system for the Lee form is singular")
    res = float(np.abs(A @ theta - b).max()) / (1.0 + float(np.abs(b).max(initial=0.0)))
    return LeeSolution(theta, res)


def _increasing_triples(n: int):
    from itertools import combinations

    return combinations(range(n), 3)


# --------------------------------------------------------------------------
# conformal rescaling and exact structures


def exp_field(f: ScalarField) -> ScalarField:
    fn = f.fn
    return ScalarField(f.chart, lambda p: dual.exp(fn(p)))


def conformal_rescale(s: LCSStructure, f: ScalarField) -> LCSStructure:
    """Replace omega by e^f omega and the Lee form by theta + df.

    Rescaling is a group action of scalar fields: rescaling by f then by -f
    restores the structure pointwise, and the LCS identity is preserved.
    A potential, when present, rescales to e^f eta.
    """
    check_same_chart(s.chart, f.chart, "rescaling factor")
    ef = exp_field(f)
    return LCSStructure(
        chart=s.chart,
        omega=s.omega * ef,
        lee=s.lee + differential_1form(f),
        potential=None if s.potential is None else s.potential * ef,
        name=f"{s.name}~rescaled" if s.name else "rescaled",
    )


def exact_lcs(
    theta: DifferentialForm,
    eta: DifferentialForm,
    points: np.ndarray | None = None,
    n: int = 32,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    name: str = "",
) -> tuple[LCSStructure, Report]:
    """Structure with ``omega = d_theta eta`` plus its verification report.

    Nondegeneracy of the resulting 2-form is not automatic (eta = 0 gives the
    zero form); the structure is returned either way with the report attached
    so callers can decide.
    """
    if theta.degree != 1 or eta.degree != 1:
        raise UsageError("exact_lcs takes two 1-forms")
    check_same_chart(theta.chart, eta.chart, "exact structure data")
    s = LCSStructure(
        chart=theta.chart,
        omega=twisted_derivative(theta, eta),
        lee=theta,
        potential=eta,
        name=name or "exact",
    )
    return s, verify_lcs(s, points=points, n=n, seed=seed, tol=tol)
