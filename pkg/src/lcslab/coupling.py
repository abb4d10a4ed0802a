"""Coupling a twisted Hamiltonian fiber to a gauge potential on a base chart.

Everything happens in one local trivialization ``U x F``: a gauge potential
``A^a`` on the base, fundamental fields ``rho_a`` with momentum ``mu_a`` on
the fiber.  The coupling 2-form is

    Omega = omega
          + sum_a A^a ^ (i_rho_a omega)
          + sum_{a<b} omega(rho_a, rho_b) A^a ^ A^b
          - sum_a mu_a F^a

with curvature ``F^a = dA^a + 1/2 c^a_{bc} A^b ^ A^c``, which on tangent
pairs reads ``Omega((X,W),(Y,V)) = omega(W + A(X)rho, V + A(Y)rho)
- sum mu_a F^a(X,Y)``.  The sign on the curvature block is pinned by
requiring ``d_Theta Omega = 0`` (it equals the momentum pairing with the
curvature field ``[X*,Y*] - [X,Y]*``); the test suite freezes it.

The chapter on almost complex structures lives here too: block structures
``J~`` preserving horizontal/vertical splits, the Nijenhuis tensor and the
curvature identity for its purely horizontal values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .charts import Chart, check_same_chart
from .errors import InvalidStructureError, PreconditionError, UsageError
from .actions import ActionSpec, MomentumMap, check_structure_constants, verify_twisted_hamiltonian
from .forms import (
    DifferentialForm,
    ScalarField,
    SmoothMap,
    VectorField,
    constant,
    contract,
    det_generic,
    eval_form,
    exterior_derivative,
    interior_product,
    lie_bracket,
    wedge,
)
from . import dual
from .lcs import LCSStructure, _nondegeneracy_check, residual_check, twisted_derivative
from .report import DEFAULT_TOL, CheckResult, Report, form_residual

# --------------------------------------------------------------------------
# product charts and embeddings


def product_chart(base: Chart, fiber: Chart, name: str = "") -> Chart:
    """Chart for U x F; base coordinates first, names must not collide."""
    clash = set(base.coords) & set(fiber.coords)
    if clash:
        raise UsageError(f"coordinate names {sorted(clash)} appear on both factors")
    m = base.dim
    bp, fp = base.predicate, fiber.predicate
    pred = None
    if bp is not None or fp is not None:

        def pred(cols, _bp=bp, _fp=fp, _m=m):
            ok = np.ones(np.shape(cols[0]), dtype=bool)
            if _bp is not None:
                ok = ok & _bp(cols[:_m])
            if _fp is not None:
                ok = ok & _fp(cols[_m:])
            return ok

    return Chart(
        name or f"{base.name}x{fiber.name}",
        base.coords + fiber.coords,
        box=base.box + fiber.box,
        predicate=pred,
    )


def _embedded_field(total: Chart, offset: int, width: int, f: ScalarField) -> ScalarField:
    fn = f.fn
    return ScalarField(total, lambda p, _fn=fn, _o=offset, _w=width: _fn(p[_o : _o + _w]))


def embed_base_field(total: Chart, base: Chart, f: ScalarField) -> ScalarField:
    check_same_chart(base, f.chart, "embedded field")
    return _embedded_field(total, 0, base.dim, f)


def embed_fiber_field(total: Chart, base: Chart, f: ScalarField) -> ScalarField:
    return _embedded_field(total, base.dim, f.chart.dim, f)


def embed_base_form(total: Chart, base: Chart, form: DifferentialForm) -> DifferentialForm:
    check_same_chart(base, form.chart, "embedded form")
    coeffs = {I: _embedded_field(total, 0, base.dim, f) for I, f in form.coeffs.items()}
    return DifferentialForm(total, form.degree, coeffs)


def embed_fiber_form(total: Chart, base: Chart, form: DifferentialForm) -> DifferentialForm:
    m = base.dim
    coeffs = {
        tuple(i + m for i in I): _embedded_field(total, m, form.chart.dim, f)
        for I, f in form.coeffs.items()
    }
    return DifferentialForm(total, form.degree, coeffs)


def embed_fiber_vector(total: Chart, base: Chart, X: VectorField) -> VectorField:
    m = base.dim
    comps = [0.0] * m + [_embedded_field(total, m, X.chart.dim, c) for c in X.components]
    return VectorField(total, comps)


# --------------------------------------------------------------------------
# gauge data


@dataclass(frozen=True, eq=False)
class GaugeChart:
    """Gauge potentials ``A^a`` on a base chart, sharing the action's constants."""

    base: Chart
    potentials: tuple[DifferentialForm, ...]
    constants: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "potentials", tuple(self.potentials))
        for A in self.potentials:
            check_same_chart(self.base, A.chart, "gauge potentials")
            if A.degree != 1:
                raise UsageError("gauge potentials must be 1-forms")
        d = len(self.potentials)
        C = np.zeros((d, d, d)) if self.constants is None else np.asarray(self.constants, dtype=float)
        if C.shape != (d, d, d):
            raise UsageError(f"gauge structure constants must have shape ({d}, {d}, {d})")
        check_structure_constants(C)
        object.__setattr__(self, "constants", C)

    @property
    def dim(self) -> int:
        return len(self.potentials)


def gauge_curvature(
    g: GaugeChart,
    points: np.ndarray | None = None,
    n: int = 32,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> tuple[tuple[DifferentialForm, ...], Report]:
    """``F^a = dA^a + 1/2 c^a_{bc} A^b ^ A^c`` with its Bianchi residuals.

    The report carries one row per generator for
    ``dF^a + c^a_{bc} A^b ^ F^c = 0``.
    """
    pts = g.base.sample(n, seed) if points is None else np.asarray(points, dtype=float)
    F = []
    for a in range(g.dim):
        Fa = exterior_derivative(g.potentials[a])
        for b in range(g.dim):
            for c in range(g.dim):
                coef = 0.5 * float(g.constants[a, b, c])
                if coef != 0.0:
                    Fa = Fa + coef * wedge(g.potentials[b], g.potentials[c])
        F.append(Fa)
    rep = Report("gauge_curvature")
    for a in range(g.dim):
        bianchi = exterior_derivative(F[a])
        for b in range(g.dim):
            for c in range(g.dim):
                coef = float(g.constants[a, b, c])
                if coef != 0.0:
                    bianchi = bianchi + coef * wedge(g.potentials[b], F[c])
        rep.add(residual_check(f"bianchi[{a}]", "dF + c A ^ F = 0", bianchi, None, pts, tol))
    return tuple(F), rep


def circle_fat_from_symplectic(
    omega_base: DifferentialForm,
    alpha_potential: DifferentialForm,
    points: np.ndarray | None = None,
    n: int = 32,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> GaugeChart:
    """Abelian gauge whose curvature is a prescribed symplectic base form.

    Requires ``d alpha = omega_base`` within tolerance on samples — the local
    model of a connection on the circle bundle the base form classifies.
    """
    check_same_chart(omega_base.chart, alpha_potential.chart, "base form and potential")
    if omega_base.degree != 2 or alpha_potential.degree != 1:
        raise UsageError("need a 2-form and a candidate potential 1-form")
    pts = omega_base.chart.sample(n, seed) if points is None else np.asarray(points, dtype=float)
    res, _ = form_residual(exterior_derivative(alpha_potential), omega_base, pts)
    if res > tol:
        raise PreconditionError(
            f"d(potential) does not reproduce the base 2-form (residual {res:.3e})"
        )
    return GaugeChart(omega_base.chart, (alpha_potential,))


def horizontal_lift(
    g: GaugeChart, act: ActionSpec, X: VectorField, total: Chart | None = None
) -> VectorField:
    """``X* = (X, -sum_a A^a(X) rho_a)`` on the product chart."""
    check_same_chart(g.base, X.chart, "lifted field")
    if g.dim != act.dim:
        raise UsageError("gauge and action have different numbers of generators")
    if not np.array_equal(g.constants, act.constants):
        raise UsageError("gauge and action must share their structure constants")
    total = product_chart(g.base, act.chart) if total is None else total
    m, k = g.base.dim, act.chart.dim
    comps = [embed_base_field(total, g.base, c) for c in X.components]
    vert = [constant(total, 0.0) for _ in range(k)]
    for a in range(g.dim):
        coefficient = embed_base_field(total, g.base, contract(g.potentials[a], X))
        rho = act.fields[a]
        for j in range(k):
            vert[j] = vert[j] - coefficient * embed_fiber_field(total, g.base, rho.components[j])
    return VectorField(total, comps + vert)


# --------------------------------------------------------------------------
# the coupling chart


@dataclass(frozen=True, eq=False)
class CouplingChart:
    """The assembled data on ``U x F``: forms, curvature, and the parts they came from."""

    total: Chart
    base: Chart
    fiber: LCSStructure
    gauge: GaugeChart
    action: ActionSpec
    momentum: MomentumMap
    Omega: DifferentialForm
    Theta: DifferentialForm
    curvature: tuple[DifferentialForm, ...]

    @property
    def base_dim(self) -> int:
        return self.base.dim

    def vertical_field(self, V: VectorField) -> VectorField:
        return embed_fiber_vector(self.total, self.base, V)

    def lift(self, X: VectorField) -> VectorField:
        return horizontal_lift(self.gauge, self.action, X, total=self.total)


def build_coupling(
    g: GaugeChart,
    fiber: LCSStructure,
    act: ActionSpec,
    mu: MomentumMap,
    points: np.ndarray | None = None,
    n: int = 32,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> CouplingChart:
    """Assemble (Omega, Theta) on the product chart from verified parts.

    Refuses (with the failing report attached) when the fiber triple does not
    verify as twisted Hamiltonian — the closedness of the output is exactly
    equivalent to those hypotheses.
    """
    pre = verify_twisted_hamiltonian(fiber, act, mu, points=points, n=n, seed=seed, tol=tol)
    if not pre.passed:
        raise PreconditionError("fiber action is not twisted Hamiltonian on samples", report=pre)
    if g.dim != act.dim:
        raise UsageError("gauge and action have different numbers of generators")
    if not np.array_equal(g.constants, act.constants):
        raise UsageError("gauge and action must share their structure constants")

    total = product_chart(g.base, fiber.chart)
    m = g.base.dim
    F, _ = gauge_curvature(g, n=4, seed=seed)  # Bianchi re-checked in verify_coupling

    Omega = embed_fiber_form(total, g.base, fiber.omega)
    for a in range(g.dim):
        A_hat = embed_base_form(total, g.base, g.potentials[a])
        iota_hat = embed_fiber_form(total, g.base, interior_product(act.fields[a], fiber.omega))
        Omega = Omega + wedge(A_hat, iota_hat)
    for a in range(g.dim):
        for b in range(a + 1, g.dim):
            pairing = embed_fiber_field(total, g.base, contract(fiber.omega, act.fields[a], act.fields[b]))
            Omega = Omega + pairing * wedge(
                embed_base_form(total, g.base, g.potentials[a]),
                embed_base_form(total, g.base, g.potentials[b]),
            )
    for a in range(g.dim):
        Omega = Omega - embed_fiber_field(total, g.base, mu.components[a]) * embed_base_form(
            total, g.base, F[a]
        )

    Theta = embed_fiber_form(total, g.base, fiber.lee)
    return CouplingChart(
        total=total,
        base=g.base,
        fiber=fiber,
        gauge=g,
        action=act,
        momentum=mu,
        Omega=Omega,
        Theta=Theta,
        curvature=tuple(F),
    )


# --------------------------------------------------------------------------
# verification


def _unit_rows(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    V = rng.standard_normal((count, dim))
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def _argument_vectors(c: CouplingChart, pattern: str, p: np.ndarray, rng: np.random.Generator):
    """Concrete tangent vectors at p: 'h' = horizontal lift, 'v' = vertical."""
    m = c.base_dim
    k = c.fiber.chart.dim
    u, x = p[:m], p[m:]
    A_mats = [np.array([float(A.coefficient((i,)).fn(list(u))) for i in range(m)]) for A in c.gauge.potentials]
    out = []
    for kind in pattern:
        if kind == "h":
            Xb = _unit_rows(rng, 1, m)[0]
            vert = np.zeros(k)
            for a, rho in enumerate(c.action.fields):
                vert -= float(A_mats[a] @ Xb) * rho.at(x)
            out.append(np.concatenate([Xb, vert]))
        else:
            Vf = _unit_rows(rng, 1, k)[0]
            out.append(np.concatenate([np.zeros(m), Vf]))
    return out


_PATTERNS = ("vvv", "vvh", "vhv", "hvv", "vhh", "hvh", "hhv", "hhh")


def verify_coupling(
    c: CouplingChart,
    points: np.ndarray | None = None,
    n: int = 64,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> Report:
    """Closedness of Theta, ``d_Theta Omega = 0`` by argument class, nondegeneracy.

    The twisted closedness is checked once on coefficients and once per
    horizontal/vertical argument pattern so a failure points at the violated
    hypothesis (momentum identity, curvature mismatch, invariance).
    Restriction rows certify Theta and Omega restrict to the fiber data and
    that horizontal lifts are Omega-orthogonal to verticals.
    """
    pts = c.total.sample(n, seed) if points is None else np.asarray(points, dtype=float)
    rep = Report("verify_coupling")
    rep.add(residual_check("theta-closed", "d Theta = 0", exterior_derivative(c.Theta), None, pts, tol))

    closed3 = twisted_derivative(c.Theta, c.Omega)
    rep.add(residual_check("closed[coeffs]", "d_Theta Omega = 0 (all coefficients)", closed3, None, pts, tol))

    rng = np.random.default_rng(seed + 0x517CC1B7)
    for pattern in _PATTERNS:
        worst = 0.0
        for p in pts:
            vecs = _argument_vectors(c, pattern, p, rng)
            worst = max(worst, abs(eval_form(closed3, p, vecs, check_domain=False)))
        rep.add(
            CheckResult.from_residual(
                f"closed[{pattern}]", "d_Theta Omega = 0 on this argument class", worst, tol, points=len(pts)
            )
        )

    m = c.base_dim
    vertical_pairs = {I: f for I, f in c.Omega.coeffs.items() if I[0] >= m}
    fiber_embedded = embed_fiber_form(c.total, c.base, c.fiber.omega)
    rep.add(
        residual_check(
            "fiber-block",
            "Omega on verticals equals the fiber 2-form",
            DifferentialForm(c.total, 2, vertical_pairs),
            fiber_embedded,
            pts,
            tol,
        )
    )
    rep.add(
        residual_check(
            "theta-fiber",
            "Theta restricts to the fiber Lee form",
            c.Theta,
            embed_fiber_form(c.total, c.base, c.fiber.lee),
            pts,
            tol,
        )
    )

    worst_theta_h = 0.0
    worst_hv = 0.0
    for p in pts:
        h1, h2 = _argument_vectors(c, "hh", p, rng)
        (v1,) = _argument_vectors(c, "v", p, rng)
        worst_theta_h = max(worst_theta_h, abs(eval_form(c.Theta, p, [h1], check_domain=False)))
        worst_hv = max(worst_hv, abs(eval_form(c.Omega, p, [h1, v1], check_domain=False)))
    rep.add(
        CheckResult.from_residual(
            "theta-horizontal", "Theta annihilates horizontal lifts", worst_theta_h, tol, points=len(pts)
        )
    )
    rep.add(
        CheckResult.from_residual(
            "hor-vert", "Omega(horizontal lift, vertical) = 0", worst_hv, tol, points=len(pts)
        )
    )
    rep.add(_nondegeneracy_check(c.Omega, pts, tol))
    return rep


def lift_bracket_diagnostic(
    c: CouplingChart,
    points: np.ndarray | None = None,
    n: int = 16,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    pairs: int = 3,
) -> Report:
    """The hor-hor-vert mechanism behind closedness, as a standalone identity.

    For lifted fields X*, Y* and a vertical Z:
    ``-d_Theta(Omega(Y*, X*))(Z) + (d_Theta Omega)(Y*, X*, Z) = Omega([X*, Y*], Z)``.
    This holds for any 2-form orthogonal between lifts and verticals whose
    Lee form kills horizontals, so it is a diagnostic of the *shape* of the
    data rather than of closedness itself.
    """
    pts = c.total.sample(n, seed) if points is None else np.asarray(points, dtype=float)
    rng = np.random.default_rng(seed + 0x2545F491)
    m, k = c.base_dim, c.fiber.chart.dim
    closed3 = twisted_derivative(c.Theta, c.Omega)
    rep = Report("lift_bracket_diagnostic")
    worst = 0.0
    for _ in range(pairs):
        X = VectorField(c.base, list(_unit_rows(rng, 1, m)[0]))
        Y = VectorField(c.base, list(_unit_rows(rng, 1, m)[0]))
        Z = c.vertical_field(VectorField(c.fiber.chart, list(_unit_rows(rng, 1, k)[0])))
        Xs, Ys = c.lift(X), c.lift(Y)
        pairing = contract(c.Omega, Ys, Xs)
        term1 = contract(twisted_derivative(c.Theta, DifferentialForm.from_scalar(pairing)), Z)
        term2 = contract(closed3, Ys, Xs, Z)
        rhs = contract(c.Omega, lie_bracket(Xs, Ys), Z)
        for p in pts:
            q = [float(v) for v in p]
            worst = max(worst, abs(-term1(q) + term2(q) - rhs(q)))
    rep.add(
        CheckResult.from_residual(
            "lift-bracket",
            "-d_Theta(Omega(Y,X))(Z) + d_Theta Omega(Y,X,Z) = Omega([X,Y],Z)",
            worst,
            tol,
            points=len(pts),
            pairs=pairs,
        )
    )
    return rep


# --------------------------------------------------------------------------
# fatness


def fatness_check(
    g: GaugeChart,
    mu: MomentumMap,
    fiber_points: np.ndarray,
    base_points: np.ndarray | None = None,
    n: int = 64,
    seed: int = 0,
    threshold: float = 1e-4,
) -> Report:
    """Minimum ``|det sum_a mu_a(x) F^a_u|`` over sampled (base, fiber) pairs.

    A determinant bounded away from zero on the sampled region is the chart
    statement of fatness along the momentum image: the curvature pairing
    stays nondegenerate, which is what feeds horizontal nondegeneracy of the
    coupling form.
    """
    m = g.base.dim
    rep = Report("fatness_check")
    if m % 2 == 1:
        rep.add(
            CheckResult(
                "fat",
                "curvature-momentum pairing nondegenerate",
                residual=0.0,
                threshold=threshold,
                passed=False,
                details={"note": "odd base dimension: skew determinants vanish identically"},
            )
        )
        return rep
    bpts = g.base.sample(n, seed) if base_points is None else np.asarray(base_points, dtype=float)
    fpts = np.asarray(fiber_points, dtype=float)
    F, _ = gauge_curvature(g, n=4, seed=seed)
    Fmats = np.array([[Fa.coeff_matrix(u) for u in bpts] for Fa in F])  # (d, nb, m, m)
    muvals = np.array([np.asarray(comp.batch(fpts), dtype=float) for comp in mu.components])  # (d, nf)
    if Fmats.size == 0:
        rep.add(
            CheckResult(
                "fat",
                "curvature-momentum pairing nondegenerate",
                residual=0.0,
                threshold=threshold,
                passed=False,
                details={"note": "no gauge potentials"},
            )
        )
        return rep
    stack = np.einsum("af,abij->fbij", muvals, Fmats)  # (nf, nb, m, m)
    dets = np.abs(np.linalg.det(stack))
    worst = float(dets.min())
    fi, bi = np.unravel_index(int(dets.argmin()), dets.shape)
    rep.add(
        CheckResult(
            "fat",
            "min |det(mu . F)| over sampled pairs",
            residual=worst,
            threshold=threshold,
            passed=bool(worst > threshold),
            details={
                "min_det": worst,
                "base_point": [float(v) for v in bpts[bi]],
                "fiber_point": [float(v) for v in fpts[fi]],
                "pairs": int(dets.size),
            },
        )
    )
    return rep


# --------------------------------------------------------------------------
# almost complex structures


class EndomorphismField:
    """A pointwise linear map of the tangent space, entries as scalar fields."""

    __slots__ = ("chart", "entries")

    def __init__(self, chart: Chart, entries: Sequence[Sequence]):
        n = chart.dim
        rows = []
        if len(entries) != n:
            raise UsageError(f"endomorphism on {chart.name!r} needs {n} rows")
        for row in entries:
            if len(row) != n:
                raise UsageError(f"endomorphism on {chart.name!r} needs {n} columns per row")
            cooked = []
            for e in row:
                if isinstance(e, ScalarField):
                    check_same_chart(chart, e.chart, "endomorphism entries")
                    cooked.append(e)
                else:
                    cooked.append(constant(chart, float(e)))
            rows.append(tuple(cooked))
        self.chart = chart
        self.entries = tuple(rows)

    @staticmethod
    def from_matrix(chart: Chart, M: np.ndarray) -> "EndomorphismField":
        return EndomorphismField(chart, [[float(v) for v in row] for row in np.asarray(M)])

    def at(self, point) -> np.ndarray:
        p = [float(v) for v in point]
        return np.array([[e.at(p) for e in row] for row in self.entries])

    def apply(self, X: VectorField) -> VectorField:
        check_same_chart(self.chart, X.chart, "endomorphism argument")
        comps = []
        for row in self.entries:
            acc = constant(self.chart, 0.0)
            for e, xc in zip(row, X.components):
                acc = acc + e * xc
            comps.append(acc)
        return VectorField(self.chart, comps)


def rotation_structure(chart: Chart) -> EndomorphismField:
    """Block rotation sending each (x, y) coordinate pair to (-y, x) directions."""
    n = chart.dim
    if n % 2 == 1:
        raise UsageError("a rotation structure needs an even-dimensional chart")
    M = np.zeros((n, n))
    for i in range(0, n, 2):
        M[i + 1, i] = 1.0
        M[i, i + 1] = -1.0
    return EndomorphismField.from_matrix(chart, M)


def _check_square(J: EndomorphismField, p, tol: float) -> None:
    Jp = J.at(p)
    defect = np.abs(Jp @ Jp + np.eye(len(Jp))).max()
    if defect > tol:
        raise InvalidStructureError(
            f"endomorphism does not square to -id at {list(map(float, p))!r} (defect {defect:.3e})"
        )


def nijenhuis(
    J: EndomorphismField, X: VectorField, Y: VectorField, p, tol: float = 1e-6
) -> np.ndarray:
    """``N_J(X,Y) = [X,Y] - [JX,JY] + J[JX,Y] + J[X,JY]`` evaluated at p."""
    check_same_chart(J.chart, X.chart, "Nijenhuis arguments")
    check_same_chart(J.chart, Y.chart, "Nijenhuis arguments")
    _check_square(J, p, tol)
    Jp = J.at(p)
    JX, JY = J.apply(X), J.apply(Y)
    t1 = lie_bracket(X, Y).at(p)
    t2 = lie_bracket(JX, JY).at(p)
    t3 = Jp @ lie_bracket(JX, Y).at(p)
    t4 = Jp @ lie_bracket(X, JY).at(p)
    return t1 - t2 + t3 + t4


def nijenhuis_tensoriality(
    J: EndomorphismField, X: VectorField, Y: VectorField, p, seed: int = 0
) -> float:
    """Max deviation between N_J on (X, Y) and on perturbed extensions.

    The perturbations vanish at p but have random first derivatives, so
    agreement certifies the value depends only on the tangent vectors there.
    """
    from .forms import coordinate

    rng = np.random.default_rng(seed)
    base_val = nijenhuis(J, X, Y, p)
    chart = J.chart
    offsets = [coordinate(chart, i) - float(p[i]) for i in range(chart.dim)]

    def perturb(Z: VectorField) -> VectorField:
        B = rng.standard_normal((chart.dim, chart.dim))
        comps = []
        for i, comp in enumerate(Z.components):
            extra = constant(chart, 0.0)
            for j in range(chart.dim):
                extra = extra + float(B[i, j]) * offsets[j]
            comps.append(comp + extra)
        return VectorField(chart, comps)

    val = nijenhuis(J, perturb(X), perturb(Y), p)
    return float(np.abs(val - base_val).max())


def coupled_complex_structure(
    c: CouplingChart, J_base: EndomorphismField, J_fiber: EndomorphismField
) -> EndomorphismField:
    """The block structure sending lifts to lifts and verticals to verticals.

    ``J~ X* = (J_base X)*`` and ``J~ (0,V) = (0, J_fiber V)``; in coordinates
    the fiber-base block compensates for the gauge potential:
    ``-A^a(J1 e_j) rho_a + A^a_j J_fiber rho_a``.
    """
    check_same_chart(c.base, J_base.chart, "base structure")
    check_same_chart(c.fiber.chart, J_fiber.chart, "fiber structure")
    total, base = c.total, c.base
    m, k = c.base_dim, c.fiber.chart.dim
    zero = constant(total, 0.0)
    entries = [[zero for _ in range(m + k)] for _ in range(m + k)]
    for i in range(m):
        for j in range(m):
            entries[i][j] = embed_base_field(total, base, J_base.entries[i][j])
    for i in range(k):
        for j in range(k):
            entries[m + i][m + j] = embed_fiber_field(total, base, J_fiber.entries[i][j])
    for a in range(c.gauge.dim):
        A = c.gauge.potentials[a]
        rho = c.action.fields[a]
        J_rho = J_fiber.apply(rho)
        for j in range(m):
            # A^a(J1 e_j) as a base field
            aj1 = constant(base, 0.0)
            for i in range(m):
                aj1 = aj1 + A.coefficient((i,)) * J_base.entries[i][j]
            aj1_hat = embed_base_field(total, base, aj1)
            aj_hat = embed_base_field(total, base, A.coefficient((j,)))
            for i in range(k):
                entries[m + i][j] = (
                    entries[m + i][j]
                    - aj1_hat * embed_fiber_field(total, base, rho.components[i])
                    + aj_hat * embed_fiber_field(total, base, J_rho.components[i])
                )
    return EndomorphismField(total, entries)


def conjugate_structure(psi: SmoothMap, J_target: EndomorphismField) -> EndomorphismField:
    """Pull an endomorphism back through a diffeomorphism chart map.

    ``J_source = (d psi)^-1 J_target(psi(p)) (d psi)`` with the inverse taken
    via adjugate/determinant so the entries stay differentiable closures.
    """
    check_same_chart(psi.target, J_target.chart, "conjugation target")
    src = psi.source
    n = src.dim
    if psi.target.dim != n:
        raise UsageError("conjugation needs a diffeomorphism between equal dimensions")
    comps = psi.components
    J_entries = J_target.entries

    def entry(i: int, j: int) -> ScalarField:
        def fn(p, _i=i, _j=j):
            jac = [[dual.partial(comps[r].fn, p, s) for s in range(n)] for r in range(n)]
            img = [comp.fn(p) for comp in comps]
            Jt = [[J_entries[r][s].fn(img) for s in range(n)] for r in range(n)]
            JJ = _matmul(Jt, jac)
            adj = _adjugate(jac)
            det = det_generic(jac)
            total = 0.0
            for s in range(n):
                total = total + adj[_i][s] * JJ[s][_j]
            return total / det

        return ScalarField(src, fn)

    return EndomorphismField(src, [[entry(i, j) for j in range(n)] for i in range(n)])


def _matmul(A, B):
    n, mid, m2 = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m2):
            acc = 0.0
            for s in range(mid):
                acc = acc + A[i][s] * B[s][j]
            row.append(acc)
        out.append(row)
    return out


def _adjugate(M):
    n = len(M)
    if n == 1:
        return [[1.0]]
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for r, row in enumerate(M) if r != i]
            out[j][i] = (-1.0) ** (i + j) * det_generic(minor)
    return out


def horizontal_nijenhuis_identity(
    c: CouplingChart,
    J_base: EndomorphismField,
    J_fiber: EndomorphismField,
    points: np.ndarray | None = None,
    n: int = 8,
    seed: int = 0,
    tol: float = 1e-7,
    pairs: int = 2,
) -> Report:
    """Purely horizontal Nijenhuis values against the curvature expression.

    With ``R(X,Y) = -F^a(X,Y) rho_a`` (the vertical part of ``[X*,Y*]``):
    ``N(X*,Y*) = J_f(R(J1 X, Y) + R(X, J1 Y)) + R(X,Y) - R(J1 X, J1 Y)``,
    valid whenever the base structure is integrable.  Also records whether
    Omega is invariant under J~ (the "type (1,1)" probe) without asserting it.
    """
    pts = c.total.sample(n, seed) if points is None else np.asarray(points, dtype=float)
    rng = np.random.default_rng(seed + 0x9E3779B9)
    m, k = c.base_dim, c.fiber.chart.dim
    Jt = coupled_complex_structure(c, J_base, J_fiber)
    rep = Report("horizontal_nijenhuis")

    worst = 0.0
    for _ in range(pairs):
        Xv, Yv = _unit_rows(rng, 2, m)
        X = VectorField(c.base, list(Xv))
        Y = VectorField(c.base, list(Yv))
        Xs, Ys = c.lift(X), c.lift(Y)
        for p in pts:
            u, x = p[:m], p[m:]
            lhs = nijenhuis(Jt, Xs, Ys, p)
            J1u = J_base.at(u)
            Jfx = J_fiber.at(x)
            rho_vals = np.array([rho.at(x) for rho in c.action.fields])  # (d, k)
            Fm = np.array([Fa.coeff_matrix(u) for Fa in c.curvature])  # (d, m, m)

            def R(U, V):
                return -np.einsum("a,ak->k", np.einsum("i,aij,j->a", U, Fm, V), rho_vals)

            vert = Jfx @ (R(J1u @ Xv, Yv) + R(Xv, J1u @ Yv)) + R(Xv, Yv) - R(J1u @ Xv, J1u @ Yv)
            rhs = np.concatenate([np.zeros(m), vert])
            worst = max(worst, float(np.abs(lhs - rhs).max()))
    rep.add(
        CheckResult.from_residual(
            "horizontal-identity",
            "N(X*, Y*) equals the curvature expression",
            worst,
            tol,
            points=len(pts),
            pairs=pairs,
        )
    )

    probe = 0.0
    for p in pts:
        Jp = Jt.at(p)
        for _ in range(2):
            U, V = _unit_rows(rng, 2, m + k)
            probe = max(
                probe,
                abs(
                    eval_form(c.Omega, p, [Jp @ U, Jp @ V], check_domain=False)
                    - eval_form(c.Omega, p, [U, V], check_domain=False)
                ),
            )
    rep.add(CheckResult.recorded("type-11", "Omega(J~ ., J~ .) = Omega at samples", probe))
    return rep
