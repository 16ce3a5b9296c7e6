"""Finite-difference functional equation with a degree-closing correction term.

For each transfer eigenvalue there is a product function Q with one root per
half unit of spin, satisfying

    t(lam) Q(lam) = -exp(lam - alpha) a(lam) Q(lam - eta)
                    + exp(-lam - eta + alpha) d(lam) Q(lam + eta)
                    + correction(lam),

where the correction vanishes at every site rung, so that evaluated on the
rungs the equation collapses to the same three-term ladder recursion that
characterizes the spectrum.  The correction's remaining free root is pinned
by the requirement that the extreme exponential coefficients of the right
hand side cancel; it ends up depending only on alpha plus the root sum of Q.

The solver runs the logic backwards: the ladder null vectors determine Q at
every rung up to one unknown per site, interpolation closure at the bottom
rungs gives a square linear system, and the solved values interpolate to the
product function after a monic rescale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ExceptionalAlpha, NonAdmissible, PoleAtXi
from .qalgebra import ChainModel, a_of, d_of, distance_to_ipi_lattice, xi_shifted
from .sovbasis import SOVBasis
from .spectrum import (
    EigenvalueFunction,
    companion_rescale,
    ladder_nullspace,
    left_eigenstate,
    right_eigenstate,
)
from .trigpoly import TrigPoly

__all__ = [
    "QFunctionInhom",
    "f_inhom",
    "f_inhom_poly",
    "solve_q_inhom",
    "solve_q_inhom_with_retries",
    "draw_zeta0",
    "system_matrix",
    "det_m_polynomial",
    "det_m_zero_closed_form",
    "leading_det_coefficient",
    "inhom_grid_residual",
    "t_from_q_inhom",
    "bethe_residuals_inhom",
    "q_coordinates_inhom",
    "eigenstates_from_q_inhom",
    "z_combination",
    "degree_drop_residual",
    "homogeneous_rank_check",
    "root_multiset_distance",
    "grid_points",
]


@dataclass(frozen=True)
class QFunctionInhom:
    """Monic product function sinh(lam - root_1)...sinh(lam - root_Ns)."""

    model: ChainModel
    alpha: complex
    zeta0: complex
    roots: tuple
    lambda_bar: complex
    poly: TrigPoly
    top_values: tuple

    def value(self, lam):
        """Evaluate the product over the stored roots directly."""
        lam = np.asarray(lam, dtype=complex)
        out = np.ones(lam.shape, dtype=complex)
        for r in self.roots:
            out = out * np.sinh(lam - r)
        return out if lam.shape else complex(out)


# ----------------------------------------------------------------------
# the correction term


def _all_rungs(model: ChainModel):
    return [
        xi_shifted(model, n, h)
        for n in range(1, model.n_sites + 1)
        for h in range(model.two_s[n - 1] + 1)
    ]


def _lower_rung_sum(model: ChainModel) -> complex:
    return sum(
        xi_shifted(model, n, h)
        for n in range(1, model.n_sites + 1)
        for h in range(1, model.two_s[n - 1] + 1)
    )


def _correction_root(model: ChainModel, x: complex) -> complex:
    return x - _lower_rung_sum(model) - (model.n_s + 1) * model.eta / 2.0


def f_inhom(model: ChainModel, x: complex, lam):
    """Pointwise value of the correction term with shift parameter x.

    The product factor kills the value at every rung, and the extra root is
    placed so that the extreme exponential coefficients of the functional
    equation cancel.
    """
    lam = np.asarray(lam, dtype=complex)
    out = np.full(
        lam.shape, 2.0 * np.exp(-(model.n_s + 1) * model.eta / 2.0)
    )
    out = out * np.sinh(lam - _correction_root(model, x))
    for rung in _all_rungs(model):
        out = out * np.sinh(lam - rung)
    return out if lam.shape else complex(out)


def f_inhom_poly(model: ChainModel, x: complex) -> TrigPoly:
    """The correction term as an element of the graded family."""
    return TrigPoly.from_roots(
        [_correction_root(model, x)] + _all_rungs(model),
        prefactor=2.0 * np.exp(-(model.n_s + 1) * model.eta / 2.0),
    )


# ----------------------------------------------------------------------
# the discretized linear system


def _upper_rung_index(model: ChainModel):
    """Site-major (site, h) pairs for the rungs that serve as nodes."""
    return [
        (n, h)
        for n in range(1, model.n_sites + 1)
        for h in range(model.two_s[n - 1])
    ]


def _dressed_null_vectors(model: ChainModel, eigfun):
    """Ladder null vectors divided by the running exponential prefactors."""
    qs, _, _ = ladder_nullspace(model, eigfun)
    xs = []
    for site, q in enumerate(qs, start=1):
        acc = np.zeros(len(q), dtype=complex)
        running = 1.0 + 0.0j
        acc[0] = q[0]
        for h in range(1, len(q)):
            running *= np.exp(xi_shifted(model, site, h - 1))
            acc[h] = q[h] / running
        xs.append(acc)
    return xs


def _cardinal(nodes, k, lam):
    acc = 1.0 + 0.0j
    for l, node in enumerate(nodes):
        if l != k:
            acc *= np.sinh(lam - node) / np.sinh(nodes[k] - node)
    return acc


def draw_zeta0(model: ChainModel, rng) -> complex:
    """Random auxiliary node kept away from every rung modulo the period."""
    rungs = _all_rungs(model)
    for _ in range(1000):
        z = complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
        if all(distance_to_ipi_lattice(z - r) > 1e-2 for r in rungs):
            return z
    raise ExceptionalAlpha("could not place the auxiliary node")


def system_matrix(model: ChainModel, eigfun, beta: complex, zeta0: complex):
    """Closure conditions at the bottom rungs as a square system.

    Unknowns are the values of Q at the top rungs; the right-hand side
    carries the normalization Q(zeta0) = 1.
    """
    xs = _dressed_null_vectors(model, eigfun)
    pairs = _upper_rung_index(model)
    nodes = [zeta0] + [xi_shifted(model, n, h) for n, h in pairs]
    n_sites = model.n_sites
    mat = np.zeros((n_sites, n_sites), dtype=complex)
    rhs = np.zeros(n_sites, dtype=complex)
    for i in range(1, n_sites + 1):
        bottom = xi_shifted(model, i, model.two_s[i - 1])
        mat[i - 1, i - 1] = beta ** model.two_s[i - 1] * xs[i - 1][-1]
        for k, (j, h) in enumerate(pairs, start=1):
            mat[i - 1, j - 1] -= (
                beta**h * _cardinal(nodes, k, bottom) * xs[j - 1][h]
            )
        rhs[i - 1] = _cardinal(nodes, 0, bottom)
    return mat, rhs


def det_m_polynomial(model: ChainModel, eigfun, zeta0: complex) -> np.ndarray:
    """Ascending coefficients of the system determinant in beta.

    The determinant is a polynomial of degree equal to the number of roots;
    it is sampled on the unit circle and fitted exactly.
    """
    n_s = model.n_s
    betas = np.exp(2j * np.pi * np.arange(n_s + 1) / (n_s + 1))
    dets = np.array(
        [
            np.linalg.det(system_matrix(model, eigfun, b, zeta0)[0])
            for b in betas
        ]
    )
    vand = betas[:, None] ** np.arange(n_s + 1)[None, :]
    return np.linalg.solve(vand, dets)


def leading_det_coefficient(model: ChainModel, eigfun) -> complex:
    """Product of the dressed null-vector components at the bottom rungs."""
    xs = _dressed_null_vectors(model, eigfun)
    return complex(np.prod([x[-1] for x in xs]))


def det_m_zero_closed_form(model: ChainModel, zeta0: complex) -> complex:
    """The system determinant at beta = 0, as an explicit product.

    At beta = 0 only the top-rung cardinal survives in each entry, which
    turns the matrix into a scaled Cauchy matrix in the bottom and top rung
    positions; the determinant then factorizes completely.
    """
    pairs = _upper_rung_index(model)
    nodes = [zeta0] + [xi_shifted(model, n, h) for n, h in pairs]
    n_sites = model.n_sites
    tops = [xi_shifted(model, n, 0) for n in range(1, n_sites + 1)]
    bottoms = [
        xi_shifted(model, n, model.two_s[n - 1])
        for n in range(1, n_sites + 1)
    ]
    top_slots = [1 + pairs.index((n, 0)) for n in range(1, n_sites + 1)]
    acc = (-1.0 + 0.0j) ** n_sites
    for a in range(n_sites):
        for b in range(a + 1, n_sites):
            acc *= np.sinh(bottoms[a] - bottoms[b]) * np.sinh(
                tops[b] - tops[a]
            )
        for b in range(n_sites):
            acc /= np.sinh(bottoms[a] - tops[b])
    for n in range(n_sites):
        for k, node in enumerate(nodes):
            acc *= np.sinh(bottoms[n] - node)
            if k != top_slots[n]:
                acc /= np.sinh(tops[n] - node)
    return complex(acc)


# ----------------------------------------------------------------------
# solving


def _require_admissible(top_values) -> None:
    top_values = np.asarray(top_values)
    if np.min(np.abs(top_values)) < 1e-10 * max(
        1.0, float(np.max(np.abs(top_values)))
    ):
        raise NonAdmissible("a top-rung value of Q vanished")


def solve_q_inhom(
    model: ChainModel, eigfun, alpha: complex, zeta0: complex
) -> QFunctionInhom:
    """Solve the closure system at one deformation value and extract roots."""
    beta = np.exp(complex(alpha))
    mat, rhs = system_matrix(model, eigfun, beta, zeta0)
    sing = np.linalg.svd(mat, compute_uv=False)
    if sing[-1] <= 1e-10 * max(1.0, float(sing[0])):
        raise ExceptionalAlpha(
            f"closure system singular at exp(alpha) = {beta:.6g}"
        )
    y = np.linalg.solve(mat, rhs)
    _require_admissible(y)

    xs = _dressed_null_vectors(model, eigfun)
    pairs = _upper_rung_index(model)
    nodes = [zeta0] + [xi_shifted(model, n, h) for n, h in pairs]
    values = [1.0 + 0.0j] + [
        beta**h * xs[j - 1][h] * y[j - 1] for j, h in pairs
    ]
    raw = TrigPoly.from_values(nodes, values, m=0)
    c_p, roots = raw.roots()
    poly = raw * (1.0 / c_p)
    return QFunctionInhom(
        model=model,
        alpha=complex(alpha),
        zeta0=complex(zeta0),
        roots=tuple(roots),
        lambda_bar=complex(np.sum(roots)),
        poly=poly,
        top_values=tuple(np.asarray(y) / c_p),
    )


def solve_q_inhom_with_retries(
    model: ChainModel,
    eigfun,
    zeta0: complex | None = None,
    alpha: complex = 0.0,
    seed: int = 0,
    max_retries: int = 3,
):
    """Solve with the default deformation, redrawing it when it lands on an
    exceptional value.  Returns (solution, number of retries used)."""
    rng = np.random.default_rng(seed)
    if zeta0 is None:
        zeta0 = draw_zeta0(model, rng)
    for attempt in range(max_retries + 1):
        try:
            return solve_q_inhom(model, eigfun, alpha, zeta0), attempt
        except ExceptionalAlpha:
            if attempt == max_retries:
                raise
            alpha = complex(
                rng.uniform(-np.log(2.0), np.log(2.0)),
                rng.uniform(0.0, 2.0 * np.pi),
            )
    raise AssertionError("unreachable")


# ----------------------------------------------------------------------
# verification


def grid_points(count: int = 40, seed: int = 17) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.5, 1.5, count) + 1j * rng.uniform(-1.2, 1.2, count)


def inhom_grid_residual(
    model: ChainModel, eigfun, sol: QFunctionInhom, count: int = 40,
    seed: int = 17,
) -> float:
    """Worst relative defect of the functional equation on a random grid.

    All four terms are evaluated pointwise from first principles (products
    over roots and rungs), independently of the coefficient arithmetic used
    by the solver.
    """
    worst = 0.0
    x = sol.alpha + sol.lambda_bar
    for lam in grid_points(count, seed):
        lhs = eigfun(complex(lam)) * sol.value(lam)
        term_a = (
            -np.exp(lam - sol.alpha)
            * a_of(model, lam)
            * sol.value(lam - model.eta)
        )
        term_d = (
            np.exp(-lam - model.eta + sol.alpha)
            * d_of(model, lam)
            * sol.value(lam + model.eta)
        )
        term_f = f_inhom(model, x, lam)
        scale = max(abs(lhs), abs(term_a), abs(term_d), abs(term_f))
        worst = max(worst, abs(lhs - term_a - term_d - term_f) / scale)
    return worst


def t_from_q_inhom(model: ChainModel, sol: QFunctionInhom):
    """Reconstruct the eigenvalue function from Q alone.

    Evaluates the functional equation at the base points and divides by the
    value of Q there; also returns the per-root residuals that certify the
    reconstructed function is pole-free.
    """
    for n, xi in enumerate(model.xi, start=1):
        for r in sol.roots:
            if distance_to_ipi_lattice(r - xi) < 1e-8:
                raise PoleAtXi(
                    f"root {r:.6g} sits on base point {n} modulo the period"
                )
    x = sol.alpha + sol.lambda_bar
    base = []
    for xi in model.xi:
        rhs = (
            -np.exp(xi - sol.alpha)
            * a_of(model, xi)
            * sol.value(xi - model.eta)
            + np.exp(-xi - model.eta + sol.alpha)
            * d_of(model, xi)
            * sol.value(xi + model.eta)
            + f_inhom(model, x, xi)
        )
        base.append(rhs / sol.value(xi))
    return EigenvalueFunction(model, tuple(base)), bethe_residuals_inhom(
        model, sol
    )


def bethe_residuals_inhom(model: ChainModel, sol: QFunctionInhom) -> np.ndarray:
    """Pole-cancellation defect at each root, scaled by the largest term.

    At a root of Q the left side of the functional equation vanishes, so the
    three right-hand terms must cancel; their sum is the pole numerator.
    """
    x = sol.alpha + sol.lambda_bar
    out = np.zeros(len(sol.roots))
    for j, lam in enumerate(sol.roots):
        term_a = (
            -np.exp(lam - sol.alpha)
            * a_of(model, lam)
            * sol.value(lam - model.eta)
        )
        term_d = (
            np.exp(-lam - model.eta + sol.alpha)
            * d_of(model, lam)
            * sol.value(lam + model.eta)
        )
        term_f = f_inhom(model, x, lam)
        scale = max(abs(term_a), abs(term_d), abs(term_f), 1e-300)
        out[j] = abs(term_a + term_d + term_f) / scale
    return out


# ----------------------------------------------------------------------
# eigenstate coordinates


def q_coordinates_inhom(model: ChainModel, sol: QFunctionInhom):
    """Values of the Gaussian-dressed Q at every rung, one array per site.

    The Gaussian factor exp(-lam(lam + eta - 2 alpha)/(2 eta)) converts the
    deformation-dependent rung ratios of Q into the bare ladder null-vector
    components.  It is applied pointwise only; it is not periodic and has no
    place inside the trigonometric-polynomial type.
    """
    coords = []
    for n in range(1, model.n_sites + 1):
        arr = np.zeros(model.two_s[n - 1] + 1, dtype=complex)
        for h in range(model.two_s[n - 1] + 1):
            lam = xi_shifted(model, n, h)
            gauss = np.exp(
                -lam * (lam + model.eta - 2.0 * sol.alpha) / (2.0 * model.eta)
            )
            arr[h] = gauss * sol.value(lam)
        coords.append(arr)
    return coords


def eigenstates_from_q_inhom(
    model: ChainModel, sol: QFunctionInhom, basis: SOVBasis
):
    """Left and right eigenstates assembled from the dressed Q values."""
    coords = q_coordinates_inhom(model, sol)
    return (
        left_eigenstate(model, basis, coords),
        right_eigenstate(model, basis, companion_rescale(model, coords)),
    )


# ----------------------------------------------------------------------
# structural checks on the functional equation


def z_combination(model: ChainModel, sol: QFunctionInhom) -> TrigPoly:
    """Right-hand side of the functional equation as one graded element."""
    eta = model.eta
    alpha = sol.alpha
    a_poly = TrigPoly.from_roots(
        [model.xi[n] - model.two_s[n] * eta / 2.0 for n in range(model.n_sites)]
    )
    d_poly = TrigPoly.from_roots(
        [model.xi[n] + model.two_s[n] * eta / 2.0 for n in range(model.n_sites)]
    )
    term_a = (
        TrigPoly.exponential(1, coefficient=-np.exp(-alpha))
        * a_poly
        * sol.poly.shift(-eta)
    )
    term_d = (
        TrigPoly.exponential(-1, coefficient=np.exp(-eta + alpha))
        * d_poly
        * sol.poly.shift(eta)
    )
    term_f = f_inhom_poly(model, alpha + sol.lambda_bar)
    return term_a + term_d + term_f


def degree_drop_residual(model: ChainModel, sol: QFunctionInhom) -> float:
    """Relative size of the extreme exponential coefficients of the combined
    right-hand side, which must cancel for the equation to close."""
    z = z_combination(model, sol)
    expected_m1 = model.n_sites + model.n_s + 1
    if z.m1 != expected_m1 or z.m2 != expected_m1:
        raise AssertionError(
            f"combination landed in an unexpected class ({z.m1}, {z.m2})"
        )
    scale = z.max_abs_coeff()
    return max(abs(z.coeffs[0]), abs(z.coeffs[-1])) / scale


def homogeneous_rank_check(
    model: ChainModel, eigfun, alpha: complex, zeta0: complex
) -> float:
    """Smallest-to-largest singular value ratio of the homogeneous closure.

    Dropping the correction term forces the extreme coefficients of Q itself
    to vanish on top of the bottom-rung closure rows.  Stacking those
    functionals over the closure system gives a tall matrix whose full
    column rank certifies that the correction-free equation has only the
    zero solution.
    """
    beta = np.exp(complex(alpha))
    xs = _dressed_null_vectors(model, eigfun)
    pairs = _upper_rung_index(model)
    nodes = [zeta0] + [xi_shifted(model, n, h) for n, h in pairs]
    n_sites = model.n_sites
    mat, rhs = system_matrix(model, eigfun, beta, zeta0)
    stacked = np.zeros((n_sites + 2, n_sites + 1), dtype=complex)
    stacked[:n_sites, 0] = -rhs
    stacked[:n_sites, 1:] = mat
    for col in range(n_sites + 1):
        unit = np.zeros(len(nodes), dtype=complex)
        if col == 0:
            unit[0] = 1.0
        else:
            for k, (j, h) in enumerate(pairs, start=1):
                if j == col:
                    unit[k] = beta**h * xs[j - 1][h]
        cardinal_poly = TrigPoly.from_values(nodes, unit, m=0)
        stacked[n_sites, col] = cardinal_poly.coeffs[0]
        stacked[n_sites + 1, col] = cardinal_poly.coeffs[-1]
    sing = np.linalg.svd(stacked, compute_uv=False)
    return float(sing[-1] / sing[0])


# ----------------------------------------------------------------------


def root_multiset_distance(first, second, period: complex = 1j * np.pi) -> float:
    """Greedy matching distance between two root multisets modulo a period."""
    first = list(first)
    second = list(second)
    if len(first) != len(second):
        return np.inf
    worst = 0.0
    for r in first:
        best_j = -1
        best = np.inf
        for j, s in enumerate(second):
            d = min(abs(r - s - k * period) for k in (-1, 0, 1))
            if d < best:
                best, best_j = d, j
        worst = max(worst, best)
        second.pop(best_j)
    return worst
