"""Construction of the separated basis and its closed-form operator actions.

The basis diagonalizes the lower-right monodromy block D: each state is
labeled by a tuple h = (h_1..h_N) with h_n in 0..2s_n picking one rung
xi_n^{(h_n)} of every site ladder.  Left covectors are generated from the
reference covector by C-operators, right vectors by B-operators; both pair
bilinearly (no complex conjugation anywhere).

The reference normalization constant uses the top rungs xi_n^{(0)}: the
pairing of the two reference states must equal the h = 0 case of the general
overlap formula, which fixes it to prod_{i<j} sinh(xi_j^{(0)} - xi_i^{(0)})
up to the (immaterial) branch of the square root.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningFailure
from .qalgebra import ChainModel, a_of, d_of, monodromy, xi_shifted

__all__ = [
    "SOVBasis",
    "all_h_tuples",
    "build_right_basis",
    "build_left_basis",
    "build_basis",
    "overlap",
    "expected_overlap",
    "weight",
    "identity_resolution",
    "d_eigenvalue",
    "d_action_residual",
    "c_action_residual",
    "b_action_residual",
    "a_action_residual",
]


def all_h_tuples(model: ChainModel):
    """All rung tuples in lexicographic order (last site fastest)."""
    return list(
        itertools.product(*(range(v + 1) for v in model.two_s))
    )


def _normalization(model: ChainModel) -> complex:
    acc = 1.0 + 0.0j
    tops = [xi_shifted(model, n, 0) for n in range(1, model.n_sites + 1)]
    for i in range(model.n_sites):
        for j in range(i + 1, model.n_sites):
            acc *= np.sqrt(np.sinh(tops[j] - tops[i]) + 0.0j)
    return complex(acc)


@dataclass(frozen=True)
class SOVBasis:
    """Separated basis data; either half may be absent."""

    model: ChainModel
    right_vectors: dict | None
    left_covectors: dict | None
    normalization: complex


def build_right_basis(model: ChainModel) -> SOVBasis:
    """Generate all right basis vectors from the reference state.

    Each step applies -B(xi_n^{(h_n - 1)}) / a(xi_n^{(h_n - 1)}) to the
    predecessor with one rung lower at site n.  B-operators at distinct
    arguments commute, so which site is incremented first does not matter.
    """
    norm_const = _normalization(model)
    dim = model.hilbert_dim
    ref = np.zeros(dim, dtype=complex)
    ref[0] = 1.0 / norm_const
    vectors: dict = {}
    for h in all_h_tuples(model):
        if all(v == 0 for v in h):
            vectors[h] = ref
            continue
        site = next(n for n, v in enumerate(h, start=1) if v > 0)
        prev = tuple(
            v - 1 if n == site else v for n, v in enumerate(h, start=1)
        )
        lam = xi_shifted(model, site, h[site - 1] - 1)
        _, b, _, _ = monodromy(model, lam)
        vectors[h] = -(b @ vectors[prev]) / a_of(model, lam)
    _check_norms(vectors)
    return SOVBasis(
        model=model,
        right_vectors=vectors,
        left_covectors=None,
        normalization=norm_const,
    )


def build_left_basis(model: ChainModel) -> SOVBasis:
    """Generate all left covectors from the reference covector.

    Each step applies C(xi_n^{(h_n - 1)}) / d(xi_n^{(h_n)}) on the right of
    the predecessor covector.
    """
    norm_const = _normalization(model)
    dim = model.hilbert_dim
    ref = np.zeros(dim, dtype=complex)
    ref[0] = 1.0 / norm_const
    covectors: dict = {}
    for h in all_h_tuples(model):
        if all(v == 0 for v in h):
            covectors[h] = ref
            continue
        site = next(n for n, v in enumerate(h, start=1) if v > 0)
        prev = tuple(
            v - 1 if n == site else v for n, v in enumerate(h, start=1)
        )
        lam = xi_shifted(model, site, h[site - 1] - 1)
        _, _, c, _ = monodromy(model, lam)
        covectors[h] = (covectors[prev] @ c) / d_of(
            model, xi_shifted(model, site, h[site - 1])
        )
    _check_norms(covectors)
    return SOVBasis(
        model=model,
        right_vectors=None,
        left_covectors=covectors,
        normalization=norm_const,
    )


def build_basis(model: ChainModel) -> SOVBasis:
    """Both halves of the separated basis."""
    right = build_right_basis(model)
    left = build_left_basis(model)
    return SOVBasis(
        model=model,
        right_vectors=right.right_vectors,
        left_covectors=left.left_covectors,
        normalization=right.normalization,
    )


def _check_norms(states: dict) -> None:
    norms = {h: float(np.linalg.norm(v)) for h, v in states.items()}
    biggest = max(norms.values())
    for h, n in norms.items():
        if n < 1e-12 * biggest:
            raise ConditioningFailure(
                f"basis state {h} collapsed to relative norm {n / biggest:.2e}"
            )


# ----------------------------------------------------------------------
# overlaps and completeness


def weight(model: ChainModel, h) -> complex:
    """The completeness weight prod_{i<j} sinh(xi_j^{(h_j)} - xi_i^{(h_i)})."""
    pts = [xi_shifted(model, n, h[n - 1]) for n in range(1, model.n_sites + 1)]
    acc = 1.0 + 0.0j
    for i in range(model.n_sites):
        for j in range(i + 1, model.n_sites):
            acc *= np.sinh(pts[j] - pts[i])
    return complex(acc)


def expected_overlap(model: ChainModel, h, k) -> complex:
    """The closed-form pairing: diagonal in h with inverse-weight value."""
    if tuple(h) != tuple(k):
        return 0.0
    return 1.0 / weight(model, h)


def overlap(basis: SOVBasis, h, k) -> complex:
    """Bilinear pairing of left covector h with right vector k."""
    return complex(
        np.dot(basis.left_covectors[tuple(h)], basis.right_vectors[tuple(k)])
    )


def identity_resolution(basis: SOVBasis) -> float:
    """Relative defect of the weighted completeness sum against identity."""
    model = basis.model
    dim = model.hilbert_dim
    acc = np.zeros((dim, dim), dtype=complex)
    for h in all_h_tuples(model):
        acc += weight(model, h) * np.outer(
            basis.right_vectors[h], basis.left_covectors[h]
        )
    return float(
        np.linalg.norm(acc - np.eye(dim)) / np.sqrt(dim)
    )


# ----------------------------------------------------------------------
# closed-form action residuals


def d_eigenvalue(model: ChainModel, h, lam) -> complex:
    """prod_n sinh(lam - xi_n^{(h_n)})."""
    lam = np.asarray(lam, dtype=complex)
    out = np.ones(lam.shape, dtype=complex)
    for n in range(1, model.n_sites + 1):
        out = out * np.sinh(lam - xi_shifted(model, n, h[n - 1]))
    return out if lam.shape else complex(out)


def _interp_coeff(model: ChainModel, h, a: int, lam: complex) -> complex:
    acc = 1.0 + 0.0j
    pivot = xi_shifted(model, a, h[a - 1])
    for b in range(1, model.n_sites + 1):
        if b == a:
            continue
        other = xi_shifted(model, b, h[b - 1])
        acc *= np.sinh(lam - other) / np.sinh(pivot - other)
    return acc


def _relative(defect: np.ndarray, op: np.ndarray, state: np.ndarray) -> float:
    scale = np.linalg.norm(op) * np.linalg.norm(state)
    return float(np.linalg.norm(defect) / max(scale, 1e-300))


def d_action_residual(basis: SOVBasis, h, lam: complex, side: str = "right") -> float:
    """Defect of the diagonal action of D on one basis state."""
    model = basis.model
    _, _, _, d = monodromy(model, lam)
    val = d_eigenvalue(model, h, lam)
    if side == "right":
        v = basis.right_vectors[tuple(h)]
        return _relative(d @ v - val * v, d, v)
    w = basis.left_covectors[tuple(h)]
    return _relative(w @ d - val * w, d, w)


def c_action_residual(basis: SOVBasis, h, lam: complex, side: str = "right") -> float:
    """Defect of the interpolation-sum action of C on one basis state."""
    model = basis.model
    h = tuple(h)
    _, _, c, _ = monodromy(model, lam)
    if side == "right":
        v = basis.right_vectors[h]
        total = np.zeros_like(v)
        for a in range(1, model.n_sites + 1):
            if h[a - 1] == 0:
                continue  # the ladder cannot go below its bottom rung
            lowered = tuple(
                v2 - 1 if n == a else v2 for n, v2 in enumerate(h, start=1)
            )
            total += (
                _interp_coeff(model, h, a, lam)
                * d_of(model, xi_shifted(model, a, h[a - 1]))
                * basis.right_vectors[lowered]
            )
        return _relative(c @ v - total, c, v)
    w = basis.left_covectors[h]
    total = np.zeros_like(w)
    for a in range(1, model.n_sites + 1):
        if h[a - 1] == model.two_s[a - 1]:
            continue
        raised = tuple(
            v2 + 1 if n == a else v2 for n, v2 in enumerate(h, start=1)
        )
        total += (
            _interp_coeff(model, h, a, lam)
            * d_of(model, xi_shifted(model, a, h[a - 1] + 1))
            * basis.left_covectors[raised]
        )
    return _relative(w @ c - total, c, w)


def b_action_residual(basis: SOVBasis, h, lam: complex, side: str = "right") -> float:
    """Defect of the interpolation-sum action of B on one basis state."""
    model = basis.model
    h = tuple(h)
    _, b, _, _ = monodromy(model, lam)
    if side == "right":
        v = basis.right_vectors[h]
        total = np.zeros_like(v)
        for a in range(1, model.n_sites + 1):
            if h[a - 1] == model.two_s[a - 1]:
                continue  # the a-coefficient vanishes at the top rung
            raised = tuple(
                v2 + 1 if n == a else v2 for n, v2 in enumerate(h, start=1)
            )
            total -= (
                _interp_coeff(model, h, a, lam)
                * a_of(model, xi_shifted(model, a, h[a - 1]))
                * basis.right_vectors[raised]
            )
        return _relative(b @ v - total, b, v)
    w = basis.left_covectors[h]
    total = np.zeros_like(w)
    for a in range(1, model.n_sites + 1):
        if h[a - 1] == 0:
            continue
        lowered = tuple(
            v2 - 1 if n == a else v2 for n, v2 in enumerate(h, start=1)
        )
        total -= (
            _interp_coeff(model, h, a, lam)
            * a_of(model, xi_shifted(model, a, h[a - 1] - 1))
            * basis.left_covectors[lowered]
        )
    return _relative(w @ b - total, b, w)


def a_action_residual(basis: SOVBasis, h, lam: complex) -> float:
    """Central-element consistency of the A-action on one right vector."""
    model = basis.model
    v = basis.right_vectors[tuple(h)]
    a1, b1, _, _ = monodromy(model, lam)
    _, _, c0, d0 = monodromy(model, lam - model.eta)
    lhs = a1 @ (d0 @ v) - b1 @ (c0 @ v)
    rhs = a_of(model, lam) * d_of(model, lam - model.eta) * v
    return _relative(lhs - rhs, a1, v)
