"""Observable statistics of single and compound modes.

Everything is derived from the normally ordered noise functions of a
:class:`~qcoupler.model.GaussianState`.  Intensity variances, intensity
correlations, and principal squeeze variances come from closed
expressions; photon-number distributions and integrated-intensity
moments come from the normally ordered generating function

    G(s) = <: exp(-s W) :>,     W = sum over selected modes of A^+ A,

evaluated in closed Gaussian form and differentiated with truncated
power series (jet) arithmetic:

    <W^k>  = (-1)^k G^(k)(0),        p(n) = (-1)^n G^(n)(1) / n!.

Quadrature conventions: p = A + A^+ and q = -i(A - A^+), so the vacuum
variance is 1 for a single mode.  Compound modes use the plain operator
sum A_j + A_k with vacuum variance 2, and squeezing means a principal
variance below 1 (single) or 2 (compound).  The uncertainty product is
the product of the smallest and largest principal variances (1 for a
coherent single mode, 4 for compound vacuum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError, ValidationError
from .model import GaussianState, ModeSelection

__all__ = [
    "ModeSelection",
    "StatsReport",
    "mean_intensity",
    "intensity_variance_single",
    "intensity_covariance",
    "intensity_variance_compound",
    "intensity_variance",
    "principal_squeeze",
    "quadrature_variances",
    "generating_function",
    "generating_function_jet",
    "moments_and_distribution",
    "stats_report",
]

_MIN_PIVOT = 1e-12  # singularity floor for (1 + s * eigenvalue)


def _as_selection(sel) -> ModeSelection:
    return sel if isinstance(sel, ModeSelection) else ModeSelection(tuple(sel))


def mean_intensity(state: GaussianState, sel) -> float:
    """<W> = sum of B_j + |xi_j|^2 over the selected modes."""
    idx = [int(m) for m in _as_selection(sel).modes]
    return float(np.sum(state.B[idx] + np.abs(state.xi[idx]) ** 2))


def intensity_variance_single(state: GaussianState, j) -> float:
    """<(dW_j)^2> of one mode."""
    j = int(j)
    b, c, xi = state.B[j], state.C[j], state.xi[j]
    return float(
        b * b + abs(c) ** 2 + 2.0 * b * abs(xi) ** 2
        + 2.0 * np.real(c * np.conj(xi) ** 2)
    )


def intensity_covariance(state: GaussianState, j, k) -> float:
    """<dW_j dW_k> between two distinct modes."""
    j, k = int(j), int(k)
    if j == k:
        raise ValidationError("intensity covariance needs two distinct modes")
    d, dbar = state.D[j, k], state.Dbar[j, k]
    xj, xk = state.xi[j], state.xi[k]
    return float(
        abs(d) ** 2 + abs(dbar) ** 2
        + 2.0 * np.real(d * np.conj(xj) * np.conj(xk))
        - 2.0 * np.real(dbar * xj * np.conj(xk))
    )


def intensity_variance_compound(state: GaussianState, j, k) -> float:
    """<(dW_jk)^2> of the two-mode compound field."""
    return (
        intensity_variance_single(state, j)
        + intensity_variance_single(state, k)
        + 2.0 * intensity_covariance(state, j, k)
    )


def intensity_variance(state: GaussianState, sel) -> float:
    sel = _as_selection(sel)
    if sel.is_compound:
        return intensity_variance_compound(state, *sel.modes)
    return intensity_variance_single(state, sel.modes[0])


def _squeeze_terms(state: GaussianState, sel: ModeSelection):
    """(vacuum level, symmetric noise S, pair term P) of the quadrature algebra."""
    if sel.is_compound:
        j, k = (int(m) for m in sel.modes)
        s = state.B[j] + state.B[k] - 2.0 * np.real(state.Dbar[j, k])
        p = state.C[j] + state.C[k] + 2.0 * state.D[j, k]
        return 2.0, float(s), complex(p)
    j = int(sel.modes[0])
    return 1.0, float(state.B[j]), complex(state.C[j])


def principal_squeeze(state: GaussianState, sel) -> float:
    """Principal squeeze variance: the quadrature variance minimized over
    the quadrature phase.  Below the vacuum level (1 single / 2 compound)
    the field is squeezed."""
    vac, s, p = _squeeze_terms(state, _as_selection(sel))
    return float(vac * (1.0 + s - abs(p)) if vac == 2.0 else 1.0 + 2.0 * (s - abs(p)))


def quadrature_variances(state: GaussianState, sel):
    """(var_p, var_q, uncertainty) for the selected mode(s).

    ``uncertainty`` is the product of the minimal and maximal principal
    variances.
    """
    vac, s, p = _squeeze_terms(state, _as_selection(sel))
    if vac == 2.0:
        var_p = 2.0 + 2.0 * s + 2.0 * np.real(p)
        var_q = 2.0 + 2.0 * s - 2.0 * np.real(p)
        lam_min = 2.0 * (1.0 + s - abs(p))
        lam_max = 2.0 * (1.0 + s + abs(p))
    else:
        var_p = 1.0 + 2.0 * s + 2.0 * np.real(p)
        var_q = 1.0 + 2.0 * s - 2.0 * np.real(p)
        lam_min = 1.0 + 2.0 * (s - abs(p))
        lam_max = 1.0 + 2.0 * (s + abs(p))
    return float(var_p), float(var_q), float(lam_min * lam_max)


# --------------------------------------------------------------------------
# Generating function and jet machinery.

def _selection_spectrum(state: GaussianState, sel: ModeSelection):
    """Eigen-data of the selected modes' normally ordered covariance.

    Returns real eigenvalues lam_i of the 2m x 2m doubled covariance
    [[N^T, M], [M*, N]] and the nonnegative weights w_i = |(Q^H y)_i|^2
    with y the doubled mean vector.  In this basis

        G(s) = prod_i (1 + s lam_i)^(-1/2)
               * exp(-(s/2) sum_i w_i / (1 + s lam_i)),

    which is manifestly real for real s.
    """
    idx = [int(m) for m in sel.modes]
    n_full = state.normal_moment_matrix()
    m_full = state.pair_moment_matrix()
    n = n_full[np.ix_(idx, idx)]
    m = m_full[np.ix_(idx, idx)]
    gamma = np.block([[n.T, m], [m.conj(), n]])
    gamma = 0.5 * (gamma + gamma.conj().T)
    lam, q = np.linalg.eigh(gamma)
    y = np.concatenate([state.xi[idx], state.xi[idx].conj()])
    w = np.abs(q.conj().T @ y) ** 2
    return lam, w


def _series_exp(h: np.ndarray) -> np.ndarray:
    """exp of a truncated power series via the standard ODE recurrence."""
    order = h.shape[0] - 1
    f = np.zeros_like(h)
    f[0] = math.exp(h[0])
    for n in range(1, order + 1):
        f[n] = np.dot(np.arange(1, n + 1) * h[1:n + 1], f[n - 1::-1][:n]) / n
    return f


def _g_jet(lam: np.ndarray, w: np.ndarray, s0: float, order: int) -> np.ndarray:
    """Taylor coefficients of G(s0 + t) through t^order."""
    a = 1.0 + s0 * lam
    if np.any(a <= _MIN_PIVOT):
        raise NumericalError(
            f"generating function singular at s={s0}: covariance eigenvalue "
            f"{lam.min():.6g} (state is unphysical or too close to singular)"
        )
    rho = lam / a
    h = np.zeros(order + 1)
    # -(1/2) sum_i log(a_i + lam_i t)
    h[0] = -0.5 * float(np.sum(np.log(a)))
    powers = np.ones_like(rho)
    inv_geo = w / a  # running w_i/a_i * (-rho_i)^n
    # -(s0 + t)/2 * sum_i w_i / (a_i + lam_i t)
    h[0] += -0.5 * s0 * float(np.sum(inv_geo))
    prev_geo = inv_geo.copy()
    sign = 1.0
    for n in range(1, order + 1):
        powers = powers * rho
        # log branch: -(1/2) (-1)^(n+1) rho^n / n
        h[n] = -0.5 * sign * float(np.sum(powers)) / n
        sign = -sign
        # prefactor branch: -(1/2) (s0 g_n + g_{n-1}) with g_n = sum w/a (-rho)^n
        geo = -rho * prev_geo
        h[n] += -0.5 * (s0 * float(np.sum(geo)) + float(np.sum(prev_geo)))
        prev_geo = geo
    return _series_exp(h)


def generating_function_jet(state: GaussianState, sel, s0: float, order: int) -> np.ndarray:
    """Taylor coefficients of G around s0, length order + 1."""
    lam, w = _selection_spectrum(state, _as_selection(sel))
    return _g_jet(lam, w, float(s0), int(order))


def generating_function(state: GaussianState, sel, svalues) -> np.ndarray:
    """G(s) = <: exp(-s W) :> at the given points."""
    lam, w = _selection_spectrum(state, _as_selection(sel))
    svalues = np.atleast_1d(np.asarray(svalues, dtype=float))
    out = np.empty_like(svalues)
    for i, s in enumerate(svalues):
        a = 1.0 + s * lam
        if np.any(a <= _MIN_PIVOT):
            raise NumericalError(f"generating function singular at s={s}")
        out[i] = math.exp(-0.5 * float(np.sum(np.log(a))) - 0.5 * s * float(np.sum(w / a)))
    return out


def moments_and_distribution(state: GaussianState, sel, k_max: int = 5,
                             n_max: int = 64):
    """(<W>, reduced moments for k = 2..k_max, photon distribution p_n).

    Reduced moments are <W^k>/<W>^k - 1; they come out as NaN markers
    when <W> = 0 (vacuum in the selection).  ``p_n`` has length
    n_max + 1 and sums to one minus the truncated tail mass.
    """
    if not 1 <= k_max <= 8:
        raise ValidationError(f"k_max must be in [1, 8], got {k_max}")
    if not 1 <= n_max <= 512:
        raise ValidationError(f"n_max must be in [1, 512], got {n_max}")
    sel = _as_selection(sel)
    lam, w = _selection_spectrum(state, sel)
    jet0 = _g_jet(lam, w, 0.0, max(k_max, 2))
    mean_w = -jet0[1]
    moments = np.array(
        [(-1.0) ** k * math.factorial(k) * jet0[k] for k in range(2, k_max + 1)]
    )
    if mean_w > 0.0:
        reduced = moments / mean_w ** np.arange(2, k_max + 1) - 1.0
    else:
        reduced = np.full(max(k_max - 1, 0), np.nan)
    jet1 = _g_jet(lam, w, 1.0, n_max)
    p_n = jet1 * (-1.0) ** np.arange(n_max + 1)
    return float(mean_w), reduced, p_n


@dataclass(frozen=True)
class StatsReport:
    """All requested statistics of one mode selection at one length."""

    selection: ModeSelection
    mean_w: float
    reduced_moments: np.ndarray   # k = 2..k_max; NaN markers when <W> = 0
    variance_w: float
    lam: float                    # principal squeeze variance
    var_p: float
    var_q: float
    uncertainty: float
    p_n: np.ndarray | None = None
    pn_deficit: float | None = None


def stats_report(state: GaussianState, sel, k_max: int = 5, n_max: int = 64,
                 include_pn: bool = False) -> StatsReport:
    """Assemble the full report for one selection.

    The intensity variance is computed twice, from the closed expression
    and from the moment machinery; disagreement beyond 1e-8 (relative to
    the natural scale) means the numerics cannot be trusted and raises
    :class:`NumericalError`.
    """
    sel = _as_selection(sel)
    mean_w, reduced, p_n = moments_and_distribution(state, sel, k_max=k_max, n_max=n_max)
    var_formula = intensity_variance(state, sel)
    if len(reduced):
        var_jets = (reduced[0] + 1.0) * mean_w**2 - mean_w**2
    else:
        var_jets = 0.0 if mean_w == 0.0 else math.nan
    if not math.isnan(var_jets):
        scale = max(1.0, abs(var_formula), mean_w**2)
        if abs(var_jets - var_formula) > 1e-8 * scale:
            raise NumericalError(
                f"intensity variance cross-check failed for {sel.name}: "
                f"closed form {var_formula!r} vs moments {var_jets!r}"
            )
    var_p, var_q, uncertainty = quadrature_variances(state, sel)
    deficit = None
    if include_pn:
        deficit = float(1.0 - p_n.sum())
    return StatsReport(
        selection=sel,
        mean_w=mean_w,
        reduced_moments=reduced,
        variance_w=var_formula,
        lam=principal_squeeze(state, sel),
        var_p=var_p,
        var_q=var_q,
        uncertainty=uncertainty,
        p_n=p_n if include_pn else None,
        pn_deficit=deficit,
    )
