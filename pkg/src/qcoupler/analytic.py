"""Closed-form propagator for matched-coupling configurations.

When the two guides carry equal-magnitude nonlinear couplings, the two
evanescent couplings have equal magnitude, and the coupling phases
satisfy one compatibility relation, the twelve operator equations
decouple into small blocks that can be solved in closed form.  The
result is used to validate the numerical matrix exponential.

All trigonometric factors are evaluated as complex functions, so the
expressions stay valid when the internal rate ``r`` (and hence ``l``)
turns imaginary.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .exceptions import UnsupportedConfigurationError
from .dynamics import BogoliubovTransform
from .model import EXCHANGE_PERMUTATION, N_MODES, ValidatedParams

DEFAULT_CONDITION_TOL = 1e-12

# Below this |l z| the sin(lz/2)/l factor switches to its Taylor branch;
# the l -> 0 singularity is removable.
_SMALL_LZ = 1e-6


def conditions_satisfied(params: ValidatedParams, tol: float = DEFAULT_CONDITION_TOL) -> bool:
    """True when the closed-form solution applies to these parameters.

    Requires |gS1| = |gS2|, |gA1| = |gA2|, |kappaS| = |kappaA| within
    ``tol`` and, for nonzero coupling, the phase compatibility relation

        (kappaA*/|kappaA|) (gA2/gA1) = -(kappaS/|kappaS|) (gS2*/gS1*).

    With both kappas zero the phase relation is vacuous and equal
    magnitudes suffice.  Amplitude ratios make the relation meaningless
    when gA1 or gS1 vanish while the guides are coupled; those cases
    report False and are left to the numerical route.
    """
    scale = max(abs(params.gS1), abs(params.gA1), abs(params.kappaS), 1.0)
    if abs(abs(params.gS1) - abs(params.gS2)) > tol * scale:
        return False
    if abs(abs(params.gA1) - abs(params.gA2)) > tol * scale:
        return False
    if abs(abs(params.kappaS) - abs(params.kappaA)) > tol * scale:
        return False
    if abs(params.kappaS) <= tol * scale:
        return True
    if abs(params.gA1) <= tol * scale or abs(params.gS1) <= tol * scale:
        return False
    # cross-multiplied form of the phase relation, stable near zeros
    lhs = params.kappaA.conjugate() * abs(params.kappaS) * params.gA2 * params.gS1.conjugate()
    rhs = -params.kappaS * abs(params.kappaA) * params.gS2.conjugate() * params.gA1
    return abs(lhs - rhs) <= tol * max(abs(lhs), abs(rhs), scale**3)


@dataclass(frozen=True)
class AnalyticFrame:
    """Derived rates and the trig factor cache at one length z.

    ``r^2 = |gS1|^2 - |gA1|^2`` and ``l = sqrt(kappa^2 - 4 r^2)`` with
    ``kappa = |kappaS|``.  ``slol`` is sin(l z / 2)/l with its removable
    l -> 0 limit handled by a series branch.
    """

    r: complex
    l: complex
    kappa: float
    shh: complex
    chh: complex
    sh: complex
    ch: complex
    sl: complex
    cl: complex
    slol: complex
    z: float

    @classmethod
    def from_params(cls, params: ValidatedParams, z: float) -> "AnalyticFrame":
        kappa = abs(params.kappaS)
        r_sq = abs(params.gS1) ** 2 - abs(params.gA1) ** 2
        r = cmath.sqrt(r_sq)
        l = cmath.sqrt(kappa**2 - 4.0 * r_sq)
        x = 0.5 * l * z
        sl = cmath.sin(x)
        cl = cmath.cos(x)
        if abs(l * z) < _SMALL_LZ:
            slol = 0.5 * z * (1.0 - x**2 / 6.0 + x**4 / 120.0)
        else:
            slol = sl / l
        return cls(
            r=r, l=l, kappa=kappa,
            shh=cmath.sin(kappa * z), chh=cmath.cos(kappa * z),
            sh=cmath.sin(0.5 * kappa * z), ch=cmath.cos(0.5 * kappa * z),
            sl=sl, cl=cl, slol=slol, z=float(z),
        )


def _unit_phase(x: complex) -> complex:
    return x / abs(x) if x != 0 else 1.0 + 0j


def _guide_rows(params: ValidatedParams, f: AnalyticFrame):
    """U and V rows for the S, A, V modes of guide 1, as 3x6 blocks.

    Conjugates of l cancel identically because l is either real or
    purely imaginary: cos is even and sin(l*z)/l* = sin(lz)/l.
    """
    gs1, ga1 = params.gS1, params.gA1
    gs2, ga2 = params.gS2, params.gA2
    ps = _unit_phase(params.kappaS)
    pa = _unit_phase(params.kappaA)
    r_sq = abs(gs1) ** 2 - abs(ga1) ** 2
    if abs(r_sq) == 0.0:
        raise UnsupportedConfigurationError(
            "closed form is singular at |gS1| = |gA1|; use the numerical propagator"
        )
    k, shh, chh, sh, ch, cl, slol = (
        f.kappa, f.shh, f.chh, f.sh, f.ch, f.cl, f.slol,
    )
    ga_ratio = ga2 / ga1 if ga1 != 0 else 0j

    u = np.zeros((3, N_MODES), dtype=complex)
    v = np.zeros((3, N_MODES), dtype=complex)

    # Stokes row
    u[0, 0] = (-abs(ga1) ** 2 * chh + abs(gs1) ** 2 * (-k * sh * slol + ch * cl)) / r_sq
    v[0, 1] = ga1 * gs1 * (-chh - k * sh * slol + ch * cl) / r_sq
    u[0, 3] = 1j * ps.conjugate() * (
        -abs(ga1) ** 2 * shh + abs(gs1) ** 2 * (k * ch * slol + sh * cl)
    ) / r_sq
    v[0, 4] = 1j * ga1 * gs1 * pa * (shh - k * ch * slol - sh * cl) / r_sq
    v[0, 2] = 2j * gs1 * ch * slol
    v[0, 5] = -2.0 * ps.conjugate() * gs2 * sh * slol

    # anti-Stokes row
    v[1, 0] = ga1 * gs1 * (chh + k * sh * slol - ch * cl) / r_sq
    u[1, 2] = 2j * ga1 * ch * slol
    u[1, 1] = (abs(gs1) ** 2 * chh + abs(ga1) ** 2 * (k * sh * slol - ch * cl)) / r_sq
    u[1, 4] = 1j * pa.conjugate() * (
        abs(gs1) ** 2 * shh - abs(ga1) ** 2 * (k * ch * slol + sh * cl)
    ) / r_sq
    v[1, 3] = -1j * ga1 * gs1 * ps * (shh - k * ch * slol - sh * cl) / r_sq
    u[1, 5] = -2.0 * pa.conjugate() * ga2 * sh * slol

    # vibration row
    v[2, 0] = 2j * gs1 * ch * slol
    u[2, 1] = 2j * ga1.conjugate() * ch * slol
    u[2, 2] = k * sh * slol + ch * cl
    v[2, 3] = 2.0 * gs1 * ps * sh * slol
    u[2, 4] = -2.0 * ga1.conjugate() * pa.conjugate() * sh * slol
    u[2, 5] = -1j * pa.conjugate() * ga_ratio * (k * ch * slol - sh * cl)
    return u, v


def analytic_propagator(params: ValidatedParams, z: float,
                        tol: float = DEFAULT_CONDITION_TOL) -> BogoliubovTransform:
    """Closed-form Bogoliubov transform on the matched-coupling manifold.

    Guide-2 rows follow from the guide-exchange symmetry; creator rows
    from conjugation, as in the numerical propagator.

    Raises
    ------
    UnsupportedConfigurationError
        If the matched-coupling conditions fail at tolerance ``tol``, or
        if |gS1| = |gA1| makes the closed form singular.
    """
    if not conditions_satisfied(params, tol):
        raise UnsupportedConfigurationError(
            "parameters violate the matched-coupling conditions of the closed form"
        )
    frame = AnalyticFrame.from_params(params, z)
    u = np.zeros((N_MODES, N_MODES), dtype=complex)
    v = np.zeros((N_MODES, N_MODES), dtype=complex)
    u1, v1 = _guide_rows(params, frame)
    u[:3], v[:3] = u1, v1
    # second guide: swap parameters, then relabel columns
    u2, v2 = _guide_rows(params.swapped(), frame)
    perm = np.asarray(EXCHANGE_PERMUTATION)
    u[3:], v[3:] = u2[:, perm], v2[:, perm]
    return BogoliubovTransform(U=u, V=v, z=float(z))
