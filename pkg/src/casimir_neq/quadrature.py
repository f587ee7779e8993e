"""Vectorised adaptive Gauss-Kronrod (G7/K15) quadrature.

Many independent integrals (a *batch*) are refined together: every pass
evaluates all pending panels of all batch members in one call of the
integrand, so the integrand only ever sees flat numpy arrays.

The integrand has the signature ``func(x, owner) -> array`` where ``x`` holds
abscissae and ``owner`` the batch index each abscissa belongs to. It returns
either shape ``(N,)`` or ``(N, C)`` for ``C`` channels integrated jointly.
"""

from dataclasses import dataclass

import numpy as np

# Kronrod 15-point abscissae on [0, 1] (symmetric), QUADPACK values.
_XK_HALF = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK_HALF = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss 7-point weights for the abscissae _XK_HALF[1::2].
_WG_HALF = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

XK = np.concatenate([-_XK_HALF[:-1], _XK_HALF[::-1]])
WK = np.concatenate([_WK_HALF[:-1], _WK_HALF[::-1]])
WG = np.zeros(15)
WG[1:7:2] = _WG_HALF[:3]
WG[7] = _WG_HALF[3]
WG[8:15] = WG[6::-1]


class QuadratureError(RuntimeError):
    """Raised when an adaptive integral exhausts its subdivision budget.

    Carries the partial value and a description of the worst panel.
    """

    def __init__(self, message, partial=None, worst_panel=None):
        super().__init__(message)
        self.partial = partial
        self.worst_panel = worst_panel


@dataclass
class BatchIntegral:
    value: np.ndarray      # (B, C)
    error: np.ndarray      # (B, C)
    panels: np.ndarray     # (B,) panel count
    converged: np.ndarray  # (B,) bool
    worst_panel: np.ndarray  # (B, 2) interval with the largest error estimate
    evaluations: int

    def squeeze(self):
        """Drop the channel axis when the integrand was scalar."""
        if self.value.shape[1] == 1:
            return BatchIntegral(self.value[:, 0], self.error[:, 0], self.panels,
                                 self.converged, self.worst_panel, self.evaluations)
        return self


def _gk15(func, a, b, owner):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * XK[None, :]).ravel()
    fx = np.asarray(func(x, np.repeat(owner, 15)), dtype=float)
    if fx.ndim == 1:
        fx = fx[:, None]
    fx = fx.reshape(len(a), 15, -1)
    ft = fx.transpose(0, 2, 1)
    kron = (ft @ WK) * half[:, None]
    gauss = (ft @ WG) * half[:, None]
    return kron, np.abs(kron - gauss)


def _per_owner(values, owner, nb):
    return np.stack([np.bincount(owner, weights=values[:, j], minlength=nb)
                     for j in range(values.shape[1])], axis=1)


def integrate_batch(func, edges, *, rtol, atol=0.0, max_panels=500, min_width=0.0):
    """Integrate a batch of 1-D integrals adaptively.

    Parameters
    ----------
    func : callable
        ``func(x, owner)`` as described in the module docstring.
    edges : array_like, shape (B, M+1)
        Initial panel boundaries for each batch member (increasing).
    rtol, atol : float
        A member is converged once the summed channel error is below
        ``max(atol, rtol * sum(|value|))``.
    max_panels : int
        Per-member panel budget.
    min_width : float or array_like
        Panels narrower than this are never split.

    Returns
    -------
    BatchIntegral
    """
    edges = np.atleast_2d(np.asarray(edges, dtype=float))
    nb, m = edges.shape[0], edges.shape[1] - 1
    atol = np.broadcast_to(np.asarray(atol, dtype=float), (nb,))
    min_width = np.broadcast_to(np.asarray(min_width, dtype=float), (nb,))

    a = edges[:, :-1].ravel()
    b = edges[:, 1:].ravel()
    owner = np.repeat(np.arange(nb), m)
    vals, errs = _gk15(func, a, b, owner)
    nevals = 15 * len(a)

    while True:
        total = _per_owner(vals, owner, nb)
        etotal = _per_owner(errs, owner, nb)
        tol = np.maximum(atol, rtol * np.abs(total).sum(axis=1))
        counts = np.bincount(owner, minlength=nb)
        bad = etotal.sum(axis=1) > tol
        active = bad & (counts < max_panels)
        if not active.any():
            break
        perr = errs.sum(axis=1)
        split = (active[owner] & (perr > tol[owner] / counts[owner])
                 & (b - a > min_width[owner]))
        if not split.any():
            break
        keep = ~split
        sa, sb, so = a[split], b[split], owner[split]
        sm = 0.5 * (sa + sb)
        ca = np.concatenate([sa, sm])
        cb = np.concatenate([sm, sb])
        co = np.concatenate([so, so])
        cv, ce = _gk15(func, ca, cb, co)
        nevals += 15 * len(ca)
        a = np.concatenate([a[keep], ca])
        b = np.concatenate([b[keep], cb])
        owner = np.concatenate([owner[keep], co])
        vals = np.concatenate([vals[keep], cv])
        errs = np.concatenate([errs[keep], ce])

    # fixed summation order: by owner, then by panel position
    order = np.lexsort((a, owner))
    a, b, owner, vals, errs = a[order], b[order], owner[order], vals[order], errs[order]
    total = _per_owner(vals, owner, nb)
    etotal = _per_owner(errs, owner, nb)
    tol = np.maximum(atol, rtol * np.abs(total).sum(axis=1))
    converged = etotal.sum(axis=1) <= tol

    perr = errs.sum(axis=1)
    worst = np.zeros((nb, 2))
    # lexsort on (-err, owner): first row of each owner block is its worst panel
    worder = np.lexsort((-perr, owner))
    first = np.ones(len(worder), dtype=bool)
    first[1:] = owner[worder][1:] != owner[worder][:-1]
    wsel = worder[first]
    worst[owner[wsel]] = np.stack([a[wsel], b[wsel]], axis=1)
    return BatchIntegral(total, etotal, np.bincount(owner, minlength=nb), converged,
                         worst, nevals)


def uniform_edges(lo, hi, n):
    """Edges splitting each ``[lo_i, hi_i]`` into ``n`` equal panels."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    frac = np.linspace(0.0, 1.0, n + 1)
    return lo[:, None] + (hi - lo)[:, None] * frac[None, :]


def integrate(func, lo, hi, *, rtol=1e-10, atol=0.0, max_panels=500, initial_panels=1):
    """Adaptive integral of a vectorised ``func(x)`` over ``[lo, hi]``.

    Returns ``(value, error_estimate)``; raises `QuadratureError` when the
    panel budget runs out.
    """
    res = integrate_batch(lambda x, _: func(x), uniform_edges(lo, hi, initial_panels),
                          rtol=rtol, atol=atol, max_panels=max_panels).squeeze()
    if not res.converged[0]:
        raise QuadratureError("adaptive quadrature did not converge",
                              partial=res.value[0], worst_panel=tuple(res.worst_panel[0]))
    return res.value[0], res.error[0]
