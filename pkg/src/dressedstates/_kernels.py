"""Compiled inner loops for tridiagonal matrices with a constant off-diagonal."""

import numba


@numba.njit(cache=True)
def sturm_count(diag, off, x):
    """Number of eigenvalues of the tridiagonal matrix strictly below ``x``."""
    off2 = off * off
    tiny = 1e-300
    count = 0
    q = diag[0] - x
    if q < 0.0:
        count += 1
    for k in range(1, diag.shape[0]):
        if q == 0.0:
            q = tiny
        q = diag[k] - x - off2 / q
        if q < 0.0:
            count += 1
    return count


@numba.njit(cache=True, fastmath=True)
def cn_step(psi, out, diag, off, z, field, dt, cp, inv_m):
    """One Crank-Nicolson step for a batch of states ``psi[b, :]``.

    Solves (1 + i dt/2 H) out = (1 - i dt/2 H) psi with
    H = tridiag(off, diag + field * z, off). The elimination factors depend
    only on H, so they are computed once and shared by the batch.
    """
    nb, n = psi.shape
    h = 0.5 * dt
    ho = h * off
    a = 1j * ho

    # pivots m_k = 1 + i h H_kk - a * cp_{k-1}, in real arithmetic
    cr = 0.0
    ci = 0.0
    for k in range(n):
        mr = 1.0 + ho * ci
        mi = h * (diag[k] + field * z[k]) - ho * cr
        s = 1.0 / (mr * mr + mi * mi)
        ir = mr * s
        ii = -mi * s
        inv_m[k] = complex(ir, ii)
        cr = -ho * ii
        ci = ho * ir
        cp[k] = complex(cr, ci)

    for b in range(nb):
        u = psi[b]
        v = out[b]
        v[0] = (1.0 - 1j * h * (diag[0] + field * z[0])) * u[0] - a * u[1]
        for k in range(1, n - 1):
            v[k] = (1.0 - 1j * h * (diag[k] + field * z[k])) * u[k] - a * (u[k - 1] + u[k + 1])
        v[n - 1] = (1.0 - 1j * h * (diag[n - 1] + field * z[n - 1])) * u[n - 1] - a * u[n - 2]
        prev = 0j
        for k in range(n):
            prev = (v[k] - a * prev) * inv_m[k]
            v[k] = prev
        for k in range(n - 2, -1, -1):
            v[k] -= cp[k] * v[k + 1]
