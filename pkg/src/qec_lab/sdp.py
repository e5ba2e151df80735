"""Primal-dual interior-point solver for fidelity SDPs over Choi matrices.

Every convex subproblem in this package has the same shape::

    maximize    Tr[C X]
    subject to  X >= 0                    (n x n, n = d_out * d_in)
                Tr_out X = I_{d_in}       (trace preservation)
                Tr[A X] <= b              (optional, e.g. an energy cap)

with X the Choi matrix of a channel in out (x) in ordering.  The dual is::

    minimize    Tr[Y] + b t
    subject to  I_out (x) Y + t A - C >= 0,  t >= 0

The partial-trace constraint gives the Newton (Schur complement) system a
Kronecker structure, so it is assembled in O(d_out^2 d_in^4) without ever
forming the constraint matrices.  Search directions are HKM with a Mehrotra
predictor-corrector.  Real-restricted problems (real symmetric X) run the same
iteration in real arithmetic.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import ConvergenceFailure

log = logging.getLogger(__name__)

__all__ = ["SdpResult", "solve_choi_sdp", "partial_trace_out", "write_trace_csv"]


def partial_trace_out(X: np.ndarray, d_out: int, d_in: int) -> np.ndarray:
    """Trace over the output factor of an out (x) in ordered matrix."""
    return np.einsum("aiak->ik", X.reshape(d_out, d_in, d_out, d_in))


def _herm(M):
    return 0.5 * (M + M.conj().T)


@dataclass
class SdpResult:
    X: np.ndarray
    objective: float
    dual_objective: float
    Y: np.ndarray
    t: float
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    converged: bool
    trace: list = field(default_factory=list)


def _max_step(X, dX, chol=None):
    """Largest alpha in (0, 1] with X + alpha dX PSD (X assumed PD)."""
    if chol is None:
        chol = la.cholesky(X, lower=True)
    Linv_dX = la.solve_triangular(chol, dX, lower=True)
    S = la.solve_triangular(chol, Linv_dX.conj().T, lower=True).conj().T
    lam_min = np.linalg.eigvalsh(_herm(S))[0]
    if lam_min >= 0:
        return 1.0
    return min(1.0, -1.0 / lam_min)


def _schur_block(X, W, d_out, d_in):
    """Matrix of Y -> H(Tr_out[X (I (x) Y) W]) on row-stacked vec(Y)."""
    Xb = X.reshape(d_out, d_in, d_out, d_in)
    Wb = W.reshape(d_out, d_in, d_out, d_in)
    M4 = np.einsum("aibk,blaj->ijkl", Xb, Wb, optimize=True)
    M4 = 0.5 * (M4 + M4.transpose(1, 0, 3, 2).conj())
    m = d_in * d_in
    return M4.reshape(m, m)


def solve_choi_sdp(
    C: np.ndarray,
    d_out: int,
    d_in: int,
    A: np.ndarray | None = None,
    b: float | None = None,
    real: bool = False,
    tol: float = 1e-11,
    max_iter: int = 200,
    record_trace: bool = False,
    raise_on_failure: bool = True,
    X0: np.ndarray | None = None,
) -> SdpResult:
    """Maximize ``Tr[C X]`` over Choi matrices of CPTP maps d_in -> d_out.

    Parameters
    ----------
    C : (n, n) Hermitian array, n = d_out * d_in, out (x) in ordering.
    A, b : optional linear inequality ``Tr[A X] <= b``; A Hermitian PSD.
    real : restrict X to real symmetric matrices (C is replaced by Re C).
    tol : relative primal/dual residual and duality-gap target.
    X0 : optional primal starting point (a feasible Choi matrix); it is mixed
        with ``I / d_out`` to move it into the interior.

    Returns
    -------
    SdpResult
        ``X`` is re-normalized to be exactly trace preserving; ``objective``
        is evaluated on that repaired X, so it is always achievable.
    """
    n = d_out * d_in
    C = _herm(np.asarray(C))
    if C.shape != (n, n):
        raise ValueError(f"C has shape {C.shape}, expected {(n, n)}")
    dtype = float if real else complex
    C = C.real.astype(float) if real else C.astype(complex)
    has_ineq = A is not None
    if has_ineq:
        A = _herm(np.asarray(A))
        A = A.real.astype(float) if real else A.astype(complex)
        b = float(b)

    I_in = np.eye(d_in, dtype=dtype)
    I_out = np.eye(d_out, dtype=dtype)
    cnorm = max(1.0, np.abs(C).max())

    X = np.eye(n, dtype=dtype) / d_out
    if X0 is not None:
        X0 = _herm(np.asarray(X0))
        X = 0.9 * (X0.real if real else X0).astype(dtype) + 0.1 * X
    lam_max = np.linalg.eigvalsh(C)[-1]
    Y = (max(lam_max, 0.0) + cnorm) * I_in
    t = 1.0 if has_ineq else 0.0
    Z = np.kron(I_out, Y) + (t * A if has_ineq else 0.0) - C
    s = max(b - np.real(np.vdot(A, X)), 1.0) if has_ineq else 0.0
    z = t

    trace_rows = []
    converged = False
    best = None
    it = 0
    nb = n + (1 if has_ineq else 0)
    for it in range(1, max_iter + 1):
        rp1 = I_in - partial_trace_out(X, d_out, d_in)
        Rd = np.kron(I_out, Y) - C - Z
        if has_ineq:
            Rd = Rd + t * A
            rp2 = b - np.real(np.vdot(A, X)) - s
            rd2 = t - z
        pobj = np.real(np.vdot(C, X))
        dobj = np.real(np.trace(Y)) + (b * t if has_ineq else 0.0)
        mu = (np.real(np.vdot(X, Z)) + s * z) / nb
        pres = np.abs(rp1).max() + (abs(rp2) if has_ineq else 0.0)
        dres = np.abs(Rd).max() / cnorm + (abs(rd2) if has_ineq else 0.0)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        if record_trace:
            trace_rows.append((it, pres, dres, pobj))
        if pres < tol and dres < tol and gap < tol and mu < tol:
            converged = True
            break
        # near the optimum the iterates lose accuracy; remember the best point
        merit = max(pres, dres, gap)
        if best is None or merit < best[0]:
            best = (merit, X, Y, t, pres, dres, gap, dobj)

        try:
            Zc = la.cholesky(Z, lower=True)
            Xc = la.cholesky(X, lower=True)
        except la.LinAlgError:
            # iterates reached roundoff level; keep the last point
            break
        W = _herm(la.cho_solve((Zc, True), np.eye(n, dtype=dtype)))

        M = _schur_block(X, W, d_out, d_in)
        if has_ineq:
            XAW = _herm(X @ A @ W)
            u = partial_trace_out(XAW, d_out, d_in)
            corner = np.real(np.vdot(A, XAW)) + s / z
            m = M.shape[0]
            Mf = np.empty((m + 1, m + 1), dtype=dtype)
            Mf[:m, :m] = M
            Mf[:m, m] = u.reshape(-1)
            Mf[m, :m] = u.reshape(-1).conj()
            Mf[m, m] = corner
            M = Mf
        try:
            fac = la.cho_factor(M, lower=True)
            solve = lambda rhs: la.cho_solve(fac, rhs)
        except la.LinAlgError:
            lu = la.lu_factor(M)
            solve = lambda rhs: la.lu_solve(lu, rhs)

        XRdW = _herm(X @ Rd @ W)

        def direction(sig_mu, dXa=None, dZa=None, dsa=0.0, dza=0.0):
            K = sig_mu * W - X
            if dXa is not None:
                K = K - _herm(dXa @ dZa @ W)
            g1 = partial_trace_out(K - XRdW, d_out, d_in) - rp1
            if has_ineq:
                ks = sig_mu / z - s - dsa * dza / z
                g2 = np.real(np.vdot(A, K - XRdW)) + ks - (s / z) * rd2 - rp2
                rhs = np.concatenate([g1.reshape(-1), [g2]])
                sol = solve(rhs)
                dY = sol[:-1].reshape(d_in, d_in)
                dt = float(np.real(sol[-1]))
            else:
                dY = solve(g1.reshape(-1)).reshape(d_in, d_in)
                dt = 0.0
            dY = _herm(dY)
            dZ = np.kron(I_out, dY) + Rd
            if has_ineq:
                dZ = dZ + dt * A
                dz = dt + rd2
                ds = ks - s * dz / z
            else:
                dz = ds = 0.0
            dX = K - _herm(X @ dZ @ W)
            return dX, ds, dY, dt, dZ, dz

        def steps(dX, ds, dZ, dz):
            ap = _max_step(X, dX, Xc)
            ad = _max_step(Z, dZ, Zc)
            if has_ineq:
                if ds < 0:
                    ap = min(ap, -s / ds)
                if dz < 0:
                    ad = min(ad, -z / dz)
            return ap, ad

        # predictor
        dXa, dsa, dYa, dta, dZa, dza = direction(0.0)
        ap, ad = steps(dXa, dsa, dZa, dza)
        mu_aff = (
            np.real(np.vdot(X + ap * dXa, Z + ad * dZa))
            + (s + ap * dsa) * (z + ad * dza)
        ) / nb
        sigma = min(1.0, (mu_aff / mu) ** 3)
        # corrector
        dX, ds, dY, dt, dZ, dz = direction(sigma * mu, dXa, dZa, dsa, dza)
        ap, ad = steps(dX, ds, dZ, dz)
        ap = min(1.0, 0.98 * ap)
        ad = min(1.0, 0.98 * ad)

        X = _herm(X + ap * dX)
        Y = _herm(Y + ad * dY)
        Z = _herm(Z + ad * dZ)
        if has_ineq:
            s = s + ap * ds
            t = t + ad * dt
            z = z + ad * dz

    if not converged and best is not None and best[0] < max(pres, dres, gap):
        _, X, Y, t, pres, dres, gap, dobj = best
    if not converged and max(pres, dres, gap) < 1e2 * tol:
        converged = True
    if not converged:
        msg = (
            f"interior-point solver stopped after {it} iterations: "
            f"primal {pres:.2e}, dual {dres:.2e}, gap {gap:.2e}"
        )
        if raise_on_failure and max(pres, dres, gap) > 1e3 * tol:
            raise ConvergenceFailure(msg, residuals=(pres, dres, gap))
        log.debug(msg)

    X = _repair_tp(X, d_out, d_in)
    return SdpResult(
        X=X,
        objective=float(np.real(np.vdot(C, X))),
        dual_objective=float(dobj),
        Y=Y,
        t=float(t),
        iterations=it,
        primal_residual=float(pres),
        dual_residual=float(dres),
        gap=float(gap),
        converged=converged,
        trace=trace_rows,
    )


def _repair_tp(X, d_out, d_in):
    """Congruence by (I (x) T^-1/2) so that Tr_out X = I exactly."""
    X = _herm(X)
    w, V = np.linalg.eigh(X)
    X = (V * np.clip(w, 0.0, None)) @ V.conj().T
    T = partial_trace_out(X, d_out, d_in)
    tw, tV = np.linalg.eigh(_herm(T))
    T_isqrt = (tV / np.sqrt(tw)) @ tV.conj().T
    G = np.kron(np.eye(d_out), T_isqrt)
    return _herm(G @ X @ G.conj().T)


def write_trace_csv(result: SdpResult, path) -> None:
    """Dump the iteration trace as ``iter,primal_residual,dual_residual,objective``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "primal_residual", "dual_residual", "objective"])
        for row in result.trace:
            w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
