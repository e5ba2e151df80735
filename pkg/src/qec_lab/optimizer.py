"""Energy-constrained biconvex optimization of encoding and recovery.

Each half-step is an SDP over Choi matrices: the recovery (D -> 2, decode
fused) for a fixed encoding, then the encoding (2 -> D) for a fixed
recovery under ``Tr[n S(I/2)] <= nbar``.  Real-restricted runs (RCQC) keep
the encoding Choi matrix real symmetric; the recovery is always complex.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .channels import QuantumChannel, joint_loss_kerr, kraus_from_choi, loss_channel
from .codes import BosonicCode, binomial_code, custom_code, default_dim
from .errors import ConvergenceFailure, InvalidConfig
from .fock import kerr_unitary
from .recovery import _solve_from_F, recovery_objective, solve_optimal_recovery
from .sdp import solve_choi_sdp

log = logging.getLogger(__name__)

__all__ = [
    "OptimizationConfig",
    "RestartRecord",
    "OptimizationResult",
    "noise_channel",
    "optimal_encoding_step",
    "random_encoding",
    "compress_encoding",
    "biconvex",
    "refine",
    "okb_scan",
    "derotate_to_real",
]


@dataclass(frozen=True)
class OptimizationConfig:
    D: int = 20
    gamma: float = 0.1
    Kt: float = 0.0
    nbar: float = 2.0
    real_restricted: bool = False
    restarts: int = 10
    seed: int = 0
    max_rounds: int = 400
    f_tol: float = 1e-7

    def __post_init__(self):
        if not self.nbar > 0:
            raise InvalidConfig(f"energy cap must be positive, got {self.nbar}")
        if self.restarts < 1:
            raise InvalidConfig(f"restarts must be >= 1, got {self.restarts}")
        if self.D < 2:
            raise InvalidConfig(f"D must be >= 2, got {self.D}")
        if not 0 <= self.gamma < 1:
            raise InvalidConfig(f"gamma must lie in [0, 1), got {self.gamma}")

    def key(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()[:12]


@dataclass
class RestartRecord:
    restart: int
    seed: int
    fidelity: float
    rounds: int
    converged: bool
    energy_slack: float
    history: list = field(default_factory=list)
    code: BosonicCode | None = None

    def to_dict(self, with_code: bool = True) -> dict:
        d = {
            "restart": self.restart,
            "seed": self.seed,
            "fidelity": self.fidelity,
            "infidelity": 1.0 - self.fidelity,
            "rounds": self.rounds,
            "converged": self.converged,
            "energy_slack": self.energy_slack,
        }
        if with_code and self.code is not None:
            d["code"] = json.loads(self.code.to_json())
        return d


@dataclass
class OptimizationResult:
    config: OptimizationConfig
    code: BosonicCode
    fidelity: float
    rounds: int
    per_restart: list
    converged: bool
    isometric: bool = True

    @property
    def infidelity(self) -> float:
        return 1.0 - self.fidelity

    def to_json(self) -> str:
        doc = {
            "config": asdict(self.config),
            "fidelity": self.fidelity,
            "infidelity": self.infidelity,
            "code": json.loads(self.code.to_json()),
            "per_restart": [r.to_dict(with_code=False) for r in self.per_restart],
        }
        return json.dumps(doc, indent=2)


def noise_channel(gamma: float, Kt: float, D: int) -> QuantumChannel:
    """Pure loss for Kt = 0, otherwise the joint loss+Kerr channel."""
    if Kt == 0:
        return loss_channel(gamma, D)
    return joint_loss_kerr(gamma, Kt, D)


def _energy_operator(D):
    return 0.5 * np.kron(np.diag(np.arange(D, dtype=float)), np.eye(2))


def optimal_encoding_step(recovery: QuantumChannel, channel: QuantumChannel, nbar: float,
                          real_restricted: bool = False, tol: float = 1e-11):
    """Best encoding 2 -> D for a fixed recovery D -> 2 under the energy cap.

    Returns
    -------
    X : (2D, 2D) Choi matrix of the encoding, out (x) in ordering
    fidelity : achieved channel fidelity
    """
    if not nbar > 0:
        raise InvalidConfig(f"energy cap must be positive, got {nbar}")
    D = channel.dim_in
    # G_jk = R_j E_k; the fidelity is sum |<<G^dag|S>>|^2 / 4
    G = np.einsum("jra,kab->jkrb", recovery.kraus, channel.kraus).reshape(-1, 2, D)
    C = recovery_objective(G)
    res = solve_choi_sdp(C, D, 2, A=_energy_operator(D), b=nbar, real=real_restricted, tol=tol)
    return res.X, res.objective


def _energy(V):
    n = np.arange(V.shape[0])
    return float(0.5 * np.sum(n[:, None] * np.abs(V) ** 2))


def _polar(M):
    u, _, vh = np.linalg.svd(M, full_matrices=False)
    return u @ vh


def random_encoding(D: int, nbar: float, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    """Haar-random isometry into ``n <= ceil(2 nbar) + 2``, tilted toward vacuum until it meets the cap."""
    L = min(D, math.ceil(2 * nbar) + 3)
    Z = rng.normal(size=(L, 2))
    if not real:
        Z = Z + 1j * rng.normal(size=(L, 2))
    Q, R = np.linalg.qr(Z)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))  # Haar phase fix
    V = np.zeros((D, 2), dtype=complex)
    V[:L] = Q
    n = np.arange(D)
    while _energy(V) > nbar:
        V = _polar(V * (0.9 ** n)[:, None])
    return V


def compress_encoding(X: np.ndarray, D: int):
    """Rank-2 compression of an encoding Choi matrix.

    Returns the polar isometry of the top Kraus operator and the fraction of
    the trace it carries.
    """
    w, U = np.linalg.eigh(0.5 * (X + X.conj().T))
    K = math.sqrt(max(w[-1], 0.0)) * U[:, -1].reshape(D, 2)
    return _polar(K), float(w[-1] / max(w.sum(), 1e-300))


def _kraus_of_encoding(X, D):
    return kraus_from_choi(X, 2, D).kraus


def _seesaw(channel, S_kraus, cfg: OptimizationConfig, history=None):
    """Alternate recovery and encoding SDPs from the encoding Kraus stack ``S_kraus``."""
    D = cfg.D
    hist = [] if history is None else history
    converged = False
    X = None
    f_prev = None
    rounds = 0
    for rounds in range(1, cfg.max_rounds + 1):
        F = np.einsum("kab,mbs->kmas", channel.kraus, S_kraus).reshape(-1, D, 2)
        rec = _solve_from_F(F, self_test=(rounds == 1))
        X, f_enc = optimal_encoding_step(rec.recovery, channel, cfg.nbar, cfg.real_restricted)
        if f_enc < rec.fidelity - 1e-9:
            log.warning("seesaw fidelity dropped by %.2e", rec.fidelity - f_enc)
        S_kraus = _kraus_of_encoding(X, D)
        hist.append(f_enc)
        if f_prev is not None and abs(f_enc - f_prev) < cfg.f_tol:
            converged = True
            break
        f_prev = f_enc
    return X, hist, rounds, converged


def _finalize(channel, X, cfg):
    """Compress to a qubit code and re-evaluate with a fresh optimal recovery."""
    V, weight = compress_encoding(X, cfg.D)
    if cfg.real_restricted:
        V = V.real
    code = custom_code(V[:, 0], V[:, 1], label="optimized",
                       params={"gamma": cfg.gamma, "Kt": cfg.Kt, "nbar": cfg.nbar})
    fid = solve_optimal_recovery(code, channel).fidelity
    slack = cfg.nbar - _energy(code.isometry)
    return code, fid, weight, slack


def _run_restart(cfg: OptimizationConfig, r: int, checkpoint_dir=None):
    seed = cfg.seed + r
    path = None
    if checkpoint_dir is not None:
        path = os.path.join(checkpoint_dir, f"restart-{cfg.key()}-{r:03d}.json")
        if os.path.exists(path):
            with open(path) as fh:
                doc = json.load(fh)
            from .codes import code_from_json
            code = code_from_json(json.dumps(doc["code"]))
            return RestartRecord(r, seed, doc["fidelity"], doc["rounds"], doc["converged"],
                                 doc["energy_slack"], doc.get("history", []), code), doc["weight"]
    channel = noise_channel(cfg.gamma, cfg.Kt, cfg.D)
    rng = np.random.default_rng(seed)
    V = random_encoding(cfg.D, cfg.nbar, rng, real=cfg.real_restricted)
    X, hist, rounds, conv = _seesaw(channel, V[None], cfg)
    code, fid, weight, slack = _finalize(channel, X, cfg)
    rec = RestartRecord(r, seed, fid, rounds, conv, slack, hist, code)
    if path is not None:
        doc = rec.to_dict()
        doc["history"] = hist
        doc["weight"] = weight
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(doc, fh)
        os.replace(tmp, path)
    return rec, weight


def biconvex(cfg: OptimizationConfig, checkpoint_dir=None, jobs: int = 1) -> OptimizationResult:
    """Multi-start seesaw; restart r is seeded with ``cfg.seed + r``."""
    if checkpoint_dir is not None:
        os.makedirs(checkpoint_dir, exist_ok=True)
    if jobs > 1 and cfg.restarts > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            outs = list(ex.map(_run_restart, [cfg] * cfg.restarts, range(cfg.restarts),
                               [checkpoint_dir] * cfg.restarts))
    else:
        outs = [_run_restart(cfg, r, checkpoint_dir) for r in range(cfg.restarts)]
    records = [o[0] for o in outs]
    if not any(r.converged for r in records):
        raise ConvergenceFailure(
            f"no restart reached |dF| < {cfg.f_tol} within {cfg.max_rounds} rounds",
            residuals=tuple(r.fidelity for r in records),
        )
    best = max(range(len(records)), key=lambda i: records[i].fidelity)
    rb, weight = outs[best]
    isometric = weight > 1 - 1e-6
    if not isometric:
        log.warning("optimized encoding is not isometric: top Kraus weight %.8f", weight)
    log.info("best restart %d: 1-F = %.6e", rb.restart, 1 - rb.fidelity)
    return OptimizationResult(cfg, rb.code, rb.fidelity, rb.rounds, records, rb.converged, isometric)


def refine(code: BosonicCode, cfg: OptimizationConfig) -> OptimizationResult:
    """Continue the seesaw from an existing code, padded or cut to ``cfg.D``."""
    code = code.with_dim(cfg.D)
    channel = noise_channel(cfg.gamma, cfg.Kt, cfg.D)
    X, hist, rounds, conv = _seesaw(channel, code.isometry[None], cfg)
    out, fid, weight, slack = _finalize(channel, X, cfg)
    rec = RestartRecord(0, cfg.seed, fid, rounds, conv, slack, hist, out)
    return OptimizationResult(cfg, out, fid, rounds, [rec], conv, weight > 1 - 1e-6)


def okb_scan(N: int, S: int, gamma: float, K_grid, D: int | None = None):
    """Optimal recovery fidelity of ``U_K bin(N,S)`` with ``U_K = exp(i K n^2 / 2)``.

    Returns
    -------
    best_K : grid value with the highest fidelity
    fidelities : list aligned with ``K_grid``
    """
    K_grid = list(K_grid)
    if not K_grid:
        raise InvalidConfig("K grid must be nonempty")
    D = D or default_dim(N, S)
    base = binomial_code(N, S, D)
    channel = loss_channel(gamma, D)
    fids = []
    for K in K_grid:
        code = base.transformed(kerr_unitary(D, K / 2), label=f"okb({N},{S})", K=float(K))
        fids.append(solve_optimal_recovery(code, channel).fidelity)
    best = int(np.argmax(fids))
    return K_grid[best], fids


def _phased(P, theta):
    n = np.arange(P.shape[0])
    return np.exp(1j * theta * (n[:, None] - n[None, :])) * P


def _imag_residual(P, theta):
    return float(np.abs(_phased(P, theta).imag).max())


def derotate_to_real(code: BosonicCode, n_grid: int = 720) -> tuple[float, float]:
    """Phase rotation ``exp(i theta n)`` making the code projector most nearly real.

    Candidates are a uniform grid plus the angles that make the dominant
    off-diagonal entry real; the best one is polished on the (smooth) squared
    imaginary part.

    Returns ``(theta, residual)`` with residual the largest imaginary part of
    ``V P V^dag`` in the Fock basis.
    """
    P = code.projector()
    cands = list(np.linspace(0, 2 * np.pi, n_grid, endpoint=False))
    off = np.abs(P - np.diag(np.diag(P)))
    m, n = np.unravel_index(int(np.argmax(off)), P.shape)
    if off[m, n] > 0:
        d, phi = int(m - n), float(np.angle(P[m, n]))
        cands += [((k * np.pi - phi) / d) % (2 * np.pi) for k in range(2 * abs(d))]
    vals = [_imag_residual(P, t) for t in cands]
    i = int(np.argmin(vals))
    theta, res = float(cands[i]), vals[i]
    if res < 1e-14:
        return theta, res
    h = 2 * np.pi / n_grid
    opt = minimize_scalar(lambda t: float(np.sum(_phased(P, t).imag ** 2)), bounds=(theta - h, theta + h),
                          method="bounded", options={"xatol": 1e-14})
    r2 = _imag_residual(P, float(opt.x))
    if r2 < res:
        theta, res = float(opt.x) % (2 * np.pi), r2
    return theta, res
