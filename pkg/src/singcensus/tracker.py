"""Total-degree homotopy continuation for square polynomial systems.

The target ``F`` is homogenized and tracked on a random affine patch
``a . (x0, x) = 1`` of projective space, so paths heading to infinity stay
bounded; the homotopy is ``H(X, t) = gamma t G(X) + (1 - t) F(X)`` with start
system ``G_k = x_k^{D_k} - x0^{D_k}``, tracked from t = 1 to t = 0.

Paths are tracked in fixed-size batches with numpy. Every batch is
independent of every other, so results do not depend on how many batches run
concurrently.
"""

from __future__ import annotations

import itertools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .polycore import (
    CompiledPolys,
    MultiPoly,
    PolyError,
    PolyParseError,
    annulus_array,
    make_rng,
    parse_polys,
)

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """The tracker could not produce any usable endpoint."""


@dataclass(frozen=True)
class SquareSystem:
    equations: tuple[MultiPoly, ...]
    declared_degrees: tuple[int, ...]

    def __init__(self, equations: Sequence[MultiPoly], declared_degrees: Sequence[int] | None = None):
        eqs = tuple(equations)
        if not eqs:
            raise PolyError("empty system")
        n = eqs[0].nvars
        if any(e.nvars != n for e in eqs):
            raise PolyError("all equations must share nvars")
        if len(eqs) != n:
            raise PolyError(f"system is not square: {len(eqs)} equations in {n} unknowns")
        degs = tuple(max(e.degree, 0) for e in eqs)
        if declared_degrees is not None and tuple(declared_degrees) != degs:
            raise PolyError(f"declared degrees {tuple(declared_degrees)} differ from actual {degs}")
        object.__setattr__(self, "equations", eqs)
        object.__setattr__(self, "declared_degrees", degs)

    @property
    def n(self) -> int:
        return len(self.equations)

    @property
    def bezout_number(self) -> int:
        out = 1
        for d in self.declared_degrees:
            out *= d
        return out

    def is_inconsistent(self) -> bool:
        """Some equation is a nonzero constant."""
        return any(e.is_constant() and not e.is_zero() for e in self.equations)

    def has_zero_equation(self) -> bool:
        return any(e.is_zero() for e in self.equations)

    def evaluate(self, x: Sequence[complex]) -> np.ndarray:
        return np.array([e.evaluate(x) for e in self.equations])

    def to_json_obj(self) -> dict:
        return {
            "nvars": self.n,
            "degrees": list(self.declared_degrees),
            "components": [e.to_json_obj() for e in self.equations],
        }

    @classmethod
    def from_json_obj(cls, obj, strict: bool = True) -> SquareSystem:
        nvars, _, polys = parse_polys(obj, strict=strict)
        if len(polys) != nvars:
            raise PolyParseError(
                f"$.components: a square system needs {nvars} equations, got {len(polys)}"
            )
        return cls(polys)

    @classmethod
    def parse(cls, text: str, strict: bool = True) -> SquareSystem:
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PolyParseError(f"malformed JSON: {exc}") from None
        return cls.from_json_obj(obj, strict=strict)


@dataclass(frozen=True)
class TrackSettings:
    initial_step: float = 0.02
    min_step: float = 1e-13
    max_step: float = 0.1
    path_tol: float = 1e-8  # relative Newton update accepted while tracking
    corrector_tol: float = 1e-10  # endpoint refinement / reported residual bound
    max_corrector_iters: int = 3
    endgame_start: float = 0.1
    endgame_step_fraction: float = 0.1  # inside the endgame, step <= fraction * t
    endgame_end: float = 1e-6
    infinity_threshold: float = 1e8
    singular_cond: float = 1e10
    dedup_radius: float = 1e-6
    max_steps: int = 20000
    seed: int = 0
    parallelism: int = 1
    chunk_size: int = 256

    def __post_init__(self):
        if not 0 < self.min_step < self.max_step:
            raise ValueError("need 0 < min_step < max_step")
        for name in ("path_tol", "corrector_tol", "dedup_radius", "endgame_end", "singular_cond"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.endgame_end < self.endgame_start <= 1:
            raise ValueError("need 0 < endgame_end < endgame_start <= 1")
        if self.parallelism < 1 or self.chunk_size < 1:
            raise ValueError("parallelism and chunk_size must be >= 1")

    def with_(self, **kw) -> TrackSettings:
        return replace(self, **kw)


@dataclass
class Solution:
    point: np.ndarray
    residual: float
    condition: float
    cluster_size: int = 1

    def to_json_obj(self) -> dict:
        return {
            "point": [[float(z.real), float(z.imag)] for z in self.point],
            "residual": float(self.residual),
            "condition": float(self.condition),
            "cluster_size": int(self.cluster_size),
        }


@dataclass
class SolutionSet:
    solutions: list[Solution]
    path_stats: dict[str, int]
    total_paths: int
    singular_points: list[np.ndarray] = field(default_factory=list)

    @property
    def failure_rate(self) -> float:
        return self.path_stats["failed"] / self.total_paths if self.total_paths else 0.0

    def points(self) -> np.ndarray:
        if not self.solutions:
            return np.zeros((0, 0), complex)
        return np.array([s.point for s in self.solutions])

    def to_json_obj(self) -> dict:
        return {
            "total_paths": self.total_paths,
            "path_stats": dict(self.path_stats),
            "solutions": [s.to_json_obj() for s in self.solutions],
            "singular_endpoints": len(self.singular_points),
        }


class NewtonResult(NamedTuple):
    point: np.ndarray
    residual: float
    converged: bool
    iterations: int
    condition: float


# -- linear algebra helpers --------------------------------------------------------


def _solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(A, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full(b.shape, np.nan, dtype=complex)
        for k in range(A.shape[0]):
            try:
                out[k] = np.linalg.solve(A[k], b[k])
            except np.linalg.LinAlgError:
                pass
        return out


def _norm(v: np.ndarray) -> np.ndarray:
    return np.sqrt((v.real**2 + v.imag**2).sum(axis=-1))


def relative_residuals(compiled: CompiledPolys, X: np.ndarray) -> np.ndarray:
    """Max over equations of ``|f(x)| / (|f|_1 max(1, |x|_inf)^deg f)``, one per point."""
    vals = np.abs(compiled.values(X))
    scale = compiled.coef_scale(X)
    return (vals / np.maximum(scale, 1e-300)).max(axis=1)


# -- Newton ---------------------------------------------------------------------------


def newton_refine(
    system: SquareSystem | CompiledPolys,
    point: Sequence[complex],
    tol: float = 1e-12,
    max_iter: int = 30,
) -> NewtonResult:
    """Plain Newton with a quadratic-convergence verdict.

    ``converged`` is True only when the update fell below ``tol`` while the
    updates were still shrinking superlinearly (ratio <= 0.1) on a
    well-conditioned Jacobian; a linear plateau (singular root) reports False.
    The returned point is the iterate with the smallest residual seen.
    """
    comp = system if isinstance(system, CompiledPolys) else CompiledPolys(system.equations)
    x = np.array(point, dtype=complex).reshape(1, -1)
    if x.shape[1] != comp.nvars:
        raise PolyError(f"point has dimension {x.shape[1]}, system has {comp.nvars} unknowns")
    best_x, best_r = x.copy(), float(_norm(comp.values(x))[0])
    prev = None
    converged = False
    cond = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        vals, jac = comp.values_and_jacobian(x)
        s = np.linalg.svd(jac[0], compute_uv=False)
        cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
        if not np.isfinite(cond) or cond > 1e14:
            log.debug("newton_refine: singular Jacobian at iterate %d (cond %.3g)", it, cond)
            break
        dx = np.linalg.solve(jac[0], vals[0])
        x = x - dx
        r = float(_norm(comp.values(x))[0])
        if r <= best_r:
            best_x, best_r = x.copy(), r
        step = float(np.linalg.norm(dx))
        small = step <= tol * (1 + float(np.linalg.norm(x)))
        if small and (prev is None or prev == 0 or step <= 0.1 * prev or step == 0):
            converged = cond < 1e12
            break
        if small:
            # tiny update but only linear contraction: singular root
            break
        prev = step
    return NewtonResult(best_x[0], best_r, converged, it, cond)


# -- clustering -----------------------------------------------------------------------


def dedupe(points: Sequence[Sequence[complex]], radius: float, residuals: Sequence[float] | None = None):
    """Single-linkage clusters at ``radius``.

    Returns ``(representative_index, member_indices)`` pairs sorted by the
    representative's coordinates; the representative minimises the residual.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    pts = np.asarray(points, dtype=complex)
    if pts.size == 0:
        return []
    if pts.ndim == 1:
        pts = pts[:, None]
    m = pts.shape[0]
    res = np.zeros(m) if residuals is None else np.asarray(residuals, dtype=float)
    real = np.concatenate([pts.real, pts.imag], axis=1)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in sorted(cKDTree(real).query_pairs(radius)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    def coords(k):
        return tuple(v for z in pts[k] for v in (z.real, z.imag))

    # ties on the residual are broken by coordinates, so input order never matters
    out = []
    for members in groups.values():
        rep = min(members, key=lambda k: (res[k], coords(k)))
        out.append((rep, members))
    return sorted(out, key=lambda item: coords(item[0]))


# -- the homotopy ------------------------------------------------------------------------


def _homogenize(p: MultiPoly, degree: int) -> MultiPoly:
    n = p.nvars
    return MultiPoly(n + 1, {(degree - sum(e),) + e: c for e, c in p})


class _Homotopy:
    def __init__(self, system: SquareSystem, settings: TrackSettings):
        self.n = system.n
        self.N = self.n + 1
        self.D = np.array(system.declared_degrees, dtype=np.int64)
        self.target = CompiledPolys([_homogenize(e, d) for e, d in zip(system.equations, self.D)])
        rng = make_rng(settings.seed, "tracker")
        self.gamma = complex(annulus_array(rng, (1,))[0])
        self.patch = annulus_array(rng, (self.N,))

    def start_points(self, index: np.ndarray) -> np.ndarray:
        # index (B, n) of root-of-unity exponents
        x = np.exp(2j * np.pi * index / self.D)
        X = np.concatenate([np.ones((x.shape[0], 1), complex), x], axis=1)
        lam = 1.0 / (X @ self.patch)
        return X * lam[:, None]

    def start_values(self, X):
        Dm1 = self.D - 1
        x0 = X[:, :1]
        xs = X[:, 1:]
        Gv = xs**self.D - x0**self.D
        B = X.shape[0]
        GJ = np.zeros((B, self.n, self.N), complex)
        k = np.arange(self.n)
        GJ[:, k, k + 1] = self.D * xs**Dm1
        GJ[:, k, 0] = -self.D * x0**Dm1
        return Gv, GJ

    def evaluate(self, X, t, need_t: bool = True):
        Fv, FJ = self.target.values_and_jacobian(X)
        Gv, GJ = self.start_values(X)
        g = (self.gamma * t)[:, None]
        s = (1.0 - t)[:, None]
        Hv = g * Gv + s * Fv
        HJ = g[..., None] * GJ + s[..., None] * FJ
        B = X.shape[0]
        Hv = np.concatenate([Hv, (X @ self.patch - 1.0)[:, None]], axis=1)
        HJ = np.concatenate([HJ, np.broadcast_to(self.patch, (B, 1, self.N))], axis=1)
        if not need_t:
            return Hv, HJ, None
        Ht = np.concatenate([self.gamma * Gv - Fv, np.zeros((B, 1), complex)], axis=1)
        return Hv, HJ, Ht

    def velocity(self, X, t):
        _, HJ, Ht = self.evaluate(X, t)
        return -_solve(HJ, Ht)

    def target_eval(self, X):
        Fv, FJ = self.target.values_and_jacobian(X)
        B = X.shape[0]
        Hv = np.concatenate([Fv, (X @ self.patch - 1.0)[:, None]], axis=1)
        HJ = np.concatenate([FJ, np.broadcast_to(self.patch, (B, 1, self.N))], axis=1)
        return Hv, HJ


# path outcome codes
_ACTIVE, _DONE, _FAILED, _STALLED = 0, 1, 2, 3


def _track_batch(hom: _Homotopy, X: np.ndarray, st: TrackSettings):
    B = X.shape[0]
    X = X.copy()
    t = np.ones(B)
    h = np.full(B, st.initial_step)
    status = np.zeros(B, dtype=np.int8)
    nsucc = np.zeros(B, dtype=np.int64)
    steps = np.zeros(B, dtype=np.int64)
    while True:
        idx = np.nonzero(status == _ACTIVE)[0]
        if idx.size == 0:
            break
        steps[idx] += 1
        over = steps[idx] > st.max_steps
        if over.any():
            status[idx[over]] = _FAILED
            idx = idx[~over]
            if idx.size == 0:
                continue
        x, tt = X[idx], t[idx]
        cap = np.where(tt <= st.endgame_start * (1 + 1e-12), st.endgame_step_fraction * tt, st.max_step)
        hh = np.minimum(np.minimum(h[idx], cap), tt - st.endgame_end)
        hh = np.maximum(hh, 0.0)
        # RK4 on dX/dt with dt = -hh
        k1 = hom.velocity(x, tt)
        k2 = hom.velocity(x - 0.5 * hh[:, None] * k1, tt - 0.5 * hh)
        k3 = hom.velocity(x - 0.5 * hh[:, None] * k2, tt - 0.5 * hh)
        t1 = tt - hh
        k4 = hom.velocity(x - hh[:, None] * k3, t1)
        xp = x - (hh / 6.0)[:, None] * (k1 + 2 * k2 + 2 * k3 + k4)
        ok = np.isfinite(xp).all(axis=1)
        xp[~ok] = x[~ok]
        # Newton corrector at t1
        conv = np.zeros(idx.size, dtype=bool)
        live = ok.copy()
        prev = np.full(idx.size, np.inf)
        for _ in range(st.max_corrector_iters):
            li = np.nonzero(live & ~conv)[0]
            if li.size == 0:
                break
            Hv, HJ, _ = hom.evaluate(xp[li], t1[li], need_t=False)
            dx = _solve(HJ, Hv)
            fin = np.isfinite(dx).all(axis=1)
            nd = np.where(fin, _norm(np.where(fin[:, None], dx, 0)), np.inf)
            xp[li[fin]] = xp[li[fin]] - dx[fin]
            scale = 1.0 + _norm(xp[li])
            bad = ~fin | (nd > 0.5 * prev[li])  # corrector must contract
            live[li[bad]] = False
            good = ~bad & (nd <= st.path_tol * scale)
            conv[li[good]] = True
            prev[li] = nd
        success = conv
        si = idx[success]
        X[si] = xp[success]
        t[si] = t1[success]
        nsucc[si] += 1
        grow = si[nsucc[si] >= 3]
        h[grow] = np.minimum(2.0 * h[grow], st.max_step)
        nsucc[grow] = 0
        fi = idx[~success]
        h[fi] *= 0.5
        nsucc[fi] = 0
        done = si[t[si] <= st.endgame_end * (1 + 1e-9)]
        status[done] = _DONE
        small = fi[h[fi] < st.min_step]
        if small.size:
            in_endgame = t[small] <= st.endgame_start
            status[small[in_endgame]] = _STALLED
            status[small[~in_endgame]] = _FAILED
    return X, t, status, steps


def _equilibrated(Hv, HJ):
    w = np.linalg.norm(HJ, axis=2)
    w = np.where(w > 0, w, 1.0)
    return Hv / w, HJ / w[:, :, None]


def _refine_endpoints(hom: _Homotopy, X: np.ndarray, st: TrackSettings):
    """Gauss-Newton at t = 0 by truncated SVD; returns (X, converged, cond).

    Rows are equilibrated first: the equations have different degrees, so raw
    projective Jacobians carry spurious condition numbers of order |X|^(dmax-dmin).
    """
    B = X.shape[0]
    best = X.copy()
    best_r = np.full(B, np.inf)
    conv = np.zeros(B, dtype=bool)
    cond = np.full(B, np.inf)
    prev = np.full(B, np.inf)
    x = X.copy()
    for _ in range(12):
        Hv, HJ = _equilibrated(*hom.target_eval(x))
        r = _norm(Hv)
        better = r < best_r
        best[better], best_r[better] = x[better], r[better]
        U, S, Vh = np.linalg.svd(HJ)
        smax = S[:, :1]
        cond = np.where(S[:, -1] > 0, S[:, 0] / np.maximum(S[:, -1], 1e-300), np.inf)
        inv = np.where(S > 1e-13 * smax, 1.0 / np.where(S > 0, S, 1.0), 0.0)
        uh_r = np.einsum("bji,bj->bi", U.conj(), Hv)
        dx = np.einsum("bji,bj->bi", Vh.conj(), inv * uh_r)
        nd = _norm(dx)
        x = x - dx
        conv |= nd <= 1e-13 * (1 + _norm(x))
        if np.all(conv | (nd == 0)):
            break
        prev = nd
    Hv, HJ = _equilibrated(*hom.target_eval(x))
    r = _norm(Hv)
    better = r < best_r
    best[better] = x[better]
    S = np.linalg.svd(_equilibrated(*hom.target_eval(best))[1], compute_uv=False)
    cond = np.where(S[:, -1] > 0, S[:, 0] / np.maximum(S[:, -1], 1e-300), np.inf)
    return best, conv, cond


def _run_chunk(args):
    hom, index, st = args
    X0 = hom.start_points(index)
    X, t, status, steps = _track_batch(hom, X0, st)
    reached = (status == _DONE) | (status == _STALLED)
    Xr, conv, cond = X.copy(), np.zeros(len(X), bool), np.full(len(X), np.inf)
    if reached.any():
        r = np.nonzero(reached)[0]
        Xr[r], conv[r], cond[r] = _refine_endpoints(hom, X[r], st)
    return Xr, status, conv, cond, steps


def start_root_indices(degrees: Sequence[int]) -> np.ndarray:
    return np.array(list(itertools.product(*[range(d) for d in degrees])), dtype=np.int64).reshape(
        -1, len(degrees)
    )


def solve(system: SquareSystem, settings: TrackSettings = TrackSettings()) -> SolutionSet:
    """Track all Bezout-many paths and classify their endpoints."""
    st = settings
    if system.is_inconsistent():
        return SolutionSet([], {"converged": 0, "diverged_to_infinity": 0, "singular_endpoint": 0, "failed": 0}, 0)
    if system.has_zero_equation():
        raise SolverError("system has an identically zero equation (not square in substance)")
    hom = _Homotopy(system, st)
    index = start_root_indices(system.declared_degrees)
    total = len(index)
    chunks = [(hom, index[i : i + st.chunk_size], st) for i in range(0, total, st.chunk_size)]
    if st.parallelism > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=st.parallelism) as ex:
            parts = list(ex.map(_run_chunk, chunks))
    else:
        parts = [_run_chunk(c) for c in chunks]
    X = np.concatenate([p[0] for p in parts])
    status = np.concatenate([p[1] for p in parts])
    conv = np.concatenate([p[2] for p in parts])
    cond = np.concatenate([p[3] for p in parts])

    stats = {"converged": 0, "diverged_to_infinity": 0, "singular_endpoint": 0, "failed": 0}
    failed = status == _FAILED
    stats["failed"] = int(failed.sum())
    x0 = X[:, 0]
    xa = X[:, 1:] / np.where(x0 == 0, 1e-300, x0)[:, None]
    finite = ~failed & np.isfinite(xa).all(axis=1) & (_norm(xa) < st.infinity_threshold) & (x0 != 0)
    regular = finite & conv & (cond < st.singular_cond)
    stats["diverged_to_infinity"] = int((~failed & ~finite).sum())
    singular = finite & ~regular

    comp = CompiledPolys(system.equations)
    reg_idx = np.nonzero(regular)[0]
    pts, res, conds = [], [], []
    for k in reg_idx:
        nr = newton_refine(comp, xa[k], tol=1e-14, max_iter=6)
        rel = float(relative_residuals(comp, nr.point[None, :])[0])
        if rel < 10 * st.corrector_tol:
            pts.append(nr.point)
            res.append(rel)
            conds.append(nr.condition)
        else:
            singular[k] = True
    stats["singular_endpoint"] = int(singular.sum())
    stats["converged"] = len(pts)
    sols = []
    for rep, members in dedupe(np.array(pts), st.dedup_radius, res) if pts else []:
        sols.append(Solution(pts[rep], res[rep], conds[rep], len(members)))
    singular_points = [xa[k] for k in np.nonzero(singular)[0]]
    assert sum(stats.values()) == total
    if total and stats["failed"] == total:
        raise SolverError(f"all {total} paths failed")
    return SolutionSet(sols, stats, total, singular_points)
