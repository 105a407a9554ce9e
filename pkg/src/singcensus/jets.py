"""Determinantal singularity equations, defining systems, and point classification.

``J`` is the Jacobian determinant; the bordered determinants ``J_{k,i}``
replace the row ``grad f_i`` by ``grad J_{k-1,i}`` (with ``J_{0,i} = J``).
On a corank-1 point the chain J, J_{1,i}, J_{2,i}, J_{3,i} separates fold,
cusp and swallowtail.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .polycore import (
    CompiledPolys,
    MultiPoly,
    PolyError,
    PolyMap,
    annulus_array,
    make_rng,
    random_affine_form,
)
from .tracker import SquareSystem


class ConfigError(ValueError):
    """A singularity system could not be assembled as requested."""


class Kind(str, enum.Enum):
    ZERO_FIBER = "ZeroFiber"
    FOLD = "Fold"
    CUSP = "Cusp"
    SWALLOWTAIL = "Swallowtail"
    DOUBLE_FOLD_CURVE = "DoubleFoldCurve"
    CUSP_FOLD_PAIR = "CuspFoldPair"
    TRIPLE_FOLD = "TripleFold"
    TANGENCY_PROBE = "TangencyProbe"
    CORANK_TWO_PROBE = "CorankTwoProbe"
    PAIR_VANISH_PROBE = "PairVanishProbe"


BLOCKS = {
    Kind.ZERO_FIBER: 1,
    Kind.FOLD: 1,
    Kind.CUSP: 1,
    Kind.SWALLOWTAIL: 1,
    Kind.CORANK_TWO_PROBE: 1,
    Kind.PAIR_VANISH_PROBE: 1,
    Kind.DOUBLE_FOLD_CURVE: 2,
    Kind.CUSP_FOLD_PAIR: 2,
    Kind.TANGENCY_PROBE: 2,
    Kind.TRIPLE_FOLD: 3,
}

CHART_KINDS = {Kind.CUSP, Kind.SWALLOWTAIL, Kind.CUSP_FOLD_PAIR}


# -- symbolic determinants -------------------------------------------------------------


def det3(rows: Sequence[Sequence[MultiPoly]]) -> MultiPoly:
    (a, b, c), (d, e, f), (g, h, i) = rows
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def jacobian_matrix(F: PolyMap) -> list[list[MultiPoly]]:
    if len(F) != 3 or F.nvars != 3:
        raise PolyError(f"expected a map C^3 -> C^3, got {len(F)} components in {F.nvars} variables")
    return [list(f.gradient()) for f in F.components]


@functools.lru_cache(maxsize=64)
def jacobian_det(F: PolyMap) -> MultiPoly:
    return det3(jacobian_matrix(F))


@functools.lru_cache(maxsize=256)
def bordered_det(F: PolyMap, order: int, i: int) -> MultiPoly:
    """``J_{order,i}(F)``; ``i`` is 1-based as in ``f_1, f_2, f_3``."""
    if i not in (1, 2, 3):
        raise PolyError(f"row index must be 1, 2 or 3, got {i}")
    if order < 0:
        raise PolyError("order must be non-negative")
    if order == 0:
        return jacobian_det(F)
    rows = jacobian_matrix(F)
    rows[i - 1] = list(bordered_det(F, order - 1, i).gradient())
    return det3(rows)


def two_by_two_minors(F: PolyMap) -> list[MultiPoly]:
    M = jacobian_matrix(F)
    out = []
    for r1, r2 in ((0, 1), (0, 2), (1, 2)):
        for c1, c2 in ((0, 1), (0, 2), (1, 2)):
            out.append(M[r1][c1] * M[r2][c2] - M[r1][c2] * M[r2][c1])
    return out


# -- systems ----------------------------------------------------------------------------


@dataclass
class SingularitySystem:
    kind: Kind
    system: SquareSystem | None
    point_blocks: int
    chart: int | None = None
    germ: bool = False
    base_equations: list[MultiPoly] = field(default_factory=list)
    extra_equations: list[MultiPoly] = field(default_factory=list)  # slices and patches
    randomized: bool = False
    inconsistent: bool = False
    degenerate: bool = False

    @property
    def nunknowns(self) -> int:
        return 3 * self.point_blocks

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind.value,
            "chart": self.chart,
            "germ": self.germ,
            "point_blocks": self.point_blocks,
            "randomized": self.randomized,
            "inconsistent": self.inconsistent,
            "degenerate": self.degenerate,
            "system": None if self.system is None else self.system.to_json_obj(),
        }


def randomize(equations: Sequence[MultiPoly], k: int, rng: np.random.Generator) -> list[MultiPoly]:
    """Square down to ``k`` equations: keep the k highest-degree ones, fold the rest in randomly."""
    eqs = [e for e in equations if not e.is_zero()]
    if len(eqs) < k:
        raise ConfigError(f"need {k} nonzero equations, have {len(eqs)}")
    if len(eqs) == k:
        return eqs
    order = sorted(range(len(eqs)), key=lambda j: (-eqs[j].degree, j))
    keep = [eqs[j] for j in order[:k]]
    extra = [eqs[j] for j in order[k:]]
    lam = annulus_array(rng, (k, len(extra)))
    out = []
    for a, e in enumerate(keep):
        acc = e
        for b, x in enumerate(extra):
            acc = acc + x.scale(lam[a, b])
        out.append(acc)
    return out


def _blocks(F: PolyMap, nblocks: int) -> list[list[MultiPoly]]:
    n = 3 * nblocks
    return [[c.embed(n, 3 * b) for c in F.components] for b in range(nblocks)]


def _embed(p: MultiPoly, nblocks: int, block: int) -> MultiPoly:
    return p.embed(3 * nblocks, 3 * block)


def base_equations(
    F: PolyMap,
    kind: Kind,
    chart: int = 1,
    components: Sequence[int] = (1, 2),
    rng: np.random.Generator | None = None,
) -> list[MultiPoly]:
    """The defining equations of ``kind`` before squaring up."""
    kind = Kind(kind)
    nb = BLOCKS[kind]
    J = jacobian_det(F)
    if kind == Kind.ZERO_FIBER:
        return list(F.components)
    if kind == Kind.FOLD:
        return [J]
    if kind == Kind.CUSP:
        return [J, bordered_det(F, 1, chart)]
    if kind == Kind.SWALLOWTAIL:
        return [J, bordered_det(F, 1, chart), bordered_det(F, 2, chart)]
    if kind == Kind.CORANK_TWO_PROBE:
        return [J] + [m for m in two_by_two_minors(F) if not m.is_zero()]
    if kind == Kind.PAIR_VANISH_PROBE:
        if not components or any(c not in (1, 2, 3) for c in components):
            raise ConfigError(f"bad component selection {components}")
        return [F.components[c - 1] for c in components] + [J]
    blocks = _blocks(F, nb)
    diff_pq = [a - b for a, b in zip(blocks[0], blocks[1])]
    Jb = [_embed(J, nb, b) for b in range(nb)]
    if kind == Kind.DOUBLE_FOLD_CURVE:
        return diff_pq + [Jb[0], Jb[1]]
    if kind == Kind.CUSP_FOLD_PAIR:
        return diff_pq + [Jb[0], _embed(bordered_det(F, 1, chart), nb, 0), Jb[1]]
    if kind == Kind.TRIPLE_FOLD:
        diff_pr = [a - b for a, b in zip(blocks[0], blocks[2])]
        return diff_pq + diff_pr + Jb
    if kind == Kind.TANGENCY_PROBE:
        rng = rng if rng is not None else make_rng(0, "tangency")
        u = annulus_array(rng, (3, 3))
        M = jacobian_matrix(F)
        cols = []
        for b, uu in ((0, u[0]), (0, u[1]), (1, u[2])):
            col = []
            for r in range(3):
                acc = MultiPoly.zero(6)
                for j in range(3):
                    acc = acc + _embed(M[r][j], nb, b).scale(uu[j])
                col.append(acc)
            cols.append(col)
        minor = det3([[cols[c][r] for c in range(3)] for r in range(3)])
        return diff_pq + [Jb[0], Jb[1], minor]
    raise ConfigError(f"unknown kind {kind}")


def build_system(
    F: PolyMap,
    kind: Kind | str,
    chart: int = 1,
    slices: Sequence[MultiPoly] | None = None,
    seed: int = 0,
    germ: bool = False,
    components: Sequence[int] = (1, 2),
) -> SingularitySystem:
    """Assemble a square system for ``kind``.

    Census mode (``germ=False``): the base equations, plus random affine
    slices for curve/surface kinds, randomized down if overdetermined.
    Germ mode (homogeneous F): solutions are invariant under joint scaling of
    all point blocks, so one affine patch ``l(p) = 1`` on the first block is
    appended and the base equations are randomized to the remaining count.
    """
    try:
        kind = Kind(kind)
    except ValueError:
        raise ConfigError(f"unknown kind {kind!r}") from None
    if kind in CHART_KINDS and chart not in (1, 2, 3):
        raise ConfigError(f"chart must be 1, 2 or 3, got {chart}")
    if germ and not F.is_homogeneous():
        raise ConfigError("germ mode needs a homogeneous map")
    nb = BLOCKS[kind]
    n = 3 * nb
    rng = make_rng(seed, f"system:{kind.value}:{chart}:{int(germ)}")
    base = base_equations(F, kind, chart, components, rng)
    out = SingularitySystem(
        kind=kind,
        system=None,
        point_blocks=nb,
        chart=chart if kind in CHART_KINDS else None,
        germ=germ,
        base_equations=base,
    )
    if any(e.is_constant() and not e.is_zero() for e in base):
        out.inconsistent = True
        return out
    nonzero = [e for e in base if not e.is_zero()]
    extra: list[MultiPoly] = []
    if germ:
        extra.append(_patch(rng, n))
    needed = n - len(extra)
    if len(nonzero) > needed:
        eqs = randomize(nonzero, needed, rng)
        out.randomized = True
    else:
        eqs = list(nonzero)
        if len(eqs) < len(base) and len(eqs) < needed and not slices:
            out.degenerate = True
            return out
        missing = needed - len(eqs)
        given = list(slices or [])
        if given and len(given) != missing:
            raise ConfigError(f"{kind.value} needs {missing} slices, got {len(given)}")
        for s in given:
            if s.nvars != n or s.degree != 1:
                raise ConfigError("slices must be affine linear forms in all unknowns")
        extra.extend(given or [random_affine_form(n, rng) for _ in range(missing)])
    out.extra_equations = extra
    out.system = SquareSystem(eqs + extra)
    return out


def _patch(rng: np.random.Generator, n: int) -> MultiPoly:
    a = annulus_array(rng, (3,))
    return MultiPoly.linear(list(a) + [0] * (n - 3), -1)


# -- point classification -----------------------------------------------------------------


@dataclass
class ClassifyTolerances:
    rank: float = 1e-8  # singular-value ratio for rank decisions
    kernel: float = 1e-6  # normalised bordered-determinant test


@dataclass
class PointClass:
    label: str
    corank: int
    diagnostics: dict = field(default_factory=dict)

    def is_swallowtail_or_worse(self) -> bool:
        return self.label in ("Swallowtail", "CorankGE2", "DegenerateOrWorse")

    def is_cusp_or_worse(self) -> bool:
        return self.label in ("Cusp",) or self.is_swallowtail_or_worse()


class _MapJets:
    def __init__(self, F: PolyMap):
        self.F = F
        self.dF = CompiledPolys(F.components)
        self._chain: dict[int, list] = {}

    def chain(self, i: int):
        # J_{0..3,i}: (value+gradient evaluator, gradient magnitude evaluator)
        if i not in self._chain:
            out = []
            for k in range(4):
                p = bordered_det(self.F, k, i)
                out.append((CompiledPolys([p]), CompiledPolys(list(p.gradient()), with_jacobian=False)))
            self._chain[i] = out
        return self._chain[i]


@functools.lru_cache(maxsize=32)
def _jets(F: PolyMap) -> _MapJets:
    return _MapJets(F)


def _ratio(value: complex, grad: np.ndarray, w: np.ndarray, gscale: float, rank_tol: float) -> float:
    # |det[grad; r_j; r_k]| / (|grad| |r_j x r_k|): cosine between grad and the kernel line
    g = np.linalg.norm(grad)
    if g <= rank_tol * gscale:
        return np.nan
    return float(abs(value) / (g * np.linalg.norm(w)))


def classify_point(F: PolyMap, p: Sequence[complex], tol: ClassifyTolerances = ClassifyTolerances()) -> PointClass:
    """Rank/kernel ladder: Regular, Fold, Cusp, Swallowtail, CorankGE2 or DegenerateOrWorse."""
    jets = _jets(F)
    x = np.asarray(p, dtype=complex).reshape(1, 3)
    _, jac = jets.dF.values_and_jacobian(x)
    A = jac[0]
    s = np.linalg.svd(A, compute_uv=False)
    diag: dict = {"singular_values": [float(v) for v in s]}
    if s[0] == 0:
        return PointClass("CorankGE2", 3, diag)
    ratios = s / s[0]
    corank = int((ratios < tol.rank).sum())
    diag["sv_ratios"] = [float(v) for v in ratios]
    if corank == 0:
        return PointClass("Regular", 0, diag)
    if corank >= 2:
        return PointClass("CorankGE2", corank, diag)
    # chart: the row pair left after removing row i should be as independent as possible
    best_i, best_sv = 1, -1.0
    for i in (1, 2, 3):
        rows = np.delete(A, i - 1, axis=0)
        norms = np.linalg.norm(rows, axis=1)
        if np.any(norms == 0):
            continue
        sv = np.linalg.svd(rows / norms[:, None], compute_uv=False)[-1]
        if sv > best_sv:
            best_i, best_sv = i, sv
    rows = np.delete(A, best_i - 1, axis=0)
    w = np.cross(rows[0], rows[1])
    diag["chart"] = best_i
    _, _, Vh = np.linalg.svd(A)
    v = Vh[-1].conj()
    chain = jets.chain(best_i)
    vals, grads, gscales = [], [], []
    for comp, gcomp in chain:
        val, g = comp.values_and_jacobian(x)
        vals.append(complex(val[0, 0]))
        grads.append(g[0, 0])
        gscales.append(float(np.linalg.norm(gcomp.abs_scale(x)[0])))
    gJ = grads[0]
    if np.linalg.norm(gJ) <= tol.rank * gscales[0]:
        diag["reason"] = "critical set singular (grad J = 0)"
        return PointClass("DegenerateOrWorse", 1, diag)
    diag["kernel_residual"] = float(abs(gJ @ v) / np.linalg.norm(gJ))
    rho = [_ratio(vals[k], grads[k - 1], w, gscales[k - 1], tol.rank) for k in (1, 2, 3)]
    diag["rho"] = [None if np.isnan(r) else r for r in rho]
    labels = ("Fold", "Cusp", "Swallowtail")
    for k, r in enumerate(rho):
        if np.isnan(r):
            diag["reason"] = f"grad J_{k},{best_i} vanishes"
            return PointClass("DegenerateOrWorse", 1, diag)
        if r > tol.kernel:
            return PointClass(labels[k], 1, diag)
    return PointClass("DegenerateOrWorse", 1, diag)
