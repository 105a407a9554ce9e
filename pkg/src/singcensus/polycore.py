"""Sparse multivariate polynomials with complex coefficients, and maps built from them.

Terms are kept in a dict keyed by exponent tuples. The canonical order is
graded lexicographic with x0 > x1 > ... (for three variables x > y > z),
which fixes evaluation order and serialization.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass
from itertools import combinations_with_replacement
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

# Post-multiplication underflow guard, not a rounding policy.
DROP_THRESHOLD = 1e-300

VAR_NAMES = ("x", "y", "z")


class PolyError(ValueError):
    """Bad input to a polynomial operation (arity, index or shape mismatch)."""


class PolyParseError(ValueError):
    """Malformed PolyMap / SquareSystem JSON."""


def grlex_key(e: tuple[int, ...]) -> tuple:
    return (-sum(e), tuple(-k for k in e))


def _ipow(z: complex, k: int) -> complex:
    # repeated multiplication, so dyadic scalings stay exact
    r = 1 + 0j
    for _ in range(k):
        r = r * z
    return r


class MultiPoly:
    """Polynomial in ``nvars`` variables; immutable.

    >>> x, y, z = MultiPoly.variables(3)
    >>> (x * x * y).evaluate((2, 3, 7))
    (12+0j)
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], complex] | None = None):
        if nvars < 1:
            raise PolyError(f"nvars must be positive, got {nvars}")
        clean: dict[tuple[int, ...], complex] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != nvars:
                raise PolyError(f"exponent {e} has length {len(e)}, expected {nvars}")
            if any(k < 0 for k in e):
                raise PolyError(f"negative exponent in {e}")
            c = complex(c)
            if c == 0:
                continue
            clean[e] = clean.get(e, 0) + c
        ordered = sorted((e for e, c in clean.items() if c != 0), key=grlex_key)
        self.nvars = nvars
        self._terms = {e: clean[e] for e in ordered}
        self._hash = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> MultiPoly:
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, c: complex) -> MultiPoly:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, index: int) -> MultiPoly:
        if not 0 <= index < nvars:
            raise PolyError(f"variable index {index} out of range for {nvars} variables")
        e = [0] * nvars
        e[index] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def variables(cls, nvars: int) -> tuple[MultiPoly, ...]:
        return tuple(cls.variable(nvars, i) for i in range(nvars))

    @classmethod
    def linear(cls, coeffs: Sequence[complex], const: complex = 0) -> MultiPoly:
        """``const + sum_j coeffs[j] * x_j``."""
        n = len(coeffs)
        terms = {(0,) * n: const}
        for j, a in enumerate(coeffs):
            e = [0] * n
            e[j] = 1
            terms[tuple(e)] = a
        return cls(n, terms)

    # -- inspection ----------------------------------------------------------

    @property
    def terms(self) -> Mapping[tuple[int, ...], complex]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def homogeneous_part(self, d: int) -> MultiPoly:
        return MultiPoly(self.nvars, {e: c for e, c in self._terms.items() if sum(e) == d})

    def coefficient_norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self._terms.values()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, tuple(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"MultiPoly({self.nvars}, {self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        names = VAR_NAMES if self.nvars <= 3 else tuple(f"x{i}" for i in range(self.nvars))
        parts = []
        for e, c in self._terms.items():
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            coef = f"{c.real:g}" if c.imag == 0 else f"({c.real:g}{c.imag:+g}j)"
            parts.append(coef if not mono else (mono if c == 1 else f"{coef}*{mono}"))
        return " + ".join(parts)

    # -- arithmetic ------------------------------------------------------------

    def _check(self, other: MultiPoly) -> None:
        if not isinstance(other, MultiPoly):
            raise PolyError(f"expected MultiPoly, got {type(other).__name__}")
        if other.nvars != self.nvars:
            raise PolyError(f"nvars mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other) -> MultiPoly:
        if isinstance(other, (int, float, complex, np.number)):
            return MultiPoly.constant(self.nvars, complex(other))
        self._check(other)
        return other

    def __add__(self, other) -> MultiPoly:
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> MultiPoly:
        return MultiPoly(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> MultiPoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> MultiPoly:
        return self._coerce(other) - self

    def scale(self, a: complex) -> MultiPoly:
        a = complex(a)
        return MultiPoly(self.nvars, {e: a * c for e, c in self._terms.items()})

    def __mul__(self, other) -> MultiPoly:
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        self._check(other)
        out: dict[tuple[int, ...], complex] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.nvars, {e: c for e, c in out.items() if abs(c) >= DROP_THRESHOLD})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> MultiPoly:
        if not isinstance(k, int) or k < 0:
            raise PolyError("only non-negative integer powers are supported")
        out = MultiPoly.constant(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    # -- calculus & evaluation -------------------------------------------------

    def derivative(self, var_index: int) -> MultiPoly:
        if not 0 <= var_index < self.nvars:
            raise PolyError(f"var_index {var_index} out of range for {self.nvars} variables")
        out = {}
        for e, c in self._terms.items():
            k = e[var_index]
            if k:
                e2 = list(e)
                e2[var_index] = k - 1
                out[tuple(e2)] = c * k
        return MultiPoly(self.nvars, out)

    def gradient(self) -> tuple[MultiPoly, ...]:
        return tuple(self.derivative(i) for i in range(self.nvars))

    def evaluate(self, x: Sequence[complex]) -> complex:
        x = tuple(complex(v) for v in x)
        if len(x) != self.nvars:
            raise PolyError(f"point has dimension {len(x)}, polynomial has {self.nvars} variables")
        total = 0j
        for e, c in self._terms.items():
            m = c
            for xi, k in zip(x, e):
                if k:
                    m = m * _ipow(xi, k)
            total += m
        return total

    __call__ = evaluate

    def embed(self, nvars: int, offset: int) -> MultiPoly:
        """Rename variable j to variable ``offset + j`` inside ``nvars`` variables."""
        if offset < 0 or offset + self.nvars > nvars:
            raise PolyError(f"cannot embed {self.nvars} variables at offset {offset} in {nvars}")
        out = {}
        for e, c in self._terms.items():
            e2 = [0] * nvars
            e2[offset : offset + self.nvars] = e
            out[tuple(e2)] = c
        return MultiPoly(nvars, out)

    def substitute_linear(self, matrix: np.ndarray, shift: np.ndarray | None = None) -> MultiPoly:
        """Compose with the affine map ``x -> matrix @ u + shift`` (``u`` has matrix.shape[1] vars)."""
        matrix = np.asarray(matrix, dtype=complex)
        m = matrix.shape[1]
        shift = np.zeros(self.nvars, complex) if shift is None else np.asarray(shift, complex)
        images = [
            MultiPoly.linear([complex(a) for a in matrix[i]], complex(shift[i]))
            for i in range(self.nvars)
        ]
        out = MultiPoly.zero(m)
        for e, c in self._terms.items():
            mono = MultiPoly.constant(m, c)
            for img, k in zip(images, e):
                if k:
                    mono = mono * img**k
            out = out + mono
        return out

    # -- serialization ----------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {"terms": [{"e": list(e), "c": [c.real, c.imag]} for e, c in self._terms.items()]}

    @classmethod
    def from_json_obj(cls, obj, nvars: int, where: str = "poly", strict: bool = True) -> MultiPoly:
        if not isinstance(obj, dict) or not isinstance(obj.get("terms"), list):
            raise PolyParseError(f"{where}: expected an object with a 'terms' list")
        terms: dict[tuple[int, ...], complex] = {}
        for k, t in enumerate(obj["terms"]):
            at = f"{where}.terms[{k}]"
            if not isinstance(t, dict) or "e" not in t or "c" not in t:
                raise PolyParseError(f"{at}: each term needs 'e' and 'c'")
            e, c = t["e"], t["c"]
            if not isinstance(e, list) or len(e) != nvars:
                raise PolyParseError(f"{at}.e: exponent list must have length {nvars}")
            if not all(isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in e):
                raise PolyParseError(f"{at}.e: exponents must be non-negative integers")
            if (
                not isinstance(c, list)
                or len(c) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in c)
            ):
                raise PolyParseError(f"{at}.c: coefficient must be [re, im]")
            if not all(math.isfinite(v) for v in c):
                raise PolyParseError(f"{at}.c: non-finite coefficient")
            val = complex(float(c[0]), float(c[1]))
            if val == 0:
                if strict:
                    raise PolyParseError(f"{at}.c: zero coefficient is not allowed in strict mode")
                continue
            key = tuple(e)
            if key in terms:
                raise PolyParseError(f"{at}.e: duplicate exponent {key}")
            terms[key] = val
        return cls(nvars, terms)


def monomials(nvars: int, degree: int, homogeneous: bool = False) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree ``degree`` (or <= degree), in grlex order."""
    degs = [degree] if homogeneous else range(degree, -1, -1)
    out = []
    for d in degs:
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return sorted(set(out), key=grlex_key)


@dataclass(frozen=True)
class PolyMap:
    """An ordered tuple of polynomials in a common set of variables.

    ``degrees[i]`` is the total degree of ``components[i]``. A zero component
    carries whatever degree it was declared with; ``zero_components`` flags it.
    """

    components: tuple[MultiPoly, ...]
    degrees: tuple[int, ...]

    def __init__(self, components: Iterable[MultiPoly], degrees: Iterable[int] | None = None):
        comps = tuple(components)
        if not comps:
            raise PolyError("a PolyMap needs at least one component")
        n = comps[0].nvars
        if any(c.nvars != n for c in comps):
            raise PolyError("all components must share nvars")
        if degrees is None:
            degs = tuple(max(c.degree, 0) for c in comps)
        else:
            degs = tuple(int(d) for d in degrees)
            if len(degs) != len(comps):
                raise PolyError("one degree per component is required")
            for i, (c, d) in enumerate(zip(comps, degs)):
                if not c.is_zero() and c.degree != d:
                    raise PolyError(f"component {i} has degree {c.degree}, declared {d}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "degrees", degs)

    @property
    def nvars(self) -> int:
        return self.components[0].nvars

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> MultiPoly:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    @property
    def zero_components(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.components) if c.is_zero())

    def is_homogeneous(self) -> bool:
        return all(
            c.is_zero() or (c.is_homogeneous() and c.degree == d)
            for c, d in zip(self.components, self.degrees)
        )

    def evaluate(self, x: Sequence[complex]) -> np.ndarray:
        return np.array([c.evaluate(x) for c in self.components])

    def permuted(self, order: Sequence[int]) -> PolyMap:
        return PolyMap([self.components[i] for i in order], [self.degrees[i] for i in order])

    def to_json_obj(self) -> dict:
        return {
            "nvars": self.nvars,
            "degrees": list(self.degrees),
            "components": [c.to_json_obj() for c in self.components],
        }


# -- map-level operations --------------------------------------------------------


def leading_form(F: PolyMap) -> PolyMap:
    """Top-degree homogeneous part of each component (degree taken from ``F.degrees``)."""
    return PolyMap([c.homogeneous_part(d) for c, d in zip(F.components, F.degrees)], F.degrees)


def deform(F: PolyMap, t: complex) -> PolyMap:
    """``F_t(x) = (t^{d_i} f_i(x / t))_i``: a degree-k monomial of f_i gains ``t^(d_i - k)``."""
    t = complex(t)
    if t == 0:
        raise PolyError("deform needs t != 0; the t -> 0 limit is leading_form(F)")
    out = []
    for c, d in zip(F.components, F.degrees):
        out.append(MultiPoly(c.nvars, {e: coef * _ipow(t, d - sum(e)) for e, coef in c}))
    return PolyMap(out, F.degrees)


def _annulus_sample(rng: np.random.Generator, lo: float = 0.5, hi: float = 1.5) -> complex:
    # rejection from the bounding square: only IEEE arithmetic, no libm calls
    lo2, hi2 = lo * lo, hi * hi
    while True:
        a = (2.0 * rng.random() - 1.0) * hi
        b = (2.0 * rng.random() - 1.0) * hi
        r2 = a * a + b * b
        if lo2 <= r2 <= hi2:
            return complex(a, b)


def derive_seed(seed: int, purpose: str) -> np.random.SeedSequence:
    """Per-purpose sub-seed: ``SeedSequence([seed, crc32(purpose)])``."""
    if seed < 0:
        raise PolyError("seeds must be non-negative")
    return np.random.SeedSequence([int(seed) & (2**64 - 1), zlib.crc32(purpose.encode())])


def subseed(seed: int, purpose: str) -> int:
    """A 63-bit integer seed derived from ``derive_seed``."""
    return int(derive_seed(seed, purpose).generate_state(1, np.uint64)[0] >> np.uint64(1))


def make_rng(seed: int, purpose: str) -> np.random.Generator:
    """PCG64 generator for one purpose; bit-identical across platforms."""
    return np.random.Generator(np.random.PCG64(derive_seed(seed, purpose)))


def random_map(
    degrees: Sequence[int], homogeneous: bool = False, seed: int = 0, nvars: int | None = None
) -> PolyMap:
    """Dense random map with coefficients uniform on the annulus 0.5 <= |c| <= 1.5."""
    degrees = tuple(int(d) for d in degrees)
    if any(d < 1 for d in degrees):
        raise PolyError(f"degrees must be >= 1, got {degrees}")
    n = len(degrees) if nvars is None else nvars
    rng = make_rng(seed, "random_map")
    comps = []
    for d in degrees:
        terms = {e: _annulus_sample(rng) for e in monomials(n, d, homogeneous)}
        comps.append(MultiPoly(n, terms))
    return PolyMap(comps, degrees)


def random_affine_form(nvars: int, rng: np.random.Generator) -> MultiPoly:
    """Random ``a.x + b`` with annulus-distributed coefficients."""
    a = [_annulus_sample(rng) for _ in range(nvars)]
    return MultiPoly.linear(a, _annulus_sample(rng))


def annulus_array(rng: np.random.Generator, shape) -> np.ndarray:
    size = int(np.prod(shape))
    return np.array([_annulus_sample(rng) for _ in range(size)], dtype=complex).reshape(shape)


# -- JSON ---------------------------------------------------------------------


def dumps(obj: dict) -> str:
    """Compact, deterministic JSON text."""
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def serialize(F: PolyMap) -> str:
    return dumps(F.to_json_obj())


def parse_polys(obj, strict: bool = True) -> tuple[int, list[int], list[MultiPoly]]:
    if not isinstance(obj, dict):
        raise PolyParseError("$: expected a JSON object")
    nvars = obj.get("nvars")
    if not isinstance(nvars, int) or isinstance(nvars, bool) or nvars < 1:
        raise PolyParseError("$.nvars: must be a positive integer")
    comps = obj.get("components")
    if not isinstance(comps, list) or not comps:
        raise PolyParseError("$.components: must be a non-empty list")
    degrees = obj.get("degrees")
    if degrees is not None:
        if not isinstance(degrees, list) or len(degrees) != len(comps):
            raise PolyParseError("$.degrees: must list one degree per component")
        if not all(isinstance(d, int) and not isinstance(d, bool) and d >= 0 for d in degrees):
            raise PolyParseError("$.degrees: degrees must be non-negative integers")
    polys = [
        MultiPoly.from_json_obj(c, nvars, where=f"$.components[{i}]", strict=strict)
        for i, c in enumerate(comps)
    ]
    if degrees is not None:
        for i, (p, d) in enumerate(zip(polys, degrees)):
            if not p.is_zero() and p.degree != d:
                raise PolyParseError(f"$.degrees[{i}]: declared {d}, component has degree {p.degree}")
    else:
        degrees = [max(p.degree, 0) for p in polys]
    return nvars, list(degrees), polys


def parse(text: str, strict: bool = True) -> PolyMap:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PolyParseError(f"malformed JSON: {exc}") from None
    _, degrees, polys = parse_polys(obj, strict=strict)
    return PolyMap(polys, degrees)


# -- batched evaluation ---------------------------------------------------------


class CompiledPolys:
    """Vectorised evaluator for a list of polynomials (and optionally their gradients).

    ``values(X)`` maps points ``X`` of shape ``(B, nvars)`` to ``(B, m)``;
    ``values_and_jacobian(X)`` also returns ``(B, m, nvars)``.
    """

    def __init__(self, polys: Sequence[MultiPoly], with_jacobian: bool = True):
        polys = list(polys)
        if not polys:
            raise PolyError("nothing to compile")
        n = polys[0].nvars
        if any(p.nvars != n for p in polys):
            raise PolyError("all polynomials must share nvars")
        self.nvars = n
        self.m = len(polys)
        blocks = list(polys)
        self._jac_slots: list[tuple[int, int]] = []
        if with_jacobian:
            for i, p in enumerate(polys):
                for v in range(n):
                    dp = p.derivative(v)
                    if not dp.is_zero():
                        blocks.append(dp)
                        self._jac_slots.append((i, v))
        exps, coefs, starts = [], [], []
        for p in blocks:
            starts.append(len(coefs))
            if p.is_zero():
                exps.append((0,) * n)
                coefs.append(0j)
            for e, c in p:
                exps.append(e)
                coefs.append(c)
        self._E = np.array(exps, dtype=np.int64).reshape(len(exps), n)
        self._c = np.array(coefs, dtype=complex)
        self._starts = np.array(starts, dtype=np.intp)
        self._maxdeg = int(self._E.max()) if self._E.size else 0
        self._per_var = []
        for v in range(n):
            idx = np.nonzero(self._E[:, v])[0]
            if idx.size:
                self._per_var.append((v, idx, self._E[idx, v]))
        # one sparse row per block sums its coefficient-weighted monomials
        rows = np.repeat(np.arange(len(blocks)), np.diff(np.r_[self._starts, len(coefs)]))
        cols = np.arange(len(coefs))
        self._S = sparse.csr_matrix((self._c, (rows, cols)), shape=(len(blocks), len(coefs)))
        self._Sabs = sparse.csr_matrix((np.abs(self._c), (rows, cols)), shape=(len(blocks), len(coefs)))
        self._l1 = np.array([sum(abs(c) for c in p.terms.values()) for p in polys])
        self._deg = np.array([max(p.degree, 0) for p in polys])
        self._ji = np.array([s[0] for s in self._jac_slots], dtype=np.intp)
        self._jv = np.array([s[1] for s in self._jac_slots], dtype=np.intp)

    def _blocks(self, X: np.ndarray) -> np.ndarray:
        # term-major layout: every gather below copies contiguous rows of length B
        XT = np.ascontiguousarray(np.asarray(X, dtype=complex).T)
        B = XT.shape[1]
        pw = np.empty((self.nvars, self._maxdeg + 1, B), dtype=complex)
        pw[:, 0] = 1
        for k in range(1, self._maxdeg + 1):
            pw[:, k] = pw[:, k - 1] * XT
        mon = np.ones((self._c.size, B), dtype=complex)
        for v, idx, ex in self._per_var:
            mon[idx] *= pw[v, ex]
        return np.asarray(self._S @ mon).T

    def values(self, X: np.ndarray) -> np.ndarray:
        return self._blocks(X)[:, : self.m]

    def values_and_jacobian(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        vals = self._blocks(X)
        B = vals.shape[0]
        jac = np.zeros((B, self.m, self.nvars), dtype=complex)
        if self._ji.size:
            jac[:, self._ji, self._jv] = vals[:, self.m :]
        return vals[:, : self.m], jac

    def coef_scale(self, X: np.ndarray) -> np.ndarray:
        """``|p|_1 max(1, |x|_inf)^deg p`` per polynomial; stays positive at the origin."""
        r = np.maximum(1.0, np.abs(np.asarray(X, dtype=complex)).max(axis=1))
        return self._l1[None, :] * r[:, None] ** self._deg[None, :]

    def abs_scale(self, X: np.ndarray) -> np.ndarray:
        """``sum |c| |x^e|`` per polynomial: the natural scale for relative residuals."""
        XT = np.abs(np.asarray(X, dtype=complex)).T
        mon = np.ones((self._c.size, XT.shape[1]))
        for v, idx, ex in self._per_var:
            mon[idx] *= XT[v][None, :] ** ex[:, None]
        return np.asarray(self._Sabs @ mon).T[:, : self.m]
