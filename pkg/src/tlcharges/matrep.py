"""The XXZ spin-chain representation of the periodic TL generators.

Sites are numbered 1..L; site 1 is the most significant bit of a basis index
and bit value 0 is spin up.  Monoid j acts on sites (j, j+1), monoid L on
(L, 1) with the twist applied to site 1.

Two scalar modes share one interface.  Exact mode (rational q and twist)
stores sparse matrices over QQ; float mode stores complex scipy sparse
matrices.  Transfer-matrix numerics are float only.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .charges import ChargeDensity, build_charge
from .poly import TauPoly

Scalar = Fraction | complex


class ChainTooShort(ValueError):
    pass


class TwistError(ValueError):
    pass


def parse_scalar(text: str) -> Scalar:
    """'p/r' or an integer gives a rational; 're,im' gives a complex number."""
    text = text.strip()
    if "," in text:
        re_, im_ = text.split(",")
        return complex(float(re_), float(im_))
    try:
        return Fraction(text)
    except ValueError:
        return complex(text.replace("i", "j"))


@dataclass(frozen=True)
class Twist:
    """Boundary twist S_{L+1} = T S_1 T^{-1}, with det T = 1."""

    kind: str
    entries: tuple[Scalar, Scalar, Scalar, Scalar] = (Fraction(1), Fraction(0), Fraction(0), Fraction(1))

    @classmethod
    def none(cls) -> "Twist":
        return cls("none")

    @classmethod
    def diagonal(cls, x: Scalar) -> "Twist":
        """T = diag(x, 1/x)."""
        if x == 0:
            raise TwistError("diagonal twist needs x != 0")
        x = Fraction(x) if isinstance(x, (int, Fraction)) else complex(x)
        return cls("diag", (x, _zero_like(x), _zero_like(x), 1 / x))

    @classmethod
    def true_twist(cls, f: complex | float) -> "Twist":
        """T = exp(f S^z) = diag(e^f, e^-f)."""
        x = cmath.exp(f)
        return cls("diag", (x, 0j, 0j, 1 / x))

    @classmethod
    def general(cls, a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> "Twist":
        det = a * d - b * c
        if isinstance(det, Fraction):
            if det != 1:
                raise TwistError(f"twist determinant is {det}, expected 1")
        elif abs(det - 1) > 1e-12:
            raise TwistError(f"twist determinant is {det}, expected 1")
        kind = "diag" if b == 0 and c == 0 else "general"
        return cls(kind, (a, b, c, d))

    @classmethod
    def parse(cls, spec: str) -> "Twist":
        spec = spec.strip()
        if spec in ("", "none"):
            return cls.none()
        kind, _, arg = spec.partition(":")
        if kind == "diag":
            return cls.diagonal(parse_scalar(arg))
        if kind == "exp":
            return cls.true_twist(complex(parse_scalar(arg)))
        if kind == "general":
            parts = [parse_scalar(x) for x in arg.split(",")]
            if len(parts) != 4:
                raise TwistError("general twist needs four entries a,b,c,d")
            return cls.general(*parts)
        raise TwistError(f"unknown twist {spec!r}")

    @property
    def is_diagonal(self) -> bool:
        return self.entries[1] == 0 and self.entries[2] == 0

    @property
    def is_exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.entries)

    @property
    def trace(self) -> Scalar:
        return self.entries[0] + self.entries[3]

    def matrix(self) -> list[list[Scalar]]:
        a, b, c, d = self.entries
        return [[a, b], [c, d]]

    def inverse(self) -> list[list[Scalar]]:
        a, b, c, d = self.entries
        return [[d, -b], [-c, a]]


def _zero_like(x):
    return Fraction(0) if isinstance(x, Fraction) else 0j


@dataclass(frozen=True)
class ChainParams:
    L: int
    q: Scalar
    twist: Twist = field(default_factory=Twist.none)

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("chain length must be >= 2")
        if self.q == 0:
            raise ValueError("q must be nonzero")
        if isinstance(self.q, int):
            object.__setattr__(self, "q", Fraction(self.q))

    @property
    def exact(self) -> bool:
        return isinstance(self.q, Fraction) and self.twist.is_exact

    @property
    def tau(self) -> Scalar:
        return -self.q - 1 / self.q

    def with_twist(self, twist: Twist) -> "ChainParams":
        return ChainParams(self.L, self.q, twist)


# ---- operators ------------------------------------------------------------

def _qq(x) -> object:
    x = Fraction(x)
    return QQ(x.numerator, x.denominator)


class SpinOperator:
    """A 2^L x 2^L operator, exact over QQ or complex floating."""

    __slots__ = ("L", "mat", "exact")

    def __init__(self, L: int, mat, exact: bool):
        self.L, self.mat, self.exact = L, mat, exact

    @property
    def dim(self) -> int:
        return 1 << self.L

    def _check(self, other: "SpinOperator"):
        if self.L != other.L or self.exact != other.exact:
            raise ValueError("operators live on different chains or scalar modes")

    def __add__(self, other: "SpinOperator") -> "SpinOperator":
        self._check(other)
        return SpinOperator(self.L, self.mat + other.mat, self.exact)

    def __sub__(self, other: "SpinOperator") -> "SpinOperator":
        self._check(other)
        return SpinOperator(self.L, self.mat - other.mat, self.exact)

    def __neg__(self) -> "SpinOperator":
        return SpinOperator(self.L, self.mat.neg() if self.exact else -self.mat, self.exact)

    def __matmul__(self, other: "SpinOperator") -> "SpinOperator":
        self._check(other)
        return SpinOperator(self.L, self.mat * other.mat if self.exact else self.mat @ other.mat, self.exact)

    def scale(self, c) -> "SpinOperator":
        if self.exact:
            return SpinOperator(self.L, self.mat * _qq(c), True)
        return SpinOperator(self.L, self.mat * complex(c), False)

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.exact:
            return self.mat.is_zero_matrix
        return self.norm() <= tol

    def norm(self) -> float:
        """Frobenius norm (as a float in both modes)."""
        if self.exact:
            return math.sqrt(sum(float(v) ** 2 for row in self.mat.rep.values() for v in row.values()))
        return float(sp.linalg.norm(self.mat)) if sp.issparse(self.mat) else float(np.linalg.norm(self.mat))

    def to_array(self) -> np.ndarray:
        if self.exact:
            out = np.zeros((self.dim, self.dim), dtype=complex)
            for r, row in self.mat.rep.items():
                for c, v in row.items():
                    out[r, c] = float(v)
            return out
        return self.mat.toarray() if sp.issparse(self.mat) else np.asarray(self.mat)

    def equals(self, other: "SpinOperator", tol: float = 0.0) -> bool:
        return (self - other).is_zero(tol)

    def __repr__(self):
        return f"SpinOperator(L={self.L}, {'exact' if self.exact else 'float'})"


def _build(L: int, entries: dict[tuple[int, int], object], exact: bool) -> SpinOperator:
    n = 1 << L
    if exact:
        rows: dict[int, dict[int, object]] = {}
        for (r, c), v in entries.items():
            if v:
                rows.setdefault(r, {})[c] = _qq(v)
        return SpinOperator(L, DomainMatrix(rows, (n, n), QQ), True)
    if not entries:
        return SpinOperator(L, sp.csr_matrix((n, n), dtype=complex), False)
    keys = list(entries)
    r = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
    c = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
    v = np.fromiter((complex(entries[k]) for k in keys), dtype=complex, count=len(keys))
    return SpinOperator(L, sp.csr_matrix((v, (r, c)), shape=(n, n)), False)


def identity(L: int, exact: bool) -> SpinOperator:
    return _build(L, {(s, s): 1 for s in range(1 << L)}, exact)


def zero(L: int, exact: bool) -> SpinOperator:
    return _build(L, {}, exact)


def _bit(L: int, site: int) -> int:
    return L - site


def two_site(L: int, a: int, b: int, local: Sequence[Sequence[Scalar]], exact: bool) -> SpinOperator:
    """Embed a 4x4 matrix on sites (a, b), local basis index 2*s_a + s_b."""
    if a == b:
        raise ValueError("two-site operator needs distinct sites")
    ba, bb = _bit(L, a), _bit(L, b)
    mask = ~((1 << ba) | (1 << bb))
    entries: dict[tuple[int, int], object] = {}
    cols = [[(o, local[o][i]) for o in range(4) if local[o][i] != 0] for i in range(4)]
    for s in range(1 << L):
        i = 2 * ((s >> ba) & 1) + ((s >> bb) & 1)
        base = s & mask
        for o, v in cols[i]:
            r = base | ((o >> 1) << ba) | ((o & 1) << bb)
            entries[r, s] = entries.get((r, s), 0) + v
    return _build(L, entries, exact)


def one_site(L: int, a: int, local: Sequence[Sequence[Scalar]], exact: bool) -> SpinOperator:
    ba = _bit(L, a)
    entries: dict[tuple[int, int], object] = {}
    for s in range(1 << L):
        i = (s >> ba) & 1
        for o in (0, 1):
            v = local[o][i]
            if v != 0:
                r = (s & ~(1 << ba)) | (o << ba)
                entries[r, s] = entries.get((r, s), 0) + v
    return _build(L, entries, exact)


def _kron2(a, b):
    return [[a[i // 2][j // 2] * b[i % 2][j % 2] for j in range(4)] for i in range(4)]


def _matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def _scalars(params: ChainParams):
    if params.exact:
        return Fraction(1), Fraction(0)
    return 1 + 0j, 0j


def monoid_local(params: ChainParams) -> list[list[Scalar]]:
    """e(j,k) on the two sites: [[-1/q, 1], [1, -q]] on {up-down, down-up}."""
    one, nil = _scalars(params)
    q = params.q if params.exact else complex(params.q)
    m = [[nil] * 4 for _ in range(4)]
    m[1][1] = -1 / q
    m[2][2] = -q
    m[1][2] = m[2][1] = one
    return m


def _boundary_conjugated(local, params: ChainParams):
    """(1 x T) local (1 x T^{-1}) in the (site L, site 1) basis."""
    one, nil = _scalars(params)
    eye = [[one, nil], [nil, one]]
    t, ti = params.twist.matrix(), params.twist.inverse()
    return _matmul(_matmul(_kron2(eye, t), local), _kron2(eye, ti))


def monoid_matrix(j: int, params: ChainParams) -> SpinOperator:
    # Fraction(3, 2) and 1.5 + 0j hash alike, so the mode joins the cache key.
    return _monoid_matrix(j, params, params.exact)


@lru_cache(maxsize=256)
def _monoid_matrix(j: int, params: ChainParams, exact: bool) -> SpinOperator:
    L = params.L
    if not 1 <= j <= L:
        raise ValueError(f"monoid index {j} outside 1..{L}")
    local = monoid_local(params)
    if j < L:
        return two_site(L, j, j + 1, local, params.exact)
    if params.twist.kind != "none":
        local = _boundary_conjugated(local, params)
    return two_site(L, L, 1, local, params.exact)


def tl_hamiltonian(params: ChainParams) -> SpinOperator:
    """H = -sum_j e_j."""
    total = zero(params.L, params.exact)
    for j in range(1, params.L + 1):
        total = total - monoid_matrix(j, params)
    return total


def _pauli(params: ChainParams):
    one, nil = _scalars(params)
    plus = [[nil, one], [nil, nil]]
    minus = [[nil, nil], [one, nil]]
    z = [[one, nil], [nil, -one]]
    return plus, minus, z


def _conj(m, params: ChainParams):
    return _matmul(_matmul(params.twist.matrix(), m), params.twist.inverse())


def xxz_hamiltonian(params: ChainParams) -> SpinOperator:
    """-1/2 sum_j (X X + Y Y - tau/2 (Z Z - 1)) with S_{L+1} = T S_1 T^{-1}.

    X X + Y Y is written as 2 (s+ s- + s- s+) so rational input stays rational.
    """
    L, exact = params.L, params.exact
    plus, minus, z = _pauli(params)
    one, nil = _scalars(params)
    eye = [[one, nil], [nil, one]]
    tau = params.tau
    total = zero(L, exact)
    for j in range(1, L + 1):
        if j < L:
            k, p2, m2, z2 = j + 1, plus, minus, z
        else:
            k = 1
            p2, m2, z2 = (_conj(x, params) for x in (plus, minus, z))
        hop = [[2 * (a + b) for a, b in zip(ra, rb)] for ra, rb in zip(_kron2(plus, m2), _kron2(minus, p2))]
        zz = _kron2(z, z2)
        ee = _kron2(eye, eye)
        local = [[hop[r][c] - tau / 2 * (zz[r][c] - ee[r][c]) for c in range(4)] for r in range(4)]
        local = [[x * (-one / 2) for x in row] for row in local]
        total = total + two_site(L, j, k, local, exact)
    return total


def boundary_difference(params: ChainParams) -> SpinOperator:
    """tl_hamiltonian - xxz_hamiltonian: -(q - 1/q)/4 (Z_1 - T Z_1 T^{-1})."""
    _, _, z = _pauli(params)
    tz = _conj(z, params)
    q = params.q
    c = -(q - 1 / q) / 4
    local = [[c * (z[r][s] - tz[r][s]) for s in range(2)] for r in range(2)]
    return one_site(params.L, 1, local, params.exact)


def shift_operator(L: int, exact: bool = True) -> SpinOperator:
    """rho, moving the state of site j to site j+1 (site L to site 1)."""
    entries = {}
    for s in range(1 << L):
        # bit of site j is at position L - j; site j -> j+1 is a right rotation
        r = (s >> 1) | ((s & 1) << (L - 1))
        entries[r, s] = 1
    return _build(L, entries, exact)


def staggered_product(params: ChainParams) -> SpinOperator:
    """E = e_1 e_3 ... e_{L-1}."""
    if params.L % 2:
        raise ValueError("E needs an even chain")
    out = monoid_matrix(1, params)
    for j in range(3, params.L, 2):
        out = out @ monoid_matrix(j, params)
    return out


# ---- relation checks ------------------------------------------------------

@dataclass
class RelationReport:
    params: ChainParams
    checks: dict[str, bool] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def record(self, name: str, passed: bool, detail: str):
        self.checks[name] = self.checks.get(name, True) and passed
        if not passed:
            self.failures.append(detail)

    def as_dict(self) -> dict:
        return {"ok": self.ok, "checks": self.checks, "failures": self.failures}


def relations_check(params: ChainParams, tol: float = 1e-10) -> RelationReport:
    """TL rules with indices mod L, and for the untwisted chain the shift rules."""
    L = params.L
    tol = 0.0 if params.exact else tol
    es = {j: monoid_matrix(j, params) for j in range(1, L + 1)}
    rep = RelationReport(params)
    scale = max(e.norm() for e in es.values())

    def close(a: SpinOperator, b: SpinOperator, s: float = 1.0) -> bool:
        return a.equals(b, tol * s)

    for j in range(1, L + 1):
        e = es[j]
        rep.record("square", close(e @ e, e.scale(params.tau), scale ** 2), f"e_{j}^2 != tau e_{j}")
        for m in (j % L + 1, (j - 2) % L + 1):
            f = es[m]
            rep.record("braid", close(e @ f @ e, e, scale ** 3), f"e_{j} e_{m} e_{j} != e_{j}")
        for m in range(1, L + 1):
            dist = min((j - m) % L, (m - j) % L)
            if dist > 1 and m > j:
                f = es[m]
                rep.record("commute", close(e @ f, f @ e, scale ** 2), f"[e_{j}, e_{m}] != 0")
    if params.twist.kind == "none":
        rho = shift_operator(L, params.exact)
        rho_inv = _transpose(rho)
        for j in range(1, L + 1):
            nxt = es[j % L + 1]
            rep.record("shift", close(rho @ es[j] @ rho_inv, nxt, scale), f"rho e_{j} rho^-1 != e_{j % L + 1}")
        e1 = es[1]
        lhs, rhs = e1 @ rho, e1 @ _power(rho, L + 1)
        rep.record("wrap", close(_power(lhs, L - 1), rhs, scale ** (L - 1)), "(e_1 rho)^(L-1) != e_1 rho^(L+1)")
        if L % 2 == 0:
            E = staggered_product(params)
            loop_weight = params.twist.trace
            rep.record("loop", close(E @ rho @ E, E.scale(loop_weight), scale ** L), "E rho E != tau' E")
    return rep


def _transpose(op: SpinOperator) -> SpinOperator:
    return SpinOperator(op.L, op.mat.transpose() if op.exact else op.mat.T.tocsr(), op.exact)


def _power(op: SpinOperator, n: int) -> SpinOperator:
    out = identity(op.L, op.exact)
    for _ in range(n):
        out = out @ op
    return out


# ---- charges --------------------------------------------------------------

def _poly_value(poly: TauPoly, params: ChainParams):
    tau = params.tau
    if params.exact:
        return sum((c * tau ** p for c, p in poly.terms()), Fraction(0))
    return sum(complex(c) * complex(tau) ** p for c, p in poly.terms())


def word_matrix(letters: Sequence[int], params: ChainParams, offset: int = 0) -> SpinOperator:
    """Operator product of monoids; TL index i is monoid ((i + offset) mod L) + 1."""
    out = None
    for i in letters:
        m = monoid_matrix((i + offset) % params.L + 1, params)
        out = m if out is None else out @ m
    return out if out is not None else identity(params.L, params.exact)


def charge_matrix(k: int, params: ChainParams, density: ChargeDensity | None = None) -> SpinOperator:
    """sum over classes and all L translations of D(q) times the word's matrix."""
    density = density if density is not None else build_charge(k)
    if params.L < density.k + 2:
        raise ChainTooShort(f"L = {params.L} < k + 2 = {density.k + 2}")
    total = zero(params.L, params.exact)
    for q, c in density.items():
        value = _poly_value(c, params)
        if not value:
            continue
        letters = q.letters()
        summed = zero(params.L, params.exact)
        for x in range(params.L):
            summed = summed + word_matrix(letters, params, x)
        total = total + summed.scale(value)
    return total


def commutator(a: SpinOperator, b: SpinOperator) -> SpinOperator:
    return a @ b - b @ a


def commutator_norm(a: SpinOperator, b: SpinOperator) -> float:
    """Frobenius norm of ab - ba; exactly 0.0 in exact mode iff the commutator vanishes."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    c = commutator(a, b)
    if c.exact and c.is_zero():
        return 0.0
    return c.norm()


def charge_operator(k: int, params: ChainParams, density: ChargeDensity | None = None) -> LinearOperator:
    """Matrix-free Q_k for long chains: words are applied monoid by monoid."""
    if params.exact:
        raise ValueError("the matrix-free path is float only")
    density = density if density is not None else build_charge(k)
    if params.L < density.k + 2:
        raise ChainTooShort(f"L = {params.L} < k + 2 = {density.k + 2}")
    mats = {j: monoid_matrix(j, params).mat for j in range(1, params.L + 1)}
    terms = []
    for q, c in density.items():
        value = _poly_value(c, params)
        if value:
            terms.append((value, q.letters()))
    n = 1 << params.L

    def apply(v):
        v = np.asarray(v, dtype=complex).reshape(n)
        out = np.zeros(n, dtype=complex)
        for value, letters in terms:
            for x in range(params.L):
                w = v
                for i in reversed(letters):
                    w = mats[(i + x) % params.L + 1] @ w
                out += value * w
        return out

    return LinearOperator((n, n), matvec=apply, dtype=complex)


def operator_commutator_residual(a: LinearOperator, b: LinearOperator, samples: int = 3,
                                 seed: int = 0) -> float:
    """max over random unit vectors of |(ab - ba) v| / (|a v'| |b v''| scale)."""
    rng = np.random.default_rng(seed)
    n = a.shape[0]
    worst = 0.0
    for _ in range(samples):
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        v /= np.linalg.norm(v)
        r = a.matvec(b.matvec(v)) - b.matvec(a.matvec(v))
        s = np.linalg.norm(a.matvec(v)) * np.linalg.norm(b.matvec(v)) or 1.0
        worst = max(worst, float(np.linalg.norm(r) / s))
    return worst


# ---- transfer matrix ------------------------------------------------------

def _bracket(x: complex) -> complex:
    return x - 1 / x


def _float_params(params: ChainParams) -> ChainParams:
    if not params.exact:
        return params
    a, b, c, d = (complex(x) for x in params.twist.entries)
    return ChainParams(params.L, complex(params.q), Twist(params.twist.kind, (a, b, c, d)))


def _dense_two_site(n_sites: int, a: int, b: int, local: np.ndarray) -> np.ndarray:
    return two_site(n_sites, a, b, local.tolist(), False).mat.toarray()


def r_matrix_local(z: complex, q: complex) -> np.ndarray:
    """R(z) = ([qz]+[z])/2 + ([qz]-[z])/2 Z Z + [q]/2 (X X + Y Y)."""
    s, d, h = (_bracket(q * z) + _bracket(z)) / 2, (_bracket(q * z) - _bracket(z)) / 2, _bracket(q)
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = r[3, 3] = s + d
    r[1, 1] = r[2, 2] = s - d
    r[1, 2] = r[2, 1] = h  # [q]/2 * 2
    return r


def transfer_matrix(z: complex, params: ChainParams) -> np.ndarray:
    """Tr_a (T_a^{-1} R_{a,1}(z) ... R_{a,L}(z)).

    With this product order the auxiliary twist that reproduces the boundary
    S_{L+1} = T S_1 T^{-1} of tl_hamiltonian is the inverse of T.
    """
    params = _float_params(params)
    if not params.twist.is_diagonal:
        raise TwistError("transfer matrix is built for diagonal twists only")
    L = params.L
    n_sites = L + 1
    # site 1 of the big chain is the auxiliary space, sites 2..L+1 the physical ones
    rl = r_matrix_local(z, complex(params.q))
    prod = np.eye(1 << n_sites, dtype=complex)
    t = np.array(params.twist.inverse(), dtype=complex)
    prod = one_site(n_sites, 1, t.tolist(), False).mat.toarray() @ prod
    for j in range(1, L + 1):
        prod = prod @ _dense_two_site(n_sites, 1, j + 1, rl)
    dim = 1 << L
    return np.trace(prod.reshape(2, dim, 2, dim), axis1=0, axis2=2)


@dataclass
class LogDerivReport:
    L: int
    commutator: float
    logderiv_error: float
    ok: bool

    def as_dict(self) -> dict:
        return {"L": self.L, "commutator": self.commutator, "logderiv_error": self.logderiv_error, "ok": self.ok}


def logderiv_matrix(params: ChainParams, h: float = 1e-4) -> np.ndarray:
    """z T'(z) T(z)^{-1} at z = 1 by a central difference."""
    t0 = transfer_matrix(1.0, params)
    deriv = (transfer_matrix(1 + h, params) - transfer_matrix(1 - h, params)) / (2 * h)
    return deriv @ np.linalg.inv(t0)


def expected_logderiv(params: ChainParams) -> np.ndarray:
    """The log-derivative in terms of H: (2 sum_j e_j + L (q + 1/q)) / [q]."""
    fp = _float_params(params)
    q = complex(fp.q)
    h = tl_hamiltonian(fp).to_array()
    return (-2 * h + fp.L * (q + 1 / q) * np.eye(1 << fp.L)) / _bracket(q)


def logderiv_check(params: ChainParams, h: float = 1e-4, samples: int = 3, seed: int = 0,
                   commute_tol: float = 1e-10, deriv_tol: float = 1e-6) -> LogDerivReport:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        z1, z2 = (cmath.exp(1j * rng.uniform(0, 2 * math.pi)) for _ in range(2))
        a, b = transfer_matrix(z1, params), transfer_matrix(z2, params)
        c = np.linalg.norm(a @ b - b @ a) / (np.linalg.norm(a) * np.linalg.norm(b))
        worst = max(worst, float(c))
    got, want = logderiv_matrix(params, h), expected_logderiv(params)
    err = float(np.linalg.norm(got - want) / np.linalg.norm(want))
    return LogDerivReport(params.L, worst, err, worst < commute_tol and err < deriv_tol)


def transfer_terms_numeric(k: int, params: ChainParams) -> list[np.ndarray]:
    """k-th b-derivatives of log Tr_a(prod_{j=0}^{L-1}(1 + b e_j) X_{a,1}...X_{a,L}) at b = 0.

    e_0 = e(a, 1) couples the auxiliary space to site 1 and stands leftmost.
    The b = 0 value is the cyclic shift; it commutes with the whole family and
    is divided out.  Other placements of the permutation do not give a
    commuting family.
    """
    params = _float_params(params)
    if params.twist.kind != "none":
        raise TwistError("numeric transfer terms are built for the untwisted chain")
    L = params.L
    n_sites = L + 1
    local = np.array(monoid_local(params), dtype=complex).tolist()
    gens = [two_site(n_sites, 1, 2, local, False).mat]
    gens += [two_site(n_sites, j + 1, j + 2, local, False).mat for j in range(1, L)]
    swap = np.zeros((4, 4))
    swap[0, 0] = swap[3, 3] = swap[1, 2] = swap[2, 1] = 1
    perm = sp.identity(1 << n_sites, dtype=complex, format="csr")
    for j in range(1, L + 1):
        perm = perm @ two_site(n_sites, 1, j + 1, swap.tolist(), False).mat
    coeffs = [sp.identity(1 << n_sites, dtype=complex, format="csr")]
    coeffs += [sp.csr_matrix((1 << n_sites,) * 2, dtype=complex) for _ in range(k)]
    for g in gens:
        for m in range(k, 0, -1):
            coeffs[m] = coeffs[m] + coeffs[m - 1] @ g
    dim = 1 << L
    traced = [np.trace((c @ perm).toarray().reshape(2, dim, 2, dim), axis1=0, axis2=2) for c in coeffs]
    base_inv = np.linalg.inv(traced[0])
    ys = [None] + [base_inv @ t for t in traced[1:]]
    return [math.factorial(power) * _log_coefficient(ys, power) for power in range(1, k + 1)]


def _log_coefficient(ys: list, power: int) -> np.ndarray:
    """[b^power] log(1 + Y), Y = sum_m b^m ys[m]."""
    dim = ys[1].shape[0]
    layer = {p: ys[p] for p in range(1, power + 1)}
    total = np.zeros((dim, dim), dtype=complex)
    n = 1
    while layer:
        if power in layer:
            total += ((-1) ** (n + 1) / n) * layer[power]
        nxt: dict[int, np.ndarray] = {}
        for m in range(1, power + 1):
            for p, term in layer.items():
                if p + m <= power:
                    prod = ys[m] @ term
                    nxt[p + m] = nxt[p + m] + prod if p + m in nxt else prod
        layer = nxt
        n += 1
    return total


def span_residual(target: np.ndarray, basis: Sequence[np.ndarray]) -> float:
    """Relative least-squares residual of target in the span of basis."""
    a = np.stack([b.ravel() for b in basis], axis=1)
    y = target.ravel()
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    return float(np.linalg.norm(a @ coef - y) / np.linalg.norm(y))
