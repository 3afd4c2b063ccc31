"""Discrepancy of torus sequences, the Erdos-Turan-Koksma bound, exponent search and prime witness search."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import QQ, Poly, symbols
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_factor_sqf, gf_pow_mod

from ..core.characters import (
    AdditiveCharacter,
    MultiplicativeCharacter,
    RationalAngle,
    character_order,
    chi_eval,
    psi_eval,
)
from ..core.errors import IndependencePrecheckFailed, NoPrimesFound, NotIrreducible
from ..core.field import FieldDescriptor, make_field
from ..core.primes import prime_range
from ..dsl.ast import RationalPoly, WitnessSpec
from .geometry import height_vectors
from .runner import map_fields

logger = logging.getLogger(__name__)

DEFAULT_EXACT_2D_POINTS = 1024
DEFAULT_GRID_RESOLUTION = 32
DEFAULT_INDEPENDENCE_HEIGHT = 2
# exponents tested per vectorized block
_SEARCH_BLOCK = 2**16
# exponential-sum evaluations per block in etk_bound
_ETK_BLOCK = 2**22
# largest frequency box enumerated for the failure horizon
_HORIZON_VECTORS = 10**6
# boxes evaluated at once by the grid lower bound
_GRID_BOXES = 4 * 10**6

_X = symbols("X")

Coordinate = Union[Fraction, float]


def _angle(value: Union[RationalAngle, Fraction, int]) -> Fraction:
    frac = value.fraction if isinstance(value, RationalAngle) else Fraction(value)
    return frac % 1


def angle_order(value: Fraction) -> int:
    """Multiplicative order of e^{2 pi i value}."""
    return (Fraction(value) % 1).denominator


def circular_distance(a: Fraction, b: Fraction) -> Fraction:
    gap = (Fraction(a) - Fraction(b)) % 1
    return min(gap, 1 - gap)


# torus sequences and boxes


@dataclass(frozen=True)
class TorusSequence:
    """Finite sequence of points of [0,1)^dim."""

    dim: int
    points: Tuple[Tuple[Coordinate, ...], ...]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"Torus dimension must be >= 1, got {self.dim}")
        for pt in self.points:
            if len(pt) != self.dim:
                raise ValueError(f"Point {pt} does not have dimension {self.dim}")
            if any(not 0 <= x < 1 for x in pt):
                raise ValueError(f"Point {pt} lies outside [0,1)^{self.dim}")

    @classmethod
    def of(cls, points: Iterable[Sequence[Coordinate]]) -> "TorusSequence":
        pts = tuple(tuple(p) for p in points)
        if not pts:
            raise ValueError("A torus sequence needs at least one point")
        return cls(len(pts[0]), pts)

    @classmethod
    def kronecker(cls, alpha: Sequence[float], n: int) -> "TorusSequence":
        """x_i = i * alpha mod 1 for i = 1..n."""
        coords = np.outer(np.arange(1, n + 1, dtype=np.float64), np.asarray(alpha, dtype=np.float64)) % 1.0
        return cls(len(alpha), tuple(tuple(float(x) for x in row) for row in coords))

    @classmethod
    def multiples(cls, gammas: Sequence[Fraction], n: int, step: int = 1, offset: int = 0) -> "TorusSequence":
        """Exact points ((k*step + offset) * gamma mod 1) for k = 1..n."""
        return cls(
            len(gammas),
            tuple(tuple((Fraction(k * step + offset) * g) % 1 for g in gammas) for k in range(1, n + 1)),
        )

    def __len__(self) -> int:
        return len(self.points)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(x, (Fraction, int)) for pt in self.points for x in pt)

    def as_array(self) -> np.ndarray:
        return np.array([[float(x) for x in pt] for pt in self.points], dtype=np.float64).reshape(len(self), self.dim)


@dataclass(frozen=True)
class TorusBox:
    """Product of arcs [low, high) of the circle; low > high wraps through 0.

    closed boxes include their upper ends. low = 0, high = 1 is the whole circle.
    """

    low: Tuple[Fraction, ...]
    high: Tuple[Fraction, ...]
    closed: bool = False

    def __post_init__(self) -> None:
        if len(self.low) != len(self.high):
            raise ValueError("Box corners have different dimensions")
        for a, b in zip(self.low, self.high):
            if not (0 <= a <= 1 and 0 <= b <= 1):
                raise ValueError(f"Box bounds must lie in [0, 1], got [{a}, {b})")

    @classmethod
    def full(cls, dim: int) -> "TorusBox":
        return cls((Fraction(0),) * dim, (Fraction(1),) * dim)

    @classmethod
    def around(cls, centers: Sequence[Fraction], radius: Fraction) -> "TorusBox":
        """Closed arcs of circular radius around each center; radius >= 1/2 covers the circle."""
        radius = Fraction(radius)
        if radius >= Fraction(1, 2):
            return cls.full(len(centers))
        low = tuple((Fraction(c) - radius) % 1 for c in centers)
        high = tuple((Fraction(c) + radius) % 1 for c in centers)
        return cls(low, high, closed=True)

    @property
    def dim(self) -> int:
        return len(self.low)

    def _arc_length(self, a: Fraction, b: Fraction) -> Fraction:
        if a == 0 and b == 1:
            return Fraction(1)
        return (b - a) % 1 if a != b else Fraction(0)

    @property
    def volume(self) -> Fraction:
        vol = Fraction(1)
        for a, b in zip(self.low, self.high):
            vol *= self._arc_length(a, b)
        return vol

    def _arc_contains(self, a: Fraction, b: Fraction, x: Fraction) -> bool:
        upper = x <= b if self.closed else x < b
        if a <= b:
            return a <= x and upper
        return a <= x or upper

    def contains(self, point: Sequence[Fraction]) -> bool:
        return all(self._arc_contains(a, b, Fraction(x) % 1) for a, b, x in zip(self.low, self.high, point))


@dataclass(frozen=True)
class ETKParams:
    H: int
    c_d: Optional[float] = None

    def __post_init__(self) -> None:
        if self.H < 1:
            raise ValueError(f"ETK frequency bound H must be >= 1, got {self.H}")
        if self.c_d is not None and self.c_d <= 0:
            raise ValueError("ETK constant must be positive")

    def constant(self, dim: int) -> float:
        """C_d, (3/2)^d unless configured."""
        return self.c_d if self.c_d is not None else 1.5**dim


# discrepancy


def _discrepancy_1d(values: Sequence[Coordinate]) -> Coordinate:
    """Extreme discrepancy in one dimension: 1/n + max(i/n - x_(i)) - min(i/n - x_(i))."""
    ordered = sorted(values)
    n = len(ordered)
    exact = all(isinstance(x, (Fraction, int)) for x in ordered)
    gaps = [Fraction(i + 1, n) - x if exact else (i + 1) / n - x for i, x in enumerate(ordered)]
    return (Fraction(1, n) if exact else 1 / n) + max(gaps) - min(gaps)


def _discrepancy_2d(coords: np.ndarray) -> float:
    """Sup over all half-open boxes, through closed and open limits of boxes with corners on the sample."""
    n = coords.shape[0]
    cx = np.unique(np.concatenate([coords[:, 0], [0.0, 1.0]]))
    cy = np.unique(np.concatenate([coords[:, 1], [0.0, 1.0]]))
    rx = np.searchsorted(cx, coords[:, 0])
    ry = np.searchsorted(cy, coords[:, 1])
    grid = np.zeros((len(cx) + 1, len(cy) + 1), dtype=np.int64)
    np.add.at(grid, (rx + 1, ry + 1), 1)
    # padded[j + 1, r + 1] = #points with x-rank <= j and y-rank <= r
    padded = grid.cumsum(axis=0).cumsum(axis=1)

    best = 0.0
    for i in range(len(cx)):
        widths = cx[i:] - cx[i]
        # closed x-window [cx_i, cx_j]
        closed = (padded[i + 1 :, :] - padded[i, :]) / n
        at_or_below = closed[:, 1:] - np.outer(widths, cy)
        below = closed[:, :-1] - np.outer(widths, cy)
        surplus = at_or_below - np.minimum.accumulate(below, axis=1)
        best = max(best, float(surplus.max()))
        if i + 1 >= len(cx):
            continue
        # open x-window (cx_i, cx_j) for j > i
        inner = (padded[i + 1 : -1, :] - padded[i + 1, :]) / n
        w = widths[1:]
        lower = np.outer(w, cy) - inner[:, 1:]
        upper = np.outer(w, cy) - inner[:, :-1]
        prefix_min = np.minimum.accumulate(lower, axis=1)
        deficit = upper[:, 1:] - prefix_min[:, :-1]
        if deficit.size:
            best = max(best, float(deficit.max()))
    return min(best, 1.0)


def _discrepancy_grid(coords: np.ndarray, resolution: int) -> float:
    """Lower bound over half-open boxes whose corners are coordinate quantiles."""
    n, dim = coords.shape
    while resolution > 1 and ((resolution + 2) * (resolution + 1) // 2) ** dim > _GRID_BOXES:
        resolution //= 2
    levels = np.linspace(0.0, 1.0, resolution + 1)
    edges = [np.unique(np.concatenate([np.quantile(coords[:, k], levels), [0.0, 1.0]])) for k in range(dim)]
    counts, _ = np.histogramdd(coords, bins=edges)
    prefix = np.zeros(tuple(len(e) for e in edges))
    prefix[tuple(slice(1, None) for _ in range(dim))] = counts
    for axis in range(dim):
        prefix = prefix.cumsum(axis=axis)

    pairs = []
    for e in edges:
        lo, hi = np.triu_indices(len(e), k=1)
        pairs.append((lo, hi, e[hi] - e[lo]))
    totals = np.zeros(tuple(len(p[0]) for p in pairs))
    for corner in range(2**dim):
        picks = [pairs[k][1] if corner >> k & 1 else pairs[k][0] for k in range(dim)]
        sign = (-1) ** (dim - bin(corner).count("1"))
        totals = totals + sign * prefix[np.ix_(*picks)]
    volume = np.ones_like(totals)
    for k in range(dim):
        shape = [1] * dim
        shape[k] = -1
        volume = volume * pairs[k][2].reshape(shape)
    return float(np.abs(totals / n - volume).max())


def discrepancy_mode(X: TorusSequence, exact_max_points: int = DEFAULT_EXACT_2D_POINTS) -> str:
    if X.dim == 1 or (X.dim == 2 and len(X) <= exact_max_points):
        return "exact"
    return "grid"


def discrepancy(
    X: TorusSequence,
    exact_max_points: int = DEFAULT_EXACT_2D_POINTS,
    grid_resolution: int = DEFAULT_GRID_RESOLUTION,
) -> Coordinate:
    """Discrepancy sup_B | |B cap X|/n - vol(B) | over half-open boxes B.

    Exact in one dimension (a Fraction for exact input) and in two dimensions up to
    exact_max_points points; otherwise a lower bound over quantile-grid boxes.
    """
    if X.dim == 1:
        return _discrepancy_1d([pt[0] for pt in X.points])
    coords = X.as_array()
    if discrepancy_mode(X, exact_max_points) == "exact":
        return _discrepancy_2d(coords)
    logger.debug("Grid discrepancy for %d points in dimension %d", len(X), X.dim)
    return _discrepancy_grid(coords, grid_resolution)


def _frequencies(dim: int, H: int) -> np.ndarray:
    """Nonzero h with |h|_inf <= H, one of each pair +-h."""
    return np.array(list(height_vectors(dim, H)), dtype=np.float64).reshape(-1, dim)


def etk_bound(X: TorusSequence, params: ETKParams) -> float:
    """C_d (1/H + sum over 0 < |h|_inf <= H of |mean of e^{2 pi i <h, x>}| / z(h))."""
    coords = X.as_array()
    n = len(X)
    freqs = _frequencies(X.dim, params.H)
    weights = 1.0 / np.prod(np.maximum(1.0, np.abs(freqs)), axis=1)
    block = max(1, _ETK_BLOCK // max(n, 1))
    total = 0.0
    for start in range(0, len(freqs), block):
        phases = freqs[start : start + block] @ coords.T
        sums = np.abs(np.exp(2j * np.pi * phases).sum(axis=1)) / n
        total += float((weights[start : start + block] * sums).sum())
    # the pairs h, -h give equal moduli
    return params.constant(X.dim) * (1.0 / params.H + 2.0 * total)


# exponent search


def independence_relation(gammas: Sequence[Fraction], height: int) -> Optional[Tuple[int, ...]]:
    """First nonzero integer vector of height <= height with sum alpha_i gamma_i = 0 mod 1."""
    if not gammas:
        return None
    for alpha in height_vectors(len(gammas), height):
        if sum((a * g for a, g in zip(alpha, gammas)), Fraction(0)).denominator == 1:
            return alpha
    return None


@dataclass(frozen=True)
class ExponentResult:
    l: int  # noqa: E741
    point: Tuple[Fraction, ...]
    orders: Tuple[int, ...]

    found = True

    def as_dict(self) -> Dict[str, object]:
        return {"found": True, "l": self.l, "point": [str(x) for x in self.point], "orders": list(self.orders)}


@dataclass(frozen=True)
class ExponentFailure:
    l_max: int
    horizon: Optional[float]

    found = False

    def as_dict(self) -> Dict[str, object]:
        return {"found": False, "l_max": self.l_max, "horizon": self.horizon}


def failure_horizon(gammas: Sequence[Fraction], box: TorusBox, R: int, c_d: Optional[float] = None) -> Optional[float]:
    """Search length after which the ETK bound forces a hit of the box along l = kR + f.

    With H = ceil(2 C_d / vol) the bound drops below vol once n > C_d S / (vol - C_d/H), where
    S = sum over 0 < |h| <= H of 1 / (z(h) |sin pi <h, R gamma>|). None when a frequency is resonant.
    """
    dim = len(gammas)
    vol = float(box.volume)
    if vol <= 0 or dim == 0:
        return None
    C = c_d if c_d is not None else 1.5**dim
    H = math.ceil(2 * C / vol)
    if (2 * H + 1) ** dim > _HORIZON_VECTORS:
        return None
    total = 0.0
    step = [Fraction(R) * g for g in gammas]
    for h in height_vectors(dim, H):
        theta = sum((a * s for a, s in zip(h, step)), Fraction(0)) % 1
        if theta == 0:
            return None
        z = math.prod(max(1, abs(a)) for a in h)
        total += 2.0 / (z * abs(math.sin(math.pi * float(theta))))
    return C * total / (vol - C / H)


def _verify_exponent(
    gammas: Sequence[Fraction], box: TorusBox, R: int, f: int, K: int, exponent: int
) -> ExponentResult:
    point = tuple((exponent * g) % 1 for g in gammas)
    orders = tuple(angle_order(x) for x in point)
    if exponent % R != f % R or not box.contains(point) or max(orders, default=1) < K:
        raise AssertionError(f"Exponent {exponent} does not satisfy the search constraints")
    return ExponentResult(exponent, point, orders)


def _scan_python(gammas: Sequence[Fraction], box: TorusBox, R: int, f: int, K: int, l_max: int) -> Optional[int]:
    for exponent in range(f, l_max + 1, R):
        point = tuple((exponent * g) % 1 for g in gammas)
        if box.contains(point) and max((angle_order(x) for x in point), default=1) >= K:
            return exponent
    return None


def _scan_numpy(
    gammas: Sequence[Fraction], box: TorusBox, R: int, f: int, K: int, l_max: int, D: int
) -> Optional[int]:
    nums = np.array([int(g * D) for g in gammas], dtype=np.int64)
    for start in range(f, l_max + 1, R * _SEARCH_BLOCK):
        ls = np.arange(start, min(l_max, start + R * (_SEARCH_BLOCK - 1)) + 1, R, dtype=np.int64)
        x = (ls[:, None] % D) * nums[None, :] % D
        mask = np.ones(len(ls), dtype=bool)
        for k, (a, b) in enumerate(zip(box.low, box.high)):
            col = x[:, k]
            lower = col * a.denominator >= a.numerator * D
            scaled = col * b.denominator
            upper = scaled <= b.numerator * D if box.closed else scaled < b.numerator * D
            mask &= (lower & upper) if a <= b else (lower | upper)
        for idx in np.flatnonzero(mask):
            orders = [D // math.gcd(int(v), D) for v in x[idx]]
            if max(orders, default=1) >= K:
                return int(ls[idx])
    return None


def exponent_search(
    gammas: Sequence[Union[Fraction, RationalAngle]],
    box: TorusBox,
    R: int = 1,
    f: int = 1,
    K: int = 1,
    l_max: int = 10**6,
    independence_height: int = DEFAULT_INDEPENDENCE_HEIGHT,
    c_d: Optional[float] = None,
) -> Union[ExponentResult, ExponentFailure]:
    """Smallest l <= l_max with l = f mod R, l * gamma in the box and max order of l * gamma_i >= K.

    Raises:
        IndependencePrecheckFailed: a small integer relation among the gammas
    """
    if not 1 <= f <= R:
        raise ValueError(f"Residue f must satisfy 1 <= f <= R, got f={f}, R={R}")
    angles = [_angle(g) for g in gammas]
    if len(angles) != box.dim:
        raise ValueError(f"{len(angles)} angles searched in a box of dimension {box.dim}")
    relation = independence_relation(angles, independence_height)
    if relation is not None:
        raise IndependencePrecheckFailed(relation)

    D = math.lcm(*(g.denominator for g in angles)) if angles else 1
    bound_den = max((x.denominator for x in box.low + box.high), default=1)
    if D < 2**31 and D * bound_den < 2**62 // max(D, 1):
        exponent = _scan_numpy(angles, box, R, f, K, l_max, D)
    else:
        exponent = _scan_python(angles, box, R, f, K, l_max)
    if exponent is None:
        horizon = failure_horizon(angles, box, R, c_d)
        logger.debug("No exponent up to %d; predicted horizon %s", l_max, horizon)
        return ExponentFailure(l_max, horizon)
    return _verify_exponent(angles, box, R, f, K, exponent)


# witness search


@dataclass(frozen=True)
class WitnessRecord:
    p: int
    root: int
    additive_exponent: int
    multiplicative_exponent: int
    mult_angles: Tuple[Fraction, ...]
    add_angles: Tuple[Fraction, ...]
    order: int
    verified: bool

    def as_dict(self) -> Dict[str, object]:
        return {
            "p": self.p,
            "root": self.root,
            "additive_exponent": self.additive_exponent,
            "multiplicative_exponent": self.multiplicative_exponent,
            "mult_angles": [str(a) for a in self.mult_angles],
            "add_angles": [str(a) for a in self.add_angles],
            "order": self.order,
            "verified": self.verified,
        }


@dataclass
class WitnessScan:
    records: List[WitnessRecord] = field(default_factory=list)
    split_primes: int = 0
    scanned: int = 0


def check_irreducible(poly: RationalPoly) -> None:
    """Raises NotIrreducible unless poly is irreducible over Q."""
    if poly.degree < 1:
        raise NotIrreducible("A minimal polynomial needs degree >= 1")
    sym = Poly(list(reversed(poly.coeffs)), _X, domain=QQ)
    if not sym.is_irreducible:
        raise NotIrreducible(f"{sym.as_expr()} is reducible over Q")


def _reduce(poly: RationalPoly, p: int) -> List[int]:
    """Monic reduction mod p, coefficients high degree first."""
    coeffs = [c.numerator * pow(c.denominator, -1, p) % p for c in reversed(poly.coeffs)]
    lead = pow(coeffs[0], -1, p)
    return [c * lead % p for c in coeffs]


def split_roots(poly: RationalPoly, p: int) -> Optional[List[int]]:
    """Roots mod p when poly splits into distinct linear factors over F_p, else None."""
    if any(d % p == 0 for d in poly.denominators()) or poly.coeffs[-1].numerator % p == 0:
        return None
    f = _reduce(poly, p)
    if len(f) == 2:
        return [(-f[1]) % p]
    if gf_pow_mod([1, 0], p, f, p, ZZ) != [1, 0]:
        return None
    _, factors = gf_factor_sqf(f, p, ZZ)
    return sorted((-int(g[1])) % p for g in factors)


def _denominators(spec: WitnessSpec) -> List[int]:
    polys = [spec.min_poly] + [t.poly for t in spec.mult_targets + spec.add_targets]
    if spec.unity.lam is not None:
        polys.append(spec.unity.lam)
    return [d for poly in polys for d in poly.denominators()]


def _residue(spec: WitnessSpec, desc: FieldDescriptor, root: int) -> Optional[Tuple[int, int]]:
    """(R, f) for the exponent congruence, fixed by the witness declaration or derived from chi(lambda_R) = s_R.

    Without a residue or a target the exponent is unconstrained, (1, 1).
    """
    unity = spec.unity
    if unity.residue is not None:
        return unity.modulus, unity.residue
    if unity.lam is None or unity.target is None:
        return 1, 1
    lam = desc.element(unity.lam.evaluate_mod(desc.p, root))
    if lam.is_zero():
        return None
    base = Fraction(desc.dlog(lam), desc.p - 1)
    for f in range(1, unity.modulus + 1):
        if (f * base - unity.target) % 1 == 0:
            return unity.modulus, f
    return None


def verify_witness(spec: WitnessSpec, record: WitnessRecord) -> bool:
    """Re-evaluate every constraint of the witness declaration by direct character evaluation at the record."""
    p = record.p
    desc = make_field(p, table=False)
    if spec.min_poly.evaluate_mod(p, record.root) != 0:
        return False
    chi = MultiplicativeCharacter(record.multiplicative_exponent % (p - 1))
    psi = AdditiveCharacter(desc.element(record.additive_exponent))
    for target in spec.mult_targets:
        value = chi_eval(desc, chi, desc.element(target.poly.evaluate_mod(p, record.root)))
        if value.angle is None or circular_distance(value.angle.fraction, target.angle) > spec.tolerance:
            return False
    for target in spec.add_targets:
        angle = psi_eval(desc, psi, desc.element(target.poly.evaluate_mod(p, record.root)))
        if circular_distance(angle.fraction, target.angle) > spec.tolerance:
            return False
    unity = spec.unity
    if unity.lam is not None and unity.target is not None:
        value = chi_eval(desc, chi, desc.element(unity.lam.evaluate_mod(p, record.root)))
        if value.angle is None or value.angle.fraction != Fraction(unity.target) % 1:
            return False
    if unity.residue is not None and record.multiplicative_exponent % unity.modulus != unity.residue % unity.modulus:
        return False
    if spec.add_targets and psi.is_trivial():
        return False
    return character_order(desc, chi) >= spec.min_order


def _witness_at(p: int, spec: WitnessSpec, independence_height: int) -> Tuple[bool, Optional[WitnessRecord]]:
    """(splits, record) for one prime."""
    R = spec.unity.modulus
    if (p - 1) % R != 0 or any(d % p == 0 for d in _denominators(spec)):
        return False, None
    roots = split_roots(spec.min_poly, p)
    if roots is None:
        return False, None
    desc = make_field(p, table=False)
    for root in roots:
        record = _search_root(desc, spec, root, independence_height)
        if record is not None:
            return True, record
    return True, None


def _search_root(
    desc: FieldDescriptor, spec: WitnessSpec, root: int, independence_height: int
) -> Optional[WitnessRecord]:
    p = desc.p
    n = p - 1
    congruence = _residue(spec, desc, root)
    if congruence is None:
        return None
    R, f = congruence

    images = [target.poly.evaluate_mod(p, root) for target in spec.mult_targets]
    if any(v == 0 for v in images):
        return None
    gammas = [Fraction(desc.dlog(desc.element(v)), n) for v in images]
    box = TorusBox.around([t.angle for t in spec.mult_targets], spec.tolerance)
    try:
        found = exponent_search(gammas, box, R, f, 1, n + R, independence_height)
    except IndependencePrecheckFailed as exc:
        logger.debug("p=%d: multiplicative images satisfy %s", p, exc.relation)
        return None
    r: Optional[int] = None
    if isinstance(found, ExponentResult):
        # smallest exponent in the class meeting the targets; raise it along its own class until the order bound holds
        for candidate in range(found.l, n + R + 1, R):
            point = tuple((candidate * g) % 1 for g in gammas)
            if box.contains(point) and n // math.gcd(candidate, n) >= spec.min_order:
                r = candidate
                break
    if r is None:
        return None

    c = 1
    add_angles: Tuple[Fraction, ...] = ()
    if spec.add_targets:
        values = [target.poly.evaluate_mod(p, root) for target in spec.add_targets]
        add_gammas = [Fraction(v, p) for v in values]
        add_box = TorusBox.around([t.angle for t in spec.add_targets], spec.tolerance)
        try:
            additive = exponent_search(add_gammas, add_box, 1, 1, 2, p - 1, independence_height)
        except IndependencePrecheckFailed:
            return None
        if not isinstance(additive, ExponentResult):
            return None
        c = additive.l
        add_angles = additive.point

    mult_angles = tuple((r * g) % 1 for g in gammas)
    order = n // math.gcd(r, n)
    record = WitnessRecord(p, root, c, r, mult_angles, add_angles, order, False)
    return WitnessRecord(p, root, c, r, mult_angles, add_angles, order, verify_witness(spec, record))


def witness_search(
    spec: WitnessSpec,
    primes: Optional[Sequence[int]] = None,
    max_records: Optional[int] = None,
    independence_height: int = DEFAULT_INDEPENDENCE_HEIGHT,
    workers: int = 1,
) -> List[WitnessRecord]:
    """Primes where the minimal polynomial splits, with character exponents meeting the declared targets.

    Multiplicative targets are matched first, then additive targets. Every record is re-verified.

    Raises:
        NotIrreducible: the minimal polynomial is reducible over Q
        NoPrimesFound: no prime in range splits the minimal polynomial
    """
    check_irreducible(spec.min_poly)
    if primes is None:
        low = spec.prime_low if spec.prime_low is not None else 2
        high = spec.prime_high if spec.prime_high is not None else 10**4
        primes = prime_range(low, high)
    primes = sorted(primes)
    scan = WitnessScan()
    func = partial(_witness_at, spec=spec, independence_height=independence_height)
    batch = max(64, 8 * workers)
    for start in range(0, len(primes), batch):
        chunk = primes[start : start + batch]
        for splits, record in map_fields(func, chunk, workers):
            scan.scanned += 1
            scan.split_primes += int(splits)
            if record is not None:
                scan.records.append(record)
                if max_records is not None and len(scan.records) >= max_records:
                    break
        if max_records is not None and len(scan.records) >= max_records:
            break
    if scan.split_primes == 0:
        raise NoPrimesFound(f"The minimal polynomial splits at no prime of the {len(primes)} scanned")
    logger.info(
        "Witness search: %d records from %d split primes of %d scanned",
        len(scan.records),
        scan.split_primes,
        scan.scanned,
    )
    return scan.records
