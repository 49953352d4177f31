"""
The 729-member family of complexity metrics.

Each variant is a choice of six exponents in {-1, 0, 1} for the coupled
country/product equations

    K_c = (sum_p M_cp K_p**alpha)**gamma / (sum_p M_cp)**epsilon
    K_p = (sum_c M_cp K_c**beta)**delta / (sum_c M_cp)**theta

All exponents set to 1 gives the original averaging ECI (variant 729); the
fitness-complexity map is (1, -1, 1, -1, 0, 0), variant 545.

The iteration is synchronous: both K_c(n+1) and K_p(n+1) are computed from
generation n. Variants are evaluated in batches, one column per variant, so a
whole sweep year is a handful of sparse-dense products per step.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, fields
from typing import IO, Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
import scipy.sparse as sp

from .matrix_builder import WeightMatrix

N_VARIANTS = 729
ORIGINAL_ECI = 729
FITNESS = 545
EXPONENT_NAMES = ("alpha", "beta", "gamma", "delta", "epsilon", "theta")

STD_FLOOR = 1e-15
# squared deviations must stay clear of subnormals in the convergence tests
DEVIATION_FLOOR = 1e-140
# deviations below 2**-400 are multiplied by 2**300; there 1 + d == 1, so the
# update is exactly linear and the power-of-two shift changes no digits
RESCALE_BELOW = 2.0 ** -400
RESCALE_BY = 300


class NonFiniteIterationError(FloatingPointError):
    def __init__(self, variant: int, iteration: int):
        super().__init__("variant %d produced a non-finite or zero value at iteration %d" % (variant, iteration))
        self.variant = variant
        self.iteration = iteration


@dataclass(frozen=True)
class VariantSpec:
    alpha: int
    beta: int
    gamma: int
    delta: int
    epsilon: int
    theta: int

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v not in (-1, 0, 1) or isinstance(v, bool):
                raise ValueError("%s must be -1, 0 or 1, got %r" % (f.name, v))

    def as_tuple(self) -> tuple[int, ...]:
        return (self.alpha, self.beta, self.gamma, self.delta, self.epsilon, self.theta)

    @property
    def index(self) -> int:
        return spec_to_index(self)

    @classmethod
    def from_index(cls, index: int) -> "VariantSpec":
        return index_to_spec(index)

    def __str__(self):
        return "(%s)" % ",".join(str(v) for v in self.as_tuple())


def spec_to_index(spec: VariantSpec) -> int:
    """1-based position of ``spec`` when each exponent loops -1, 0, 1 with alpha outermost."""
    value = 0
    for v in spec.as_tuple():
        value = 3 * value + (v + 1)
    return value + 1


def index_to_spec(index: int) -> VariantSpec:
    if isinstance(index, bool) or not isinstance(index, (int, np.integer)):
        raise TypeError("variant index must be an integer, got %r" % (index,))
    if not 1 <= index <= N_VARIANTS:
        raise ValueError("variant index must be in 1..%d, got %d" % (N_VARIANTS, index))
    rest = int(index) - 1
    digits = []
    for _ in range(6):
        rest, d = divmod(rest, 3)
        digits.append(d - 1)
    return VariantSpec(*reversed(digits))


def all_variants() -> list[VariantSpec]:
    return [VariantSpec(*t) for t in itertools.product((-1, 0, 1), repeat=6)]


@dataclass(frozen=True)
class IterationOptions:
    max_iterations: int = 200
    convergence_tolerance: float = 1e-10
    degeneracy_threshold: float = 1e-12

    def __post_init__(self):
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 2:
            raise ValueError("max_iterations must be an integer >= 2")
        if not self.convergence_tolerance > 0 or not self.degeneracy_threshold > 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True, eq=False)
class ComplexityScores:
    """Standardized scores of one variant on one weight matrix.

    ``status`` is one of ``converged``, ``collapsed`` (the raw vector flattened
    towards a constant after being informative; the last informative iterate
    is kept), ``max_iterations``, ``degenerate`` or ``overflow``.
    ``raw_k_c``/``raw_k_p`` hold the mean-one values the scores were derived from.
    """

    variant: VariantSpec
    year: int
    mode: str
    countries: tuple[str, ...]
    products: tuple[str, ...]
    k_c: np.ndarray
    k_p: np.ndarray
    converged: bool
    degenerate: bool
    iterations_used: int
    status: str
    raw_k_c: np.ndarray
    raw_k_p: np.ndarray

    @property
    def index(self) -> int:
        return spec_to_index(self.variant)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.countries, self.k_c.tolist()))


def zscore(values: Sequence[float]) -> np.ndarray | None:
    """Standardize to mean 0 and population std 1; ``None`` for constant input."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("zscore needs a 1-d sequence of at least 2 values")
    d = x - x.mean()
    # second pass removes the rounding error of the first mean
    d -= d.mean()
    sd = np.sqrt(np.mean(d * d))
    if not sd >= STD_FLOOR:
        return None
    return d / sd


def _orientation_reference(w: WeightMatrix, axis: int) -> np.ndarray:
    # share rows all sum to one; fall back to entry counts when the weighted sum is flat
    ref = w.diversity if axis == 1 else w.ubiquity
    if ref.std() < STD_FLOOR * max(1.0, abs(ref.mean())):
        m = w.weights
        ref = np.diff(m.indptr).astype(float) if axis == 1 else np.bincount(m.indices, minlength=m.shape[1]).astype(float)
    return ref


def _orient(z: np.ndarray, ref: np.ndarray, sign: int = 1) -> np.ndarray:
    if ref.std() < STD_FLOOR:
        return z
    r = np.mean(z * (ref - ref.mean())) * sign
    return -z if r < 0 else z


def _power(k: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Column-wise k**e for e in {-1, 0, 1}; zero exponents never touch k."""
    out = k.copy()
    neg = e == -1
    if neg.any():
        out[:, neg] = 1.0 / k[:, neg]
    zero = e == 0
    if zero.any():
        out[:, zero] = 1.0
    return out


def _size_powers(size: np.ndarray, e: np.ndarray) -> np.ndarray:
    return _power(np.repeat(size[:, None], len(e), axis=1), e)


def _dev_power(d: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Deviation of (1 + d)**e from 1, column-wise."""
    out = d.copy()
    neg = e == -1
    if neg.any():
        out[:, neg] = -d[:, neg] / (1.0 + d[:, neg])
    zero = e == 0
    if zero.any():
        out[:, zero] = 0.0
    return out


def _dev_ratio(s: np.ndarray, size: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Deviation of (size + s)**e / size**e from 1, column-wise."""
    out = s / size[:, None]
    neg = e == -1
    if neg.any():
        out[:, neg] = -s[:, neg] / (size[:, None] + s[:, neg])
    zero = e == 0
    if zero.any():
        out[:, zero] = 0.0
    return out


def _scaled_std(x: np.ndarray) -> np.ndarray:
    """Column std that does not underflow for tiny magnitudes."""
    scale = np.abs(x).max(axis=0)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * (x / safe).std(axis=0)


def _flat_deviation(size: np.ndarray, thr: float) -> np.ndarray:
    mu = size.mean()
    if size.std() < thr * mu:
        return np.zeros_like(size)
    return (size - mu) / mu


class _Batch:
    """Iteration state of a group of variants sharing one representation.

    In ``deviation`` form the state holds K - 1 instead of K. It is used for
    variants with gamma == epsilon and delta == theta, whose update maps the
    constant vector to itself: their deviations from the constant decay
    geometrically and would drown in rounding if stored as 1 + tiny.
    """

    def __init__(self, m, mt, diversity, ubiquity, ex, deviation, thr):
        self.m, self.mt = m, mt
        self.diversity, self.ubiquity = diversity, ubiquity
        self.alpha, self.beta, self.gamma, self.delta, self.eps, self.theta = ex
        self.deviation = deviation
        nv = ex.shape[1]
        if deviation:
            self.kc = np.repeat(_flat_deviation(diversity, thr)[:, None], nv, axis=1)
            self.kp = np.repeat(_flat_deviation(ubiquity, thr)[:, None], nv, axis=1)
        else:
            self.den_c = _size_powers(diversity, self.eps)
            self.den_p = _size_powers(ubiquity, self.theta)
            self.kc = np.repeat((diversity / diversity.mean())[:, None], nv, axis=1)
            self.kp = np.repeat((ubiquity / ubiquity.mean())[:, None], nv, axis=1)

    def step(self, a):
        # non-finite or nonpositive results are reported through ``ok``
        with np.errstate(all="ignore"):
            if self.deviation:
                sc = self.m @ _dev_power(self.kp[:, a], self.alpha[a])
                sp_ = self.mt @ _dev_power(self.kc[:, a], self.beta[a])
                new_c = _dev_ratio(sc, self.diversity, self.gamma[a])
                new_p = _dev_ratio(sp_, self.ubiquity, self.delta[a])
                mc, mp = new_c.mean(axis=0), new_p.mean(axis=0)
                new_c = (new_c - mc) / (1.0 + mc)
                new_p = (new_p - mp) / (1.0 + mp)
                ok = (np.isfinite(new_c).all(axis=0) & (new_c > -1).all(axis=0)
                      & np.isfinite(new_p).all(axis=0) & (new_p > -1).all(axis=0))
            else:
                sc = self.m @ _power(self.kp[:, a], self.alpha[a])
                sp_ = self.mt @ _power(self.kc[:, a], self.beta[a])
                new_c = _power(sc, self.gamma[a]) / self.den_c[:, a]
                new_p = _power(sp_, self.delta[a]) / self.den_p[:, a]
                new_c = new_c / new_c.mean(axis=0)
                new_p = new_p / new_p.mean(axis=0)
                ok = (np.isfinite(new_c).all(axis=0) & (new_c > 0).all(axis=0)
                      & np.isfinite(new_p).all(axis=0) & (new_p > 0).all(axis=0))
        return new_c, new_p, ok

    def raw(self, x, shift=0):
        return 1.0 + np.ldexp(x, -shift) if self.deviation else x


def _run_batch(batch: _Batch, nv: int, n_c: int, opts: IterationOptions, on_overflow, indices):
    thr = opts.degeneracy_threshold
    tol = opts.convergence_tolerance
    keep_c, keep_p = batch.kc.copy(), batch.kp.copy()
    z1 = np.zeros((n_c, nv))
    z2 = np.zeros((n_c, nv))
    n_hist = np.zeros(nv, dtype=np.int64)
    informative = np.zeros(nv, dtype=bool)
    status = np.full(nv, "", dtype=object)
    iters = np.zeros(nv, dtype=np.int64)
    active = np.arange(nv)
    shift = np.zeros(nv, dtype=np.int64)
    keep_shift = shift.copy()

    for n in range(1, opts.max_iterations + 1):
        a = active
        new_c, new_p, ok = batch.step(a)
        if not ok.all():
            bad = a[~ok]
            if on_overflow == "raise":
                raise NonFiniteIterationError(int(indices[bad[0]]), n)
            status[bad] = "overflow"
            iters[bad] = n
        a, new_c, new_p = a[ok], new_c[:, ok], new_p[:, ok]
        if batch.deviation:
            scale = np.maximum(np.abs(new_c).max(axis=0), np.abs(new_p).max(axis=0))
            tiny = (scale > 0) & (scale < RESCALE_BELOW)
            if tiny.any():
                new_c[:, tiny] = np.ldexp(new_c[:, tiny], RESCALE_BY)
                new_p[:, tiny] = np.ldexp(new_p[:, tiny], RESCALE_BY)
                shift[a[tiny]] += RESCALE_BY
        batch.kc[:, a] = new_c
        batch.kp[:, a] = new_p

        mu = new_c.mean(axis=0)
        if batch.deviation:
            # deviations keep full relative precision: exact zeros mean the
            # constant fixed point was reached, tiny values only end on underflow
            sd = _scaled_std(new_c)
            flat = np.where(informative[a], sd < DEVIATION_FLOOR, sd < thr * (1.0 + mu))
            exact = sd == 0
        else:
            sd = new_c.std(axis=0)
            flat = sd < thr * mu
            exact = np.zeros_like(flat)
        degenerate = flat & (exact | ~informative[a]) & (n >= 2)
        collapsed = flat & ~degenerate & informative[a]
        status[a[degenerate]] = "degenerate"
        status[a[collapsed]] = "collapsed"
        iters[a[degenerate | collapsed]] = n

        live = ~flat
        al = a[live]
        z = (new_c[:, live] - mu[live]) / sd[live]
        informative[al] = True
        keep_c[:, al] = new_c[:, live]
        keep_p[:, al] = new_p[:, live]
        keep_shift[al] = shift[al]
        r1 = np.abs(np.mean(z * z1[:, al], axis=0))
        r2 = np.mean(z * z2[:, al], axis=0)
        done = (n_hist[al] >= 2) & (r1 > 1 - tol) & (r2 > 1 - tol)
        status[al[done]] = "converged"
        iters[al[done]] = n
        z2[:, al] = z1[:, al]
        z1[:, al] = z
        n_hist[al] += 1

        active = active[status[active] == ""]
        if active.size == 0:
            break
    status[active] = "max_iterations"
    iters[active] = opts.max_iterations
    return keep_c, keep_p, status, iters, keep_shift


def _standardize_state(x: np.ndarray, deviation: bool) -> np.ndarray | None:
    if not deviation:
        return zscore(x)
    sd = float(_scaled_std(x[:, None])[0])
    if not sd >= DEVIATION_FLOOR:
        return None
    return (x - x.mean()) / sd


def iterate_variants(w: WeightMatrix, specs: Iterable[VariantSpec] | None = None,
                     opts: IterationOptions | None = None, on_overflow: str = "raise") -> list[ComplexityScores]:
    """Iterate several variants on the same matrix; results follow ``specs`` order.

    ``on_overflow="degenerate"`` turns a non-finite iterate into a degenerate
    result with status ``overflow`` instead of raising.
    """
    opts = opts or IterationOptions()
    specs = all_variants() if specs is None else list(specs)
    if on_overflow not in ("raise", "degenerate"):
        raise ValueError("on_overflow must be 'raise' or 'degenerate'")
    if not w.is_pruned():
        raise ValueError("weight matrix must be pruned before iterating")
    if not specs:
        return []

    m = sp.csr_array(w.weights)
    mt = sp.csr_array(m.T)
    n_c, n_p = m.shape
    ex = np.array([s.as_tuple() for s in specs], dtype=np.int64).T
    indices = np.array([spec_to_index(s) for s in specs])
    fixed_constant = (ex[2] == ex[4]) & (ex[3] == ex[5])
    diversity, ubiquity = w.diversity, w.ubiquity

    results: dict[int, tuple] = {}
    for deviation in (False, True):
        cols = np.flatnonzero(fixed_constant == deviation)
        if cols.size == 0:
            continue
        batch = _Batch(m, mt, diversity, ubiquity, ex[:, cols], deviation, opts.degeneracy_threshold)
        kc, kp, status, iters, shifts = _run_batch(batch, cols.size, n_c, opts, on_overflow, indices[cols])
        for k, j in enumerate(cols):
            results[j] = (kc[:, k], kp[:, k], status[k], iters[k], deviation, batch, shifts[k])

    ref_c = _orientation_reference(w, 1)
    ref_p = _orientation_reference(w, 0)
    out = []
    for j, spec in enumerate(specs):
        xc, xp, st, it, deviation, batch, shift = results[j]
        zc = zp = None
        if st not in ("degenerate", "overflow"):
            zc = _standardize_state(xc, deviation)
            zp = _standardize_state(xp, deviation)
        if zc is None:
            if st not in ("degenerate", "overflow"):
                st = "degenerate"
            zc = np.zeros(n_c)
            zp = np.zeros(n_p)
        else:
            zc = _orient(zc, ref_c)
            zp = np.zeros(n_p) if zp is None else _orient(zp, ref_p, sign=-1)
        zc.flags.writeable = False
        zp.flags.writeable = False
        out.append(ComplexityScores(
            variant=spec, year=w.year, mode=w.mode,
            countries=w.countries, products=w.products,
            k_c=zc, k_p=zp,
            converged=st == "converged",
            degenerate=st in ("degenerate", "overflow"),
            iterations_used=int(it),
            status=st,
            raw_k_c=batch.raw(xc, shift),
            raw_k_p=batch.raw(xp, shift),
        ))
    return out


def iterate_variant(w: WeightMatrix, spec: VariantSpec | int, opts: IterationOptions | None = None) -> ComplexityScores:
    """Scores of a single variant; ``spec`` may be a VariantSpec or an index 1..729."""
    if not isinstance(spec, VariantSpec):
        spec = index_to_spec(spec)
    return iterate_variants(w, [spec], opts)[0]


def is_connected(w: WeightMatrix) -> bool:
    n_c, n_p = w.shape
    adj = sp.block_array([[None, w.weights], [w.weights.T, None]], format="csr")
    n_comp, _ = connected_components(adj, directed=False)
    return n_comp == 1


def eigen_eci_oracle(w: WeightMatrix) -> np.ndarray:
    """ECI as the second eigenvector of D^-1 M U^-1 M^T, standardized and oriented by diversity.

    Solved through the symmetric similar matrix D^-1/2 M U^-1 M^T D^-1/2 with
    a dense eigensolver.
    """
    if not w.is_pruned():
        raise ValueError("weight matrix must be pruned")
    if not is_connected(w):
        raise ValueError("country-product network is disconnected; the second eigenvector is not unique")
    m = w.to_dense()
    d = m.sum(axis=1)
    u = m.sum(axis=0)
    a = m / np.sqrt(d)[:, None]
    s = (a / u[None, :]) @ a.T
    vals, vecs = np.linalg.eigh((s + s.T) / 2)
    x = vecs[:, -2] / np.sqrt(d)
    z = zscore(x)
    if z is None:
        raise ValueError("second eigenvector is constant")
    return _orient(z, _orientation_reference(w, 1))


def write_scores(scores: ComplexityScores, stream: IO[str], provenance: Iterable[str] = ()) -> None:
    """Export ``country,k_c`` sorted by descending score, ties by country code."""
    for line in provenance:
        stream.write("# %s\n" % line)
    stream.write("# variant=%d spec=%s year=%d mode=%s converged=%s degenerate=%s status=%s iterations=%d\n" % (
        scores.index, scores.variant, scores.year, scores.mode,
        str(scores.converged).lower(), str(scores.degenerate).lower(), scores.status, scores.iterations_used))
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(("country", "k_c"))
    order = sorted(range(len(scores.countries)), key=lambda i: (-scores.k_c[i], scores.countries[i]))
    for i in order:
        w.writerow((scores.countries[i], repr(float(scores.k_c[i]))))
