"""Projection witnesses for almost-uniform style convergence at desk scale.

The a.u. and b.a.u. definitions ask for a projection ``e`` of small
co-trace such that ``(x_n - x) e`` (resp. ``e (x_n - x) e``) tends to zero.
Here ``e`` is built from a spectral threshold of a positive element that
dominates every term of a finite tail, which makes the uniform bound on the
tail provable rather than sampled. Decisions are empirical: no finite tail
certifies a limit.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    INTERVAL_SLACK,
    OperatorElement,
    Projection,
    ginibre,
    schatten_norm,
    spectral_decomposition,
)
from .averages import AverageStream, averages_at
from .ds import fixed_space_projector
from .linalg import jacobi_eigh
from .sequences import Blocks, Full, partial_density, run_decomposition, sup_ratio
from .weights import ONE, Indicator, Product

MODES = ("bilateral", "onesided")
NORMALITY_RTOL = 1e-12


@dataclass
class Witness:
    projection: Projection
    level: float
    trace_complement: float
    mode: str


def _adj(stack):
    return stack.conj().transpose(0, 2, 1)


def _abs_stack(stack):
    """``|y| = (y* y)^(1/2)`` for every matrix of a stack."""
    w, v = jacobi_eigh(_adj(stack) @ stack)
    return (v * np.sqrt(np.clip(w, 0.0, None))[:, None, :]) @ _adj(v)


def _opnorm_stack(stack):
    w = jacobi_eigh(_adj(stack) @ stack)[0]
    return np.sqrt(np.clip(w[:, -1], 0.0, None))


def _dominant(ys, mode):
    alg = ys[0].algebra
    if any(y.algebra != alg for y in ys):
        raise ValueError("witness family spans different algebras")
    b = []
    for i in range(len(alg.dims)):
        stack = np.stack([y.blocks[i] for y in ys])
        if mode == "onesided":
            b.append((_adj(stack) @ stack).sum(axis=0))
            continue
        gram, cogram = _adj(stack) @ stack, stack @ _adj(stack)
        scale = np.linalg.norm(stack, axis=(1, 2)) ** 2
        normal = np.linalg.norm(gram - cogram, axis=(1, 2)) <= NORMALITY_RTOL * scale
        acc = _abs_stack(stack).sum(axis=0)
        if not normal.all():
            # |<y u, v>|^2 <= <|y| u, u> <|y*| v, v>, so |y| + |y*| dominates e y e
            acc = acc + _abs_stack(_adj(stack[~normal])).sum(axis=0)
        b.append(acc)
    return OperatorElement(alg, b)


def _threshold(dec, eps):
    vals, wts = dec.eigenvalues()
    order = np.argsort(vals)
    vals, wts = vals[order], wts[order]
    total = wts.sum()
    kept_weight = np.cumsum(wts)
    # removed weight if everything <= vals[i] + slack is kept
    upto = np.searchsorted(vals, vals + INTERVAL_SLACK, side="right")
    removed = total - kept_weight[upto - 1]
    ok = np.flatnonzero(removed <= eps)
    return float(vals[ok[0]])


def find_witness(ys, eps, mode="bilateral"):
    """Projection ``e`` with ``tau(1 - e) <= eps`` controlling every ``y`` in ``ys``.

    bilateral
        ``b = sum_n |y_n|`` (``|y_n| + |y_n*|`` for non-normal ``y_n``);
        ``e`` is the spectral projection of ``b`` on ``[0, lam]`` with the
        smallest ``lam`` meeting the budget. Then ``||e y_n e|| <= lam``.
    onesided
        ``b = sum_n y_n* y_n``, ``e`` on ``[0, lam^2]``; ``||y_n e|| <= lam``.

    ``e`` always keeps the bottom eigenspace of ``b``, so it is never 0,
    even when ``eps >= tau(1)`` would allow it.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    ys = list(ys)
    if not ys:
        raise ValueError("empty family")
    b = _dominant(ys, mode)
    dec = spectral_decomposition(b, check=False)
    level = _threshold(dec, eps)
    e = dec.projection(-np.inf, level)
    level = max(level, 0.0)
    if mode == "onesided":
        level = math.sqrt(level)
    return Witness(e, level, max(e.trace_complement(), 0.0), mode)


def witness_sup(ys, e, mode="bilateral"):
    """``max_n ||e y_n e||`` (bilateral) or ``max_n ||y_n e||`` (onesided)."""
    best = 0.0
    for i, m in enumerate(e.blocks):
        stack = np.stack([y.blocks[i] for y in ys])
        stack = m @ stack @ m if mode == "bilateral" else stack @ m
        best = max(best, float(_opnorm_stack(stack).max()))
    return best


def geometric_grid(horizon, base=16):
    """``base, 2 base, 4 base, ... <= horizon``, plus ``horizon`` itself."""
    grid, n = [], base
    while n < horizon:
        grid.append(n)
        n *= 2
    grid.append(horizon)
    return grid


# --- a.u. / b.a.u. reports ---------------------------------------------------------


@dataclass
class ConvergenceReport:
    mode: str
    eps: float
    delta: float
    tail_starts: list
    residuals: list
    residuals_bilateral: list
    residuals_onesided: list
    trace_complements: list
    witness: Witness
    decision: str
    metadata: dict = field(default_factory=dict)

    @property
    def envelope(self):
        return np.minimum.accumulate(np.asarray(self.residuals, dtype=float)).tolist()

    @property
    def converging(self):
        return self.decision == "converging"

    def to_json(self):
        return {
            "mode": self.mode,
            "eps": self.eps,
            "delta": self.delta,
            "decision": self.decision,
            "residual_curve": [[m, r] for m, r in zip(self.tail_starts, self.envelope)],
            "raw_residual_curve": [[m, r] for m, r in zip(self.tail_starts, self.residuals)],
            "trace_complement": self.witness.trace_complement,
            "witness_level": self.witness.level,
            "witness_rank": self.witness.projection.rank(),
            "metadata": self.metadata,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "r_bilateral", "r_onesided", "trace_complement"])
        for row in zip(self.tail_starts, self.residuals_bilateral, self.residuals_onesided, self.trace_complements):
            w.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])
        return buf.getvalue()


def au_report_from_terms(terms, x_hat, eps, mode="bilateral", delta=1e-2, metadata=None):
    """Witness curve for a finite family ``{n: x_n}`` against a candidate limit.

    For every tail start ``m`` (the sorted keys of ``terms``) the tail
    ``{x_n - x_hat : n >= m}`` gets a witness with budget ``eps``; ``r_m`` is
    its level. The decision is ``"converging"`` iff some ``r_m <= delta``.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    ns = sorted(terms)
    ys = [terms[n] - x_hat for n in ns]
    r_bil, r_one, tcs, witnesses = [], [], [], []
    for i in range(len(ns)):
        tail = ys[i:]
        wb = find_witness(tail, eps, "bilateral")
        wo = find_witness(tail, eps, "onesided")
        r_bil.append(wb.level)
        r_one.append(wo.level)
        chosen = wb if mode == "bilateral" else wo
        tcs.append(chosen.trace_complement)
        witnesses.append(chosen)
    res = r_bil if mode == "bilateral" else r_one
    hits = [i for i, r in enumerate(res) if r <= delta]
    decision = "converging" if hits else "inconclusive"
    chosen = witnesses[hits[0]] if hits else witnesses[-1]
    return ConvergenceReport(
        mode, eps, delta, ns, list(res), r_bil, r_one, tcs, chosen, decision, dict(metadata or {})
    )


def au_report(op, x, eps, horizon, x_hat=None, mode="bilateral", weights=None, sequence=None,
              delta=1e-2, grid_base=16):
    """Witness report for ``M_n^{beta,k}(T)(x) - x_hat`` on a geometric grid up to ``horizon``.

    ``x_hat`` defaults to the fixed-space projection ``E(x)``, the limit of the
    unweighted averages.
    """
    if x_hat is None:
        x_hat = fixed_space_projector(op)(x)
    grid = geometric_grid(horizon, grid_base)
    terms = averages_at(op, x, grid, weights, sequence)
    meta = {
        "horizon": horizon,
        "grid_base": grid_base,
        "family": _describe(weights, sequence),
    }
    return au_report_from_terms(terms, x_hat, eps, mode, delta, meta)


def _describe(weights, sequence):
    w = "1" if weights is None else type(weights).__name__
    k = "full" if sequence is None else type(sequence).__name__
    return f"weights={w}, sequence={k}"


# --- equicontinuity in measure at zero ---------------------------------------------


def buem_gamma(p, eps, delta, C):
    """``gamma = eps^(1/p) delta / (4^(1/p) * 48 C)``."""
    if not (p >= 1 and eps > 0 and delta > 0 and C > 0):
        raise ValueError("need p >= 1 and eps, delta, C > 0")
    return eps ** (1.0 / p) * delta / (4.0 ** (1.0 / p) * 48.0 * C)


@dataclass
class BuemProbeResult:
    p: float
    eps: float
    delta: float
    C: float
    gamma: float
    K: float
    horizon: int
    mode: str
    attempted: int = 0
    passed_count: int = 0
    worst_level: float = 0.0
    worst_sup: float = 0.0
    worst_trace_complement: float = 0.0
    underflow: bool = False

    @property
    def passed(self):
        return not self.underflow and self.attempted > 0 and self.passed_count == self.attempted

    def to_json(self):
        out = dict(self.__dict__)
        out["passed"] = self.passed
        return out


def buem_probe(op, weights=None, sequence=None, p=1.0, eps=1.0, delta=0.05, sample_count=100,
               horizon=64, seed=0, mode="bilateral", gamma=None, samples=None):
    """Sample ``||x||_p < gamma`` and look for one witness covering ``M_1..M_horizon``.

    ``gamma`` comes from :func:`buem_gamma` with ``C = weights.bound``. For a
    subsequence the threshold is computed for ``delta / K`` with
    ``K = sup_ratio(k, horizon)``. A sample passes iff its witness has
    ``tau(1 - e) <= eps`` and level ``<= delta``. Passing ``gamma`` overrides
    the computed value; ``samples`` replaces the random draws.
    """
    weights = ONE if weights is None else weights
    C = weights.bound
    K = 1.0
    if sequence is not None and not isinstance(sequence, Full):
        K = max(1.0, sup_ratio(sequence, horizon))
    g = buem_gamma(p, eps, delta / K, C) if gamma is None else float(gamma)
    result = BuemProbeResult(p, eps, delta, C, g, K, horizon, mode)
    radius = 0.99 * g
    if not (np.isfinite(radius) and radius > 1e-300):
        result.underflow = True
        return result
    rng = np.random.default_rng(seed)
    if samples is None:
        samples = []
        for _ in range(sample_count):
            x = ginibre(op.algebra, rng)
            samples.append(x * (radius / schatten_norm(x, p)))
    for x in samples:
        result.attempted += 1
        if not np.any([np.any(a) for a in x.blocks]):
            result.passed_count += 1
            continue
        ms = [m for _, m in AverageStream(op, x, weights, sequence, horizon)]
        w = find_witness(ms, eps, mode)
        sup = witness_sup(ms, w.projection, mode)
        result.worst_level = max(result.worst_level, w.level)
        result.worst_sup = max(result.worst_sup, sup)
        result.worst_trace_complement = max(result.worst_trace_complement, w.trace_complement)
        if w.trace_complement <= eps and w.level <= delta:
            result.passed_count += 1
    return result


# --- limit identifications ---------------------------------------------------------


@dataclass
class LimitInstance:
    op: object
    x: OperatorElement
    horizon: int
    weights: object = None
    sequence: object = None
    y: OperatorElement = None


@dataclass
class LimitCheckResult:
    variant: str
    residual: float
    details: dict = field(default_factory=dict)


def interval_indices(sequence, n_terms):
    """``N_I`` for block sequences; maximal runs of consecutive terms otherwise."""
    if isinstance(sequence, Blocks):
        return sequence.interval_index(n_terms)
    return run_decomposition(sequence.prefix(n_terms))


def limit_check(variant, inst):
    """Residual for one of the limit identifications.

    ``prop32_limits``
        ``||M_N^{c beta} - d M_N^{beta,k}||`` with ``d`` the partial density at ``N``.
    ``remark32_shared_limit``
        ``||M_N^{beta,k} - M_N^{beta}||``.
    ``thm51_decomposition``
        With ``inst.y`` set and ``x = y - T(y)``: ``max_n (||M_n^k x|| - 2 ||y|| (N_I(n-1)+1)/n)``
        over ``n = 1, 2, 4, ..., N`` (nonpositive when the bound holds). Without ``y``,
        ``x`` must be fixed by ``T`` and the residual is ``max_n ||M_n^k x - x||``.
    """
    op, x, N = inst.op, inst.x, inst.horizon
    if variant in ("prop32_limits", "remark32_shared_limit") and inst.sequence is None:
        raise ValueError(f"{variant} needs a sequence")
    weights = ONE if inst.weights is None else inst.weights
    if variant == "prop32_limits":
        d = partial_density(inst.sequence, N)
        full = averages_at(op, x, [N], Product(Indicator(inst.sequence), weights))[N]
        sub = averages_at(op, x, [N], weights, inst.sequence)[N]
        return LimitCheckResult(variant, schatten_norm(full - sub * d, np.inf), {"density": d})
    if variant == "remark32_shared_limit":
        sub = averages_at(op, x, [N], weights, inst.sequence)[N]
        full = averages_at(op, x, [N], weights)[N]
        return LimitCheckResult(variant, schatten_norm(sub - full, np.inf), {})
    if variant == "thm51_decomposition":
        seq = Full() if inst.sequence is None else inst.sequence
        grid = geometric_grid(N, 1)
        if inst.y is None:
            drift = schatten_norm(op(x) - x, np.inf)
            if drift > 1e-10 * (1 + schatten_norm(x, np.inf)):
                raise ValueError("thm51 check without y needs a fixed point x = T(x)")
            ms = averages_at(op, x, grid, None, seq)
            res = max(schatten_norm(m - x, np.inf) for m in ms.values())
            return LimitCheckResult(variant, res, {"grid": grid})
        x = inst.y - op(inst.y)
        ni = interval_indices(seq, N)
        ynorm = schatten_norm(inst.y, np.inf)
        ms = averages_at(op, x, grid, None, seq)
        measured = [schatten_norm(ms[n], np.inf) for n in grid]
        bounds = [2 * ynorm * (int(ni[n - 1]) + 1) / n for n in grid]
        res = max(m - b for m, b in zip(measured, bounds))
        return LimitCheckResult(variant, res, {"grid": grid, "measured": measured, "bound": bounds})
    raise ValueError(f"unknown limit check {variant!r}")


def coboundary_decomposition(op, x):
    """Split ``x = E(x) + (y - T(y))`` with ``y`` from a least-squares solve.

    Returns ``(fixed_part, y, residual)`` where ``residual`` is the operator
    norm of ``x - fixed_part - (y - T(y))``.
    """
    proj = fixed_space_projector(op)
    fixed = proj(x)
    s = proj.superoperator
    rest = (x - fixed).to_vector()
    v, *_ = np.linalg.lstsq(np.eye(s.shape[0]) - s, rest, rcond=None)
    y = x.algebra.from_vector(v)
    recon = fixed + (y - op(y))
    return fixed, y, schatten_norm(x - recon, np.inf)
