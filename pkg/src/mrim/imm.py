"""Two-phase RR-set seed selection (IMM style) for multi-round schedules.

Phase 1 halves a spread threshold ``x`` and grows one shared RR collection
until greedy coverage certifies a lower bound ``LB`` on the optimum. Phase 2
tops the collection up to ``ceil(lambda* / LB)`` sets and runs greedy max
cover on it. Three selectors share this engine:

* ``cr_naimm``: multi-round RR sets, cover over (node, round) pairs with a
  per-round budget.
* ``wr_naimm``: one single-round collection per round, roots drawn from the
  roots left uncovered in the previous round (or by rejection sampling).
* ``ada_imm_round``: single-round collection rooted outside the activated set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .graph import Graph, log_binomial
from .rng import as_generator
from .rrset import EmptyRootPool, RootPool, RRCollection, rr_batch
from .spread import SeedSchedule

DEFAULT_MAX_BYTES = 1 << 30
VARIANTS = ("cross", "within", "adaptive")
_SHRINK = 1 - 1 / math.e


@dataclass(frozen=True)
class ImmParams:
    variant: str
    n: int
    k: int
    T: int
    eps: float
    ell: float
    eps0: float
    eps_prime: float
    alpha: float
    beta: float
    lambda_prime: float
    lambda_star: float


def compute_params(n: int, k: int, T: int, eps: float, ell: float, variant: str) -> ImmParams:
    """Sampling constants; ``ell`` is the caller's value before adjustment."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if ell <= 0:
        raise ValueError("ell must be positive")
    if k < 1 or T < 1:
        raise ValueError("k and T must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    if n < 2:
        raise ValueError("need at least 2 nodes")
    ln_n = math.log(n)
    ln_c = log_binomial(n, k)
    ln_log2n = math.log(math.log2(n))
    if variant == "cross":
        ell = ell + math.log(2) / ln_n
        eps0 = eps
        eps_p = math.sqrt(2) * eps
        alpha = math.sqrt(ell * ln_n + math.log(2))
        beta = math.sqrt(0.5 * (T * ln_c + alpha**2))
        lam_p = (2 + 2 / 3 * eps_p) * (T * ln_c + ell * ln_n + ln_log2n) * n / eps_p**2
        lam_s = 2 * n * T * (_SHRINK * alpha + beta) ** 2 / eps**2
    else:
        ell = ell + math.log(2 * T) / ln_n
        eps0 = math.exp(_SHRINK) * eps / 2
        eps_p = math.sqrt(2) * eps0
        ln_t = math.log(T) if variant == "within" else 0.0
        alpha = math.sqrt(ell * ln_n + math.log(2) + ln_t)
        beta = math.sqrt(_SHRINK * (ln_c + alpha**2))
        lam_p = (2 + 2 / 3 * eps_p) * (ln_c + ell * ln_n + ln_t + ln_log2n) * n / eps_p**2
        lam_s = 2 * n * (_SHRINK * alpha + beta) ** 2 / eps0**2
    return ImmParams(variant, n, k, T, eps, ell, eps0, eps_p, alpha, beta, lam_p, lam_s)


@dataclass
class ImmState:
    """Bookkeeping of one two-phase run."""

    LB: float = 1.0
    theta: int = 0
    x: float = 0.0
    coverage: float = 0.0
    iterations: int = 0
    phase1_size: int = 0
    fallback: bool = False


@dataclass
class ImmRun:
    schedule: SeedSchedule
    params: ImmParams
    states: list = field(default_factory=list)

    @property
    def rr_count(self) -> int:
        return sum(s.theta for s in self.states)


# ---------------------------------------------------------------------------
# node selection

def _max_cover(coll: RRCollection, T: int, k: int, trace: bool = False):
    ptr, data, _ = coll.arrays()
    inv_ptr, inv_sets = coll.inverted()
    return kernels.max_cover(ptr, data, inv_ptr, inv_sets, coll.n * T, T, k, trace)


def cr_node_selection(coll: RRCollection, T: int, k: int) -> tuple[SeedSchedule, float]:
    """Greedy cover over (node, round) items with at most ``k`` per round.

    Returns the schedule and the fraction of sets it covers.
    """
    picks, covered, _ = _max_cover(coll, T, k)
    sched = SeedSchedule.from_pairs([(int(x) // T, int(x) % T) for x in picks], T)
    return sched, float(covered.mean()) if len(covered) else 0.0


def wr_node_selection(coll: RRCollection, k: int) -> tuple[list[int], np.ndarray, float]:
    """Greedy ``k``-cover of a single-round collection.

    Returns picks in order, roots of the sets left uncovered, covered fraction.
    """
    if coll.T != 1:
        raise ValueError("within-round selection needs a single-round collection")
    picks, covered, _ = _max_cover(coll, 1, min(k, coll.n))
    _, _, roots = coll.arrays()
    frac = float(covered.mean()) if len(covered) else 0.0
    return [int(v) for v in picks], roots[covered == 0], frac


# ---------------------------------------------------------------------------
# shared two-phase engine

def _two_phase(params: ImmParams, n_scale: int, coll: RRCollection, draw, select) -> tuple:
    """Run both phases on ``coll``; ``draw(count)`` appends sets, ``select()`` returns (picks, F)."""
    st = ImmState()
    iters = max(0, int(math.floor(math.log2(n_scale))) - 1) if n_scale >= 1 else 0
    for j in range(1, iters + 1):
        st.iterations = j
        st.x = n_scale / 2**j
        theta_j = math.ceil(params.lambda_prime / st.x)
        if len(coll) < theta_j:
            draw(theta_j - len(coll))
        _, frac = select()
        if n_scale * frac >= (1 + params.eps_prime) * st.x:
            st.LB = n_scale * frac / (1 + params.eps_prime)
            break
    st.phase1_size = len(coll)
    st.theta = math.ceil(params.lambda_star / st.LB)
    if len(coll) < st.theta:
        draw(st.theta - len(coll))
    picks, st.coverage = select()
    return picks, st


def _budget(max_bytes):
    return DEFAULT_MAX_BYTES if max_bytes is None else max_bytes


def cr_naimm_run(g: Graph, T: int, k: int, eps: float = 0.5, ell: float = 1.0, rng=None, *,
                 max_bytes: int | None = None) -> ImmRun:
    rng = as_generator(rng)
    params = compute_params(g.n, k, T, eps, ell, "cross")
    coll = RRCollection(g.n, T, _budget(max_bytes))
    pool = RootPool.uniform(g.n)

    def draw(count):
        coll.generate(g, pool.sample(count, rng), rng)

    sched, st = _two_phase(params, g.n, coll, draw, lambda: cr_node_selection(coll, T, k))
    return ImmRun(sched, params, [st])


def cr_naimm(g: Graph, T: int, k: int, eps: float = 0.5, ell: float = 1.0, rng=None, **kw) -> SeedSchedule:
    """Cross-round RR-set selection of a ``T``-round schedule, ``k`` seeds per round."""
    return cr_naimm_run(g, T, k, eps, ell, rng, **kw).schedule


class _RejectionDraw:
    """Round-``t`` RR sets from uniform roots whose earlier-round sets avoid earlier seeds."""

    MAX_TRIES = 50

    def __init__(self, g: Graph, sched: SeedSchedule, t: int, rng):
        self.g, self.t, self.rng = g, t, rng
        T = t + 1
        self.T = T
        self.items = np.zeros(g.n * T, dtype=bool)
        for v, r in sched.pairs():
            if r < t:
                self.items[v * T + r] = True
        self.accepted = 1
        self.tried = 1

    def __call__(self, coll: RRCollection, count: int) -> int:
        """Append up to ``count`` accepted sets; returns how many were missing."""
        need = count
        misses = 0
        while need > 0:
            batch = max(need, int(need * self.tried / self.accepted * 1.1) + 1)
            roots = self.rng.integers(0, self.g.n, size=batch)
            ptr, data = rr_batch(self.g, roots, self.T, self.rng)
            lens = np.diff(ptr)
            rejected = np.add.reduceat(self.items[data].astype(np.int64), ptr[:-1]) > 0
            self.tried += batch
            ok = np.flatnonzero(~rejected)[:need]
            if len(ok) == 0:
                misses += 1
                if misses >= self.MAX_TRIES:
                    return need
                continue
            self.accepted += len(ok)
            set_of = np.repeat(np.arange(batch), lens)
            keep = np.isin(set_of, ok) & (data % self.T == self.t)
            sub_lens = np.bincount(set_of[keep], minlength=batch)[ok]
            sub_ptr = np.zeros(len(ok) + 1, dtype=np.int64)
            np.cumsum(sub_lens, out=sub_ptr[1:])
            coll.extend(sub_ptr, (data[keep] // self.T).astype(np.int32), roots[ok])
            need -= len(ok)
        return 0


def wr_naimm_run(g: Graph, T: int, k: int, eps: float = 0.5, ell: float = 1.0, rng=None, *,
                 roots: str = "remaining", max_bytes: int | None = None) -> ImmRun:
    """Within-round RR-set selection, one round at a time.

    ``roots="remaining"`` samples round ``t`` roots from the multiset of roots
    left uncovered in round ``t-1`` (falling back to all nodes, flagged, when
    none remain). ``roots="rejection"`` instead draws uniform roots and
    discards samples already reached by earlier seeds.
    """
    if roots not in ("remaining", "rejection"):
        raise ValueError(f"unknown root mode {roots!r}")
    rng = as_generator(rng)
    params = compute_params(g.n, k, T, eps, ell, "within")
    sched = SeedSchedule.empty(T)
    pool = RootPool.uniform(g.n)
    states = []
    for t in range(T):
        coll = RRCollection(g.n, 1, _budget(max_bytes))
        fallback = False
        if roots == "remaining":
            if len(pool) == 0:
                pool, fallback = RootPool.uniform(g.n), True
            cur = pool

            def draw(count, cur=cur, coll=coll):
                coll.generate(g, cur.sample(count, rng), rng)
        else:
            rej = _RejectionDraw(g, sched, t, rng)
            flag = {"uniform": False}

            def draw(count, rej=rej, coll=coll, flag=flag):
                missing = count if flag["uniform"] else rej(coll, count)
                if missing:
                    flag["uniform"] = True
                    coll.generate(g, RootPool.uniform(g.n).sample(missing, rng), rng)

        def select(coll=coll):
            picks, _, frac = wr_node_selection(coll, k)
            return picks, frac

        picks, st = _two_phase(params, g.n, coll, draw, select)
        if roots == "rejection":
            fallback = flag["uniform"]
        st.fallback = fallback
        states.append(st)
        for v in picks:
            sched = sched.add(v, t)
        if roots == "remaining":
            _, left, _ = wr_node_selection(coll, k)
            pool = RootPool.remaining(left)
    return ImmRun(sched, params, states)


def wr_naimm(g: Graph, T: int, k: int, eps: float = 0.5, ell: float = 1.0, rng=None, **kw) -> SeedSchedule:
    return wr_naimm_run(g, T, k, eps, ell, rng, **kw).schedule


@dataclass
class AdaRoundResult:
    seeds: list
    state: ImmState | None
    collection: RRCollection | None


def ada_imm_round(g: Graph, activated, T: int, k: int, eps: float = 0.5, ell: float = 1.0, rng=None, *,
                  reuse: RRCollection | None = None, max_bytes: int | None = None) -> AdaRoundResult:
    """Seeds for one adaptive round given the activated set.

    RR roots are uniform over non-activated nodes and coverage is scaled by
    their count. With ``reuse``, sets from an earlier round whose root is
    still inactive seed the collection.
    """
    rng = as_generator(rng)
    k_eff = min(k, g.n)
    act = frozenset(int(v) for v in activated)
    n_a = g.n - len(act)
    if n_a <= 0:
        return AdaRoundResult(list(range(k_eff)), None, None)
    params = compute_params(g.n, k_eff, T, eps, ell, "adaptive")
    pool = RootPool.minus(g.n, act)
    coll = RRCollection(g.n, 1, _budget(max_bytes))
    if reuse is not None and len(reuse):
        _, _, old_roots = reuse.arrays()
        alive = np.ones(g.n, dtype=bool)
        if act:
            alive[list(act)] = False
        coll = reuse.keep(alive[old_roots])
        coll.max_bytes = _budget(max_bytes)

    def draw(count):
        coll.generate(g, pool.sample(count, rng), rng)

    def select():
        picks, _, frac = wr_node_selection(coll, k_eff)
        return picks, frac

    picks, st = _two_phase(params, n_a, coll, draw, select)
    return AdaRoundResult(picks, st, coll)


__all__ = [
    "ImmParams", "ImmState", "ImmRun", "AdaRoundResult", "EmptyRootPool", "compute_params",
    "cr_node_selection", "wr_node_selection", "cr_naimm", "cr_naimm_run", "wr_naimm",
    "wr_naimm_run", "ada_imm_round",
]
