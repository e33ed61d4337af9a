"""Gateway-to-data-center power and rate allocation.

Three problems over one multiple access channel at the data center:

* min_total_power: deliver the queue rates Q with minimal total power.
  Solved in closed form by decoding in descending channel gain order and
  binding the suffix sum-rate constraints, and numerically as an LP over
  all subset constraints for cross-checking.
* min_max_power: minimize the largest per-gateway power (epigraph LP),
  with a time-sharing decomposition that mixes decoding orders so the
  target rate point is met exactly.
* max_weighted_sum: allocate a total power budget to maximize a weighted
  sum of gateway rates; concave in the powers once the rate polytope is
  collapsed to its weight-sorted corner, solved by projected gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DecompositionError, InfeasibleProblemError
from .model import GatewayState
from .simplex import LpInfeasible, solve_lp

LN2 = math.log(2.0)


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    """Per-gateway transmit powers in watts."""

    powers: np.ndarray

    def __post_init__(self):
        powers = np.array(self.powers, dtype=float)
        if powers.ndim != 1 or np.any(powers < 0):
            raise ValueError("powers must be a nonnegative vector")
        powers.setflags(write=False)
        object.__setattr__(self, "powers", powers)

    @property
    def total(self):
        return float(self.powers.sum())

    def __eq__(self, other):
        if not isinstance(other, PowerAllocation):
            return NotImplemented
        return np.array_equal(self.powers, other.powers)


@dataclass(frozen=True)
class TimeShareSchedule:
    """(decoding order, time fraction) pairs; fractions sum to one."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((tuple(order), float(lam)) for order, lam in self.entries)
        if any(lam < -1e-12 for _, lam in entries):
            raise ValueError("time fractions must be nonnegative")
        if abs(sum(lam for _, lam in entries) - 1.0) > 1e-9:
            raise ValueError("time fractions must sum to 1")
        object.__setattr__(self, "entries", entries)

    @property
    def orders(self):
        return [order for order, _ in self.entries]

    @property
    def fractions(self):
        return np.array([lam for _, lam in self.entries])


@dataclass(frozen=True)
class WeightedRateSolution:
    powers: PowerAllocation
    rates: np.ndarray
    weights: np.ndarray
    decoding_order: tuple
    off_set: frozenset

    @property
    def objective(self):
        return float(self.weights @ self.rates)


def _required_rate_power(q_sum):
    """2^sum - 1, the linear-scale SNR needed for a sum rate q_sum."""
    return math.pow(2.0, q_sum) - 1.0


def descending_gain_order(gateways, active=None):
    """Gateway indices sorted by descending gain, ties to the lower index."""
    n = gateways.num_gws
    idx = range(n) if active is None else active
    return tuple(sorted(idx, key=lambda i: (-gateways.gains[i], i)))


def min_total_power_closed_form(gateways):
    """(PowerAllocation, decoding order) minimizing total power.

    Decoding follows descending channel gains; each suffix sum-rate
    constraint binds, which pins every power down.  Gateways with zero
    queues transmit nothing and are left out of the order.
    """
    q = gateways.queue_rates
    g = gateways.gains
    n0 = gateways.noise_power
    active = [i for i in range(gateways.num_gws) if q[i] > 0]
    for i in active:
        if g[i] == 0:
            raise InfeasibleProblemError(
                f"gateway {i} has queued data but zero channel gain"
            )
    order = descending_gain_order(gateways, active)
    powers = np.zeros(gateways.num_gws)
    suffix_q = 0.0
    # walk the order backwards: the last-decoded gateway is interference-free
    for k in range(len(order) - 1, -1, -1):
        i = order[k]
        new_suffix = suffix_q + q[i]
        powers[i] = n0 * (_required_rate_power(new_suffix)
                          - _required_rate_power(suffix_q)) / g[i] ** 2
        suffix_q = new_suffix
    cap = gateways.per_gw_power_cap
    if cap is not None:
        worst = int(np.argmax(powers))
        if powers[worst] > cap * (1 + 1e-12):
            raise InfeasibleProblemError(
                f"gateway {worst} needs {powers[worst]:.6g} W, above the "
                f"per-gateway cap {cap:.6g} W"
            )
    return PowerAllocation(powers), order


def _subset_constraint_rows(gateways, members):
    """LP rows: for each nonempty subset of members, sum of P_i g_i^2 over
    the subset must reach N0 (2^(sum Q) - 1).  Returned in <= form
    (negated) over variables indexed by position in `members`."""
    q = gateways.queue_rates
    g2 = gateways.gains ** 2
    n0 = gateways.noise_power
    nm = len(members)
    rows, rhs = [], []
    for mask in range(1, 1 << nm):
        sel = [(mask >> t) & 1 for t in range(nm)]
        row = np.array([-g2[members[t]] if sel[t] else 0.0 for t in range(nm)])
        q_sum = sum(q[members[t]] for t in range(nm) if sel[t])
        rows.append(row)
        rhs.append(-n0 * _required_rate_power(q_sum))
    return np.array(rows), np.array(rhs)


def min_total_power_convex(gateways):
    """Numerical solve of the min-total problem over all subset constraints."""
    q = gateways.queue_rates
    members = [i for i in range(gateways.num_gws) if q[i] > 0]
    powers = np.zeros(gateways.num_gws)
    if not members:
        return PowerAllocation(powers)
    for i in members:
        if gateways.gains[i] == 0:
            raise InfeasibleProblemError(
                f"gateway {i} has queued data but zero channel gain"
            )
    a, b = _subset_constraint_rows(gateways, members)
    cap = gateways.per_gw_power_cap
    if cap is not None:
        a = np.vstack([a, np.eye(len(members))])
        b = np.concatenate([b, np.full(len(members), cap)])
    try:
        x, _ = solve_lp(np.ones(len(members)), a, b)
    except LpInfeasible:
        raise InfeasibleProblemError(
            "queue rates are not deliverable under the per-gateway power cap"
        )
    powers[members] = np.maximum(x, 0.0)
    return PowerAllocation(powers)


def min_max_power(gateways):
    """(PowerAllocation, max power) minimizing the largest per-gateway power."""
    q = gateways.queue_rates
    n = gateways.num_gws
    members = [i for i in range(n) if q[i] > 0]
    powers = np.zeros(n)
    if not members:
        return PowerAllocation(powers), 0.0
    for i in members:
        if gateways.gains[i] == 0:
            raise InfeasibleProblemError(
                f"gateway {i} has queued data but zero channel gain"
            )
    nm = len(members)
    a_sub, b_sub = _subset_constraint_rows(gateways, members)
    # variables (P_members, t): epigraph of the max
    a = np.hstack([a_sub, np.zeros((a_sub.shape[0], 1))])
    b = b_sub
    peak_rows = np.hstack([np.eye(nm), -np.ones((nm, 1))])
    a = np.vstack([a, peak_rows])
    b = np.concatenate([b, np.zeros(nm)])
    cap = gateways.per_gw_power_cap
    if cap is not None:
        t_cap = np.zeros((1, nm + 1))
        t_cap[0, -1] = 1.0
        a = np.vstack([a, t_cap])
        b = np.concatenate([b, [cap]])
    c = np.zeros(nm + 1)
    c[-1] = 1.0
    try:
        x, t = solve_lp(c, a, b)
    except LpInfeasible:
        raise InfeasibleProblemError(
            "queue rates are not deliverable under the per-gateway power cap"
        )
    if cap is not None and t > cap * (1 + 1e-9):
        raise InfeasibleProblemError(
            f"minimal peak power {t:.6g} W exceeds the cap {cap:.6g} W"
        )
    powers[members] = np.maximum(x[:nm], 0.0)
    return PowerAllocation(powers), float(t)


def corner_rates(gateways, powers, order):
    """SIC rate vector for one decoding order at the given powers; the
    first-decoded gateway sees interference from everyone after it."""
    p = np.asarray(powers, dtype=float)
    g2 = gateways.gains ** 2
    n0 = gateways.noise_power
    rates = np.zeros(gateways.num_gws)
    suffix = float(sum(p[i] * g2[i] for i in order))
    for i in order:
        own = p[i] * g2[i]
        rates[i] = math.log2(1.0 + own / (n0 + suffix - own))
        suffix -= own
    return rates


def cyclic_orders(n):
    """Cyclic shifts of (0..n-1) starting at 0 then n-1 down to 1."""
    starts = [0] + list(range(n - 1, 0, -1))
    return [tuple((s + t) % n for t in range(n)) for s in starts]


def time_share_decompose(gateways, powers, orders=None, max_flips=None):
    """Mix decoding orders so the time-averaged corner rates equal Q.

    Solves corner_matrix @ fractions = Q; a negative fraction means the
    target lies outside the spanned cone, in which case the offending
    order is reversed and the system re-solved (up to N retries).
    """
    n = gateways.num_gws
    if orders is None:
        orders = cyclic_orders(n)
    orders = [tuple(o) for o in orders]
    if len(orders) != n:
        raise ValueError(f"expected {n} decoding orders, got {len(orders)}")
    for o in orders:
        if sorted(o) != list(range(n)):
            raise ValueError(f"order {o} is not a permutation of 0..{n - 1}")
    p = np.asarray(powers.powers if isinstance(powers, PowerAllocation) else powers,
                   dtype=float)
    q = gateways.queue_rates
    if max_flips is None:
        max_flips = n
    orders = list(orders)
    for _ in range(max_flips + 1):
        corner_matrix = np.column_stack([corner_rates(gateways, p, o) for o in orders])
        try:
            lam = np.linalg.solve(corner_matrix, q)
        except np.linalg.LinAlgError:
            raise DecompositionError("corner rate vectors are linearly dependent")
        neg = np.nonzero(lam < -1e-9)[0]
        if neg.size == 0:
            lam = np.maximum(lam, 0.0)
            if abs(lam.sum() - 1.0) > 1e-6:
                raise DecompositionError(
                    f"fractions sum to {lam.sum():.6g}; the sum-rate "
                    "constraint does not bind at these powers"
                )
            lam = lam / lam.sum()
            return TimeShareSchedule(tuple(zip(orders, lam)))
        worst = int(neg[np.argmin(lam[neg])])
        orders[worst] = tuple(reversed(orders[worst]))
    raise DecompositionError(
        f"negative fraction persists for order {orders[worst]} after "
        f"{max_flips} flips; the target rates are outside the face spanned "
        "by these decoding orders"
    )


def weights_from_queues(queue_rates):
    """Normalized weights proportional to the stored data rates."""
    q = np.asarray(queue_rates, dtype=float)
    total = q.sum()
    if total <= 0:
        raise ValueError("queue rates must have a positive sum")
    return q / total


def _weighted_corner_value(gateways, weights, powers):
    """Greedy optimum of max w @ r over the rate polytope at fixed powers:
    value, gradient wrt powers, and the corner decoding order."""
    g2 = gateways.gains ** 2
    n0 = gateways.noise_power
    n = gateways.num_gws
    # decode ascending weight first so heavier gateways see less interference
    by_weight_desc = sorted(range(n), key=lambda i: (-weights[i], i))
    value = 0.0
    grad = np.zeros(n)
    received = powers * g2
    prefix = 0.0
    for k, i in enumerate(by_weight_desc):
        w_here = weights[i]
        w_next = weights[by_weight_desc[k + 1]] if k + 1 < n else 0.0
        coeff = w_here - w_next
        prefix += received[i]
        if coeff != 0.0:
            value += coeff * math.log2(1.0 + prefix / n0)
            scale = coeff / (LN2 * (n0 + prefix))
            for t in range(k + 1):
                j = by_weight_desc[t]
                grad[j] += scale * g2[j]
    order = tuple(reversed(by_weight_desc))  # lightest weight decoded first
    return value, grad, order


def _project_capped_simplex(x, cap):
    """Euclidean projection onto {p >= 0, sum p <= cap}."""
    x = np.maximum(x, 0.0)
    s = x.sum()
    if s <= cap:
        return x
    # project onto the simplex of size cap (sorted threshold method)
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - cap
    rho = np.nonzero(u - css / np.arange(1, x.size + 1) > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(x - theta, 0.0)


def _weighted_support_solve(gateways, weights, total_cap):
    """Exact maximizer of the corner-collapsed weighted-sum objective.

    With the decoding order fixed by the weights, the objective is a
    concave function of the prefix received powers, so for each candidate
    support (set of gateways with positive power) the stationarity
    conditions plus the binding cap form a linear system with a closed
    form.  Enumerating supports and keeping the best feasible candidate
    yields the global optimum to machine precision.
    """
    n = gateways.num_gws
    g2 = gateways.gains ** 2
    n0 = gateways.noise_power
    active = [i for i in range(n) if weights[i] > 0 and g2[i] > 0]
    order_desc = sorted(active, key=lambda i: (-weights[i], i))
    na = len(order_desc)
    if na == 0:
        return np.zeros(n)
    # coefficient of log2(1 + prefix_k/N0): weight drop at position k
    w_sorted = [weights[i] for i in order_desc]
    coeff = [w_sorted[k] - (w_sorted[k + 1] if k + 1 < na else 0.0)
             for k in range(na)]
    best_value = -math.inf
    best_p = np.zeros(n)
    for mask in range(1, 1 << na):
        positions = [k for k in range(na) if (mask >> k) & 1]
        s = len(positions)
        gains = [g2[order_desc[k]] for k in positions]
        # weight drop accumulated until the next active position
        c = []
        for j, m in enumerate(positions):
            stop = positions[j + 1] if j + 1 < s else na
            c.append(sum(coeff[m:stop]))
        if any(cj <= 0 for cj in c):
            continue
        d = [1.0 / gains[j] - (1.0 / gains[j + 1] if j + 1 < s else 0.0)
             for j in range(s)]
        if any(dj <= 0 for dj in d):
            continue
        # stationarity: c_j / (ln2 (N0 + Y_j)) = mu d_j  =>  N0 + Y_j = a_j/mu
        a = [c[j] / (LN2 * d[j]) for j in range(s)]
        numer = a[0] / gains[0] + sum(
            (a[j] - a[j - 1]) / gains[j] for j in range(1, s))
        mu = numer / (total_cap + n0 / gains[0])
        if mu <= 0:
            continue
        y = [aj / mu - n0 for aj in a]
        if y[0] <= 0 or any(y[j] <= y[j - 1] for j in range(1, s)):
            continue
        p = np.zeros(n)
        prev = 0.0
        for j, m in enumerate(positions):
            p[order_desc[m]] = (y[j] - prev) / gains[j]
            prev = y[j]
        value, _, _ = _weighted_corner_value(gateways, weights, p)
        if value > best_value:
            best_value = value
            best_p = p
    return best_p


def max_weighted_sum(gateways, weights=None, total_cap=None,
                     tol=1e-9, max_iter=200_000):
    """Maximize the weighted sum of gateway rates under a total power cap.

    Up to 16 gateways the concave corner-collapsed objective is solved
    exactly by support enumeration (closed-form KKT system per support);
    beyond that, projected gradient ascent runs until the KKT stationarity
    residual over the support drops below tol.
    """
    if weights is None:
        weights = weights_from_queues(gateways.queue_rates)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (gateways.num_gws,):
        raise ValueError("weights length must equal the gateway count")
    if abs(weights.sum() - 1.0) > 1e-6:
        raise ValueError("weights must sum to 1")
    if total_cap is None:
        total_cap = gateways.total_power_cap
    if total_cap is None or total_cap <= 0:
        raise ValueError("a positive total power cap is required")

    n = gateways.num_gws
    if n <= 16:
        return _finish_weighted(gateways, weights, total_cap,
                                _weighted_support_solve(gateways, weights,
                                                        total_cap))
    p = np.full(n, total_cap / n)
    value, grad, _ = _weighted_corner_value(gateways, weights, p)
    step = total_cap / max(np.abs(grad).max(), 1e-12)
    for _ in range(max_iter):
        cand = _project_capped_simplex(p + step * grad, total_cap)
        cand_value, cand_grad, _ = _weighted_corner_value(gateways, weights, cand)
        gain = cand_value - value
        expected = float(grad @ (cand - p))
        if gain >= 1e-4 * expected or expected <= 0:
            p, value, grad = cand, cand_value, cand_grad
            step *= 1.25
        else:
            step *= 0.5
            if step < 1e-18 * total_cap:
                break
            continue
        support = p > 0
        if support.any():
            lam = grad[support].max()
            resid = max(
                float(np.max(lam - grad[support])),
                float(np.max(np.maximum(grad[~support] - lam, 0.0), initial=0.0)),
            )
            scale = max(abs(lam), 1.0)
            if resid <= tol * scale and abs(p.sum() - total_cap) <= tol * total_cap:
                break
    return _finish_weighted(gateways, weights, total_cap, p)


def _finish_weighted(gateways, weights, total_cap, p):
    n = gateways.num_gws
    off_tol = 1e-9 * total_cap
    p = np.where(p < off_tol, 0.0, p)
    value, grad, order_all = _weighted_corner_value(gateways, weights, p)
    off = frozenset(int(i) for i in range(n) if p[i] == 0.0)
    order = tuple(i for i in order_all if i not in off)
    rates = corner_rates(gateways, p, order)
    return WeightedRateSolution(
        powers=PowerAllocation(p),
        rates=rates,
        weights=weights,
        decoding_order=order,
        off_set=off,
    )
