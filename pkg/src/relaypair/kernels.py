"""Hot numeric kernels for the dual subgradient loops and water-filling.

Everything here is written so that it runs identically with and without
numba; see :mod:`relaypair._numba` for the backend switch.  The per-iteration
score matrices are O(M^2) and dominate the solver runtime, so the
pre-trigger subgradient phases are fused into single compiled loops.

Conventions: ``mu`` prices are floored at ``MU_FLOOR`` wherever they divide,
row index k is the first-slot subcarrier, column index m the second-slot
subcarrier.  Ties in argmax/argmin resolve to the smallest index.
"""

import numpy as np

from ._numba import njit

MU_FLOOR = 1e-12
_BIG = 1e300


@njit(cache=True)
def _inv_gain(gains):
    return np.where(gains > 0.0, 1.0 / np.maximum(gains, 1e-300), np.full(gains.shape, _BIG))


# -- water-filling ----------------------------------------------------------

@njit(cache=True)
def _wf_sum(gains, weights, mu):
    total = 0.0
    for i in range(gains.shape[0]):
        if gains[i] > 0.0 and weights[i] > 0.0:
            p = weights[i] / (2.0 * mu) - 1.0 / gains[i]
            if p > 0.0:
                total += p
    return total


@njit(cache=True)
def waterfill_kernel(gains, weights, budget):
    """Weighted water-filling p_i = [w_i/(2 mu) - 1/a_i]^+ meeting the budget.

    Returns (powers, mu).  mu is found by bisection, then the powers get one
    linear correction so the budget matches to machine precision.
    """
    n = gains.shape[0]
    powers = np.zeros(n)
    wa_max = 0.0
    for i in range(n):
        wa = weights[i] * gains[i]
        if wa > wa_max:
            wa_max = wa
    if budget <= 0.0 or wa_max <= 0.0:
        return powers, 0.5 * wa_max

    mu_hi = 0.5 * wa_max  # all powers zero at or above this price
    mu_lo = mu_hi
    for _ in range(4000):
        mu_lo *= 0.5
        if _wf_sum(gains, weights, mu_lo) >= budget:
            break
    for _ in range(200):
        mid = 0.5 * (mu_lo + mu_hi)
        if _wf_sum(gains, weights, mid) > budget:
            mu_lo = mid
        else:
            mu_hi = mid
        if mu_hi - mu_lo <= 1e-15 * mu_hi:
            break
    mu = 0.5 * (mu_lo + mu_hi)

    used = 0.0
    w_active = 0.0
    for i in range(n):
        if gains[i] > 0.0 and weights[i] > 0.0:
            p = weights[i] / (2.0 * mu) - 1.0 / gains[i]
            if p > 0.0:
                powers[i] = p
                used += p
                w_active += weights[i]
    if w_active > 0.0:
        dnu = (budget - used) / w_active
        for i in range(n):
            if powers[i] > 0.0:
                powers[i] = max(powers[i] + weights[i] * dnu, 0.0)
    return powers, mu


@njit(cache=True)
def waterfill_residual(gains, weights, budget, powers):
    """Max KKT violation (stationarity, complementary slackness, budget)."""
    n = gains.shape[0]
    mu_est = 0.0
    for i in range(n):
        if gains[i] > 0.0 and weights[i] > 0.0:
            lvl = 0.5 * weights[i] / (1.0 / gains[i] + powers[i])
            if lvl > mu_est:
                mu_est = lvl
    res = abs(budget - powers.sum()) / max(1.0, budget)
    for i in range(n):
        if powers[i] > 0.0 and gains[i] > 0.0 and weights[i] > 0.0:
            lvl = 0.5 * weights[i] / (1.0 / gains[i] + powers[i])
            dev = abs(lvl - mu_est) / max(mu_est, 1e-300)
            if dev > res:
                res = dev
    return res


# -- total power constraint -------------------------------------------------

@njit(cache=True)
def total_scores(w, gains, mu, alpha):
    """Per-pair score X and candidate power at duals (mu, alpha)."""
    m = w.shape[0]
    mu_eff = max(mu, MU_FLOOR)
    wcol = w.reshape(-1, 1)
    inv = _inv_gain(gains)
    powers = np.maximum(wcol / (2.0 * mu_eff) - inv, 0.0)
    rates = 0.5 * wcol * np.log1p(gains * powers)
    scores = rates - alpha.reshape(1, -1) - mu_eff * powers
    return scores, powers


@njit(cache=True)
def total_phase1(w, gains, budget, mu, alpha, step_scale, eps, max_hard,
                 min_iter, trace):
    """Subgradient iteration until the duals settle within eps.

    Mutates alpha in place, fills trace rows (mu, |alpha|, power_sum, dual),
    and returns (iterations, mu, dual_min, converged).
    """
    m = w.shape[0]
    dual_min = np.inf
    i = 0
    consec = 0
    converged = False
    while i < max_hard:
        i += 1
        mu_eff = max(mu, MU_FLOOR)
        scores, powers = total_scores(w, gains, mu, alpha)
        counts = np.zeros(m)
        power_sum = 0.0
        best_sum = 0.0
        for k in range(m):
            sel = np.argmax(scores[k])
            counts[sel] += 1.0
            power_sum += powers[k, sel]
            best_sum += scores[k, sel]
        dual = best_sum + mu_eff * budget + alpha.sum()
        if dual < dual_min:
            dual_min = dual
        trace[i - 1, 0] = mu
        trace[i - 1, 1] = np.sqrt(np.sum(alpha * alpha))
        trace[i - 1, 2] = power_sum
        trace[i - 1, 3] = dual

        step = step_scale / np.sqrt(i)
        new_mu = mu - step * (budget - power_sum)
        if new_mu < 0.0:
            new_mu = 0.0
        d_alpha_sq = 0.0
        alpha_sq = 0.0
        for j in range(m):
            d = step * (1.0 - counts[j])
            alpha[j] -= d
            d_alpha_sq += d * d
            alpha_sq += alpha[j] * alpha[j]
        mu_ok = abs(new_mu - mu) / max(abs(new_mu), MU_FLOOR) < eps
        al_ok = np.sqrt(d_alpha_sq) / max(np.sqrt(alpha_sq), MU_FLOOR) < eps
        mu = new_mu
        if mu_ok and al_ok:
            consec += 1
        else:
            consec = 0
        if consec >= 3 and i >= min_iter:
            converged = True
            break
    return i, mu, dual_min, converged


# -- individual power constraints -------------------------------------------

@njit(cache=True)
def ind_tables(a_sd, a_sr, a_rd, mu_s, mu_r):
    """Mode-dependent equivalent gain and power split at the current price ratio.

    The relay branch applies when a_sr > a_sd and a_rd >= a_sd * mu_r/mu_s;
    the boundary (intermediate) case is folded into the relay branch.
    """
    m = a_sd.shape[0]
    ratio = max(mu_r, MU_FLOOR) / max(mu_s, MU_FLOOR)
    asr = a_sr.reshape(-1, 1) + np.zeros((m, m))
    asd = a_sd.reshape(-1, 1) + np.zeros((m, m))
    ard = a_rd.reshape(1, -1) + np.zeros((m, m))
    relay = (asr > asd) & (ard >= asd * ratio)
    denom = np.where(relay, asr + ard - asd, 1.0)
    gains = np.where(relay, asr * ard / denom, asd)
    c_s = np.where(relay, ard / denom, np.ones((m, m)))
    c_r = np.where(relay, (asr - asd) / denom, np.zeros((m, m)))
    return gains, c_s, c_r


@njit(cache=True)
def ind_scores(w, gains, c_s, c_r, mu_s, mu_r, alpha):
    mu_s_eff = max(mu_s, MU_FLOOR)
    mu_r_eff = max(mu_r, MU_FLOOR)
    wcol = w.reshape(-1, 1)
    price = c_s * mu_s_eff + c_r * mu_r_eff
    inv = _inv_gain(gains)
    powers = np.maximum(wcol / (2.0 * price) - inv, 0.0)
    rates = 0.5 * wcol * np.log1p(gains * powers)
    scores = rates - alpha.reshape(1, -1) - price * powers
    return scores, powers


@njit(cache=True)
def ind_phase1(w, a_sd, a_sr, a_rd, p_src, p_rly, mu_s, mu_r, alpha,
               step_scale, eps, max_hard, min_iter, trace):
    m = w.shape[0]
    dual_min = np.inf
    i = 0
    consec = 0
    converged = False
    while i < max_hard:
        i += 1
        gains, c_s, c_r = ind_tables(a_sd, a_sr, a_rd, mu_s, mu_r)
        scores, powers = ind_scores(w, gains, c_s, c_r, mu_s, mu_r, alpha)
        counts = np.zeros(m)
        src_used = 0.0
        rly_used = 0.0
        best_sum = 0.0
        for k in range(m):
            sel = np.argmax(scores[k])
            counts[sel] += 1.0
            src_used += c_s[k, sel] * powers[k, sel]
            rly_used += c_r[k, sel] * powers[k, sel]
            best_sum += scores[k, sel]
        dual = best_sum + max(mu_s, MU_FLOOR) * p_src + max(mu_r, MU_FLOOR) * p_rly + alpha.sum()
        if dual < dual_min:
            dual_min = dual
        trace[i - 1, 0] = mu_s
        trace[i - 1, 1] = np.sqrt(np.sum(alpha * alpha))
        trace[i - 1, 2] = src_used + rly_used
        trace[i - 1, 3] = dual

        step = step_scale / np.sqrt(i)
        new_mu_s = max(mu_s - step * (p_src - src_used), 0.0)
        new_mu_r = max(mu_r - step * (p_rly - rly_used), 0.0)
        d_alpha_sq = 0.0
        alpha_sq = 0.0
        for j in range(m):
            d = step * (1.0 - counts[j])
            alpha[j] -= d
            d_alpha_sq += d * d
            alpha_sq += alpha[j] * alpha[j]
        ok = (abs(new_mu_s - mu_s) / max(abs(new_mu_s), MU_FLOOR) < eps
              and abs(new_mu_r - mu_r) / max(abs(new_mu_r), MU_FLOOR) < eps
              and np.sqrt(d_alpha_sq) / max(np.sqrt(alpha_sq), MU_FLOOR) < eps)
        mu_s = new_mu_s
        mu_r = new_mu_r
        if ok:
            consec += 1
        else:
            consec = 0
        if consec >= 3 and i >= min_iter:
            converged = True
            break
    return i, mu_s, mu_r, dual_min, converged


# -- extra second-slot direct transmission ----------------------------------

@njit(cache=True)
def direct_slot_terms(w, a_sd, mu):
    """Per-subcarrier direct power and Lagrangian contribution at price mu."""
    mu_eff = max(mu, MU_FLOOR)
    inv = _inv_gain(a_sd)
    p = np.maximum(w / (2.0 * mu_eff) - inv, 0.0)
    g = 0.5 * w * np.log1p(a_sd * p) - mu_eff * p
    return p, g


@njit(cache=True)
def extra_scores(w, a_sd, gains_relay, relay_ok, mu, alpha):
    """Scores for the joint pairing / relay-use selection under a total budget.

    relay_ok[k, m] marks pairs where relay use is admissible (a_sr > a_sd).
    Returns (scores, use_relay, relay_power_matrix, direct_power_vector).
    """
    m = w.shape[0]
    mu_eff = max(mu, MU_FLOOR)
    wcol = w.reshape(-1, 1)
    inv = _inv_gain(gains_relay)
    p1 = np.maximum(wcol / (2.0 * mu_eff) - inv, 0.0)
    y_r = 0.5 * wcol * np.log1p(gains_relay * p1) - mu_eff * p1
    p2, g2 = direct_slot_terms(w, a_sd, mu)
    y_d = g2.reshape(-1, 1) + g2.reshape(1, -1)
    use_relay = relay_ok & (y_r > y_d)
    scores = np.where(use_relay, y_r, y_d) - alpha.reshape(1, -1)
    return scores, use_relay, p1, p2


@njit(cache=True)
def extra_phase1(w, a_sd, gains_relay, relay_ok, budget, mu, alpha,
                 step_scale, eps, max_hard, min_iter, trace):
    m = w.shape[0]
    dual_min = np.inf
    i = 0
    consec = 0
    converged = False
    while i < max_hard:
        i += 1
        mu_eff = max(mu, MU_FLOOR)
        scores, use_relay, p1, p2 = extra_scores(w, a_sd, gains_relay, relay_ok, mu, alpha)
        counts = np.zeros(m)
        power_sum = 0.0
        best_sum = 0.0
        for k in range(m):
            sel = np.argmax(scores[k])
            counts[sel] += 1.0
            if use_relay[k, sel]:
                power_sum += p1[k, sel]
            else:
                power_sum += p2[k] + p2[sel]
            best_sum += scores[k, sel]
        dual = best_sum + mu_eff * budget + alpha.sum()
        if dual < dual_min:
            dual_min = dual
        trace[i - 1, 0] = mu
        trace[i - 1, 1] = np.sqrt(np.sum(alpha * alpha))
        trace[i - 1, 2] = power_sum
        trace[i - 1, 3] = dual

        step = step_scale / np.sqrt(i)
        new_mu = max(mu - step * (budget - power_sum), 0.0)
        d_alpha_sq = 0.0
        alpha_sq = 0.0
        for j in range(m):
            d = step * (1.0 - counts[j])
            alpha[j] -= d
            d_alpha_sq += d * d
            alpha_sq += alpha[j] * alpha[j]
        mu_ok = abs(new_mu - mu) / max(abs(new_mu), MU_FLOOR) < eps
        al_ok = np.sqrt(d_alpha_sq) / max(np.sqrt(alpha_sq), MU_FLOOR) < eps
        mu = new_mu
        if mu_ok and al_ok:
            consec += 1
        else:
            consec = 0
        if consec >= 3 and i >= min_iter:
            converged = True
            break
    return i, mu, dual_min, converged


@njit(cache=True)
def extra_ind_scores(w, a_sd, a_sr, a_rd, mu_s, mu_r, alpha):
    """Extra-direct scores under individual budgets.

    The relay-side contribution prices power at c_s mu_s + c_r mu_r; the
    direct side prices both slots at mu_s.
    """
    m = w.shape[0]
    relay_need = a_sr.reshape(-1, 1) > a_sd.reshape(-1, 1) + np.zeros((m, m))
    gains, c_s, c_r = ind_tables(a_sd, a_sr, a_rd, mu_s, mu_r)
    mu_s_eff = max(mu_s, MU_FLOOR)
    mu_r_eff = max(mu_r, MU_FLOOR)
    wcol = w.reshape(-1, 1)
    price = c_s * mu_s_eff + c_r * mu_r_eff
    inv = _inv_gain(gains)
    p1 = np.maximum(wcol / (2.0 * price) - inv, 0.0)
    y_r = 0.5 * wcol * np.log1p(gains * p1) - price * p1
    p2, g2 = direct_slot_terms(w, a_sd, mu_s)
    y_d = g2.reshape(-1, 1) + g2.reshape(1, -1)
    use_relay = relay_need & (y_r > y_d)
    scores = np.where(use_relay, y_r, y_d) - alpha.reshape(1, -1)
    return scores, use_relay, p1, c_s, c_r, p2


@njit(cache=True)
def extra_ind_phase1(w, a_sd, a_sr, a_rd, p_src, p_rly, mu_s, mu_r, alpha,
                     step_scale, eps, max_hard, min_iter, fixed_pairing,
                     use_fixed, trace):
    m = w.shape[0]
    dual_min = np.inf
    i = 0
    consec = 0
    converged = False
    while i < max_hard:
        i += 1
        scores, use_relay, p1, c_s, c_r, p2 = extra_ind_scores(
            w, a_sd, a_sr, a_rd, mu_s, mu_r, alpha)
        counts = np.zeros(m)
        src_used = 0.0
        rly_used = 0.0
        best_sum = 0.0
        for k in range(m):
            if use_fixed:
                sel = fixed_pairing[k]
            else:
                sel = np.argmax(scores[k])
            counts[sel] += 1.0
            if use_relay[k, sel]:
                src_used += c_s[k, sel] * p1[k, sel]
                rly_used += c_r[k, sel] * p1[k, sel]
            else:
                src_used += p2[k] + p2[sel]
            best_sum += scores[k, sel]
        dual = best_sum + max(mu_s, MU_FLOOR) * p_src + max(mu_r, MU_FLOOR) * p_rly + alpha.sum()
        if dual < dual_min:
            dual_min = dual
        trace[i - 1, 0] = mu_s
        trace[i - 1, 1] = np.sqrt(np.sum(alpha * alpha))
        trace[i - 1, 2] = src_used + rly_used
        trace[i - 1, 3] = dual

        step = step_scale / np.sqrt(i)
        new_mu_s = max(mu_s - step * (p_src - src_used), 0.0)
        new_mu_r = max(mu_r - step * (p_rly - rly_used), 0.0)
        d_alpha_sq = 0.0
        alpha_sq = 0.0
        if not use_fixed:
            for j in range(m):
                d = step * (1.0 - counts[j])
                alpha[j] -= d
                d_alpha_sq += d * d
                alpha_sq += alpha[j] * alpha[j]
        ok = (abs(new_mu_s - mu_s) / max(abs(new_mu_s), MU_FLOOR) < eps
              and abs(new_mu_r - mu_r) / max(abs(new_mu_r), MU_FLOOR) < eps
              and (use_fixed
                   or np.sqrt(d_alpha_sq) / max(np.sqrt(alpha_sq), MU_FLOOR) < eps))
        mu_s = new_mu_s
        mu_r = new_mu_r
        if ok:
            consec += 1
        else:
            consec = 0
        if consec >= 3 and i >= min_iter:
            converged = True
            break
    return i, mu_s, mu_r, dual_min, converged


# -- exact source-pinned solve for the two-budget inner problem -------------

@njit(cache=True)
def nu_solve(gains, weights, c_s, c_r, ratio, p_src):
    """Exact water level for channels priced by c_s + c_r * ratio (per mu_s),
    pinned so the source consumption equals p_src.

    Power on channel i is [w_i * nu / (c_s_i + c_r_i * ratio) - 1/a_i]^+
    with nu = 1/(2 mu_s).  Source use is piecewise linear and strictly
    increasing in nu, so the pin is solved by an active-set walk.
    Returns (nu, powers, relay_used).
    """
    n = gains.shape[0]
    powers = np.zeros(n)
    slope = np.zeros(n)      # d p_i / d nu
    thresh = np.full(n, np.inf)
    for i in range(n):
        if gains[i] > 0.0 and weights[i] > 0.0:
            pw = weights[i] / (c_s[i] + c_r[i] * ratio)
            slope[i] = pw
            thresh[i] = 1.0 / (pw * gains[i])
    order = np.argsort(thresh)
    if p_src <= 0.0 or not np.isfinite(thresh[order[0]]):
        return 0.0, powers, 0.0

    src_slope = 0.0
    src_icpt = 0.0
    nu = thresh[order[0]]
    for j in range(n):
        i = order[j]
        if not np.isfinite(thresh[i]):
            break
        src_slope += c_s[i] * slope[i]
        src_icpt += c_s[i] / gains[i]
        cand = (p_src + src_icpt) / src_slope
        if j + 1 < n and np.isfinite(thresh[order[j + 1]]) and cand > thresh[order[j + 1]]:
            continue
        nu = cand
        break

    relay_used = 0.0
    for i in range(n):
        if np.isfinite(thresh[i]) and nu > thresh[i]:
            p = slope[i] * nu - 1.0 / gains[i]
            powers[i] = p
            relay_used += c_r[i] * p
    return nu, powers, relay_used


# -- brute-force pairing search (total power) -------------------------------

@njit(cache=True)
def exhaustive_total_kernel(gains, w, budget, perms):
    """Max water-filled rate over an explicit array of permutations."""
    n_perm, m = perms.shape
    best_rate = -1.0
    best_idx = 0
    sel_gains = np.empty(m)
    for idx in range(n_perm):
        for k in range(m):
            sel_gains[k] = gains[k, perms[idx, k]]
        powers, _ = waterfill_kernel(sel_gains, w, budget)
        rate = 0.0
        for k in range(m):
            rate += 0.5 * w[k] * np.log1p(sel_gains[k] * powers[k])
        if rate > best_rate:
            best_rate = rate
            best_idx = idx
    return best_rate, best_idx
