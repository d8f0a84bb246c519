"""Special functions used by the gamma-process failure-time model.

Log-gamma, digamma and trigamma are thin wrappers around ``math`` and
``scipy.special``.  The regularized incomplete gamma function, its inverse in
the shape argument and the shape derivative are implemented here because the
design criteria need ``dQ/ds`` to full precision across both the series and
the continued-fraction regime.
"""
import math
import sys

import numpy as np
from scipy import optimize, special

_EPS = sys.float_info.epsilon
_TINY = 1e-300
_MAX_ITER = 10_000


def _check_positive(name, value):
    if np.any(np.asarray(value) <= 0) or np.any(np.isnan(value)):
        raise ValueError(f"{name} must be positive, got {value!r}")


def ln_gamma(s):
    """Natural log of the gamma function for ``s > 0``."""
    _check_positive("s", s)
    if np.ndim(s) == 0:
        return math.lgamma(float(s))
    return special.gammaln(s)


def digamma(s):
    _check_positive("s", s)
    out = special.psi(s)
    return float(out) if np.ndim(out) == 0 else out


def trigamma(s):
    """Second derivative of ``ln Γ``; accepts scalars or arrays."""
    _check_positive("s", s)
    out = special.polygamma(1, s)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Regularized incomplete gamma
# ---------------------------------------------------------------------------

def _lower_series(s, z):
    """P(s, z) by the power series; suitable for z < s + 1."""
    if z == 0.0:
        return 0.0
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= z / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma series did not converge at s={s}, z={z}")
    return total * math.exp(-z + s * math.log(z) - math.lgamma(s))


def _upper_cf(s, z):
    """Q(s, z) by the Legendre continued fraction (modified Lentz); z >= s + 1."""
    b = z + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma fraction did not converge at s={s}, z={z}")
    return math.exp(-z + s * math.log(z) - math.lgamma(s)) * h


def _check_qargs(s, z):
    if not s > 0:
        raise ValueError(f"shape s must be positive, got {s!r}")
    if not z >= 0:
        raise ValueError(f"argument z must be nonnegative, got {z!r}")


def reg_gamma_p(s, z):
    """Lower regularized incomplete gamma ``P(s, z) = 1 - Q(s, z)``."""
    s, z = float(s), float(z)
    _check_qargs(s, z)
    if z < s + 1.0:
        return _lower_series(s, z)
    return 1.0 - _upper_cf(s, z)


def reg_gamma_q(s, z):
    """Upper regularized incomplete gamma ``Q(s, z) = Γ(s, z) / Γ(s)``."""
    s, z = float(s), float(z)
    _check_qargs(s, z)
    if z < s + 1.0:
        return 1.0 - _lower_series(s, z)
    return _upper_cf(s, z)


def inv_reg_gamma_q_shape(alpha, z):
    """Solve ``Q(s, z) = alpha`` for the shape ``s``.

    ``Q`` is strictly increasing in ``s`` (from 0 to 1 for fixed ``z > 0``), so
    the root is bracketed by doubling the upper end and then refined with
    Brent's method.
    """
    alpha, z = float(alpha), float(z)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not z > 0.0:
        raise ValueError(f"z must be positive, got {z!r}")

    def g(s):
        return reg_gamma_q(s, z) - alpha

    lo = 1e-6
    while g(lo) > 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise ArithmeticError("could not bracket the shape from below")
    hi = 1.0
    while g(hi) < 0.0:
        hi *= 2.0
        if hi > 2.0**60:
            raise ArithmeticError("could not bracket the shape from above")
    return optimize.brentq(g, lo, hi, xtol=1e-300, rtol=4 * _EPS, maxiter=500)


# ---------------------------------------------------------------------------
# 2F2 series and the shape derivative of Q
# ---------------------------------------------------------------------------

def _hyp2f2_with_error(a, z):
    """Sum 1 + Σ (a/(a+k))² (-z)^k / k! and return (value, rounding error bound)."""
    total = 1.0
    comp = 0.0  # Neumaier compensation
    term = 1.0
    largest = 1.0
    for k in range(1, _MAX_ITER):
        term *= -z / k
        if not math.isfinite(term):
            raise OverflowError(f"2F2 series overflows at z={z}")
        t = term * (a / (a + k)) ** 2
        s = total + t
        if abs(total) >= abs(t):
            comp += (total - s) + t
        else:
            comp += (t - s) + total
        total = s
        largest = max(largest, abs(t))
        if abs(t) <= 1e-15 * abs(total + comp) and k > z:
            break
    else:
        raise ArithmeticError(f"2F2 series did not converge at a={a}, z={z}")
    # each term carries O(k) roundings from the running product
    err = 4.0 * _EPS * k * largest
    return total + comp, err


def hyp2f2_reg(a, z):
    """``2F2(a, a; a+1, a+1; -z)`` by its alternating power series.

    Accurate while ``z`` is moderate; the series loses roughly
    ``log10(e^z)`` digits to cancellation.
    """
    a, z = float(a), float(z)
    if not a > 0:
        raise ValueError(f"a must be positive, got {a!r}")
    if not z >= 0:
        raise ValueError(f"z must be nonnegative, got {z!r}")
    return _hyp2f2_with_error(a, z)[0]


def _dq_closed_form(s, z):
    """dQ/ds from the 2F2 representation, with a propagated error bound."""
    f22, f22_err = _hyp2f2_with_error(s, z)
    log_pref = math.lgamma(s) - 2.0 * math.lgamma(s + 1.0) + s * math.log(z)
    pref = math.exp(log_pref)
    p = reg_gamma_p(s, z)
    second = -p * (math.log(z) - digamma(s))
    value = pref * f22 + second
    err = pref * f22_err + 8.0 * _EPS * (abs(pref * f22) + abs(second))
    return value, err


def _dq_series(s, z):
    """dQ/ds = -Σ_n T_n (ln z - ψ(s+n+1)) with T_n = e^{-z} z^{s+n} / Γ(s+n+1)."""
    lz = math.log(z)
    log_t = -z + s * lz - math.lgamma(s + 1.0)
    psi = digamma(s + 1.0)
    total = 0.0
    comp = 0.0
    t = math.exp(log_t)
    for n in range(_MAX_ITER):
        u = t * (lz - psi)
        v = total + u
        if abs(total) >= abs(u):
            comp += (total - v) + u
        else:
            comp += (u - v) + total
        total = v
        if n > z and abs(u) <= _EPS * abs(total + comp):
            break
        t *= z / (s + n + 1.0)
        psi += 1.0 / (s + n + 1.0)
        if t == 0.0:
            break
    else:
        raise ArithmeticError(f"dQ/ds series did not converge at s={s}, z={z}")
    return -(total + comp)


def _dq_fraction(s, z):
    """dQ/ds by differentiating the Legendre continued fraction in s.

    Q = e^{-z} z^s K^{-1} / Γ(s) with K = b0 + a1/(b1 + a2/(b2 + ...)), so
    d ln Q / ds = ln z - ψ(s) - K'/K.  Convergents and their s-derivatives
    follow the Wallis recurrences.
    """
    b0 = z + 1.0 - s
    a_prev, a_cur = 1.0, b0  # A_{-1}, A_0
    b_prev, b_cur = 0.0, 1.0  # B_{-1}, B_0
    da_prev, da_cur = 0.0, -1.0
    db_prev, db_cur = 0.0, 0.0
    k_old = a_cur / b_cur
    dk_old = da_cur / b_cur
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        dan = float(i)
        bn = z + 2.0 * i + 1.0 - s
        dbn = -1.0
        a_new = bn * a_cur + an * a_prev
        b_new = bn * b_cur + an * b_prev
        da_new = dbn * a_cur + bn * da_cur + dan * a_prev + an * da_prev
        db_new = dbn * b_cur + bn * db_cur + dan * b_prev + an * db_prev
        a_prev, a_cur = a_cur, a_new
        b_prev, b_cur = b_cur, b_new
        da_prev, da_cur = da_cur, da_new
        db_prev, db_cur = db_cur, db_new
        scale = abs(b_cur)
        if scale > 0.0:
            a_prev /= scale
            a_cur /= scale
            b_prev /= scale
            b_cur /= scale
            da_prev /= scale
            da_cur /= scale
            db_prev /= scale
            db_cur /= scale
        k_new = a_cur / b_cur
        dk_new = (da_cur * b_cur - a_cur * db_cur) / (b_cur * b_cur)
        if (abs(k_new - k_old) <= _EPS * abs(k_new)
                and abs(dk_new - dk_old) <= 4 * _EPS * max(abs(dk_new), _TINY)):
            break
        k_old, dk_old = k_new, dk_new
    else:
        raise ArithmeticError(f"dQ/ds fraction did not converge at s={s}, z={z}")
    q = _upper_cf(s, z)
    return q * (math.log(z) - digamma(s) - dk_new / k_new)


def dq_dshape(s, z):
    """Partial derivative of ``Q(s, z)`` with respect to the shape ``s``.

    Uses ``Γ(s)/Γ(s+1)² z^s 2F2(s,s;s+1,s+1;-z) + (Q - 1)(ln z - ψ(s))``
    whenever the alternating series keeps at least 12 significant digits.
    Otherwise (large ``z``) the same quantity is summed from positive-term
    series or the differentiated continued fraction.
    """
    s, z = float(s), float(z)
    if not s > 0:
        raise ValueError(f"shape s must be positive, got {s!r}")
    if not z > 0:
        raise ValueError(f"z must be positive, got {z!r}")
    if z < 50.0:
        value, err = _dq_closed_form(s, z)
        if value > 0.0 and err <= 1e-12 * value:
            return value
    if z < s + 1.0:
        return _dq_series(s, z)
    return _dq_fraction(s, z)
