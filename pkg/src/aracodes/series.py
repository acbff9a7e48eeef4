"""Truncated real power-series arithmetic and the scalar special functions used
by the degree-distribution constructions.

A series is a fixed-length vector of float64 coefficients c_0..c_{N-1}; all
operations truncate to the shorter operand's precision. Arithmetic is plain
double precision: cancellation in division/reversion can leave harmless tiny
negative coefficients, which downstream code clamps at -1e-11.
"""

from __future__ import annotations

import math

import numpy as np

DEFAULT_PRECISION = 512

# Lambert-W branch point -1/e.
_W_BRANCH = -math.exp(-1.0)


class SeriesError(ArithmeticError):
    pass


class ZeroConstantTerm(SeriesError):
    """Division by a series with zero constant term."""


class NonzeroConstantTerm(SeriesError):
    """Composition/reversion argument has a nonzero constant term."""


class ZeroLinearTerm(SeriesError):
    """Reversion argument has zero linear term."""


class ZeroIntegral(SeriesError):
    """Normalized integration of a series whose integral over [0,1] vanishes."""


class ZeroDerivativeAtOne(SeriesError):
    """Normalized differentiation of a series with f'(1) = 0."""


class DomainError(ValueError):
    """Scalar special-function argument outside its domain."""


class InversionError(ArithmeticError):
    """Analytic inversion on the complex circle failed validation."""


class PowerSeries:
    """Truncated power series sum_k c_k x^k with a fixed coefficient count."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs, precision: int | None = None):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        if precision is not None:
            if precision <= 0:
                raise ValueError("precision must be positive")
            if len(c) < precision:
                c = np.pad(c, (0, precision - len(c)))
            else:
                c = c[:precision]
        if len(c) == 0:
            raise ValueError("empty coefficient vector")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        self.coeffs = c

    @property
    def precision(self) -> int:
        return len(self.coeffs)

    @classmethod
    def zero(cls, precision: int) -> "PowerSeries":
        return cls(np.zeros(precision))

    @classmethod
    def constant(cls, value: float, precision: int) -> "PowerSeries":
        c = np.zeros(precision)
        c[0] = value
        return cls(c)

    @classmethod
    def identity(cls, precision: int) -> "PowerSeries":
        c = np.zeros(precision)
        if precision > 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def monomial(cls, degree: int, precision: int, coefficient: float = 1.0) -> "PowerSeries":
        c = np.zeros(precision)
        if degree < precision:
            c[degree] = coefficient
        return cls(c)

    def truncate(self, precision: int) -> "PowerSeries":
        return PowerSeries(self.coeffs, precision)

    def __repr__(self):
        head = ", ".join(f"{c:.6g}" for c in self.coeffs[:6])
        return f"PowerSeries([{head}{', ...' if self.precision > 6 else ''}], N={self.precision})"

    def __eq__(self, other):
        return isinstance(other, PowerSeries) and np.array_equal(self.coeffs, other.coeffs)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.precision, other.precision)
        return PowerSeries(self.coeffs[:n] + other.coeffs[:n])

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.precision, other.precision)
        return PowerSeries(self.coeffs[:n] - other.coeffs[:n])

    def __neg__(self) -> "PowerSeries":
        return PowerSeries(-self.coeffs)

    def scale(self, factor: float) -> "PowerSeries":
        return PowerSeries(self.coeffs * factor)

    def mul(self, other: "PowerSeries") -> "PowerSeries":
        """Cauchy product, truncated to the shorter precision."""
        n = min(self.precision, other.precision)
        return PowerSeries(np.convolve(self.coeffs[:n], other.coeffs[:n])[:n])

    __mul__ = mul

    def div(self, other: "PowerSeries") -> "PowerSeries":
        """Series quotient q with q*other == self to the common precision."""
        n = min(self.precision, other.precision)
        a = self.coeffs[:n]
        b = other.coeffs[:n]
        if b[0] == 0.0 or abs(b[0]) < 1e-250:
            raise ZeroConstantTerm("division requires a nonzero constant term")
        q = np.empty(n)
        q[0] = a[0] / b[0]
        for k in range(1, n):
            q[k] = (a[k] - np.dot(b[k:0:-1], q[:k])) / b[0]
        return PowerSeries(q)

    def compose(self, inner: "PowerSeries") -> "PowerSeries":
        """Taylor coefficients of self(inner(x)); inner must vanish at 0."""
        n = min(self.precision, inner.precision)
        g = inner.coeffs[:n].copy()
        if abs(g[0]) > 1e-12:
            raise NonzeroConstantTerm(
                "composition with nonzero inner constant term is undefined for truncated series"
            )
        g[0] = 0.0
        f = self.coeffs[:n]
        out = np.zeros(n)
        out[0] = f[n - 1]
        for k in range(n - 2, -1, -1):
            out = np.convolve(out, g)[:n]
            out[0] += f[k]
        return PowerSeries(out)

    def reversion(self) -> "PowerSeries":
        """Compositional inverse g with self(g(x)) = x, by Newton iteration.

        Doubles the active precision each step. Reliable when the inverse has
        coefficients of moderate 1-norm; constructions whose inverses violate
        that use the analytic circle extraction instead (see
        coefficients_from_inverse).
        """
        n = self.precision
        f = self.coeffs
        if abs(f[0]) > 1e-12:
            raise NonzeroConstantTerm("reversion requires f(0) = 0")
        if abs(f[1]) < 1e-12:
            raise ZeroLinearTerm("reversion requires f'(0) != 0")
        fp = np.zeros(n)
        fp[: n - 1] = np.arange(1, n) * f[1:]
        g = np.zeros(2)
        g[1] = 1.0 / f[1]
        prec = 2
        while prec < n:
            prec = min(2 * prec, n)
            g = np.pad(g, (0, prec - len(g)))
            g = _newton_reversion_step(f, fp, g, prec)
        # one polishing pass at full precision
        g = _newton_reversion_step(f, fp, g, n)
        return PowerSeries(g)

    # -- calculus ----------------------------------------------------------

    def derivative(self) -> "PowerSeries":
        n = self.precision
        d = np.zeros(n)
        d[: n - 1] = np.arange(1, n) * self.coeffs[1:]
        return PowerSeries(d)

    def antiderivative(self) -> "PowerSeries":
        """Term-wise antiderivative with zero constant term (top term dropped)."""
        n = self.precision
        a = np.zeros(n)
        a[1:] = self.coeffs[: n - 1] / np.arange(1, n)
        return PowerSeries(a)

    def integrate_normalized(self) -> "PowerSeries":
        """Antiderivative scaled so the result evaluates to 1 at x = 1."""
        a = self.antiderivative()
        total = a.coeffs.sum()
        if abs(total) < 1e-300:
            raise ZeroIntegral("series integrates to zero over [0,1]")
        return PowerSeries(a.coeffs / total)

    def differentiate_normalized(self) -> "PowerSeries":
        """Derivative scaled by 1/f'(1)."""
        slope = np.dot(np.arange(self.precision), self.coeffs)
        if abs(slope) < 1e-300:
            raise ZeroDerivativeAtOne("series has zero derivative at x = 1")
        return PowerSeries(self.derivative().coeffs / slope)

    def integral01(self) -> float:
        """Integral over [0,1] of the truncated series."""
        return float(self.antiderivative().coeffs.sum())

    # -- evaluation ----------------------------------------------------------

    def __call__(self, x):
        """Horner evaluation; accepts scalars, arrays and complex arguments."""
        return np.polyval(self.coeffs[::-1], x)


def _newton_reversion_step(f, fp, g, prec):
    ident = np.zeros(prec)
    ident[1] = 1.0
    fg = _compose_arrays(f[:prec], g[:prec])
    fpg = _compose_arrays(fp[:prec], g[:prec])
    num = fg - ident
    corr = np.empty(prec)
    corr[0] = num[0] / fpg[0]
    for k in range(1, prec):
        corr[k] = (num[k] - np.dot(fpg[k:0:-1], corr[:k])) / fpg[0]
    return g[:prec] - corr


def _compose_arrays(f, g):
    n = len(f)
    out = np.zeros(n)
    out[0] = f[n - 1]
    for k in range(n - 2, -1, -1):
        out = np.convolve(out, g)[:n]
        out[0] += f[k]
    return out


def lambert_w0(x: float) -> float:
    """Principal-branch Lambert W on [-1/e, 0].

    Returns w in [-1, 0] with |w*exp(w) - x| < 1e-14, by a bracketed Halley
    iteration (w*e^w is monotone increasing on [-1, 0]).
    """
    if not (_W_BRANCH - 1e-15 <= x <= 0.0):
        raise DomainError(f"lambert_w0 requires x in [-1/e, 0], got {x!r}")
    x = max(x, _W_BRANCH)
    if x == 0.0:
        return 0.0
    if x == _W_BRANCH:
        return -1.0
    # initial guess: branch-point expansion near -1/e, w ~ x elsewhere
    if x < -0.25:
        q = math.sqrt(2.0 * (1.0 + math.e * x))
        w = -1.0 + q - q * q / 3.0 + 11.0 / 72.0 * q**3
    else:
        w = x
    lo, hi = -1.0, 0.0
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        if f > 0:
            hi = w
        else:
            lo = w
        if abs(f) < 1e-16:
            break
        wp1 = w + 1.0
        if abs(wp1) < 1e-12:
            w = 0.5 * (lo + hi)
            continue
        # Halley step, bisect when it leaves the bracket
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        cand = w - step
        if not (lo < cand < hi) or not math.isfinite(cand):
            cand = 0.5 * (lo + hi)
        if cand == w:
            break
        w = cand
    return w


def invert_increasing(func, y: float, lo: float = 0.0, hi: float = 1.0,
                      tol: float = 1e-13) -> float:
    """Bisection inverse of an increasing map on [lo, hi]."""
    flo = func(lo)
    fhi = func(hi)
    if y <= flo:
        return lo
    if y >= fhi:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if func(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def coefficients_from_inverse(forward, forward_deriv, n: int, *,
                              radius: float = 0.99, samples: int = 8192,
                              newton_tol: float = 1e-14) -> np.ndarray:
    """Taylor coefficients at 0 of the inverse of an analytic increasing map.

    ``forward`` maps [0,1] onto [0,1] increasingly and must accept complex
    arguments (it is analytically continued off the real axis). The inverse is
    evaluated on the circle |z| = radius by Newton continuation and its
    coefficients are recovered by FFT. Requires the inverse to be analytic on
    |z| <= radius; validation failures raise InversionError.
    """
    if not 0 < radius < 1:
        raise ValueError("radius must be in (0,1)")
    half = samples // 2
    w = np.empty(half + 1, dtype=complex)
    w[0] = invert_increasing(lambda t: float(np.real(forward(t))), radius)
    for m in range(1, half + 1):
        z = radius * np.exp(2j * np.pi * m / samples)
        wm = w[m - 1]
        ok = False
        for _ in range(80):
            step = (forward(wm) - z) / forward_deriv(wm)
            wm = wm - step
            if abs(step) < newton_tol:
                ok = True
                break
        if not ok:
            raise InversionError(f"Newton continuation stalled at sample {m}")
        w[m] = wm
    vals = np.empty(samples, dtype=complex)
    vals[: half + 1] = w
    vals[half + 1:] = np.conj(w[1:half][::-1])
    zs = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    resid = np.abs(forward(vals) - zs).max()
    if resid > 1e-10:
        raise InversionError(f"circle inversion residual {resid:.2e} too large")
    spec = np.fft.fft(vals)[:n] / samples
    spec /= radius ** np.arange(n)
    if np.abs(spec.imag).max() > 1e-9:
        raise InversionError("extracted coefficients are not real")
    return spec.real
