import cmath
import logging
from typing import List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import loggamma

from errors import DegenerateParameters, NonConvergence, PoleError

logger = logging.getLogger(__name__)

POLE_TOLERANCE = 1e-12
C_POLE_TOLERANCE = 1e-10
DEGENERATE_TOLERANCE = 1e-8
EPSILON_SHIFT = 1e-8
SERIES_RADIUS = 0.6
CONTINUATION_RADIUS = 0.5
MAX_TERMS = 5000
TERM_TOLERANCE = 1e-17


class HypergeometricArgs(BaseModel):
    """
    Parameters and argument of a Gauss hypergeometric evaluation.
    """

    a: complex = Field(..., description="First numerator parameter")
    b: complex = Field(..., description="Second numerator parameter")
    c: complex = Field(..., description="Denominator parameter")
    y: complex = Field(..., description="Argument")
    regularized: bool = Field(
        False,
        description="Allow c at a non-positive integer by shifting it by EPSILON_SHIFT",
    )

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_parameters(self) -> "HypergeometricArgs":
        """
        Reject non-finite components and a pole in c unless regularized.
        """
        for name in ("a", "b", "c", "y"):
            if not cmath.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")
        if not self.regularized and _near_nonpositive_integer(self.c, C_POLE_TOLERANCE):
            raise ValueError(
                f"c={self.c} is a non-positive integer; pass regularized=True to shift it"
            )
        return self


class _TermBudget:
    """
    Shared term counter for one hypergeometric evaluation.
    """

    def __init__(self, limit: int = MAX_TERMS) -> None:
        self.limit = limit
        self.used = 0

    def spend(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise NonConvergence(f"Hypergeometric evaluation exceeded {self.limit} terms.")


def _distance_to_integer(w: complex) -> float:
    return abs(w - round(w.real))


def _near_nonpositive_integer(w: complex, tolerance: float) -> bool:
    return round(w.real) <= 0 and _distance_to_integer(w) < tolerance


def _is_nonpositive_integer(w: complex) -> bool:
    return w.imag == 0 and w.real <= 0 and w.real == int(w.real)


def _power(base: complex, exponent: complex) -> complex:
    # principal branch, cut on the negative real axis
    return cmath.exp(exponent * cmath.log(base))


def ln_gamma(z: complex) -> complex:
    """
    Principal branch of log Gamma(z), analytic off the non-positive real axis.

    Satisfies ln_gamma(z + 1) = ln_gamma(z) + log(z) exactly in exact arithmetic,
    which differs from log(Gamma(z)) by a multiple of 2*pi*i in general.
    """
    z = complex(z)
    if not cmath.isfinite(z):
        raise ValueError(f"ln_gamma needs a finite argument, got {z}")
    if _near_nonpositive_integer(z, POLE_TOLERANCE):
        raise PoleError(f"Gamma has a pole at z={z}")
    return complex(loggamma(z))


def _gamma_ratio(numerator: Sequence[complex], denominator: Sequence[complex]) -> complex:
    """
    Product of Gamma(numerator) over product of Gamma(denominator).

    A denominator pole makes the ratio vanish; a numerator pole is a degeneracy.
    """
    log_value = 0j
    for w in numerator:
        if _near_nonpositive_integer(w, POLE_TOLERANCE):
            raise DegenerateParameters(f"Connection coefficient has a Gamma pole at {w}")
        log_value += ln_gamma(w)
    for w in denominator:
        if _near_nonpositive_integer(w, POLE_TOLERANCE):
            return 0j
        log_value -= ln_gamma(w)
    return cmath.exp(log_value)


def _series(a: complex, b: complex, c: complex, y: complex, budget: _TermBudget) -> complex:
    """
    Maclaurin series, summed until two consecutive terms are negligible.
    """
    terminating = _is_nonpositive_integer(a) or _is_nonpositive_integer(b)
    if abs(y) >= 1 and not terminating:
        raise NonConvergence(f"Series diverges at |y|={abs(y):.6g}")

    total = 1 + 0j
    term = 1 + 0j
    quiet = 0
    n = 0
    while True:
        budget.spend()
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * y
        total += term
        n += 1
        if term == 0:
            return total
        if abs(term) <= TERM_TOLERANCE * abs(total):
            quiet += 1
            if quiet >= 2:
                return total
        else:
            quiet = 0


def evaluate_series(a: complex, b: complex, c: complex, y: complex) -> complex:
    """
    Direct Maclaurin series; valid inside the unit disk.
    """
    return _series(complex(a), complex(b), complex(c), complex(y), _TermBudget())


def evaluate_pfaff(a: complex, b: complex, c: complex, y: complex) -> complex:
    """
    Pfaff transformation: F(a,b;c;y) = (1-y)^(-a) F(a, c-b; c; y/(y-1)).
    """
    a, b, c, y = complex(a), complex(b), complex(c), complex(y)
    w = y / (y - 1)
    return _power(1 - y, -a) * _series(a, c - b, c, w, _TermBudget())


def _shift_if_degenerate(value: complex, shifted: complex, label: str) -> complex:
    if _distance_to_integer(value) < DEGENERATE_TOLERANCE:
        logger.warning(
            "%s=%s is within %.0e of an integer; shifting by %.0e",
            label,
            value,
            DEGENERATE_TOLERANCE,
            EPSILON_SHIFT,
        )
        return shifted + EPSILON_SHIFT
    return shifted


def evaluate_reflection(a: complex, b: complex, c: complex, y: complex) -> complex:
    """
    Connection formula around y = 1, with both series in the variable 1 - y.

    When c - a - b is within DEGENERATE_TOLERANCE of an integer the Gamma factors
    blow up; c is shifted by EPSILON_SHIFT instead of using the logarithmic limit,
    which costs a relative error of order EPSILON_SHIFT * |dF/dc| / |F|.
    """
    a, b, c, y = complex(a), complex(b), complex(c), complex(y)
    c = _shift_if_degenerate(c - a - b, c, "c-a-b")
    s = c - a - b
    x = 1 - y
    budget = _TermBudget()

    regular = _gamma_ratio([c, s], [c - a, c - b]) * _series(a, b, 1 - s, x, budget)
    if x == 0:
        if s.real <= 0:
            raise NonConvergence(f"F(a,b;c;1) diverges for Re(c-a-b)={s.real:.6g}")
        return regular
    singular = (
        _gamma_ratio([c, -s], [a, b])
        * _power(x, s)
        * _series(c - a, c - b, 1 + s, x, budget)
    )
    return regular + singular


def evaluate_inversion(a: complex, b: complex, c: complex, y: complex) -> complex:
    """
    Connection formula around y = infinity, valid for |arg(-y)| < pi.

    An integer a - b is handled by shifting b by EPSILON_SHIFT.
    """
    a, b, c, y = complex(a), complex(b), complex(c), complex(y)
    b = _shift_if_degenerate(a - b, b, "a-b")
    w = 1 / y
    budget = _TermBudget()

    first = (
        _gamma_ratio([c, b - a], [b, c - a])
        * _power(-y, -a)
        * _series(a, a - c + 1, a - b + 1, w, budget)
    )
    second = (
        _gamma_ratio([c, a - b], [a, c - b])
        * _power(-y, -b)
        * _series(b, b - c + 1, b - a + 1, w, budget)
    )
    return first + second


def _continuation_path(start: complex, end: complex) -> List[complex]:
    """
    Straight path from start to end, detouring around y = 1 when it passes close.
    """
    direction = end - start
    if direction == 0:
        return [start]
    # distance from the branch point 1 to the segment
    t = max(0.0, min(1.0, ((1 - start) * direction.conjugate()).real / abs(direction) ** 2))
    if abs(start + t * direction - 1) >= 0.25:
        return [start, end]
    side = 1.0 if end.imag >= 0 else -1.0
    return [start, complex(1.0, 0.75 * side), end]


def _taylor_step(
    a: complex,
    b: complex,
    c: complex,
    w: complex,
    value: complex,
    slope: complex,
    h: complex,
    budget: _TermBudget,
) -> Tuple[complex, complex]:
    """
    Advance (F, F') from w to w + h with the Taylor recurrence of the hypergeometric ODE.

    Coefficients f_n of F about w obey
    w(1-w)(n+1)(n+2) f_{n+2} = (n+a)(n+b) f_n - (n+1)((1-2w)n + c - (a+b+1)w) f_{n+1}.
    """
    denominator = w * (1 - w)
    linear = c - (a + b + 1) * w
    f_prev, f_cur = value, slope
    new_value = value + slope * h
    new_slope = slope
    h_power = h
    quiet = 0
    n = 0
    while True:
        budget.spend()
        f_next = (
            (n + a) * (n + b) * f_prev - (n + 1) * ((1 - 2 * w) * n + linear) * f_cur
        ) / ((n + 1) * (n + 2) * denominator)
        value_term = f_next * h_power * h
        slope_term = (n + 2) * f_next * h_power
        new_value += value_term
        new_slope += slope_term
        h_power *= h
        f_prev, f_cur = f_cur, f_next
        n += 1
        small_value = abs(value_term) <= TERM_TOLERANCE * (abs(new_value) + 1e-300)
        small_slope = abs(slope_term) <= TERM_TOLERANCE * (abs(new_slope) + 1e-300)
        if small_value and small_slope:
            quiet += 1
            if quiet >= 2:
                return new_value, new_slope
        else:
            quiet = 0


def _continue(
    a: complex, b: complex, c: complex, y: complex, budget: _TermBudget
) -> Tuple[complex, complex]:
    if abs(y) <= CONTINUATION_RADIUS:
        value = _series(a, b, c, y, budget)
        slope = a * b / c * _series(a + 1, b + 1, c + 1, y, budget)
        return value, slope

    start = y * (CONTINUATION_RADIUS / abs(y))
    value = _series(a, b, c, start, budget)
    slope = a * b / c * _series(a + 1, b + 1, c + 1, start, budget)

    path = _continuation_path(start, y)
    w = start
    for target in path[1:]:
        while w != target:
            reach = 0.5 * min(abs(w), abs(1 - w))
            remaining = target - w
            if abs(remaining) <= reach:
                h = remaining
            else:
                h = remaining * (reach / abs(remaining))
            value, slope = _taylor_step(a, b, c, w, value, slope, h, budget)
            w = target if h == remaining else w + h
    return value, slope


def evaluate_continuation(a: complex, b: complex, c: complex, y: complex) -> complex:
    """
    Analytic continuation from the disk |y| = 0.5 along a path avoiding y = 1.

    Each step re-expands the solution of the hypergeometric ODE in a Taylor series with
    step length at most half the distance to the nearest singular point, so it reaches
    the band near |y| = 1 that no Moebius transformation maps into the series disk.
    Points on the cut y > 1 get the value continued from the upper half plane.
    """
    value, _ = _continue(complex(a), complex(b), complex(c), complex(y), _TermBudget())
    return value


def _gauss_sum(a: complex, b: complex, c: complex) -> complex:
    s = c - a - b
    if s.real <= 0:
        raise NonConvergence(f"F(a,b;c;1) diverges for Re(c-a-b)={s.real:.6g}")
    return _gamma_ratio([c, s], [c - a, c - b])


def hyp2f1(a: complex, b: complex, c: complex, y: complex, regularized: bool = False) -> complex:
    """
    Gauss hypergeometric function, principal branch, choosing the evaluation strategy from y.
    """
    a, b, c, y = complex(a), complex(b), complex(c), complex(y)
    if _near_nonpositive_integer(c, C_POLE_TOLERANCE):
        if not regularized:
            raise DegenerateParameters(f"c={c} is a non-positive integer")
        c += EPSILON_SHIFT

    if y == 0:
        return 1 + 0j
    if y == 1:
        return _gauss_sum(a, b, c)

    budget = _TermBudget()
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b) or abs(y) <= SERIES_RADIUS:
        result = _series(a, b, c, y, budget)
    elif abs(y / (y - 1)) <= SERIES_RADIUS:
        result = evaluate_pfaff(a, b, c, y)
    elif abs(1 - y) <= SERIES_RADIUS:
        result = evaluate_reflection(a, b, c, y)
    elif abs(1 / y) <= SERIES_RADIUS:
        result = evaluate_inversion(a, b, c, y)
    else:
        result, _ = _continue(a, b, c, y, budget)

    if not cmath.isfinite(result):
        raise NonConvergence(f"2F1({a}, {b}; {c}; {y}) is not finite")
    return result


def hyp2f1_derivative(
    a: complex, b: complex, c: complex, y: complex, regularized: bool = False
) -> complex:
    """
    d/dy 2F1(a,b;c;y) = (ab/c) 2F1(a+1,b+1;c+1;y).
    """
    a, b, c = complex(a), complex(b), complex(c)
    if regularized and _near_nonpositive_integer(c, C_POLE_TOLERANCE):
        c += EPSILON_SHIFT
    return a * b / c * hyp2f1(a + 1, b + 1, c + 1, y, regularized=regularized)


def gauss_2f1(args: HypergeometricArgs) -> complex:
    """
    Evaluate 2F1(a, b; c; y) for validated arguments.
    """
    return hyp2f1(args.a, args.b, args.c, args.y, regularized=args.regularized)


def gauss_2f1_derivative(args: HypergeometricArgs) -> complex:
    """
    Evaluate the y-derivative of 2F1(a, b; c; y) for validated arguments.
    """
    return hyp2f1_derivative(args.a, args.b, args.c, args.y, regularized=args.regularized)
