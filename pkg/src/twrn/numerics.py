# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate

from .errors import QuadratureError

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-9
ABS_TOL_FLOOR = 1e-15
MAX_REL_TOL = 1e-2
_SUBDIVISION_LIMIT = 200

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


def integrate_semi_infinite(
    f: Callable[[float], float],
    rel_tol: float = DEFAULT_REL_TOL,
    split_at: Optional[float] = None,
) -> QuadratureResult:
    """
    Integrates f over (0, inf) with adaptive Gauss-Kronrod panels. The infinite tail
    is mapped onto a finite interval by QUADPACK; when split_at is given the finite
    piece [0, split_at] is integrated separately so a peak there is resolved.
    :param f: non-negative integrand with an exponentially decaying tail
    :param rel_tol: relative tolerance in (0, 1e-2]
    :param split_at: optional interior point, typically the integrand's maximum
    :return: the integral with its error estimate and evaluation count
    """
    if not 0 < rel_tol <= MAX_REL_TOL:
        raise ValueError(f"rel_tol must lie in (0, {MAX_REL_TOL}], got {rel_tol}")

    def guarded(z: float) -> float:
        # z = 0 is a removable endpoint
        if z <= 0.0:
            return 0.0
        return f(z)

    if split_at is not None and split_at > 0.0 and math.isfinite(split_at):
        pieces = [(0.0, split_at), (split_at, np.inf)]
    else:
        pieces = [(0.0, np.inf)]

    value, abs_error, evaluations = 0.0, 0.0, 0
    failure = None
    for lo, hi in pieces:
        piece_value, piece_error, info, *rest = integrate.quad(
            guarded, lo, hi,
            epsabs=ABS_TOL_FLOOR / len(pieces),
            epsrel=rel_tol,
            limit=_SUBDIVISION_LIMIT,
            full_output=1,
        )
        value += piece_value
        abs_error += piece_error
        evaluations += int(info["neval"])
        if rest:
            failure = rest[0]

    tolerance = max(rel_tol * abs(value), ABS_TOL_FLOOR)
    if failure is not None:
        if abs_error > tolerance:
            raise QuadratureError(
                f"quadrature did not converge: {failure.splitlines()[0]}",
                partial=value, abs_error=abs_error, evaluations=evaluations,
            )
        logger.debug("quadrature warning with acceptable error %.3g: %s", abs_error, failure)
    return QuadratureResult(value=value, abs_error_estimate=abs(abs_error), evaluations=max(evaluations, 1))


def golden_section_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-6,
) -> Tuple[float, float]:
    """
    Golden-section search for a local maximum of f on [lo, hi]. Every iteration
    reuses one of the two interior evaluations; ties keep the lower section.
    :param f: objective
    :param lo: lower bracket end
    :param hi: upper bracket end
    :param tol: width of the final bracket
    :return: midpoint of the final bracket and f evaluated there
    """
    if not lo < hi:
        raise ValueError(f"Expected lo < hi, got [{lo}, {hi}]")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")

    a, b = lo, hi
    h = b - a
    if h > tol:
        n = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
        logger.debug("golden section: %d iterations on [%g, %g]", n, lo, hi)
        c = a + _INV_PHI_SQ * h
        d = a + _INV_PHI * h
        yc = f(c)
        yd = f(d)
        for _ in range(n - 1):
            if yc >= yd:
                b = d
                d, yd = c, yc
                h *= _INV_PHI
                c = a + _INV_PHI_SQ * h
                yc = f(c)
            else:
                a = c
                c, yc = d, yd
                h *= _INV_PHI
                d = a + _INV_PHI * h
                yd = f(d)
        if yc >= yd:
            b = d
        else:
            a = c
    x = 0.5 * (a + b)
    return x, f(x)
