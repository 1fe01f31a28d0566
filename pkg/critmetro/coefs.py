"""
Finite difference weights for derivatives with respect to model parameters.

Parameter derivatives of ground-state quantities (energies, gaps, state
vectors) are taken on a uniform ladder of parameter values. Near a
first-order line only one side of the ladder is usable, so weights come
in three schemes, "center", "forward" and "backward".

Most important function:

coefficients(deriv, acc=None, offsets=None, symbolic=False)
"""
import math
from typing import NamedTuple

import numpy as np
import sympy

SCHEMES = ("center", "forward", "backward")
MAX_MOMENT = 999


class Weights(NamedTuple):
    """Weights on a ladder of integer offsets and the accuracy order they reach."""
    offsets: np.ndarray
    weights: object
    accuracy: int


def coefficients(deriv, acc=None, offsets=None, symbolic=False):
    """
    Finite difference weights for the given derivative order.

    With acc, weights for all three schemes are returned in a dict keyed by
    scheme name. With offsets, the weights for exactly those ladder points
    are returned together with the accuracy order they reach.

    :param deriv: derivative order, >= 0
    :param acc: accuracy order, positive and even
    :param offsets: ladder offsets in units of the step
    :param symbolic: exact sympy rationals instead of floats
    :raises ValueError: unless exactly one of acc and offsets is usable
    :return: dict of Weights per scheme, or Weights if offsets are given
    """
    if deriv < 0:
        raise ValueError(f'derivative order must be >= 0, got {deriv}')
    if acc is not None and offsets:
        raise ValueError('give either acc or offsets, not both')

    if offsets:
        if len(offsets) <= deriv:
            raise ValueError(f'{len(offsets)} ladder points cannot resolve derivative order {deriv}')
        return calc_weights(deriv, offsets, symbolic)

    if acc is None:
        raise ValueError('either acc or offsets has to be given')
    if acc <= 0 or acc % 2:
        raise ValueError(f'accuracy order must be a positive even integer, got {acc}')
    return {scheme: calc_weights(deriv, scheme_offsets(deriv, acc, scheme), symbolic)
            for scheme in SCHEMES}


def scheme_offsets(deriv, acc, scheme):
    """Ladder offsets of the given scheme reaching accuracy order acc."""
    central = 2 * ((deriv + 1) // 2) - 1 + acc
    if scheme == "center":
        half = central // 2
        return list(range(-half, half + 1))
    one_sided = central if deriv % 2 else central + 1
    if scheme == "forward":
        return list(range(one_sided))
    if scheme == "backward":
        return list(range(1 - one_sided, 1))
    raise ValueError(f'unknown scheme {scheme!r}')


def calc_weights(deriv, offsets, symbolic=False):
    """Weights w with sum_k w_k o_k^j = j! delta_j,deriv for j < len(offsets)."""
    moments, target = _taylor_system(offsets, deriv, symbolic)
    if symbolic:
        (solution,) = sympy.linsolve((moments, target))
        weights = list(solution)
    else:
        weights = np.linalg.solve(moments, target)
    return Weights(np.array(offsets), weights, _accuracy(offsets, weights, deriv, symbolic))


def _taylor_system(offsets, deriv, symbolic):
    rows = [[o ** j for o in offsets] for j in range(len(offsets))]
    target = [math.factorial(deriv) if j == deriv else 0 for j in range(len(offsets))]
    if symbolic:
        return sympy.Matrix(rows), sympy.Matrix(target)
    return np.array(rows, dtype=float), np.array(target, dtype=float)


def _accuracy(offsets, weights, deriv, symbolic):
    """Order of the first Taylor moment beyond deriv the weights fail to cancel."""
    for j in range(deriv + 1, MAX_MOMENT + 1):
        moment = sum(w * o ** j for o, w in zip(offsets, weights))
        if (moment != 0) if symbolic else (abs(moment) > 1e-6):
            return j - deriv
    raise ValueError('cannot determine the accuracy order')
