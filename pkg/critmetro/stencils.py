import numpy as np

from .coefs import coefficients, SCHEMES


class ParameterStencil(object):
    """
    Finite difference stencil along one direction of parameter space.

    The stencil is evaluated on the points ``center + offset * step * direction``.
    Values may be scalars (energies, gaps) or arrays (state vectors), as long as
    all values returned for one stencil have the same shape.

    :param deriv: derivative order
    :param step: ladder step along the direction
    :param acc: even accuracy order
    :param scheme: "center", "forward" or "backward"
    """

    def __init__(self, deriv, step, acc=2, scheme="center"):
        if step <= 0:
            raise ValueError('step must be positive')
        if scheme not in SCHEMES:
            raise ValueError(f'unknown scheme {scheme!r}')
        w = coefficients(deriv, acc=acc)[scheme]
        self.deriv = deriv
        self.step = step
        self.acc = acc
        self.scheme = scheme
        self.offsets = w.offsets
        self.weights = np.asarray(w.weights, dtype=float)

    def __repr__(self):
        return f'ParameterStencil(deriv={self.deriv}, step={self.step}, acc={self.acc}, scheme={self.scheme!r})'

    def __call__(self, func):
        return self.apply([func(o * self.step) for o in self.offsets])

    def displacements(self):
        return self.offsets * self.step

    @property
    def reach(self):
        return np.max(np.abs(self.offsets)) * self.step

    def apply(self, values):
        """Combines values sampled at the stencil points into the derivative."""
        if len(values) != len(self.offsets):
            raise ValueError(f'expected {len(self.offsets)} values, got {len(values)}')
        result = 0.
        for w, v in zip(self.weights, values):
            if w != 0:
                result = result + w * v
        return result / self.step ** self.deriv
