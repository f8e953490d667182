"""Fixed symmetric quadrature rules on triangles.

Rules are stored in barycentric coordinates with weights that sum to one,
so integrating f over a triangle K reads |K| * sum_q w_q f(x_q).  Degree 2
(edge midpoints) makes the RT0 mass matrix and quadratic potential means
exact, degree 4 covers the P1 quartic/cubic terms and the projection tests,
degree 8 is only used by verification code.
"""

import numpy as np

__all__ = ["rule", "physical_points"]


def _orbit3(a):
    b = 1.0 - 2.0 * a
    return [(b, a, a), (a, b, a), (a, a, b)]


def _orbit6(a, b):
    c = 1.0 - a - b
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


def _build(points_and_weights):
    bary = []
    weights = []
    for pts, w in points_and_weights:
        bary.extend(pts)
        weights.extend([w] * len(pts))
    bary = np.asarray(bary, dtype=float)
    weights = np.asarray(weights, dtype=float)
    bary.setflags(write=False)
    weights.setflags(write=False)
    return bary, weights


# Edge midpoints: exact for quadratics.
_DEG2 = _build([([(0.0, 0.5, 0.5), (0.5, 0.0, 0.5), (0.5, 0.5, 0.0)], 1.0 / 3.0)])

# 6-point rule, exact for quartics.
_DEG4 = _build(
    [
        (_orbit3(0.445948490915965), 0.223381589678011),
        (_orbit3(0.091576213509771), 0.109951743655322),
    ]
)

# 16-point rule, exact for degree 8.
_DEG8 = _build(
    [
        ([(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)], 0.14431560767777632),
        (_orbit3(0.4592925882927168), 0.09509163426729027),
        (_orbit3(0.17056930775174997), 0.10321737053473429),
        (_orbit3(0.05054722831703318), 0.03245849762320134),
        (_orbit6(0.2631128296346792, 0.7284923929553914), 0.02723031417442432),
    ]
)

_RULES = {2: _DEG2, 4: _DEG4, 8: _DEG8}


def rule(degree):
    """Return (barycentric points (n, 3), weights (n,)) for the given degree.

    Only the fixed degrees 2, 4 and 8 are available.
    """
    try:
        return _RULES[degree]
    except KeyError:
        raise ValueError(f"no quadrature rule of degree {degree}; available: 2, 4, 8") from None


def physical_points(coords, degree):
    """Map a rule onto triangles given by corner coordinates (nt, 3, 2).

    Returns points of shape (nt, nq, 2).
    """
    bary, _ = rule(degree)
    return np.einsum("qi,tix->tqx", bary, coords)
