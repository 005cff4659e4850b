"""Reference energy levels and Bethe roots for the two preset chains."""

from itertools import permutations

from inhomtq.tq import canonical_root



def _expand(items):
    roots = []
    for item in items:
        if isinstance(item, tuple):
            re, im = item
            roots += [complex(re, im), complex(re, -im)]
        else:
            roots.append(complex(item))
    return roots


# (E, roots); a tuple (a, b) stands for the conjugate pair a ± bi.
TABLE1 = [
    (-10.4854, _expand([-0.301706, -0.228269, 1.90659])),
    (-6.3650, _expand([-0.202149, (0.0000179, 0.0760986)])),
    (-1.6983, _expand([-0.5 - 1.36473j, -0.234301, 1.80106])),
    (-0.5138, _expand([-0.5 - 1.35297j, -0.278630, 1.79670])),
    (0.8170, _expand([-0.244206, 0.829712, 1.99163])),
    (1.2142, _expand([-0.257109, 0.816209, 1.99041])),
    (7.2463, _expand([1.79880, (-0.064122, 0.726059)])),
    (9.78493, _expand([-0.5 + 2.64170j, (1.75921, 1.91745)])),
]

TABLE2 = [
    (-11.7918, _expand([-0.5 + 0.929239j, -0.267373, -0.239061, 2.63465])),
    (-9.54275, _expand([-0.260299, -0.242542, 1.59304, 2.39063])),
    (-7.52344, _expand([(-0.2479, 0.0109844), 0.498355, 2.56045])),
    (-5.21618, _expand([-0.288548, -0.233564, (0.383076, 0.239546)])),
    (-3.62486, _expand([-0.5 + 0.427847j, -0.243628, 1.37433, 2.46576])),
    (-3.21479, _expand([-0.5 + 0.426563j, -0.25838, 1.36582, 2.46791])),
    (-0.211513, _expand([-0.243935, (0.455242, 1.65563), 2.60442])),
    (0.182165, _expand([-0.257897, (0.455108, 1.65296), 2.60409])),
    (1.02751, _expand([-0.5 + 1.49328j, -0.247673, 0.810822, 2.66003])),
    (1.17576, _expand([-0.5 + 1.48929j, -0.252564, 0.805474, 2.65973])),
    (2.29919, _expand([-0.249424, 0.754748, (2.26241, 0.572603)])),
    (2.33595, _expand([-0.250589, 0.753578, (2.26201, 0.571944)])),
    (5.66788, _expand([-0.5 + 0.392135j, (0.451997, 1.56424), 2.59575])),
    (8.13696, _expand([(0.000191345, 0.337831), 1.62674, 2.36175])),
    (9.45442, _expand([-0.5 + 1.00956j, (0.694733, 1.28851), 2.49691])),
    (10.8455, _expand([(0.613599, 3.18391), (2.74696, 2.01537)])),
]


def canonical(roots):
    return [canonical_root(complex(r) * (complex(r) + 1)) for r in roots]


def root_distance(found, expected) -> float:
    """Best per-root distance between two multisets, modulo lambda <-> -lambda-1."""
    a, b = canonical(found), canonical(expected)
    if len(a) != len(b):
        return float("inf")
    return min(max(abs(x - y) for x, y in zip(a, perm)) for perm in permutations(b))
