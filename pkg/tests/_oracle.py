"""Values computed offline with sympy (exact rational arithmetic) and frozen here."""
from fractions import Fraction

# integral of r^i s^j over the triangle (-1,-1), (1,-1), (-1,1)
TRIANGLE_MONOMIALS = {
    (0, 0): Fraction(2, 1),
    (0, 1): Fraction(-2, 3),
    (0, 2): Fraction(2, 3),
    (0, 3): Fraction(-2, 5),
    (0, 4): Fraction(2, 5),
    (0, 5): Fraction(-2, 7),
    (0, 6): Fraction(2, 7),
    (0, 7): Fraction(-2, 9),
    (0, 8): Fraction(2, 9),
    (0, 9): Fraction(-2, 11),
    (0, 10): Fraction(2, 11),
    (0, 11): Fraction(-2, 13),
    (0, 12): Fraction(2, 13),
    (0, 13): Fraction(-2, 15),
    (0, 14): Fraction(2, 15),
    (0, 15): Fraction(-2, 17),
    (1, 0): Fraction(-2, 3),
    (1, 1): Fraction(0, 1),
    (1, 2): Fraction(-2, 15),
    (1, 3): Fraction(0, 1),
    (1, 4): Fraction(-2, 35),
    (1, 5): Fraction(0, 1),
    (1, 6): Fraction(-2, 63),
    (1, 7): Fraction(0, 1),
    (1, 8): Fraction(-2, 99),
    (1, 9): Fraction(0, 1),
    (1, 10): Fraction(-2, 143),
    (1, 11): Fraction(0, 1),
    (1, 12): Fraction(-2, 195),
    (1, 13): Fraction(0, 1),
    (1, 14): Fraction(-2, 255),
    (2, 0): Fraction(2, 3),
    (2, 1): Fraction(-2, 15),
    (2, 2): Fraction(2, 9),
    (2, 3): Fraction(-2, 21),
    (2, 4): Fraction(2, 15),
    (2, 5): Fraction(-2, 27),
    (2, 6): Fraction(2, 21),
    (2, 7): Fraction(-2, 33),
    (2, 8): Fraction(2, 27),
    (2, 9): Fraction(-2, 39),
    (2, 10): Fraction(2, 33),
    (2, 11): Fraction(-2, 45),
    (2, 12): Fraction(2, 39),
    (2, 13): Fraction(-2, 51),
    (3, 0): Fraction(-2, 5),
    (3, 1): Fraction(0, 1),
    (3, 2): Fraction(-2, 21),
    (3, 3): Fraction(0, 1),
    (3, 4): Fraction(-2, 45),
    (3, 5): Fraction(0, 1),
    (3, 6): Fraction(-2, 77),
    (3, 7): Fraction(0, 1),
    (3, 8): Fraction(-2, 117),
    (3, 9): Fraction(0, 1),
    (3, 10): Fraction(-2, 165),
    (3, 11): Fraction(0, 1),
    (3, 12): Fraction(-2, 221),
    (4, 0): Fraction(2, 5),
    (4, 1): Fraction(-2, 35),
    (4, 2): Fraction(2, 15),
    (4, 3): Fraction(-2, 45),
    (4, 4): Fraction(2, 25),
    (4, 5): Fraction(-2, 55),
    (4, 6): Fraction(2, 35),
    (4, 7): Fraction(-2, 65),
    (4, 8): Fraction(2, 45),
    (4, 9): Fraction(-2, 75),
    (4, 10): Fraction(2, 55),
    (4, 11): Fraction(-2, 85),
    (5, 0): Fraction(-2, 7),
    (5, 1): Fraction(0, 1),
    (5, 2): Fraction(-2, 27),
    (5, 3): Fraction(0, 1),
    (5, 4): Fraction(-2, 55),
    (5, 5): Fraction(0, 1),
    (5, 6): Fraction(-2, 91),
    (5, 7): Fraction(0, 1),
    (5, 8): Fraction(-2, 135),
    (5, 9): Fraction(0, 1),
    (5, 10): Fraction(-2, 187),
    (6, 0): Fraction(2, 7),
    (6, 1): Fraction(-2, 63),
    (6, 2): Fraction(2, 21),
    (6, 3): Fraction(-2, 77),
    (6, 4): Fraction(2, 35),
    (6, 5): Fraction(-2, 91),
    (6, 6): Fraction(2, 49),
    (6, 7): Fraction(-2, 105),
    (6, 8): Fraction(2, 63),
    (6, 9): Fraction(-2, 119),
    (7, 0): Fraction(-2, 9),
    (7, 1): Fraction(0, 1),
    (7, 2): Fraction(-2, 33),
    (7, 3): Fraction(0, 1),
    (7, 4): Fraction(-2, 65),
    (7, 5): Fraction(0, 1),
    (7, 6): Fraction(-2, 105),
    (7, 7): Fraction(0, 1),
    (7, 8): Fraction(-2, 153),
    (8, 0): Fraction(2, 9),
    (8, 1): Fraction(-2, 99),
    (8, 2): Fraction(2, 27),
    (8, 3): Fraction(-2, 117),
    (8, 4): Fraction(2, 45),
    (8, 5): Fraction(-2, 135),
    (8, 6): Fraction(2, 63),
    (8, 7): Fraction(-2, 153),
    (9, 0): Fraction(-2, 11),
    (9, 1): Fraction(0, 1),
    (9, 2): Fraction(-2, 39),
    (9, 3): Fraction(0, 1),
    (9, 4): Fraction(-2, 75),
    (9, 5): Fraction(0, 1),
    (9, 6): Fraction(-2, 119),
    (10, 0): Fraction(2, 11),
    (10, 1): Fraction(-2, 143),
    (10, 2): Fraction(2, 33),
    (10, 3): Fraction(-2, 165),
    (10, 4): Fraction(2, 55),
    (10, 5): Fraction(-2, 187),
    (11, 0): Fraction(-2, 13),
    (11, 1): Fraction(0, 1),
    (11, 2): Fraction(-2, 45),
    (11, 3): Fraction(0, 1),
    (11, 4): Fraction(-2, 85),
    (12, 0): Fraction(2, 13),
    (12, 1): Fraction(-2, 195),
    (12, 2): Fraction(2, 39),
    (12, 3): Fraction(-2, 221),
    (13, 0): Fraction(-2, 15),
    (13, 1): Fraction(0, 1),
    (13, 2): Fraction(-2, 51),
    (14, 0): Fraction(2, 15),
    (14, 1): Fraction(-2, 255),
    (15, 0): Fraction(-2, 17),
}

# int_{-1}^{1} (1 - x) x^k dx
JACOBI10_MONOMIALS = {0: Fraction(2, 1), 1: Fraction(-2, 3), 2: Fraction(2, 3), 3: Fraction(-2, 5), 4: Fraction(2, 5), 5: Fraction(-2, 7)}

# d/dx d/dt cos(pi (x - 2 t)) at x = 3/10, t = 7/10
PLANE_WAVE_DIV_V = -18.773103157822722

# x-displacement of the warp at x = 0 for y = 0, 1/10, 1/4
WARP_X_AT_ZERO = {0.0: 0.1, 0.1: 0.058778525229247313, 0.25: -0.070710678118654752}
WARP_X_INTERIOR = 0.45  # x~ at (0.5, 0.25)

# (1 - 2 a) exp(-a) with a = (pi * 10 * 0.05)^2
RICKER_VALUE = -0.33369079229646944

# 1 / (sup|C| C_N max Jf max 1/J) = 1 / (4 * 15 * (sqrt(2)/8) * 64) for N=4, h=1/4, unit square
DT_N4_H4 = 0.0014731391274719740
