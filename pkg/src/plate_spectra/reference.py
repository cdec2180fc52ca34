"""Benchmark eigenvalues for the standard configuration.

All values are for sigma = 0.2, ell = pi/150; the weighted columns use
alpha = 0.5, beta = 1.5 and truncation 30 per parity. Reported to three
significant digits; the ratio-table CLI prints relative deviations against
these.
"""
from __future__ import annotations

# lowest longitudinal / torsional eigenvalues of the uniform plate, m = 1..12
UNIFORM_MU = (9.60e-1, 1.54e1, 7.78e1, 2.46e2, 6.00e2, 1.24e3,
              2.31e3, 3.93e3, 6.30e3, 9.61e3, 1.41e4, 1.99e4)
UNIFORM_NU = (1.09e4, 4.38e4, 9.86e4, 1.75e5, 2.74e5, 3.95e5,
              5.38e5, 7.04e5, 8.93e5, 1.10e6, 1.34e6, 1.60e6)

# weighted benchmark columns: per weight, (mu_1..mu_12, (nu_1, nu_2), R)
RATIO_TABLE = {
    "uniform": ((9.60e-1, 1.54e1, 7.78e1, 2.46e2, 6.00e2, 1.24e3,
                 2.31e3, 3.93e3, 6.30e3, 9.61e3, 1.41e4, 1.99e4),
                (1.09e4, 4.38e4), 1.14),
    "pbar10": ((9.60e-1, 1.54e1, 7.77e1, 2.46e2, 5.99e2, 1.24e3,
                2.28e3, 3.84e3, 5.87e3, 7.28e3, 1.68e4, 2.27e4),
               (1.09e4, 4.37e4), 1.50),
    "pstar": ((1.16, 1.66e1, 8.06e1, 2.51e2, 6.10e2, 1.27e3,
               2.36e3, 4.04e3, 6.48e3, 9.90e3, 1.45e4, 2.05e4),
              (1.98e4, 6.88e4), 2.00),
    "pbreve": ((9.60e-1, 1.54e1, 7.78e1, 2.46e2, 6.01e2, 1.25e3,
                2.31e3, 3.94e3, 6.31e3, 9.62e3, 1.41e4, 2.00e4),
               (1.75e4, 7.01e4), 1.82),
    "pdoublebar": ((1.40, 1.52e1, 8.05e1, 2.96e2, 6.78e2, 1.31e3,
                    2.60e3, 4.55e3, 6.85e3, 1.04e4, 1.61e4, 2.24e4),
                   (1.56e4, 4.14e4), 1.49),
    "ptilde": ((9.86e-1, 1.58e1, 7.98e1, 2.52e2, 6.16e2, 1.28e3,
                2.37e3, 4.04e3, 6.47e3, 9.55e3, 1.45e4, 2.05e4),
               (1.71e4, 6.84e4), 1.79),
}

J0 = 10
TORSIONAL_FIRST_THRESHOLD = 2734  # largest m without a below-m^4 torsional mode
