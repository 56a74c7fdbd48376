"""Reference two-sided t and chi-square upper-tail probabilities."""
from scipy import stats

T_CASES = [(3.4641, 2), (2.0, 5), (1.0, 1), (0.5, 10), (2.228, 10), (4.303, 2), (1.96, 1000),
           (-2.5, 7), (12.706, 1), (0.0, 3)]
CHI_CASES = [(2.4, 1), (3.841, 1), (5.991, 2), (7.815, 3), (0.5, 4), (11.07, 5), (1.0, 2),
             (20.0, 10), (0.1, 1), (30.0, 20)]

for t, df in T_CASES:
    print(f"{{'t', {t!r}, {df}, {repr(float(2 * stats.t.sf(abs(t), df)))}}},")
for x, k in CHI_CASES:
    print(f"{{'c', {x!r}, {k}, {repr(float(stats.chi2.sf(x, k)))}}},")
