#pragma once

// Reference values from tests/oracles/cdf_table.py (scipy.stats).
namespace calmdesk::testing {

struct TRow {
    double t;
    double df;
    double p_two_sided;
};

struct ChiRow {
    double x;
    double k;
    double sf;
};

inline constexpr TRow kTTable[] = {
    {3.4641, 2, 0.07417996189373151},   {2.0, 5, 0.10193947882985828},    {1.0, 1, 0.49999999999999956},
    {0.5, 10, 0.6278936057429729},      {2.228, 10, 0.050011771817111327}, {4.303, 2, 0.04999252498521449},
    {1.96, 1000, 0.05027318495574871},  {-2.5, 7, 0.040992218585752874},   {12.706, 1, 0.05000080235813317},
    {0.0, 3, 1.0},
};

inline constexpr ChiRow kChiTable[] = {
    {2.4, 1, 0.12133525035848208},  {3.841, 1, 0.050013683763956804}, {5.991, 2, 0.05001161502657909},
    {7.815, 3, 0.049993902974883875}, {0.5, 4, 0.9735009788392561},   {11.07, 5, 0.050009618622405425},
    {1.0, 2, 0.6065306597126334},   {20.0, 10, 0.029252688076961124}, {0.1, 1, 0.7518296340458492},
    {30.0, 20, 0.06985366069940986},
};

inline constexpr double kCdfTolerance = 1e-6;

} // namespace calmdesk::testing
