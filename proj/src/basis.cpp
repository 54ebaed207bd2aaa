#include "iglu/basis.hpp"

#include <algorithm>
#include <functional>
#include <string>

#include "iglu/error.hpp"

namespace iglu {

namespace {

// Term order of the published degree-3, three-channel kernel.
constexpr std::array<Exponents, 19> kThreeChannelCubic{{
    {3, 0, 0}, {0, 3, 0}, {0, 0, 3}, {2, 1, 0}, {2, 0, 1}, {1, 2, 0}, {1, 0, 2},
    {0, 2, 1}, {0, 1, 2}, {2, 0, 0}, {0, 2, 0}, {0, 0, 2}, {1, 1, 1}, {1, 1, 0},
    {1, 0, 1}, {0, 1, 1}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
}};

std::vector<Exponents> graded_lex(int n_vars, int degree) {
    std::vector<Exponents> out;
    for (int total = degree; total >= 1; --total) {
        std::vector<Exponents> level;
        for (int a = total; a >= 0; --a) {
            if (n_vars == 2) {
                level.push_back({a, total - a, 0});
                continue;
            }
            for (int b = total - a; b >= 0; --b) level.push_back({a, b, total - a - b});
        }
        std::sort(level.begin(), level.end(), std::greater<>());
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

}  // namespace

MonomialBasis build_basis(int n_vars, int degree, bool include_intercept) {
    if (n_vars != 2 && n_vars != 3)
        throw usage_error("unsupported channel count " + std::to_string(n_vars) + " (expected 2 or 3)");
    if (degree != 3 && degree != 4)
        throw usage_error("unsupported polynomial degree " + std::to_string(degree) + " (expected 3 or 4)");

    MonomialBasis b;
    b.n_vars = n_vars;
    b.degree = degree;
    b.include_intercept = include_intercept;
    if (n_vars == 3 && degree == 3)
        b.monomials.assign(kThreeChannelCubic.begin(), kThreeChannelCubic.end());
    else
        b.monomials = graded_lex(n_vars, degree);
    return b;
}

void expand_into(const MonomialBasis& basis, std::span<const double> x, std::span<double> out) {
    if (x.size() != static_cast<std::size_t>(basis.n_vars))
        throw usage_error("expected " + std::to_string(basis.n_vars) + " channel values, got " +
                          std::to_string(x.size()));
    if (out.size() != basis.feature_count()) throw usage_error("feature buffer has wrong size");

    // Powers up to the basis degree, per channel.
    std::array<std::array<double, 5>, 3> pw{};
    for (int i = 0; i < basis.n_vars; ++i)
        for (int e = 0; e <= basis.degree; ++e) pw[i][e] = ipow(x[i], e);
    for (int i = basis.n_vars; i < 3; ++i) pw[i][0] = 1.0;

    std::size_t j = 0;
    if (basis.include_intercept) out[j++] = 1.0;
    for (const auto& m : basis.monomials) out[j++] = pw[0][m[0]] * pw[1][m[1]] * pw[2][m[2]];
}

std::vector<double> expand(const MonomialBasis& basis, std::span<const double> x) {
    std::vector<double> out(basis.feature_count());
    expand_into(basis, x, out);
    return out;
}

}  // namespace iglu
