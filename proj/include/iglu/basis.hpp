#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace iglu {

/// Exponent tuple of one monomial; unused trailing entries are zero.
using Exponents = std::array<int, 3>;

/// Ordered monomial basis for a polynomial kernel over 2 or 3 channels.
///
/// The constant monomial is never part of `monomials`; when
/// `include_intercept` is set, expand() prepends a leading 1 instead.
/// For three channels at degree 3 the order is the 19-term sequence
///   x1^3, x2^3, x3^3, x1^2 x2, x1^2 x3, x1 x2^2, x1 x3^2, x2^2 x3, x2 x3^2,
///   x1^2, x2^2, x3^2, x1 x2 x3, x1 x2, x1 x3, x2 x3, x1, x2, x3;
/// every other combination uses graded lexicographic order (total degree
/// descending, then exponent tuples lexicographically descending).
struct MonomialBasis {
    int n_vars = 0;
    int degree = 0;
    std::vector<Exponents> monomials;
    bool include_intercept = true;

    std::size_t feature_count() const { return monomials.size() + (include_intercept ? 1 : 0); }

    bool operator==(const MonomialBasis&) const = default;
};

MonomialBasis build_basis(int n_vars, int degree, bool include_intercept = true);

std::vector<double> expand(const MonomialBasis& basis, std::span<const double> x);

/// Writes the feature vector into `out` (size feature_count()).
void expand_into(const MonomialBasis& basis, std::span<const double> x, std::span<double> out);

}  // namespace iglu
