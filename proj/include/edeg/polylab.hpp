#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edeg::polylab {

using Rational = mpq_class;
using RationalVector = std::vector<Rational>;
using Exponents = std::vector<unsigned>;

/// Degree reported for the zero polynomial.
inline constexpr int kZeroDegree = std::numeric_limits<int>::min();

/// Univariate polynomial in alpha, monomial basis, exact coefficients.
/// The leading stored coefficient is nonzero; the zero polynomial is empty.
class UniPoly {
public:
    UniPoly() = default;
    explicit UniPoly(std::vector<Rational> coefficients);

    int degree() const noexcept;
    bool is_zero() const noexcept { return coeffs_.empty(); }
    const std::vector<Rational>& coefficients() const noexcept { return coeffs_; }
    Rational coefficient(int k) const;
    Rational operator()(const Rational& alpha) const;

    UniPoly& operator+=(const UniPoly& other);
    friend UniPoly operator*(const UniPoly& a, const UniPoly& b);
    UniPoly scaled(const Rational& s) const;

    std::string to_string() const;

private:
    void trim();
    std::vector<Rational> coeffs_;
};

/// Sparse multivariate polynomial over the rationals. No zero coefficient is
/// ever stored.
class MultiPoly {
public:
    explicit MultiPoly(std::size_t dimension = 0) : dim_(dimension) {}

    std::size_t dimension() const noexcept { return dim_; }
    const std::map<Exponents, Rational>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    int degree() const;

    /// Adds `coef * x^exponents`, merging with an existing term.
    void add_term(const Exponents& exponents, const Rational& coef);

    Rational operator()(std::span<const Rational> x) const;
    double evaluate(std::span<const double> x) const;

    std::string to_string() const;

    friend bool operator==(const MultiPoly&, const MultiPoly&) = default;

private:
    std::size_t dim_;
    std::map<Exponents, Rational> terms_;
};

/// Parses `coef * x1^e1 * ... * xd^ed` terms joined by + and -. Coefficients
/// are integers or p/q; variables are x1..xd. When `dimension` is zero it is
/// inferred from the largest variable index. Throws ParseError.
MultiPoly parse_polynomial(std::string_view text, std::size_t dimension = 0);

/// Exact expansion of P(alpha x1 + (1 - alpha) x2) in alpha.
UniPoly restrict(const MultiPoly& p, std::span<const Rational> x1, std::span<const Rational> x2);

/// Homogeneous component of maximal total degree.
MultiPoly leading_part(const MultiPoly& p);

/// True iff the leading homogeneous part vanishes on v = x1 - x2.
bool degree_drop_predicate(const MultiPoly& p, std::span<const Rational> x1, std::span<const Rational> x2);

/// Random polynomial with `terms` monomials, total degree exactly `degree`,
/// nonzero integer coefficients in [-9, 9].
MultiPoly random_polynomial(std::size_t dimension, int degree, std::uint64_t seed, int terms = 8);

enum class EndpointSampler {
    gaussian,     ///< standard normal doubles, taken as exact dyadic rationals
    dyadic,       ///< uniform 64-bit numerator over 2^62
    hyperplane,   ///< gaussian, but x1 and x2 share their first coordinate
};

std::string_view to_string(EndpointSampler s);
EndpointSampler endpoint_sampler_from_string(std::string_view name);

/// Draws an endpoint pair for pair index `index`.
std::pair<RationalVector, RationalVector> sample_endpoints(EndpointSampler sampler, std::size_t dimension,
                                                           std::uint64_t seed, std::uint64_t index);

struct VerificationRecord {
    int degree1 = 0;
    int degree2 = 0;
    std::vector<int> pair_degrees1;
    std::vector<int> pair_degrees2;
    Rational average1;
    Rational average2;
    std::size_t drops1 = 0;
    std::size_t drops2 = 0;
    /// "ordered" when the averages order like the degrees (or tie when the
    /// degrees tie), "violated" otherwise.
    std::string verdict;
};

VerificationRecord verify_order_preservation(const MultiPoly& p1, const MultiPoly& p2, std::size_t n,
                                             EndpointSampler sampler, std::uint64_t seed);

} // namespace edeg::polylab
