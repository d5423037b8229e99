#include "edeg/polylab.hpp"

#include "edeg/error.hpp"
#include "edeg/random.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace edeg::polylab {

// ---------------------------------------------------------------------------
// UniPoly

UniPoly::UniPoly(std::vector<Rational> coefficients) : coeffs_(std::move(coefficients)) { trim(); }

void UniPoly::trim() {
    while (!coeffs_.empty() && sgn(coeffs_.back()) == 0) coeffs_.pop_back();
}

int UniPoly::degree() const noexcept {
    return coeffs_.empty() ? kZeroDegree : static_cast<int>(coeffs_.size()) - 1;
}

Rational UniPoly::coefficient(int k) const {
    if (k < 0 || k >= static_cast<int>(coeffs_.size())) return 0;
    return coeffs_[static_cast<std::size_t>(k)];
}

Rational UniPoly::operator()(const Rational& alpha) const {
    Rational acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * alpha + *it;
    return acc;
}

UniPoly& UniPoly::operator+=(const UniPoly& other) {
    if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size());
    for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
    trim();
    return *this;
}

UniPoly operator*(const UniPoly& a, const UniPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> out(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
        if (sgn(a.coeffs_[i]) == 0) continue;
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return UniPoly(std::move(out));
}

UniPoly UniPoly::scaled(const Rational& s) const {
    std::vector<Rational> out = coeffs_;
    for (auto& c : out) c *= s;
    return UniPoly(std::move(out));
}

std::string UniPoly::to_string() const {
    if (coeffs_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t k = coeffs_.size(); k-- > 0;) {
        const Rational& c = coeffs_[k];
        if (sgn(c) == 0) continue;
        if (!first) os << (sgn(c) < 0 ? " - " : " + ");
        else if (sgn(c) < 0) os << "-";
        os << Rational(abs(c));
        if (k >= 1) os << "*a";
        if (k >= 2) os << "^" << k;
        first = false;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// MultiPoly

int MultiPoly::degree() const {
    int best = kZeroDegree;
    for (const auto& [e, c] : terms_) {
        best = std::max(best, static_cast<int>(std::accumulate(e.begin(), e.end(), 0u)));
    }
    return best;
}

void MultiPoly::add_term(const Exponents& exponents, const Rational& coef) {
    if (exponents.size() != dim_) throw ConfigError("monomial dimension mismatch");
    if (sgn(coef) == 0) return;
    auto [it, inserted] = terms_.try_emplace(exponents, coef);
    if (!inserted) {
        it->second += coef;
        if (sgn(it->second) == 0) terms_.erase(it);
    }
}

Rational MultiPoly::operator()(std::span<const Rational> x) const {
    if (x.size() != dim_) throw ConfigError("evaluation point dimension mismatch");
    Rational acc = 0;
    for (const auto& [e, c] : terms_) {
        Rational t = c;
        for (std::size_t j = 0; j < dim_; ++j) {
            for (unsigned k = 0; k < e[j]; ++k) t *= x[j];
        }
        acc += t;
    }
    return acc;
}

double MultiPoly::evaluate(std::span<const double> x) const {
    if (x.size() != dim_) throw ConfigError("evaluation point dimension mismatch");
    double acc = 0.0;
    for (const auto& [e, c] : terms_) {
        double t = c.get_d();
        for (std::size_t j = 0; j < dim_; ++j) {
            for (unsigned k = 0; k < e[j]; ++k) t *= x[j];
        }
        acc += t;
    }
    return acc;
}

std::string MultiPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // Highest total degree first for readability.
    std::vector<const std::pair<const Exponents, Rational>*> order;
    for (const auto& t : terms_) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) {
        return std::accumulate(a->first.begin(), a->first.end(), 0u) >
               std::accumulate(b->first.begin(), b->first.end(), 0u);
    });
    for (const auto* t : order) {
        const Rational& c = t->second;
        if (!first) os << (sgn(c) < 0 ? " - " : " + ");
        else if (sgn(c) < 0) os << "-";
        os << Rational(abs(c));
        for (std::size_t j = 0; j < dim_; ++j) {
            const unsigned e = t->first[j];
            if (e == 0) continue;
            os << "*x" << (j + 1);
            if (e > 1) os << "^" << e;
        }
        first = false;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class PolyParser {
public:
    PolyParser(std::string_view text, std::size_t dimension) : text_(text), fixed_dim_(dimension) {}

    MultiPoly parse() {
        skip_ws();
        if (at_end()) fail("empty polynomial");
        bool negative = false;
        if (peek() == '+' || peek() == '-') {
            negative = peek() == '-';
            ++pos_;
            skip_ws();
        }
        parse_term(negative);
        skip_ws();
        while (!at_end()) {
            const char op = peek();
            if (op != '+' && op != '-') fail(std::string("expected '+' or '-', found '") + op + "'");
            ++pos_;
            skip_ws();
            parse_term(op == '-');
            skip_ws();
        }
        std::size_t dim = fixed_dim_ != 0 ? fixed_dim_ : max_var_;
        if (dim == 0) dim = 1;
        MultiPoly out(dim);
        for (auto& [vars, coef] : raw_) {
            Exponents e(dim, 0);
            for (const auto& [index, power] : vars) e[index - 1] += power;
            out.add_term(e, coef);
        }
        return out;
    }

private:
    using RawTerm = std::pair<std::vector<std::pair<std::size_t, unsigned>>, Rational>;

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& what) const { fail_at(what, pos_); }

    [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError(what, line, column);
    }

    std::string digits() {
        const std::size_t start = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (start == pos_) fail("expected digits");
        return std::string(text_.substr(start, pos_ - start));
    }

    void parse_term(bool negative) {
        RawTerm term{{}, Rational(negative ? -1 : 1)};
        parse_factor(term);
        skip_ws();
        while (!at_end() && peek() == '*') {
            ++pos_;
            skip_ws();
            parse_factor(term);
            skip_ws();
        }
        raw_.push_back(std::move(term));
    }

    void parse_factor(RawTerm& term) {
        if (at_end()) fail("unexpected end of input");
        const char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mpz_class num(digits());
            mpz_class den(1);
            skip_ws();
            if (!at_end() && peek() == '/') {
                ++pos_;
                skip_ws();
                const std::size_t at = pos_;
                den = mpz_class(digits());
                if (den == 0) fail_at("zero denominator", at);
            }
            Rational q(num, den);
            q.canonicalize();
            term.second *= q;
            return;
        }
        if (c == 'x' || c == 'X') {
            const std::size_t at = pos_;
            ++pos_;
            const std::string idx = digits();
            const unsigned long index = std::stoul(idx);
            if (index == 0) fail_at("variables are numbered from x1", at);
            if (fixed_dim_ != 0 && index > fixed_dim_) {
                fail_at("variable x" + idx + " exceeds dimension " + std::to_string(fixed_dim_), at);
            }
            unsigned power = 1;
            skip_ws();
            if (!at_end() && peek() == '^') {
                ++pos_;
                skip_ws();
                power = static_cast<unsigned>(std::stoul(digits()));
            }
            max_var_ = std::max<std::size_t>(max_var_, index);
            term.first.emplace_back(index, power);
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view text_;
    std::size_t fixed_dim_;
    std::size_t pos_ = 0;
    std::size_t max_var_ = 0;
    std::vector<RawTerm> raw_;
};

} // namespace

MultiPoly parse_polynomial(std::string_view text, std::size_t dimension) {
    return PolyParser(text, dimension).parse();
}

// ---------------------------------------------------------------------------
// Restriction and degree analysis

UniPoly restrict(const MultiPoly& p, std::span<const Rational> x1, std::span<const Rational> x2) {
    const std::size_t d = p.dimension();
    if (x1.size() != d || x2.size() != d) throw ConfigError("endpoint dimension mismatch");

    std::vector<unsigned> max_power(d, 0);
    for (const auto& [e, c] : p.terms()) {
        for (std::size_t j = 0; j < d; ++j) max_power[j] = std::max(max_power[j], e[j]);
    }
    // powers[j][k] = (x2_j + alpha v_j)^k
    std::vector<std::vector<UniPoly>> powers(d);
    for (std::size_t j = 0; j < d; ++j) {
        const UniPoly line({x2[j], Rational(x1[j] - x2[j])});
        powers[j].reserve(max_power[j] + 1);
        powers[j].push_back(UniPoly({Rational(1)}));
        for (unsigned k = 1; k <= max_power[j]; ++k) powers[j].push_back(powers[j].back() * line);
    }

    UniPoly out;
    for (const auto& [e, c] : p.terms()) {
        UniPoly term({c});
        for (std::size_t j = 0; j < d; ++j) {
            if (e[j] > 0) term = term * powers[j][e[j]];
        }
        out += term;
    }
    return out;
}

MultiPoly leading_part(const MultiPoly& p) {
    if (p.is_zero()) throw ConfigError("the zero polynomial has no leading part");
    const int top = p.degree();
    MultiPoly out(p.dimension());
    for (const auto& [e, c] : p.terms()) {
        if (static_cast<int>(std::accumulate(e.begin(), e.end(), 0u)) == top) out.add_term(e, c);
    }
    return out;
}

bool degree_drop_predicate(const MultiPoly& p, std::span<const Rational> x1, std::span<const Rational> x2) {
    if (x1.size() != p.dimension() || x2.size() != p.dimension()) throw ConfigError("endpoint dimension mismatch");
    RationalVector v(x1.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = x1[j] - x2[j];
    return sgn(leading_part(p)(v)) == 0;
}

MultiPoly random_polynomial(std::size_t dimension, int degree, std::uint64_t seed, int terms) {
    if (dimension == 0 || degree < 0 || terms < 1) throw ConfigError("invalid random polynomial shape");
    const CounterRng base(seed, 0x706f6c79ULL);
    for (std::uint64_t attempt = 0;; ++attempt) {
        const CounterRng rng = base.split(attempt);
        std::uint64_t counter = 0;
        MultiPoly p(dimension);
        for (int t = 0; t < terms; ++t) {
            const int total = t == 0 ? degree : static_cast<int>(rng.below(counter++, static_cast<std::uint64_t>(degree) + 1));
            Exponents e(dimension, 0);
            for (int u = 0; u < total; ++u) ++e[rng.below(counter++, dimension)];
            const auto magnitude = static_cast<long>(rng.below(counter++, 9) + 1);
            const long coef = rng.below(counter++, 2) == 0 ? magnitude : -magnitude;
            p.add_term(e, Rational(coef));
        }
        if (p.degree() == degree) return p;
    }
}

std::string_view to_string(EndpointSampler s) {
    switch (s) {
    case EndpointSampler::gaussian: return "gaussian";
    case EndpointSampler::dyadic: return "dyadic";
    case EndpointSampler::hyperplane: return "hyperplane";
    }
    return "?";
}

EndpointSampler endpoint_sampler_from_string(std::string_view name) {
    if (name == "gaussian") return EndpointSampler::gaussian;
    if (name == "dyadic") return EndpointSampler::dyadic;
    if (name == "hyperplane") return EndpointSampler::hyperplane;
    throw ConfigError("unknown endpoint sampler '" + std::string(name) + "'");
}

std::pair<RationalVector, RationalVector> sample_endpoints(EndpointSampler sampler, std::size_t dimension,
                                                           std::uint64_t seed, std::uint64_t index) {
    const CounterRng rng = CounterRng(seed, 0x656e6470ULL).split(index);
    RationalVector x1(dimension);
    RationalVector x2(dimension);
    const mpz_class two62 = mpz_class(1) << 62;
    for (std::size_t j = 0; j < dimension; ++j) {
        for (int side = 0; side < 2; ++side) {
            const std::uint64_t counter = 2 * j + static_cast<std::uint64_t>(side);
            Rational value;
            if (sampler == EndpointSampler::dyadic) {
                const auto raw = static_cast<std::int64_t>(rng.bits(counter));
                mpz_class num;
                mpz_set_si(num.get_mpz_t(), raw);
                value = Rational(num, two62);
                value.canonicalize();
            } else {
                value = Rational(rng.normal(counter));  // exact: every double is a dyadic rational
            }
            (side == 0 ? x1 : x2)[j] = value;
        }
    }
    if (sampler == EndpointSampler::hyperplane && dimension > 0) x1[0] = x2[0];
    return {std::move(x1), std::move(x2)};
}

VerificationRecord verify_order_preservation(const MultiPoly& p1, const MultiPoly& p2, std::size_t n,
                                             EndpointSampler sampler, std::uint64_t seed) {
    if (p1.is_zero() || p2.is_zero()) throw ConfigError("order verification needs nonzero polynomials");
    if (p1.dimension() != p2.dimension()) throw ConfigError("polynomials must share a dimension");
    if (n == 0) throw ConfigError("pair count must be positive");

    VerificationRecord rec;
    rec.degree1 = p1.degree();
    rec.degree2 = p2.degree();
    rec.pair_degrees1.reserve(n);
    rec.pair_degrees2.reserve(n);
    mpz_class sum1 = 0;
    mpz_class sum2 = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto [x1, x2] = sample_endpoints(sampler, p1.dimension(), seed, k);
        // A restriction that vanishes identically counts as degree 0.
        const int d1 = std::max(0, restrict(p1, x1, x2).degree());
        const int d2 = std::max(0, restrict(p2, x1, x2).degree());
        rec.pair_degrees1.push_back(d1);
        rec.pair_degrees2.push_back(d2);
        sum1 += d1;
        sum2 += d2;
        if (d1 < rec.degree1) ++rec.drops1;
        if (d2 < rec.degree2) ++rec.drops2;
    }
    rec.average1 = Rational(sum1, static_cast<unsigned long>(n));
    rec.average2 = Rational(sum2, static_cast<unsigned long>(n));
    rec.average1.canonicalize();
    rec.average2.canonicalize();
    const int expected = (rec.degree1 > rec.degree2) - (rec.degree1 < rec.degree2);
    const int observed = cmp(rec.average1, rec.average2);
    rec.verdict = ((observed > 0) - (observed < 0)) == expected ? "ordered" : "violated";
    return rec;
}

} // namespace edeg::polylab
