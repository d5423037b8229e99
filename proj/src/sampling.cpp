#include "edeg/sampling.hpp"

#include "edeg/error.hpp"
#include "edeg/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace edeg {

namespace {

constexpr double kTieGap = 1e-12;
constexpr double kTieNudge = 1e-9;

double cos_map(double theta) { return 0.5 * (1.0 - std::cos(theta)); }

void require_count(int r) {
    if (r < 1) throw ConfigError("sampling resolution must be at least 1");
}

} // namespace

std::string_view to_string(SamplingKind kind) {
    switch (kind) {
    case SamplingKind::chebyshev_fixed: return "chebyshev_fixed";
    case SamplingKind::randomized_cosine: return "randomized_cosine";
    case SamplingKind::uniform: return "uniform";
    }
    return "?";
}

SamplingKind sampling_from_string(std::string_view name) {
    if (name == "chebyshev_fixed" || name == "chebyshev") return SamplingKind::chebyshev_fixed;
    if (name == "randomized_cosine" || name == "cosine") return SamplingKind::randomized_cosine;
    if (name == "uniform") return SamplingKind::uniform;
    throw ConfigError("unknown sampling scheme '" + std::string(name) + "'");
}

PathAbscissas chebyshev_nodes(int r) {
    require_count(r);
    PathAbscissas out{{}, {SamplingKind::chebyshev_fixed, false}, std::nullopt};
    out.alphas.reserve(static_cast<std::size_t>(r));
    for (int i = 1; i <= r; ++i) {
        out.alphas.push_back(cos_map((2.0 * i - 1.0) * std::numbers::pi / (2.0 * r)));
    }
    return out;
}

PathAbscissas chebyshev_lobatto_nodes(int r) {
    if (r < 2) throw ConfigError("anchored sampling requires r >= 2");
    PathAbscissas out{{}, {SamplingKind::chebyshev_fixed, true}, std::nullopt};
    out.alphas.reserve(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) out.alphas.push_back(cos_map(i * std::numbers::pi / (r - 1)));
    out.alphas.front() = 0.0;
    out.alphas.back() = 1.0;
    return out;
}

std::pair<double, double> cosine_stratum(int r, int i) {
    return {cos_map(i * std::numbers::pi / r), cos_map((i + 1) * std::numbers::pi / r)};
}

PathAbscissas randomized_cosine(int r, std::uint64_t seed, bool anchored, std::uint64_t path_index) {
    require_count(r);
    if (anchored && r < 2) throw ConfigError("anchored sampling requires r >= 2");
    PathAbscissas out{{}, {SamplingKind::randomized_cosine, anchored}, seed};
    out.alphas.resize(static_cast<std::size_t>(r));
    const CounterRng rng = CounterRng(seed).split(path_index);
    for (int i = 0; i < r; ++i) {
        const double theta = (i + rng.uniform(static_cast<std::uint64_t>(i))) * std::numbers::pi / r;
        out.alphas[static_cast<std::size_t>(i)] = cos_map(theta);
    }
    if (anchored) {
        out.alphas.front() = 0.0;
        out.alphas.back() = 1.0;
    }
    // Neighbouring strata share a boundary; keep the abscissas distinct.
    for (std::size_t i = 1; i < out.alphas.size(); ++i) {
        if (out.alphas[i] <= out.alphas[i - 1] + kTieGap) {
            const double hi = cosine_stratum(r, static_cast<int>(i)).second;
            out.alphas[i] = std::min(hi, out.alphas[i - 1] + kTieNudge);
        }
    }
    return out;
}

PathAbscissas uniform_nodes(int r) {
    require_count(r);
    PathAbscissas out{{}, {SamplingKind::uniform, r >= 2}, std::nullopt};
    if (r == 1) {
        out.alphas = {0.5};
        return out;
    }
    out.alphas.resize(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) out.alphas[static_cast<std::size_t>(i)] = static_cast<double>(i) / (r - 1);
    return out;
}

PathAbscissas sample_abscissas(const SamplingScheme& scheme, int r, std::uint64_t seed,
                               std::uint64_t path_index) {
    PathAbscissas out;
    switch (scheme.kind) {
    case SamplingKind::chebyshev_fixed:
        out = scheme.anchored ? chebyshev_lobatto_nodes(r) : chebyshev_nodes(r);
        break;
    case SamplingKind::randomized_cosine:
        out = randomized_cosine(r, seed, scheme.anchored, path_index);
        break;
    case SamplingKind::uniform:
        if (scheme.anchored && r < 2) throw ConfigError("anchored sampling requires r >= 2");
        out = uniform_nodes(r);
        break;
    }
    out.scheme = scheme;
    return out;
}

} // namespace edeg
