#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edeg {

enum class SamplingKind { chebyshev_fixed, randomized_cosine, uniform };

std::string_view to_string(SamplingKind kind);
SamplingKind sampling_from_string(std::string_view name);

/// Abscissa generator selector. Anchored schemes pin alpha_1 = 0 and
/// alpha_r = 1 so that boundary outputs can be replaced by labels.
struct SamplingScheme {
    SamplingKind kind = SamplingKind::randomized_cosine;
    bool anchored = false;
};

struct PathAbscissas {
    std::vector<double> alphas;
    SamplingScheme scheme;
    std::optional<std::uint64_t> seed;

    std::size_t size() const noexcept { return alphas.size(); }
};

/// Shifted Chebyshev nodes alpha_i = (1 - cos((2i-1) pi / 2r)) / 2, ascending.
PathAbscissas chebyshev_nodes(int r);

/// Chebyshev extrema nodes on [0, 1]; used for anchored fixed sampling.
PathAbscissas chebyshev_lobatto_nodes(int r);

/// Stratified cosine sampling: theta_i uniform on [(i-1) pi / r, i pi / r],
/// alpha_i = (1 - cos theta_i) / 2. Draws depend only on (seed, path_index, i).
PathAbscissas randomized_cosine(int r, std::uint64_t seed, bool anchored,
                                std::uint64_t path_index = 0);

/// Equispaced nodes including both endpoints; r = 1 gives the midpoint.
PathAbscissas uniform_nodes(int r);

/// Dispatch on the scheme. Deterministic schemes ignore seed and path_index.
PathAbscissas sample_abscissas(const SamplingScheme& scheme, int r, std::uint64_t seed,
                               std::uint64_t path_index);

/// Closed stratum [lo, hi] of the i-th (0-based) cosine node.
std::pair<double, double> cosine_stratum(int r, int i);

} // namespace edeg
