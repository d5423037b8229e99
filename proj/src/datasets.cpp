#include "edeg/datasets.hpp"

#include "edeg/error.hpp"
#include "edeg/random.hpp"

#include <cmath>
#include <numbers>

namespace edeg {

Dataset two_moons(int n, double noise, std::uint64_t seed) {
    if (n < 2) throw ConfigError("two_moons needs at least two points");
    const CounterRng rng(seed, 0x6d6f6f6eULL);
    Dataset data;
    data.inputs.resize(n, 2);
    data.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        const double t = std::numbers::pi * rng.uniform(static_cast<std::uint64_t>(3 * i));
        double x = label == 0 ? std::cos(t) : 1.0 - std::cos(t);
        double y = label == 0 ? std::sin(t) : 0.5 - std::sin(t);
        x += noise * rng.normal(static_cast<std::uint64_t>(3 * i + 1));
        y += noise * rng.normal(static_cast<std::uint64_t>(3 * i + 2));
        data.inputs(i, 0) = x;
        data.inputs(i, 1) = y;
        data.labels[static_cast<std::size_t>(i)] = label;
    }
    return data;
}

Dataset gaussian_blob(int n, int d, int classes, std::uint64_t seed) {
    if (n < 1 || d < 1 || classes < 0) throw ConfigError("invalid gaussian_blob shape");
    const CounterRng rng(seed, 0x626c6f62ULL);
    Dataset data;
    data.inputs.resize(n, d);
    std::uint64_t counter = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) data.inputs(i, j) = rng.normal(counter++);
        if (classes > 0) data.labels.push_back(static_cast<int>(rng.below(counter++, static_cast<std::uint64_t>(classes))));
    }
    return data;
}

} // namespace edeg
