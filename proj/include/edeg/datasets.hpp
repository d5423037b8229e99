#pragma once

#include "edeg/estimator.hpp"

#include <cstdint>

namespace edeg {

/// Two interleaved half-moons in 2-D with isotropic Gaussian jitter; labels
/// alternate 0/1 so both classes have n/2 points.
Dataset two_moons(int n, double noise, std::uint64_t seed);

/// Standard-normal features of dimension d, with labels drawn uniformly from
/// `classes` (0 means unlabeled).
Dataset gaussian_blob(int n, int d, int classes, std::uint64_t seed);

} // namespace edeg
