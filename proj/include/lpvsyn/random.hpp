#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "lpvsyn/numeric.hpp"

namespace lpvsyn {

using Rng = std::mt19937_64;

/// Deterministic seed derivation. Every random stream in the toolkit is keyed
/// by (root seed, purpose tag, index): the root comes from the experiment
/// config, the tag names what the stream is for ("disturbance", "input",
/// "sampler", ...), and the index separates per-step or per-sample streams.
/// Identical triples always yield the identical derived seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0);

Rng make_rng(std::uint64_t root, std::string_view tag, std::uint64_t index = 0);

/// Matrix with i.i.d. standard normal entries, filled column-major.
Matrix gaussian_matrix(Rng& rng, int rows, int cols);

Vector gaussian_vector(Rng& rng, int n, double stddev = 1.0);

Vector uniform_vector(Rng& rng, int n, double lo, double hi);

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with
/// the sign of diag(R) fixed).
Matrix haar_orthogonal(Rng& rng, int n);

}  // namespace lpvsyn
