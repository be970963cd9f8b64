#pragma once

#include "sompns/rng.hpp"
#include "sompns/types.hpp"

#include <cstdint>

namespace sompns {

/// The s x K block of in-support coefficients: every entry is +-mu_x.
/// Sign pattern 1 shares one Rademacher sign vector across the K columns;
/// sign pattern 2 draws every (row, column) sign independently.
/// Rows correspond to the support's ascending indices.
Matrix sparse_signal_rows(Index support_size, double mu_x, int sign_pattern,
                          Index k, Rng& rng);

/// Full n x K sparse coefficient matrix, zero off the support.
Matrix generate_sparse_signal(Index n, const Support& support, double mu_x,
                              int sign_pattern, Index k, std::uint64_t seed);

/// m x K noise matrix; column k is i.i.d. N(0, sigma_k^2), columns
/// independent. Draw order is fixed (column-major) for reproducibility.
Matrix noise_matrix(Index m, const Vector& sigma, Rng& rng);
Matrix generate_noise(Index m, const NoiseSpec& noise, std::uint64_t seed);

/// Uniformly random size-s subset of [0, n).
Support sample_support(Index n, Index s, Rng& rng);

}  // namespace sompns
