#include "sompns/signal_model.hpp"

#include <numeric>

namespace sompns {

Matrix sparse_signal_rows(Index support_size, double mu_x, int sign_pattern,
                          Index k, Rng& rng) {
  if (support_size < 1)
    throw InvalidInputError("sparse signal: support size must be >= 1");
  if (mu_x <= 0.0)
    throw InvalidInputError("sparse signal: mu_x must be positive");
  if (sign_pattern != 1 && sign_pattern != 2)
    throw InvalidInputError("sparse signal: sign pattern must be 1 or 2");
  if (k < 1)
    throw InvalidInputError("sparse signal: K must be >= 1");

  Matrix x(support_size, k);
  if (sign_pattern == 1) {
    for (Index i = 0; i < support_size; ++i) {
      const double v = rng.sign() * mu_x;
      for (Index c = 0; c < k; ++c) x(i, c) = v;
    }
  } else {
    for (Index i = 0; i < support_size; ++i)
      for (Index c = 0; c < k; ++c) x(i, c) = rng.sign() * mu_x;
  }
  return x;
}

Matrix generate_sparse_signal(Index n, const Support& support, double mu_x,
                              int sign_pattern, Index k, std::uint64_t seed) {
  support.require_within(n);
  Rng rng(seed);
  const Matrix rows = sparse_signal_rows(support.size(), mu_x, sign_pattern, k, rng);
  Matrix x = Matrix::Zero(n, k);
  Index r = 0;
  for (Index j : support.indices()) x.row(j) = rows.row(r++);
  return x;
}

Matrix noise_matrix(Index m, const Vector& sigma, Rng& rng) {
  if (m < 1) throw InvalidInputError("noise: m must be >= 1");
  Matrix e(m, sigma.size());
  for (Index c = 0; c < sigma.size(); ++c)
    for (Index i = 0; i < m; ++i) e(i, c) = sigma(c) * rng.normal();
  return e;
}

Matrix generate_noise(Index m, const NoiseSpec& noise, std::uint64_t seed) {
  Rng rng(seed);
  return noise_matrix(m, noise.sigma, rng);
}

Support sample_support(Index n, Index s, Rng& rng) {
  if (s < 1 || s > n)
    throw InvalidInputError("sample_support: size must lie in [1, n]");
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index(0));
  // partial Fisher-Yates: first s slots become the sample
  for (Index i = 0; i < s; ++i) {
    const Index j =
        i + static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(s));
  return Support(std::move(pool));
}

}  // namespace sompns
