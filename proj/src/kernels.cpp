#include "qlbs/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "qlbs/basis.hpp"

namespace qlbs::kernels {

namespace {

// Stream tags keep the path shocks and the action noise of the same seed apart.
constexpr std::uint32_t kPathStream = 0x51b5'0001u;
constexpr std::uint32_t kNoiseStream = 0x51b5'0002u;

// Rows per block in the parallel reductions. Blocks are summed in index order,
// so the parallel result does not depend on the thread count.
constexpr Eigen::Index kBlockRows = 512;

std::mt19937_64 substream(std::uint64_t seed, Eigen::Index path, std::uint32_t tag) {
  const auto k = static_cast<std::uint64_t>(path);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32), tag};
  return std::mt19937_64(seq);
}

void simulate_one(Eigen::Index k, double s0, double drift_dt, double vol_sqrt_dt, std::uint64_t seed,
                  Eigen::Ref<Eigen::MatrixXd>& log_prices) {
  auto gen = substream(seed, k, kPathStream);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  double x = std::log(s0);
  log_prices(k, 0) = x;
  for (Eigen::Index t = 1; t < log_prices.cols(); ++t) {
    x += drift_dt + vol_sqrt_dt * normal(gen);
    log_prices(k, t) = x;
  }
}

// Indices of the nonzero entries of row k.
void nonzeros(const Eigen::Ref<const Eigen::MatrixXd>& design, Eigen::Index k, std::vector<Eigen::Index>& idx) {
  idx.clear();
  for (Eigen::Index j = 0; j < design.cols(); ++j) {
    if (design(k, j) != 0.0) idx.push_back(j);
  }
}

void accumulate_rows(const Eigen::Ref<const Eigen::MatrixXd>& design, std::span<const double> weights,
                     Eigen::Index begin, Eigen::Index end, Eigen::MatrixXd& gram) {
  std::vector<Eigen::Index> idx;
  idx.reserve(static_cast<std::size_t>(design.cols()));
  for (Eigen::Index k = begin; k < end; ++k) {
    const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(k)];
    if (w == 0.0) continue;
    nonzeros(design, k, idx);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const double ra = w * design(k, idx[a]);
      for (std::size_t b = a; b < idx.size(); ++b) gram(idx[a], idx[b]) += ra * design(k, idx[b]);
    }
  }
}

void symmetrize_upper(Eigen::MatrixXd& gram) {
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) gram(i, j) = gram(j, i);
}

}  // namespace

void simulate_log_paths(double s0, double drift_dt, double vol_sqrt_dt, std::uint64_t seed,
                        Eigen::Ref<Eigen::MatrixXd> log_prices, Exec exec) {
  const Eigen::Index n = log_prices.rows();
  if (exec == Exec::Serial) {
    for (Eigen::Index k = 0; k < n; ++k) simulate_one(k, s0, drift_dt, vol_sqrt_dt, seed, log_prices);
    return;
  }
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < n; ++k) simulate_one(k, s0, drift_dt, vol_sqrt_dt, seed, log_prices);
}

void eval_features(const basis::BasisSpec& spec, std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> out,
                   Exec exec) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto nb = static_cast<std::size_t>(spec.n_basis);
  if (exec == Exec::Serial) {
    std::vector<double> row(nb);
    for (Eigen::Index k = 0; k < n; ++k) {
      basis::eval_basis_into(spec, x[static_cast<std::size_t>(k)], row);
      for (std::size_t j = 0; j < nb; ++j) out(k, static_cast<Eigen::Index>(j)) = row[j];
    }
    return;
  }
#pragma omp parallel
  {
    std::vector<double> row(nb);
#pragma omp for schedule(static)
    for (Eigen::Index k = 0; k < n; ++k) {
      basis::eval_basis_into(spec, x[static_cast<std::size_t>(k)], row);
      for (std::size_t j = 0; j < nb; ++j) out(k, static_cast<Eigen::Index>(j)) = row[j];
    }
  }
}

Eigen::MatrixXd weighted_gram(const Eigen::Ref<const Eigen::MatrixXd>& design, std::span<const double> weights,
                              Exec exec) {
  const Eigen::Index m = design.cols();
  const Eigen::Index n = design.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  if (exec == Exec::Serial) {
    accumulate_rows(design, weights, 0, n, gram);
    symmetrize_upper(gram);
    return gram;
  }
  const Eigen::Index n_blocks = (n + kBlockRows - 1) / kBlockRows;
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(n_blocks));
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index b = 0; b < n_blocks; ++b) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
    accumulate_rows(design, weights, b * kBlockRows, std::min(n, (b + 1) * kBlockRows), g);
    partial[static_cast<std::size_t>(b)] = std::move(g);
  }
  for (const auto& g : partial) gram += g;
  symmetrize_upper(gram);
  return gram;
}

Eigen::VectorXd weighted_moment(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                const Eigen::Ref<const Eigen::VectorXd>& v, Exec exec) {
  const Eigen::Index m = design.cols();
  const Eigen::Index n = design.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  if (exec == Exec::Serial) {
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < m; ++j) out(j) += design(k, j) * v(k);
    return out;
  }
  const Eigen::Index n_blocks = (n + kBlockRows - 1) / kBlockRows;
  std::vector<Eigen::VectorXd> partial(static_cast<std::size_t>(n_blocks));
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < n_blocks; ++b) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
    const Eigen::Index end = std::min(n, (b + 1) * kBlockRows);
    for (Eigen::Index k = b * kBlockRows; k < end; ++k)
      for (Eigen::Index j = 0; j < m; ++j) acc(j) += design(k, j) * v(k);
    partial[static_cast<std::size_t>(b)] = std::move(acc);
  }
  for (const auto& p : partial) out += p;
  return out;
}

Eigen::MatrixXd uniform_noise(Eigen::Index n_paths, Eigen::Index n_cols, double eta, std::uint64_t seed,
                              Exec exec) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Ones(n_paths, n_cols);
  if (eta == 0.0) return u;
  auto fill = [&](Eigen::Index k) {
    auto gen = substream(seed, k, kNoiseStream);
    boost::random::uniform_real_distribution<double> dist(1.0 - eta, 1.0 + eta);
    for (Eigen::Index t = 0; t < n_cols; ++t) u(k, t) = dist(gen);
  };
  if (exec == Exec::Serial) {
    for (Eigen::Index k = 0; k < n_paths; ++k) fill(k);
  } else {
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < n_paths; ++k) fill(k);
  }
  return u;
}

}  // namespace qlbs::kernels
