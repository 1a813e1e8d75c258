// Split of a high-dimensional field on a finite site set A into an iid part
// psi and a correlated remainder xi whose covariance is the perturbation
// table. Sampling the pair only needs a Cholesky factor of that small matrix.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fieldperc/gff.hpp"
#include "fieldperc/kernels.hpp"

namespace fieldperc::gff {

DecompositionSampler::DecompositionSampler(int d,
                                           std::vector<lattice::Point> a)
    : a_(std::move(a)), scalars_(greens::highdim_scalars(d)) {
  if (a_.empty())
    throw std::invalid_argument("DecompositionSampler: empty site set");
  if (a_.size() > 4000)
    throw std::invalid_argument("DecompositionSampler: site set too large");
  for (const auto& p : a_)
    if (p.size() != 3)
      throw std::invalid_argument("DecompositionSampler: sites must be 3-d");

  lattice::Coord range = 0;
  for (std::size_t i = 0; i < a_.size(); ++i)
    for (std::size_t j = i + 1; j < a_.size(); ++j)
      range = std::max(range, lattice::linf(lattice::sub(a_[i], a_[j])));
  const greens::GPrimeTable gp(d, static_cast<int>(range));

  const Eigen::Index m = static_cast<Eigen::Index>(a_.size());
  Eigen::MatrixXd gprime(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const double v = gp.at(lattice::sub(a_[static_cast<std::size_t>(i)],
                                          a_[static_cast<std::size_t>(j)]));
      gprime(i, j) = v;
      gprime(j, i) = v;
    }

  const double jitters[] = {0.0, 1e-12, 1e-11, 1e-10};
  bool done = false;
  Eigen::MatrixXd l;
  for (const double jit : jitters) {
    Eigen::MatrixXd trial = gprime;
    if (jit > 0.0)
      trial += jit * Eigen::MatrixXd::Identity(m, m);
    Eigen::LLT<Eigen::MatrixXd> llt(trial);
    if (llt.info() == Eigen::Success) {
      l = llt.matrixL();
      jitter_ = jit;
      done = true;
      break;
    }
  }
  if (!done)
    throw std::runtime_error(
        "DecompositionSampler: covariance not PSD within jitter cap");
  chol_.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(m),
               0.0);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      chol_[static_cast<std::size_t>(i) * a_.size() +
            static_cast<std::size_t>(j)] = l(i, j);
}

DecompositionSample DecompositionSampler::draw(std::uint64_t seed,
                                               std::uint64_t stream) const {
  const std::size_t m = a_.size();
  std::vector<double> z(2 * m);
  kernels::normal_fill(seed, stream, 0, z.data(), z.size());

  DecompositionSample s;
  s.sites = a_;
  s.scalars = scalars_;
  s.jitter = jitter_;
  s.psi.resize(m);
  s.xi.assign(m, 0.0);
  const double sd = std::sqrt(scalars_.sigma2);
  for (std::size_t i = 0; i < m; ++i) s.psi[i] = sd * z[i];
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j)
      acc += chol_[i * m + j] * z[m + j];
    s.xi[i] = acc;
  }
  return s;
}

DecompositionSample sample_decomposition(int d,
                                         const std::vector<lattice::Point>& a,
                                         std::uint64_t seed) {
  return DecompositionSampler(d, a).draw(seed, 0);
}

}  // namespace fieldperc::gff
