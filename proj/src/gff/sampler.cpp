#include <cmath>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "fieldperc/cg.hpp"
#include "fieldperc/gff.hpp"
#include "fieldperc/kernels.hpp"

namespace fieldperc::gff {

namespace {

// fftw planning is not thread-safe; execution on private buffers is
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double ScalarField::value(const lattice::Point& p) const {
  if (!window.contains(p)) return 0.0;
  return values[window.index(p)];
}

BoxSampler::BoxSampler(const lattice::Window& u) : w_(u) {
  const int d = w_.dim();
  const lattice::Box& box = w_.box();
  axis_cos_.resize(static_cast<std::size_t>(d));
  std::vector<int> dims(static_cast<std::size_t>(d));
  double lognorm = 0.0;
  for (int a = 0; a < d; ++a) {
    const int m = static_cast<int>(box.side(a));
    if (m < 1) throw std::invalid_argument("BoxSampler: empty axis");
    dims[static_cast<std::size_t>(a)] = m;
    auto& tab = axis_cos_[static_cast<std::size_t>(a)];
    tab.resize(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k)
      tab[static_cast<std::size_t>(k)] =
          std::cos(std::numbers::pi * static_cast<double>(k + 1) /
                   static_cast<double>(m + 1)) /
          static_cast<double>(d);
    lognorm -= 0.5 * std::log(2.0 * static_cast<double>(m + 1));
  }
  norm_ = std::exp(lognorm);

  buf_ = fftw_alloc_real(w_.size());
  if (buf_ == nullptr) throw std::bad_alloc();
  const std::vector<fftw_r2r_kind> kinds(static_cast<std::size_t>(d),
                                         FFTW_RODFT00);
  {
    const std::lock_guard<std::mutex> lock(plan_mutex());
    plan_ = fftw_plan_r2r(d, dims.data(), buf_, buf_, kinds.data(),
                          FFTW_ESTIMATE);
  }
  if (plan_ == nullptr) {
    fftw_free(buf_);
    throw std::runtime_error("BoxSampler: transform planning failed");
  }
}

BoxSampler::~BoxSampler() {
  if (plan_ != nullptr) {
    const std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
  if (buf_ != nullptr) fftw_free(buf_);
}

ScalarField BoxSampler::draw(std::uint64_t seed, std::uint64_t stream) {
  const std::size_t n = w_.size();
  const int d = w_.dim();
  kernels::normal_fill(seed, stream, 0, buf_, n);

  // mode k gets norm / sqrt(lambda_k), lambda_k = 1 - sum_a cos_a(k_a)
  std::vector<int> ix(static_cast<std::size_t>(d), 0);
  std::vector<double> prefix(static_cast<std::size_t>(d) + 1, 0.0);
  for (int a = 0; a < d; ++a)
    prefix[static_cast<std::size_t>(a) + 1] =
        prefix[static_cast<std::size_t>(a)] +
        axis_cos_[static_cast<std::size_t>(a)][0];
  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = 1.0 - prefix[static_cast<std::size_t>(d)];
    buf_[i] *= norm_ / std::sqrt(lambda);
    int a = d - 1;
    for (; a >= 0; --a) {
      auto& k = ix[static_cast<std::size_t>(a)];
      if (static_cast<std::size_t>(++k) <
          axis_cos_[static_cast<std::size_t>(a)].size())
        break;
      k = 0;
    }
    if (a < 0) break;
    for (int t = a; t < d; ++t)
      prefix[static_cast<std::size_t>(t) + 1] =
          prefix[static_cast<std::size_t>(t)] +
          axis_cos_[static_cast<std::size_t>(t)]
                   [static_cast<std::size_t>(ix[static_cast<std::size_t>(t)])];
  }

  fftw_execute(static_cast<fftw_plan>(plan_));

  ScalarField f{w_, std::vector<double>(buf_, buf_ + n),
                seed,  stream,
                "dst", "zero"};
  return f;
}

MaskedSampler::MaskedSampler(const lattice::Window& u,
                             const std::uint8_t* mask)
    : w_(u), g_(lattice::build_graph(u, mask)) {}

ScalarField MaskedSampler::draw(std::uint64_t seed, std::uint64_t stream,
                                double rel_tol) const {
  const std::size_t n = g_.n;
  const int deg = g_.deg;
  const int d = w_.dim();
  const std::int32_t pad = static_cast<std::int32_t>(n);

  // one normal per (site, slot); the + slot owns the interior edge, pad
  // slots carry the boundary deficiencies
  std::vector<double> wn(n * static_cast<std::size_t>(deg));
  kernels::normal_fill(seed, stream, 0, wn.data(), wn.size());
  std::vector<double> f(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t* row = g_.nb.data() + i * static_cast<std::size_t>(deg);
    const double* wrow = wn.data() + i * static_cast<std::size_t>(deg);
    for (int a = 0; a < d; ++a) {
      const std::int32_t jm = row[2 * a];
      const std::int32_t jp = row[2 * a + 1];
      if (jp != pad) {
        const double v = wrow[2 * a + 1];
        f[i] += v;
        f[static_cast<std::size_t>(jp)] -= v;
      } else {
        f[i] += wrow[2 * a + 1];
      }
      if (jm == pad) f[i] += wrow[2 * a];
    }
  }
  const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(d));
  for (auto& v : f) v *= scale;

  std::vector<double> phi(n, 0.0);
  const solve::CgReport rep = solve::cg_solve(
      g_, 1.0 / (2.0 * static_cast<double>(d)), f.data(), phi.data(), rel_tol);
  if (!rep.converged)
    throw std::runtime_error("MaskedSampler: CG failed to converge");

  std::vector<double> vals(w_.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) vals[g_.to_window[i]] = phi[i];
  ScalarField out{w_, std::move(vals), seed, stream, "cg", "zero"};
  return out;
}

ScalarField sample_gff(const lattice::Window& u, std::uint64_t seed,
                       std::uint64_t stream, const std::uint8_t* mask) {
  if (mask == nullptr) return BoxSampler(u).draw(seed, stream);
  return MaskedSampler(u, mask).draw(seed, stream);
}

}  // namespace fieldperc::gff
