#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "faultae/models.hpp"
#include "faultae/random.hpp"

namespace faultae::testing {

inline Matrix random_matrix(Index rows, Index cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  return m;
}

inline Sequence random_sequence(Index steps, Index batch, Index cols, Rng& rng) {
  Sequence s;
  for (Index t = 0; t < steps; ++t) s.push_back(random_matrix(batch, cols, rng));
  return s;
}

/// Random symmetric positive-definite matrix A A^T / d + I.
inline Matrix random_spd(Index d, Rng& rng) {
  const Matrix a = random_matrix(d, d, rng);
  return a * a.transpose() / static_cast<double>(d) + Matrix::Identity(d, d);
}

/// Dot product of a sequence with fixed random weights; used as a scalar
/// probe loss so that d(loss)/d(output) is the weight sequence itself.
inline double probe(const Sequence& out, const Sequence& weights) {
  double s = 0.0;
  for (std::size_t t = 0; t < out.size(); ++t) s += out[t].cwiseProduct(weights[t]).sum();
  return s;
}

/// Largest elementwise |a - n| / max(|a|, |n|, floor) over all entries,
/// where n is the central difference of `loss` in each parameter.
/// The floor keeps round-off on near-zero gradients from dominating.
inline double max_relative_error(std::vector<std::span<double>> params,
                                 const std::vector<std::span<const double>>& analytic,
                                 const std::function<double()>& loss, double h = 1e-5,
                                 double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      double& p = params[k][i];
      const double saved = p;
      p = saved + h;
      const double up = loss();
      p = saved - h;
      const double down = loss();
      p = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

inline std::vector<std::span<double>> views(Matrix& m) {
  return {std::span<double>(m.data(), static_cast<std::size_t>(m.size()))};
}
inline std::vector<std::span<const double>> views(const Matrix& m) {
  return {std::span<const double>(m.data(), static_cast<std::size_t>(m.size()))};
}

inline std::vector<std::span<double>> views(Sequence& s) {
  std::vector<std::span<double>> v;
  for (auto& m : s) v.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
  return v;
}
inline std::vector<std::span<const double>> views(const Sequence& s) {
  std::vector<std::span<const double>> v;
  for (const auto& m : s) v.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
  return v;
}

/// Fresh, empty directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() / ("faultae_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace faultae::testing
