#pragma once

#include <cassert>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vidperf/arch.hpp"

namespace vidperf {

// Dense row-major [N][T][C][H][W] of doubles.
class Tensor5D {
 public:
  Tensor5D() = default;
  explicit Tensor5D(const Shape5D& shape, double fill = 0.0);
  static Tensor5D from_data(const Shape5D& shape, std::vector<double> data);

  const Shape5D& shape() const { return shape_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  double& at(std::int64_t n, std::int64_t t, std::int64_t c, std::int64_t h, std::int64_t w) {
    return data_[index(n, t, c, h, w)];
  }
  double at(std::int64_t n, std::int64_t t, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return data_[index(n, t, c, h, w)];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool all_finite() const;

  friend bool operator==(const Tensor5D&, const Tensor5D&) = default;

 private:
  std::int64_t index(std::int64_t n, std::int64_t t, std::int64_t c, std::int64_t h,
                     std::int64_t w) const {
    assert(n >= 0 && n < shape_.n && t >= 0 && t < shape_.t && c >= 0 && c < shape_.c &&
           h >= 0 && h < shape_.h && w >= 0 && w < shape_.w);
    return (((n * shape_.t + t) * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }

  Shape5D shape_{1, 1, 1, 1, 1};
  std::vector<double> data_ = {0.0};
};

// Seeded fills, deterministic across platforms (mt19937_64, values drawn in
// flat index order).
Tensor5D random_normal(const Shape5D& shape, std::uint64_t seed, double stddev = 1.0);
Tensor5D random_uniform(const Shape5D& shape, std::uint64_t seed, double lo, double hi);

double dot(const Tensor5D& a, const Tensor5D& b);
double max_abs_diff(const Tensor5D& a, const Tensor5D& b);

// Fixture format: five uint32 little-endian dims (n, t, c, h, w) followed by
// the payload as float64 little-endian, flat row-major.
void write_tensor(const Tensor5D& tensor, const std::string& path);
Tensor5D read_tensor(const std::string& path);

}  // namespace vidperf
