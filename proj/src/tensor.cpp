#include "vidperf/tensor.hpp"

#include <fmt/format.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

static_assert(std::endian::native == std::endian::little,
              "tensor fixture IO assumes a little-endian host");

namespace vidperf {

Tensor5D::Tensor5D(const Shape5D& shape, double fill) : shape_(shape) {
  if (!shape.positive()) {
    throw ValidationError(fmt::format("non-positive tensor shape ({},{},{},{},{})", shape.n,
                                      shape.t, shape.c, shape.h, shape.w));
  }
  data_.assign(static_cast<std::size_t>(shape.elems()), fill);
}

Tensor5D Tensor5D::from_data(const Shape5D& shape, std::vector<double> data) {
  Tensor5D t(shape);
  if (static_cast<std::int64_t>(data.size()) != shape.elems()) {
    throw ValidationError(fmt::format("data has {} elements, shape wants {}", data.size(),
                                      shape.elems()));
  }
  t.data_ = std::move(data);
  return t;
}

bool Tensor5D::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor5D random_normal(const Shape5D& shape, std::uint64_t seed, double stddev) {
  Tensor5D t(shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

Tensor5D random_uniform(const Shape5D& shape, std::uint64_t seed, double lo, double hi) {
  Tensor5D t(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

double dot(const Tensor5D& a, const Tensor5D& b) {
  if (a.shape() != b.shape()) throw ValidationError("dot: shape mismatch");
  double acc = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::int64_t i = 0; i < a.size(); ++i) acc += da[i] * db[i];
  return acc;
}

double max_abs_diff(const Tensor5D& a, const Tensor5D& b) {
  if (a.shape() != b.shape()) throw ValidationError("max_abs_diff: shape mismatch");
  double worst = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::int64_t i = 0; i < a.size(); ++i) {
    double d = std::abs(da[i] - db[i]);
    if (d > worst) worst = d;
  }
  return worst;
}

void write_tensor(const Tensor5D& tensor, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(fmt::format("cannot write tensor '{}'", path));
  const Shape5D& s = tensor.shape();
  std::uint32_t dims[5] = {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.t),
                           static_cast<std::uint32_t>(s.c), static_cast<std::uint32_t>(s.h),
                           static_cast<std::uint32_t>(s.w)};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(tensor.data().data()),
            static_cast<std::streamsize>(tensor.size() * sizeof(double)));
  if (!out) throw ValidationError(fmt::format("short write to '{}'", path));
}

Tensor5D read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open tensor '{}'", path));
  std::uint32_t dims[5];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in) throw ValidationError(fmt::format("tensor '{}' truncated in header", path));
  Shape5D shape{dims[0], dims[1], dims[2], dims[3], dims[4]};
  if (!shape.positive()) {
    throw ValidationError(fmt::format("tensor '{}' has a zero dimension", path));
  }
  std::vector<double> data(static_cast<std::size_t>(shape.elems()));
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!in) throw ValidationError(fmt::format("tensor '{}' truncated in payload", path));
  char extra;
  if (in.read(&extra, 1)) {
    throw ValidationError(fmt::format("tensor '{}' has trailing bytes", path));
  }
  return Tensor5D::from_data(shape, std::move(data));
}

}  // namespace vidperf
