#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vidperf/arch.hpp"
#include "vidperf/kernels.hpp"

namespace vidperf {

// Desk-scale executor over an expanded architecture. Runs real numerics on
// the micro presets so the analytic backward pass can be checked against
// finite differences; not a training framework.
class Network {
 public:
  Network(ArchSpec arch, std::uint64_t seed);

  const ArchSpec& arch() const { return arch_; }
  std::int64_t param_count() const { return static_cast<std::int64_t>(flat_.size()); }

  double get_param(std::int64_t i) const { return *flat_[i]; }
  void set_param(std::int64_t i, double v) { *flat_[i] = v; }
  std::vector<double> param_vector() const;

  Tensor5D forward(const Tensor5D& x) const;

  // Harness loss: sum of squared outputs. Quadratic in the logits, so central
  // differences are exact up to rounding for a linear net.
  double loss(const Tensor5D& x) const;

  struct Gradients {
    double loss = 0.0;
    std::vector<double> params;  // same order as get_param/set_param
    Tensor5D input;
  };
  Gradients loss_gradients(const Tensor5D& x) const;

 private:
  struct Unit {
    std::string stage;
    ResidualUnit ops;
    std::vector<std::optional<ConvWeights>> conv;  // aligned with ops.main
    std::optional<ConvWeights> proj;
    std::optional<FcWeights> fc;  // set when the unit is a FullyConnected op
  };

  Tensor5D run_unit(const Unit& unit, const Tensor5D& x,
                    std::vector<Tensor5D>* tape) const;

  ArchSpec arch_;
  std::vector<Unit> units_;
  std::vector<double*> flat_;  // every weight and bias, in declaration order
};

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::int64_t checked_scalars = 0;
};

// Central-difference check of every parameter and every input element.
// Relative error uses |a - n| / max(|a|, |n|, 1e-3). Throws ValidationError
// if the net plus input exceeds 10^4 scalars or anything goes non-finite.
GradcheckResult gradcheck(const ArchSpec& arch, const Tensor5D& x, double eps,
                          std::uint64_t seed);

}  // namespace vidperf
