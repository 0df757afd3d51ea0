#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "gna/random.hpp"

namespace gna::training {

// SA trains and samples at beta_max; PT trains at a beta drawn uniformly from [beta_min, beta_max].
enum class Variant { SA, PT };

std::string variant_name(Variant v);  // "sa", "pt"
std::optional<Variant> parse_variant(std::string_view name);

// beta_max rises log-linearly from beta_start to beta_upper over progress [0, ramp_end],
// then stays at beta_upper.
class AnnealSchedule {
 public:
  AnnealSchedule(double beta_min, double beta_start, double beta_upper, double ramp_end, Variant variant);

  // beta_min = beta_max(0) = 0.057, beta_upper = 69.7, reached at progress 0.33 (progress = queries / budget).
  static AnnealSchedule limited(Variant variant);
  // beta_min = 0.1, beta_max(0) = 1, beta_upper = 100; progress = step / ramp_steps.
  static AnnealSchedule unlimited(Variant variant);
  static constexpr double kUnlimitedRampSteps = 2e4;

  double beta_min() const { return beta_min_; }
  double beta_start() const { return beta_start_; }
  double beta_upper() const { return beta_upper_; }
  double ramp_end() const { return ramp_end_; }
  Variant variant() const { return variant_; }

  double beta_max(double progress) const;
  // Inverse temperature for one training step.
  double training_beta(double progress, Rng& rng) const;
  // Queries are always drawn at beta_max.
  double query_beta(double progress) const { return beta_max(progress); }

  AnnealSchedule with_bounds(double beta_min, double beta_upper) const;

 private:
  double beta_min_, beta_start_, beta_upper_, ramp_end_;
  Variant variant_;
};

}  // namespace gna::training
