#include "gna/training/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace gna::training {

std::string variant_name(Variant v) { return v == Variant::SA ? "sa" : "pt"; }

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "sa") return Variant::SA;
  if (name == "pt") return Variant::PT;
  return std::nullopt;
}

AnnealSchedule::AnnealSchedule(double beta_min, double beta_start, double beta_upper, double ramp_end,
                               Variant variant)
    : beta_min_(beta_min), beta_start_(beta_start), beta_upper_(beta_upper), ramp_end_(ramp_end), variant_(variant) {
  if (!(beta_min > 0.0) || !(beta_start >= beta_min) || !(beta_upper >= beta_start) || !std::isfinite(beta_upper)) {
    throw std::invalid_argument("schedule needs 0 < beta_min <= beta_start <= beta_upper");
  }
  if (!(ramp_end > 0.0)) throw std::invalid_argument("schedule ramp must end at positive progress");
}

AnnealSchedule AnnealSchedule::limited(Variant variant) { return {0.057, 0.057, 69.7, 0.33, variant}; }

AnnealSchedule AnnealSchedule::unlimited(Variant variant) { return {0.1, 1.0, 100.0, 1.0, variant}; }

double AnnealSchedule::beta_max(double progress) const {
  const double s = progress / ramp_end_;
  if (!(s > 0.0)) return beta_start_;
  if (s >= 1.0) return beta_upper_;
  return std::exp(std::log(beta_start_) + s * (std::log(beta_upper_) - std::log(beta_start_)));
}

double AnnealSchedule::training_beta(double progress, Rng& rng) const {
  const double top = beta_max(progress);
  if (variant_ == Variant::SA) return top;
  return beta_min_ + (top - beta_min_) * uniform01(rng);
}

AnnealSchedule AnnealSchedule::with_bounds(double beta_min, double beta_upper) const {
  return {beta_min, std::max(beta_min, beta_start_ == beta_min_ ? beta_min : beta_start_), beta_upper, ramp_end_,
          variant_};
}

}  // namespace gna::training
