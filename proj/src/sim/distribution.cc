// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/sim/distribution.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rollsim/common/error.h"

namespace rollsim::sim {
namespace {

// z-score of the 99th percentile of the standard normal.
constexpr double kZ99 = 2.3263478740408408;

void RequireFinite(double v, const char *what) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite");
}

}  // namespace

LatencyDistribution::LatencyDistribution(Family family, double mu, double sigma,
                                         std::vector<SimTime> table)
    : family_(family), mu_(mu), sigma_(sigma), table_(std::move(table)) {}

LatencyDistribution LatencyDistribution::Constant(SimTime value) {
  if (!IsValidDuration(value)) throw InvalidArgument("constant latency must be finite and >= 0");
  return LatencyDistribution(Family::kConstant, value, 0.0, {});
}

LatencyDistribution LatencyDistribution::Gaussian(double mean, double stddev) {
  RequireFinite(mean, "gaussian mean");
  RequireFinite(stddev, "gaussian stddev");
  if (stddev < 0.0) throw InvalidArgument("gaussian stddev must be >= 0");
  return LatencyDistribution(Family::kGaussian, mean, stddev, {});
}

LatencyDistribution LatencyDistribution::LogNormal(double mu, double sigma) {
  RequireFinite(mu, "lognormal mu");
  RequireFinite(sigma, "lognormal sigma");
  if (sigma < 0.0) throw InvalidArgument("lognormal sigma must be >= 0");
  return LatencyDistribution(Family::kLogNormal, mu, sigma, {});
}

LatencyDistribution LatencyDistribution::LogNormalFromTail(SimTime median, double p99_over_p50) {
  if (!(median > 0.0) || !std::isfinite(median)) {
    throw InvalidArgument("lognormal median must be > 0");
  }
  if (!(p99_over_p50 >= 1.0) || !std::isfinite(p99_over_p50)) {
    throw InvalidArgument("p99/p50 ratio must be >= 1");
  }
  return LogNormal(std::log(median), std::log(p99_over_p50) / kZ99);
}

LatencyDistribution LatencyDistribution::Empirical(std::vector<SimTime> table) {
  if (table.empty()) throw InvalidArgument("empirical table must be non-empty");
  for (SimTime v : table) {
    if (!IsValidDuration(v)) throw InvalidArgument("empirical entries must be finite and >= 0");
  }
  return LatencyDistribution(Family::kEmpirical, 0.0, 0.0, std::move(table));
}

LatencyDistribution LatencyDistribution::WithFailure(double prob, SimTime penalty) const {
  if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidArgument("failure_prob must be in [0, 1]");
  if (!IsValidDuration(penalty)) throw InvalidArgument("failure_penalty must be finite and >= 0");
  LatencyDistribution copy = *this;
  copy.failure_prob_ = prob;
  copy.failure_penalty_ = penalty;
  return copy;
}

LatencyDistribution LatencyDistribution::WithSigma(double sigma) const {
  LatencyDistribution copy = *this;
  switch (family_) {
    case Family::kGaussian:
      copy = Gaussian(mu_, sigma);
      break;
    case Family::kLogNormal:
      copy = LogNormal(mu_, sigma);
      break;
    default:
      throw InvalidArgument("sigma applies only to gaussian and lognormal latencies");
  }
  copy.failure_prob_ = failure_prob_;
  copy.failure_penalty_ = failure_penalty_;
  return copy;
}

LatencyDistribution::Draw LatencyDistribution::SampleDetailed(RandomStream &stream) const {
  SimTime base = 0.0;
  switch (family_) {
    case Family::kConstant:
      base = mu_;
      break;
    case Family::kGaussian:
      base = std::max(0.0, mu_ + sigma_ * stream.Normal());
      break;
    case Family::kLogNormal:
      base = std::exp(mu_ + sigma_ * stream.Normal());
      break;
    case Family::kEmpirical:
      base = table_[static_cast<size_t>(
          stream.UniformInt(0, static_cast<int64_t>(table_.size()) - 1))];
      break;
  }
  const bool failed = stream.Uniform() < failure_prob_;
  return {failed ? base + failure_penalty_ : base, failed};
}

double LatencyDistribution::Mean() const {
  double base = 0.0;
  switch (family_) {
    case Family::kConstant:
    case Family::kGaussian:
      base = mu_;
      break;
    case Family::kLogNormal:
      base = std::exp(mu_ + 0.5 * sigma_ * sigma_);
      break;
    case Family::kEmpirical: {
      double sum = 0.0;
      for (SimTime v : table_) sum += v;
      base = sum / static_cast<double>(table_.size());
      break;
    }
  }
  return base + failure_prob_ * failure_penalty_;
}

std::string LatencyDistribution::ToString() const {
  std::ostringstream os;
  switch (family_) {
    case Family::kConstant:
      os << "constant(" << mu_ << ")";
      break;
    case Family::kGaussian:
      os << "gaussian(" << mu_ << "," << sigma_ << ")";
      break;
    case Family::kLogNormal:
      os << "lognormal(" << mu_ << "," << sigma_ << ")";
      break;
    case Family::kEmpirical:
      os << "empirical[" << table_.size() << "]";
      break;
  }
  if (failure_prob_ > 0.0) os << "+fail(" << failure_prob_ << "," << failure_penalty_ << ")";
  return os.str();
}

IntDistribution IntDistribution::Constant(int64_t value) { return Uniform(value, value); }

IntDistribution IntDistribution::Uniform(int64_t min, int64_t max) {
  if (max < min) throw InvalidArgument("integer distribution requires min <= max");
  return IntDistribution(min, max, {});
}

IntDistribution IntDistribution::Empirical(std::vector<int64_t> table) {
  if (table.empty()) throw InvalidArgument("empirical table must be non-empty");
  auto [lo, hi] = std::minmax_element(table.begin(), table.end());
  const int64_t min = *lo;
  const int64_t max = *hi;
  return IntDistribution(min, max, std::move(table));
}

int64_t IntDistribution::Sample(RandomStream &stream) const {
  if (!table_.empty()) {
    return table_[static_cast<size_t>(
        stream.UniformInt(0, static_cast<int64_t>(table_.size()) - 1))];
  }
  return stream.UniformInt(min_, max_);
}

double IntDistribution::Mean() const {
  if (!table_.empty()) {
    double sum = 0.0;
    for (int64_t v : table_) sum += static_cast<double>(v);
    return sum / static_cast<double>(table_.size());
  }
  return 0.5 * static_cast<double>(min_ + max_);
}

}  // namespace rollsim::sim
