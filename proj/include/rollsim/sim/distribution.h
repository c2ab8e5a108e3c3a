// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rollsim/sim/random.h"
#include "rollsim/sim/time.h"

namespace rollsim::sim {

/// Latency model for environment resets/steps and service times.
///
/// A draw is `base + (failed ? failure_penalty : 0)` where `base` comes from
/// the family and `failed` is a Bernoulli(failure_prob) trial. Gaussian and
/// lognormal bases are clamped at zero. Parameters are checked when the
/// distribution is built, so sampling never throws.
///
/// Every draw consumes the same number of random words regardless of the
/// parameters (gaussian/lognormal: 2, constant: 0, empirical: 1, plus one for
/// the failure trial), which keeps paired-seed sweeps over sigma aligned.
class LatencyDistribution {
 public:
  enum class Family { kConstant, kGaussian, kLogNormal, kEmpirical };

  struct Draw {
    SimTime value;
    bool failed;
  };

  LatencyDistribution() : LatencyDistribution(Constant(0.0)) {}

  static LatencyDistribution Constant(SimTime value);
  /// Normal(mean, stddev) clamped to >= 0.
  static LatencyDistribution Gaussian(double mean, double stddev);
  /// exp(Normal(mu, sigma)); mu and sigma are log-space parameters.
  static LatencyDistribution LogNormal(double mu, double sigma);
  /// Lognormal with the given median and p99/p50 ratio (>= 1).
  static LatencyDistribution LogNormalFromTail(SimTime median, double p99_over_p50);
  /// Uniform choice from a non-empty table of non-negative values.
  static LatencyDistribution Empirical(std::vector<SimTime> table);

  /// Returns a copy that fails with `prob` and then pays `penalty`.
  LatencyDistribution WithFailure(double prob, SimTime penalty) const;

  Draw SampleDetailed(RandomStream &stream) const;
  SimTime Sample(RandomStream &stream) const { return SampleDetailed(stream).value; }

  /// Expected value of a draw, ignoring the zero clamp.
  double Mean() const;

  Family family() const { return family_; }
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  const std::vector<SimTime> &table() const { return table_; }
  double failure_prob() const { return failure_prob_; }
  SimTime failure_penalty() const { return failure_penalty_; }

  /// Same family and failure model with a different spread; used by sweeps.
  LatencyDistribution WithSigma(double sigma) const;

  std::string ToString() const;

 private:
  LatencyDistribution(Family family, double mu, double sigma, std::vector<SimTime> table);

  Family family_;
  double mu_ = 0.0;
  double sigma_ = 0.0;
  std::vector<SimTime> table_;
  double failure_prob_ = 0.0;
  SimTime failure_penalty_ = 0.0;
};

/// Integer-valued distribution for turn and token counts: uniform over
/// [min, max] or an empirical table.
class IntDistribution {
 public:
  IntDistribution() : IntDistribution(Constant(1)) {}

  static IntDistribution Constant(int64_t value);
  static IntDistribution Uniform(int64_t min, int64_t max);
  static IntDistribution Empirical(std::vector<int64_t> table);

  int64_t Sample(RandomStream &stream) const;
  double Mean() const;
  int64_t min() const { return min_; }
  int64_t max() const { return max_; }

 private:
  IntDistribution(int64_t min, int64_t max, std::vector<int64_t> table)
      : min_(min), max_(max), table_(std::move(table)) {}

  int64_t min_;
  int64_t max_;
  std::vector<int64_t> table_;
};

}  // namespace rollsim::sim
