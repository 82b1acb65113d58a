#pragma once

#include <span>

#include "agentlab/core/errors.hpp"

namespace agentlab::runners {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) deviation; 0 for a single value
};

// Throws ContractViolation on an empty input.
MeanStd mean_stddev(std::span<const double> values);

class ZeroVariance : public Error {
 public:
  ZeroVariance() : Error("all differences are equal; the t statistic is undefined") {}
};

class TooFewSamples : public Error {
 public:
  explicit TooFewSamples(std::size_t n) : Error("a paired t-test needs at least 2 differences, got " + std::to_string(n)) {}
};

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  int df = 0;
};

// t = mean / (sd / sqrt(n)), df = n - 1, p = I_{df / (df + t^2)}(df / 2, 1 / 2).
TTestResult paired_t_test(std::span<const double> diffs);

}  // namespace agentlab::runners
