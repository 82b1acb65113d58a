#include "agentlab/runners/stats.hpp"

#include <cmath>

#include <boost/math/special_functions/beta.hpp>

namespace agentlab::runners {

MeanStd mean_stddev(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("mean of an empty sample");
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

TTestResult paired_t_test(std::span<const double> diffs) {
  if (diffs.size() < 2) throw TooFewSamples(diffs.size());
  const auto [mean, sd] = mean_stddev(diffs);
  if (sd == 0.0) throw ZeroVariance();
  TTestResult r;
  r.df = static_cast<int>(diffs.size()) - 1;
  r.t = mean / (sd / std::sqrt(static_cast<double>(diffs.size())));
  const double df = r.df;
  r.p = boost::math::ibeta(df / 2.0, 0.5, df / (df + r.t * r.t));
  return r;
}

}  // namespace agentlab::runners
