#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rising/metrics/metrics.hpp"

namespace rising::metrics {

struct MetricRecord {
  std::string id;
  std::string role;  // x_RIS, x_ING, x_LPP, x_IS, ...
  double re = 0.0;
  double rmse = 0.0;
  double ssim = 0.0;
  std::optional<double> rmse_vs_is;  // learnability analysis (reference = x_IS)
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  int count = 0;
};

Summary summarize(const std::vector<double>& values);

class MetricsReport {
 public:
  void add(MetricRecord record) { records_.push_back(std::move(record)); }
  const std::vector<MetricRecord>& records() const { return records_; }

  /// Roles in first-seen order.
  std::vector<std::string> roles() const;
  /// metric ∈ {"re", "rmse", "ssim", "rmse_vs_is"}.
  Summary aggregate(const std::string& role, const std::string& metric) const;

  /// id,role,re,rmse,ssim,rmse_vs_is (empty cell when absent).
  std::string to_csv() const;
  static MetricsReport from_csv(const std::string& text);

 private:
  std::vector<MetricRecord> records_;
};

/// Text table with one row per (metric, role) and one column per configuration,
/// cells formatted as "mean ± std" and "-" where a role is absent.
std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& columns,
                         const std::vector<std::string>& metrics = {"re", "rmse", "ssim"});

}  // namespace rising::metrics
