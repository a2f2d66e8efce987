#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "qkdn/sim_time.hpp"
#include "qkdn/types.hpp"

namespace qkdn {

struct Accumulator {
  double sum = 0.0;
  std::uint64_t count = 0;

  void add(double v) {
    sum += v;
    ++count;
  }
  void add_many(double total, std::uint64_t n) {
    sum += total;
    count += n;
  }
  std::optional<double> mean() const {
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  }
};

/// Time average of a piecewise-linear signal given by samples, by the
/// trapezoid rule. A single sample is its own average.
class TimeAverage {
 public:
  void sample(SimTime t, double v);
  std::optional<double> value() const;
  std::size_t samples() const { return n_; }

 private:
  SimTime first_;
  SimTime last_;
  double last_v_ = 0.0;
  double area_ = 0.0;  // value * seconds
  std::size_t n_ = 0;
};

enum class Metric { t_msg_ne, t_key, t_msg_km, n_msg_km };

inline constexpr Metric kAllMetrics[] = {Metric::t_msg_ne, Metric::t_key, Metric::t_msg_km,
                                         Metric::n_msg_km};

std::string_view to_string(Metric m);

/// Per-node observations. Latencies are in seconds and attributed to the
/// sending node; queue lengths are time averages over the measurement window.
struct NodeMetrics {
  NodeId node = 0;
  NodeKind kind = NodeKind::access;
  Accumulator t_msg_ne;
  Accumulator t_key;
  Accumulator t_msg_km;
  std::optional<double> n_msg_km;
  std::optional<double> n_cm;  ///< control-and-management messages held by the KMS

  std::optional<double> get(Metric m) const;
};

struct RunMetrics {
  std::optional<double> t_msg_ne;
  std::optional<double> t_key;
  std::optional<double> t_msg_km;
  std::optional<double> n_msg_km;
  std::vector<NodeMetrics> nodes;

  std::optional<double> get(Metric m) const;
  /// Smallest and largest per-node value of a metric.
  std::optional<std::pair<double, double>> node_range(Metric m) const;
};

/// Network values are the mean of the per-node means over the nodes that
/// have a value; a metric with no samples anywhere stays absent.
RunMetrics aggregate(std::vector<NodeMetrics> nodes);

/// Element-wise mean of the network values of several runs (e.g. seeds).
/// A metric is absent when it is absent in every run.
RunMetrics average_runs(const std::vector<RunMetrics>& runs);

struct SweepPoint {
  double key_rate = 0.0;
  RunMetrics metrics;
};

struct SweepResult {
  std::vector<SweepPoint> points;  ///< ascending key rate
};

struct Cutoff {
  std::optional<double> kps;
  double plateau = 0.0;
  double threshold = 0.0;
  /// Set when a rate below the cut-off is not itself degraded.
  bool low_confidence = false;
};

/// plateau = median of the metric over the top quartile (ceil(n/4)) of key
/// rates; cut-off = the largest rate whose metric exceeds factor x plateau.
/// Points without a value are skipped. Throws ParameterError with fewer
/// than three valued points.
Cutoff detect_cutoff(const std::vector<std::pair<double, std::optional<double>>>& series,
                     double factor = 2.0);
Cutoff detect_cutoff(const SweepResult& sweep, Metric m, double factor = 2.0);

}  // namespace qkdn
