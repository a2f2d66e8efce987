#include "qkdn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "qkdn/errors.hpp"

namespace qkdn {

void TimeAverage::sample(SimTime t, double v) {
  if (n_ == 0) {
    first_ = t;
  } else {
    if (t < last_) throw ParameterError("time average samples must be ordered");
    area_ += 0.5 * (v + last_v_) * (t - last_).seconds();
  }
  last_ = t;
  last_v_ = v;
  ++n_;
}

std::optional<double> TimeAverage::value() const {
  if (n_ == 0) return std::nullopt;
  const double span = (last_ - first_).seconds();
  if (span <= 0.0) return last_v_;
  return area_ / span;
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::t_msg_ne: return "t_msg_ne";
    case Metric::t_key: return "t_key";
    case Metric::t_msg_km: return "t_msg_km";
    case Metric::n_msg_km: return "n_msg_km";
  }
  return "?";
}

std::optional<double> NodeMetrics::get(Metric m) const {
  switch (m) {
    case Metric::t_msg_ne: return t_msg_ne.mean();
    case Metric::t_key: return t_key.mean();
    case Metric::t_msg_km: return t_msg_km.mean();
    case Metric::n_msg_km: return n_msg_km;
  }
  return std::nullopt;
}

std::optional<double> RunMetrics::get(Metric m) const {
  switch (m) {
    case Metric::t_msg_ne: return t_msg_ne;
    case Metric::t_key: return t_key;
    case Metric::t_msg_km: return t_msg_km;
    case Metric::n_msg_km: return n_msg_km;
  }
  return std::nullopt;
}

std::optional<std::pair<double, double>> RunMetrics::node_range(Metric m) const {
  std::optional<std::pair<double, double>> r;
  for (const auto& n : nodes) {
    const auto v = n.get(m);
    if (!v) continue;
    if (!r) {
      r = std::pair{*v, *v};
    } else {
      r->first = std::min(r->first, *v);
      r->second = std::max(r->second, *v);
    }
  }
  return r;
}

RunMetrics aggregate(std::vector<NodeMetrics> nodes) {
  RunMetrics out;
  out.nodes = std::move(nodes);
  for (Metric m : kAllMetrics) {
    Accumulator acc;
    for (const auto& n : out.nodes) {
      if (auto v = n.get(m)) acc.add(*v);
    }
    const auto v = acc.mean();
    switch (m) {
      case Metric::t_msg_ne: out.t_msg_ne = v; break;
      case Metric::t_key: out.t_key = v; break;
      case Metric::t_msg_km: out.t_msg_km = v; break;
      case Metric::n_msg_km: out.n_msg_km = v; break;
    }
  }
  return out;
}

RunMetrics average_runs(const std::vector<RunMetrics>& runs) {
  RunMetrics out;
  for (Metric m : kAllMetrics) {
    Accumulator acc;
    for (const auto& r : runs) {
      if (auto v = r.get(m)) acc.add(*v);
    }
    const auto v = acc.mean();
    switch (m) {
      case Metric::t_msg_ne: out.t_msg_ne = v; break;
      case Metric::t_key: out.t_key = v; break;
      case Metric::t_msg_km: out.t_msg_km = v; break;
      case Metric::n_msg_km: out.n_msg_km = v; break;
    }
  }
  // Per-node latency samples are pooled and queue averages averaged when
  // every run has the same node set, as seed repetitions of one config do.
  if (!runs.empty()) {
    out.nodes = runs.front().nodes;
    bool same = true;
    for (const auto& r : runs) same = same && r.nodes.size() == out.nodes.size();
    if (same && runs.size() > 1) {
      for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        NodeMetrics& n = out.nodes[i];
        Accumulator q;
        Accumulator cm;
        for (std::size_t k = 1; k < runs.size(); ++k) {
          const NodeMetrics& o = runs[k].nodes[i];
          n.t_msg_ne.add_many(o.t_msg_ne.sum, o.t_msg_ne.count);
          n.t_key.add_many(o.t_key.sum, o.t_key.count);
          n.t_msg_km.add_many(o.t_msg_km.sum, o.t_msg_km.count);
        }
        for (const auto& r : runs) {
          if (r.nodes[i].n_msg_km) q.add(*r.nodes[i].n_msg_km);
          if (r.nodes[i].n_cm) cm.add(*r.nodes[i].n_cm);
        }
        n.n_msg_km = q.mean();
        n.n_cm = cm.mean();
      }
    }
  }
  return out;
}

Cutoff detect_cutoff(const std::vector<std::pair<double, std::optional<double>>>& series,
                     double factor) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [rate, v] : series) {
    if (v) pts.emplace_back(rate, *v);
  }
  if (pts.size() < 3) throw ParameterError("cut-off detection needs at least three sweep points");
  std::sort(pts.begin(), pts.end());

  const std::size_t top = (pts.size() + 3) / 4;
  std::vector<double> tail;
  for (std::size_t i = pts.size() - top; i < pts.size(); ++i) tail.push_back(pts[i].second);
  std::sort(tail.begin(), tail.end());
  const std::size_t h = tail.size() / 2;
  const double plateau = tail.size() % 2 == 1 ? tail[h] : 0.5 * (tail[h - 1] + tail[h]);

  Cutoff c;
  c.plateau = plateau;
  c.threshold = factor * plateau;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    if (it->second > c.threshold) {
      c.kps = it->first;
      break;
    }
  }
  if (c.kps) {
    for (const auto& [rate, v] : pts) {
      if (rate < *c.kps && !(v > c.threshold)) c.low_confidence = true;
    }
  }
  return c;
}

Cutoff detect_cutoff(const SweepResult& sweep, Metric m, double factor) {
  std::vector<std::pair<double, std::optional<double>>> series;
  for (const auto& p : sweep.points) series.emplace_back(p.key_rate, p.metrics.get(m));
  return detect_cutoff(series, factor);
}

}  // namespace qkdn
