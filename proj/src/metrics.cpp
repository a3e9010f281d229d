#include "seisop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "seisop/error.hpp"

namespace seisop::metrics {

namespace {

void check_pairs(std::span<const Trajectory> preds, std::span<const Trajectory> targets, const char* what) {
  if (preds.empty()) throw InvalidArgument(std::string(what) + ": no records");
  if (preds.size() != targets.size()) throw InvalidArgument(std::string(what) + ": record counts differ");
  for (std::size_t j = 0; j < preds.size(); ++j) {
    if (preds[j].channels() != preds[0].channels() || targets[j].channels() != preds[0].channels() ||
        preds[j].steps() != targets[j].steps()) {
      throw InvalidArgument(std::string(what) + ": shape mismatch at record " + std::to_string(j));
    }
  }
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

}  // namespace

std::vector<double> rmse(std::span<const Trajectory> preds, std::span<const Trajectory> targets) {
  check_pairs(preds, targets, "rmse");
  const std::size_t nd = preds[0].channels();
  std::vector<double> sum(nd, 0.0);
  std::size_t count = 0;
  for (std::size_t j = 0; j < preds.size(); ++j) {
    for (std::size_t i = 0; i < nd; ++i) {
      const auto p = preds[j].channel(i);
      const auto t = targets[j].channel(i);
      for (std::size_t k = 0; k < p.size(); ++k) sum[i] += (p[k] - t[k]) * (p[k] - t[k]);
    }
    count += preds[j].steps();
  }
  for (double& s : sum) s = std::sqrt(s / static_cast<double>(count));
  return sum;
}

std::vector<double> relative_l2(std::span<const Trajectory> preds, std::span<const Trajectory> targets) {
  check_pairs(preds, targets, "relative_l2");
  const std::size_t nd = preds[0].channels();
  std::vector<double> num_sq(nd, 0.0), den_sq(nd, 0.0);
  for (std::size_t j = 0; j < preds.size(); ++j) {
    for (std::size_t i = 0; i < nd; ++i) {
      const auto p = preds[j].channel(i);
      const auto t = targets[j].channel(i);
      for (std::size_t k = 0; k < p.size(); ++k) {
        num_sq[i] += (p[k] - t[k]) * (p[k] - t[k]);
        den_sq[i] += t[k] * t[k];
      }
    }
  }
  std::vector<double> out(nd);
  for (std::size_t i = 0; i < nd; ++i) {
    if (!(den_sq[i] > 0.0)) {
      throw InvalidArgument("relative_l2: target channel " + std::to_string(i) + " has zero energy");
    }
    out[i] = std::sqrt(num_sq[i]) / std::sqrt(den_sq[i]);
  }
  return out;
}

std::vector<std::vector<double>> peak_distribution(std::span<const Trajectory> trajectories) {
  if (trajectories.empty()) throw InvalidArgument("peak_distribution: no records");
  const std::size_t nd = trajectories[0].channels();
  std::vector<std::vector<double>> peaks(nd, std::vector<double>(trajectories.size(), 0.0));
  for (std::size_t j = 0; j < trajectories.size(); ++j) {
    if (trajectories[j].channels() != nd) {
      throw InvalidArgument("peak_distribution: channel count differs at record " + std::to_string(j));
    }
    for (std::size_t i = 0; i < nd; ++i) {
      double m = 0.0;
      for (double v : trajectories[j].channel(i)) m = std::max(m, std::abs(v));
      peaks[i][j] = m;
    }
  }
  return peaks;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_statistic: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

MetricReport evaluate(std::string model, std::uint64_t seed, std::span<const Trajectory> preds,
                      std::span<const Trajectory> targets) {
  MetricReport r;
  r.model = std::move(model);
  r.seed = seed;
  r.rmse = rmse(preds, targets);
  r.relative_l2 = relative_l2(preds, targets);
  r.n_records = preds.size();
  r.n_steps = preds[0].steps();
  return r;
}

std::vector<AggregateRow> assemble_report(std::span<const MetricReport> runs) {
  std::vector<AggregateRow> rows;
  for (const MetricReport& run : runs) {
    if (run.rmse.size() != run.relative_l2.size() || (run.sigma && run.sigma->size() != run.rmse.size())) {
      throw InvalidArgument("assemble_report: inconsistent DOF counts in run of '" + run.model + "'");
    }
    auto it = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& r) { return r.model == run.model; });
    if (it == rows.end()) {
      AggregateRow r;
      r.model = run.model;
      r.n_records = run.n_records;
      r.n_steps = run.n_steps;
      r.rmse.assign(run.rmse.size(), 0.0);
      r.relative_l2.assign(run.rmse.size(), 0.0);
      if (run.sigma) r.sigma = std::vector<double>(run.rmse.size(), 0.0);
      rows.push_back(std::move(r));
      it = rows.end() - 1;
    }
    if (it->n_records != run.n_records || it->n_steps != run.n_steps || it->rmse.size() != run.rmse.size() ||
        it->sigma.has_value() != run.sigma.has_value()) {
      throw InvalidArgument("assemble_report: runs of '" + run.model + "' use different configurations");
    }
    ++it->runs;
    for (std::size_t i = 0; i < run.rmse.size(); ++i) {
      it->rmse[i] += run.rmse[i];
      it->relative_l2[i] += run.relative_l2[i];
      if (run.sigma) (*it->sigma)[i] += (*run.sigma)[i];
    }
  }
  for (AggregateRow& r : rows) {
    const double n = static_cast<double>(r.runs);
    for (double& v : r.rmse) v /= n;
    for (double& v : r.relative_l2) v /= n;
    if (r.sigma) {
      for (double& v : *r.sigma) v /= n;
    }
  }
  return rows;
}

std::string report_csv(std::span<const AggregateRow> rows) {
  const bool with_sigma = std::any_of(rows.begin(), rows.end(), [](const AggregateRow& r) { return r.sigma; });
  std::string out = with_sigma ? "model,story,rmse,relative_l2,sigma,runs\n" : "model,story,rmse,relative_l2,runs\n";
  for (const AggregateRow& r : rows) {
    for (std::size_t i = 0; i < r.rmse.size(); ++i) {
      out += r.model + "," + std::to_string(i + 1) + "," + num(r.rmse[i]) + "," + num(r.relative_l2[i]) + ",";
      if (with_sigma) out += (r.sigma ? num((*r.sigma)[i]) : std::string()) + ",";
      out += std::to_string(r.runs) + "\n";
    }
  }
  return out;
}

std::string report_json(std::span<const AggregateRow> rows) {
  nlohmann::ordered_json models = nlohmann::ordered_json::array();
  for (const AggregateRow& r : rows) {
    nlohmann::ordered_json m;
    m["model"] = r.model;
    m["runs"] = r.runs;
    m["n_records"] = r.n_records;
    m["n_steps"] = r.n_steps;
    m["rmse"] = r.rmse;
    m["relative_l2"] = r.relative_l2;
    if (r.sigma) m["sigma"] = *r.sigma;
    models.push_back(std::move(m));
  }
  nlohmann::ordered_json doc;
  doc["models"] = std::move(models);
  return doc.dump(2) + "\n";
}

}  // namespace seisop::metrics
