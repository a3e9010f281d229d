#include "seisop/refine.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "seisop/error.hpp"
#include "seisop/linalg.hpp"

namespace seisop::refine {

namespace {

void check_sets(std::span<const Trajectory> z, std::span<const Trajectory> u_hat, std::span<const Trajectory> u) {
  if (u.empty()) throw InvalidArgument("fit_refinement: empty training set");
  if (z.size() != u.size() || u_hat.size() != u.size()) {
    throw InvalidArgument("fit_refinement: z, u_hat and u must have the same record count");
  }
  for (std::size_t j = 0; j < u.size(); ++j) {
    const std::size_t nd = u[0].channels(), nt = u[0].steps();
    for (const Trajectory* t : {&z[j], &u_hat[j], &u[j]}) {
      if (t->channels() != nd || t->steps() != nt) {
        throw InvalidArgument("fit_refinement: shape mismatch at record " + std::to_string(j));
      }
    }
  }
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t n_records, std::size_t n_steps,
                                                              std::size_t count, std::uint64_t seed) {
  RngStream rng = RngStream(seed).split("regression");
  std::vector<std::pair<std::size_t, std::size_t>> pairs(count);
  for (auto& [rec, step] : pairs) {
    rec = rng.index(n_records);
    step = rng.index(n_steps);
  }
  return pairs;
}

RefinementModel fit_refinement(std::span<const Trajectory> z, std::span<const Trajectory> u_hat,
                               std::span<const Trajectory> u, std::size_t sample_count, std::uint64_t seed) {
  check_sets(z, u_hat, u);
  if (sample_count < 3) throw InvalidArgument("fit_refinement: sample_count must be >= 3");
  const std::size_t nd = u[0].channels();
  const auto pairs = sample_pairs(u.size(), u[0].steps(), sample_count, seed);
  const auto m = static_cast<Eigen::Index>(sample_count);

  RefinementModel model;
  model.sample_count = sample_count;
  model.seed = seed;
  Eigen::MatrixXd x(m, 3);
  Eigen::VectorXd y(m);
  for (std::size_t i = 0; i < nd; ++i) {
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto [rec, step] = pairs[static_cast<std::size_t>(r)];
      x(r, 0) = 1.0;
      x(r, 1) = z[rec](i, step);
      x(r, 2) = u_hat[rec](i, step);
      y(r) = u[rec](i, step);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    Eigen::Vector3d w;
    if (qr.rank() == 3) {
      w = qr.solve(y);
    } else {
      const Eigen::Matrix3d g = x.transpose() * x;
      const double lambda = 1e-8 * g.trace();
      w = (g + lambda * Eigen::Matrix3d::Identity()).ldlt().solve(x.transpose() * y);
      model.ridge = true;
    }
    if (!w.allFinite()) throw NumericError("fit_refinement: non-finite weights for DOF " + std::to_string(i));
    const double ss = (y - x * w).squaredNorm();
    model.weights.push_back({w(0), w(1), w(2)});
    model.sigma.push_back(std::sqrt(ss / static_cast<double>(m)));
  }
  return model;
}

RefinedPrediction refine_predict(const RefinementModel& model, const Trajectory& z, const Trajectory& u_hat) {
  if (z.channels() != model.n_dof() || u_hat.channels() != model.n_dof() || z.steps() != u_hat.steps()) {
    throw InvalidArgument("refine_predict: z and u_hat must have " + std::to_string(model.n_dof()) +
                          " channels of equal length");
  }
  RefinedPrediction out{Trajectory(u_hat.grid(), model.n_dof()), model.sigma};
  for (std::size_t i = 0; i < model.n_dof(); ++i) {
    const auto& w = model.weights[i];
    const auto zc = z.channel(i);
    const auto uc = u_hat.channel(i);
    auto mc = out.mean.channel(i);
    for (std::size_t k = 0; k < mc.size(); ++k) mc[k] = w[0] + w[1] * zc[k] + w[2] * uc[k];
  }
  return out;
}

std::string to_json(const RefinementModel& model) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["weights"] = model.weights;
  j["sigma"] = model.sigma;
  j["sample_count"] = model.sample_count;
  j["seed"] = model.seed;
  j["ridge"] = model.ridge;
  return j.dump();
}

RefinementModel from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1) throw FormatError("refinement block: unsupported version");
    RefinementModel m;
    m.weights = j.at("weights").get<std::vector<std::array<double, 3>>>();
    m.sigma = j.at("sigma").get<std::vector<double>>();
    m.sample_count = j.at("sample_count").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.ridge = j.value("ridge", false);
    if (m.weights.size() != m.sigma.size()) throw FormatError("refinement block: weights/sigma length mismatch");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("refinement block: ") + e.what());
  }
}

}  // namespace seisop::refine
