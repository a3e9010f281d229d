#include "seisop/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "seisop/error.hpp"

namespace seisop {

using nlohmann::json;
using nlohmann::ordered_json;

neuralop::FnoConfig NetworkConfig::fno(std::size_t in_channels, std::size_t out_channels) const {
  neuralop::FnoConfig c;
  c.in_channels = in_channels;
  c.out_channels = out_channels;
  c.width = width;
  c.n_layers = layers;
  c.n_modes = modes;
  c.proj_hidden = projection_hidden;
  c.activation = activation;
  c.pad_fraction = pad_fraction;
  return c;
}

double TrainingConfig::rate_at(std::size_t epoch) const {
  return learning_rate * std::pow(decay, static_cast<double>(epoch / decay_every));
}

void ExperimentConfig::validate() const {
  model.validate();
  excitation.validate();
  simplifier.validate(model.n_dof());
  if (substeps < 1) throw InvalidArgument("config.integration.substeps: must be >= 1");
  network.fno(2, model.n_dof()).validate();
  if (training.batch < 1) throw InvalidArgument("config.training.batch: must be >= 1");
  if (training.epochs < 1) throw InvalidArgument("config.training.epochs: must be >= 1");
  if (!(training.learning_rate > 0.0)) throw InvalidArgument("config.training.learning_rate: must be > 0");
  if (!(training.decay > 0.0 && training.decay <= 1.0)) throw InvalidArgument("config.training.decay: must lie in (0, 1]");
  if (training.decay_every < 1) throw InvalidArgument("config.training.decay_every: must be >= 1");
  if (splits.train < 1) throw InvalidArgument("config.splits.train: must be >= 1");
  if (refinement_samples < 3) throw InvalidArgument("config.refinement.sample_count: must be >= 3");
  if (network.modes > excitation.grid.size() / 2 + 1) {
    throw InvalidArgument("config.network.modes: exceeds floor(n_t/2)+1 = " +
                          std::to_string(excitation.grid.size() / 2 + 1));
  }
}

ExperimentConfig ExperimentConfig::full() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::desk() {
  ExperimentConfig c;
  c.excitation.grid = TimeGrid(0.02, 1501);
  c.substeps = 4;
  c.network.width = 32;
  c.network.layers = 4;
  c.network.modes = 16;
  c.training.epochs = 150;
  c.splits = {100, 25, 50};
  return c;
}

namespace {

// Strict reader over one JSON object: every key must be consumed.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }
  ~Node() = default;

  [[noreturn]] void fail(const std::string& msg) const { throw InvalidArgument(path_ + ": " + msg); }

  bool has(const char* key) const { return j_.contains(key); }
  std::string child_path(const char* key) const { return path_ + "." + key; }

  const json* get(const char* key) {
    seen_.push_back(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) throw InvalidArgument(child_path(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void count(const char* key, std::size_t& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
        throw InvalidArgument(child_path(key) + ": expected a non-negative integer");
      }
      out = v->get<std::size_t>();
    }
  }
  void u64(const char* key, std::uint64_t& out) {
    std::size_t v = out;
    count(key, v);
    out = v;
  }
  void text(const char* key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) throw InvalidArgument(child_path(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  // Scalar broadcast to n entries, or an array of exactly n numbers.
  void per_story(const char* key, std::vector<double>& out, std::size_t n) {
    const json* v = get(key);
    if (!v) {
      if (out.size() != n) out.assign(n, out.empty() ? 0.0 : out.front());
      return;
    }
    if (v->is_number()) {
      out.assign(n, v->get<double>());
    } else if (v->is_array()) {
      if (v->size() != n) {
        throw InvalidArgument(child_path(key) + ": expected " + std::to_string(n) + " entries, got " +
                              std::to_string(v->size()));
      }
      out.clear();
      for (std::size_t i = 0; i < n; ++i) {
        if (!(*v)[i].is_number()) {
          throw InvalidArgument(child_path(key) + "[" + std::to_string(i) + "]: expected a number");
        }
        out.push_back((*v)[i].get<double>());
      }
    } else {
      throw InvalidArgument(child_path(key) + ": expected a number or an array of numbers");
    }
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        throw InvalidArgument(path_ + "." + it.key() + ": unknown key");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

void parse_model(const json& j, ExperimentConfig& c) {
  Node n(j, "config.model");
  std::size_t stories = c.model.n_dof();
  n.count("stories", stories);
  if (stories < 1) n.fail("stories must be >= 1");
  n.per_story("masses", c.model.masses, stories);
  n.per_story("stiffnesses", c.model.stiffnesses, stories);
  n.number("damping_ratio", c.model.damping_ratio);
  if (const json* h = n.get("hysteresis")) {
    Node hn(*h, "config.model.hysteresis");
    auto& bw = c.model.hysteresis;
    double alpha = bw.alpha, n_exp = bw.n_exp, a = bw.A, u_y = bw.u_y;
    hn.number("alpha", alpha);
    hn.number("n", n_exp);
    hn.number("A", a);
    hn.number("u_y", u_y);
    if (!(u_y > 0.0)) throw InvalidArgument("config.model.hysteresis.u_y: must be > 0");
    if (!(n_exp >= 1.0)) throw InvalidArgument("config.model.hysteresis.n: must be >= 1");
    bw = dynamics::BoucWenParams::with_yield(u_y, alpha, n_exp, a);
    hn.number("delta", bw.delta);
    hn.number("zeta", bw.zeta);
    hn.done();
  }
  n.done();
}

void parse_excitation(const json& j, ExperimentConfig& c) {
  Node n(j, "config.excitation");
  auto& e = c.excitation;
  n.number("intensity", e.intensity);
  n.count("n_terms", e.n_terms);
  n.number("d_omega", e.d_omega);
  double dt = e.grid.dt();
  double duration = e.grid.duration();
  n.number("dt", dt);
  n.number("duration", duration);
  n.done();
  if (!(e.intensity > 0.0)) throw InvalidArgument("config.excitation.intensity: must be > 0");
  if (e.n_terms < 2 || e.n_terms % 2) throw InvalidArgument("config.excitation.n_terms: must be even and >= 2");
  if (!(e.d_omega > 0.0)) throw InvalidArgument("config.excitation.d_omega: must be > 0");
  if (!(dt > 0.0)) throw InvalidArgument("config.excitation.dt: must be > 0");
  if (!(duration > 0.0)) throw InvalidArgument("config.excitation.duration: must be > 0");
  const double steps = duration / dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-6 * std::max(1.0, steps)) {
    throw InvalidArgument("config.excitation.duration: must be a whole number of dt steps");
  }
  e.grid = TimeGrid(dt, static_cast<std::size_t>(rounded) + 1);
}

void parse_simplifier(const json& j, ExperimentConfig& c) {
  Node n(j, "config.simplifier");
  std::string kind = c.simplifier.to_string();
  if (auto colon = kind.find(':'); colon != std::string::npos) kind.resize(colon);
  n.text("kind", kind);
  std::size_t r = 2, k = 30;
  if (c.simplifier.kind == simplify::Kind::Modal) r = c.simplifier.param;
  if (c.simplifier.kind == simplify::Kind::Relaxed) k = c.simplifier.param;
  n.count("r", r);
  n.count("k", k);
  n.done();
  if (kind == "none") c.simplifier = simplify::SimplifierKind::none();
  else if (kind == "els") c.simplifier = simplify::SimplifierKind::els();
  else if (kind == "modal") c.simplifier = simplify::SimplifierKind::modal(r);
  else if (kind == "relaxed") c.simplifier = simplify::SimplifierKind::relaxed(k);
  else throw InvalidArgument("config.simplifier.kind: expected none, els, modal or relaxed, got '" + kind + "'");
}

void parse_network(const json& j, ExperimentConfig& c) {
  Node n(j, "config.network");
  auto& w = c.network;
  n.count("width", w.width);
  n.count("layers", w.layers);
  n.count("modes", w.modes);
  n.count("projection_hidden", w.projection_hidden);
  std::string act = neuralop::to_string(w.activation);
  n.text("activation", act);
  n.number("pad_fraction", w.pad_fraction);
  n.done();
  try {
    w.activation = neuralop::parse_activation(act);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(std::string("config.network.") + e.what());
  }
}

void parse_training(const json& j, ExperimentConfig& c) {
  Node n(j, "config.training");
  auto& t = c.training;
  n.count("batch", t.batch);
  n.count("epochs", t.epochs);
  n.number("learning_rate", t.learning_rate);
  n.number("decay", t.decay);
  n.count("decay_every", t.decay_every);
  n.done();
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: not valid JSON: ") + e.what());
  }
  Node root(doc, "config");
  std::string preset = "full";
  root.text("preset", preset);
  ExperimentConfig c;
  if (preset == "desk") c = ExperimentConfig::desk();
  else if (preset != "full") throw InvalidArgument("config.preset: expected 'full' or 'desk', got '" + preset + "'");

  if (const json* v = root.get("model")) parse_model(*v, c);
  if (const json* v = root.get("integration")) {
    Node n(*v, "config.integration");
    n.count("substeps", c.substeps);
    n.done();
  }
  if (const json* v = root.get("excitation")) parse_excitation(*v, c);
  if (const json* v = root.get("simplifier")) parse_simplifier(*v, c);
  if (const json* v = root.get("network")) parse_network(*v, c);
  if (const json* v = root.get("training")) parse_training(*v, c);
  if (const json* v = root.get("splits")) {
    Node n(*v, "config.splits");
    n.count("train", c.splits.train);
    n.count("validation", c.splits.validation);
    n.count("test", c.splits.test);
    n.done();
  }
  root.u64("seed", c.seed);
  if (const json* v = root.get("refinement")) {
    Node n(*v, "config.refinement");
    n.count("sample_count", c.refinement_samples);
    n.done();
  }
  root.text("output_dir", c.output_dir);
  root.done();
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    throw InvalidArgument(msg.starts_with("config.") ? msg : "config." + msg);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

ordered_json physics_json(const ExperimentConfig& c) {
  ordered_json j;
  const auto& m = c.model;
  const auto& bw = m.hysteresis;
  j["model"] = {{"stories", m.n_dof()},
                {"masses", m.masses},
                {"stiffnesses", m.stiffnesses},
                {"damping_ratio", m.damping_ratio},
                {"hysteresis",
                 {{"alpha", bw.alpha}, {"n", bw.n_exp}, {"A", bw.A}, {"u_y", bw.u_y}, {"delta", bw.delta},
                  {"zeta", bw.zeta}}}};
  j["integration"] = {{"substeps", c.substeps}};
  const auto& e = c.excitation;
  j["excitation"] = {{"intensity", e.intensity},
                     {"n_terms", e.n_terms},
                     {"d_omega", e.d_omega},
                     {"dt", e.grid.dt()},
                     {"duration", e.grid.duration()}};
  return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& c, int indent) {
  ordered_json j = physics_json(c);
  ordered_json s;
  switch (c.simplifier.kind) {
    case simplify::Kind::None: s = {{"kind", "none"}}; break;
    case simplify::Kind::ELS: s = {{"kind", "els"}}; break;
    case simplify::Kind::Modal: s = {{"kind", "modal"}, {"r", c.simplifier.param}}; break;
    case simplify::Kind::Relaxed: s = {{"kind", "relaxed"}, {"k", c.simplifier.param}}; break;
  }
  j["simplifier"] = s;
  const auto& w = c.network;
  j["network"] = {{"width", w.width},
                  {"layers", w.layers},
                  {"modes", w.modes},
                  {"projection_hidden", w.projection_hidden},
                  {"activation", neuralop::to_string(w.activation)},
                  {"pad_fraction", w.pad_fraction}};
  const auto& t = c.training;
  j["training"] = {{"batch", t.batch},
                   {"epochs", t.epochs},
                   {"learning_rate", t.learning_rate},
                   {"decay", t.decay},
                   {"decay_every", t.decay_every}};
  j["splits"] = {{"train", c.splits.train}, {"validation", c.splits.validation}, {"test", c.splits.test}};
  j["seed"] = c.seed;
  j["refinement"] = {{"sample_count", c.refinement_samples}};
  j["output_dir"] = c.output_dir;
  return j.dump(indent);
}

std::uint64_t physics_hash(const ExperimentConfig& c) {
  const std::string s = physics_json(c).dump();
  return fnv1a(s.data(), s.size());
}

}  // namespace seisop
