#include "tidal/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tidal/errors.hpp"

namespace tidal::run {

using nlohmann::json;

namespace {

/// Walks one JSON object, remembering which keys were read so leftovers can
/// be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!v->is_number_unsigned()) throw ParseError(key_path(key), "expected a nonnegative integer");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v->is_number_integer()) throw ParseError(key_path(key), "expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ParseError(key_path(key), "expected a number");
      }
      out = v->get<T>();
    } catch (const json::exception& e) {
      throw ParseError(key_path(key), e.what());
    }
  }

  template <class E, class F>
  void get_enum(const std::string& key, E& out, F from_string) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string()) throw ParseError(key_path(key), "expected a string");
    try {
      out = from_string(v->get<std::string>());
    } catch (const InputError& e) {
      throw ParseError(key_path(key), e.what());
    }
  }

  Section child(const std::string& key, const json& empty) {
    const json* v = find(key);
    return Section(v ? *v : empty, key_path(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ParseError(key_path(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Fn>
void with_path(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    throw ParseError(path, e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw InputError("seeds: at least one seed is required");
  dataset.validate();
  al.validate();
  theory.params.validate();
  if (!(theory.dt > 0.0)) throw InputError("theory: dt must be > 0");
  if (!(theory.t_end > 0.0)) throw InputError("theory: t_end must be > 0");
  if (theory.runs == 0) throw InputError("theory: runs must be >= 1");
  for (double s : theory.s_grid) {
    if (!(s > 0.0 && s < 1.0)) throw InputError("theory: s_grid values must lie in (0,1)");
  }
  for (auto c : theory.class_counts) {
    if (c < 2) throw InputError("theory: classes must be >= 2");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("<root>", e.what());
  }
  const json empty = json::object();
  ExperimentConfig cfg;
  Section top(root, "");
  top.get("seeds", cfg.seeds);

  {
    auto d = top.child("dataset", empty);
    auto& ds = cfg.dataset;
    d.get_enum("generator", ds.generator, data::generator_from_string);
    d.get("classes", ds.n_classes);
    d.get("dim", ds.dim);
    d.get("per_class", ds.per_class);
    d.get("radius", ds.radius);
    d.get("noise", ds.noise);
    d.get("test_fraction", ds.test_fraction);
    d.get("balanced_test", ds.balanced_test);
    d.get("path", ds.path);
    d.get("seed", ds.seed);
    auto im = d.child("imbalance", empty);
    im.get("ratio", ds.imbalance.ratio);
    im.get_enum("profile", ds.imbalance.profile, data::profile_from_string);
    im.get("minor_classes", ds.imbalance.minor_classes);
    im.finish();
    d.finish();
    if (ds.generator == data::Generator::concentric_rings && !d.find("dim")) ds.dim = 2;
    with_path("dataset", [&] { ds.validate(); });
  }
  {
    auto n = top.child("net", empty);
    n.get("hidden_sizes", cfg.al.net.hidden_sizes);
    n.get("tap_layers", cfg.al.net.tap_layers);
    n.get_enum("activation", cfg.al.net.activation, net::activation_from_string);
    n.finish();
    with_path("net", [&] { cfg.al.net.for_data(1, 2, 0); });
  }
  {
    auto t = top.child("train", empty);
    auto& tr = cfg.al.train;
    t.get("epochs", tr.epochs);
    t.get("batch_size", tr.batch_size);
    t.get("lambda", tr.lambda);
    t.get("detach", tr.detach);
    t.get_enum("record", tr.record, al::record_mode_from_string);
    t.get("head_dim", tr.head_dim);
    auto o = t.child("optimizer", empty);
    auto& op = tr.optimizer;
    o.get_enum("kind", op.kind, net::optimizer_kind_from_string);
    o.get("lr", op.initial_lr);
    o.get("momentum", op.momentum);
    o.get("weight_decay", op.weight_decay);
    o.get("beta1", op.beta1);
    o.get("beta2", op.beta2);
    o.get("epsilon", op.epsilon);
    o.get("decay_epoch", op.decay_epoch);
    o.get("decay_factor", op.decay_factor);
    o.finish();
    t.finish();
    with_path("train", [&] { tr.validate(); });
  }
  {
    auto a = top.child("al", empty);
    a.get("initial_labeled", cfg.al.initial_labeled);
    a.get("budget", cfg.al.budget);
    a.get("cycles", cfg.al.n_cycles);
    a.get("subset_size", cfg.al.subset_size);
    a.get_enum("strategy", cfg.al.strategy, est::strategy_from_string);
    a.finish();
    with_path("al", [&] { cfg.al.validate(); });
  }
  {
    auto t = top.child("theory", empty);
    auto& th = cfg.theory;
    auto& p = th.params;
    t.get("n_1e", p.n_1e);
    t.get("n_1h", p.n_1h);
    t.get("n_2", p.n_2);
    t.get("alpha_e", p.alpha_e);
    t.get("alpha_h", p.alpha_h);
    t.get("beta", p.beta);
    t.get("h", p.h);
    t.get("sigma", p.sigma);
    t.get("x0", p.x0);
    t.get("steps", p.steps);
    t.get("dt", th.dt);
    t.get("t_end", th.t_end);
    t.get("runs", th.runs);
    t.get("s_grid", th.s_grid);
    t.get("classes", th.class_counts);
    t.finish();
  }
  top.finish();
  with_path("theory", [&] { cfg.theory.params.validate(); });
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  const auto& ds = cfg.dataset;
  const auto& tr = cfg.al.train;
  const auto& op = tr.optimizer;
  const auto& th = cfg.theory;
  const auto& p = th.params;
  json j;
  j["seeds"] = cfg.seeds;
  j["dataset"] = {
      {"generator", data::to_string(ds.generator)},
      {"classes", ds.n_classes},
      {"dim", ds.dim},
      {"per_class", ds.per_class},
      {"radius", ds.radius},
      {"noise", ds.noise},
      {"test_fraction", ds.test_fraction},
      {"balanced_test", ds.balanced_test},
      {"path", ds.path},
      {"seed", ds.seed},
      {"imbalance",
       {{"ratio", ds.imbalance.ratio},
        {"profile", data::to_string(ds.imbalance.profile)},
        {"minor_classes", ds.imbalance.minor_classes}}},
  };
  j["net"] = {
      {"hidden_sizes", cfg.al.net.hidden_sizes},
      {"tap_layers", cfg.al.net.tap_layers},
      {"activation", net::to_string(cfg.al.net.activation)},
  };
  j["train"] = {
      {"epochs", tr.epochs},
      {"batch_size", tr.batch_size},
      {"lambda", tr.lambda},
      {"detach", tr.detach},
      {"record", al::to_string(tr.record)},
      {"head_dim", tr.head_dim},
      {"optimizer",
       {{"kind", net::to_string(op.kind)},
        {"lr", op.initial_lr},
        {"momentum", op.momentum},
        {"weight_decay", op.weight_decay},
        {"beta1", op.beta1},
        {"beta2", op.beta2},
        {"epsilon", op.epsilon},
        {"decay_epoch", op.decay_epoch},
        {"decay_factor", op.decay_factor}}},
  };
  j["al"] = {
      {"initial_labeled", cfg.al.initial_labeled},
      {"budget", cfg.al.budget},
      {"cycles", cfg.al.n_cycles},
      {"subset_size", cfg.al.subset_size},
      {"strategy", est::to_string(cfg.al.strategy)},
  };
  j["theory"] = {
      {"n_1e", p.n_1e},   {"n_1h", p.n_1h},         {"n_2", p.n_2},     {"alpha_e", p.alpha_e},
      {"alpha_h", p.alpha_h}, {"beta", p.beta},     {"h", p.h},         {"sigma", p.sigma},
      {"x0", p.x0},       {"steps", p.steps},       {"dt", th.dt},      {"t_end", th.t_end},
      {"runs", th.runs},  {"s_grid", th.s_grid},    {"classes", th.class_counts},
  };
  return j.dump(2) + "\n";
}

}  // namespace tidal::run
