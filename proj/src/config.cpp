#include "mflda/config.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace mflda {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<std::string> lookup(const pt::ptree& tree, const std::string& key) {
  if (auto v = tree.get_optional<std::string>(key)) return trim(*v);
  return std::nullopt;
}

std::string required(const pt::ptree& tree, const std::string& key) {
  auto v = lookup(tree, key);
  if (!v || v->empty()) throw ConfigError(key, "required field is missing");
  return *v;
}

double to_real(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

std::uint64_t to_count(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError(key, "integer out of range: '" + text + "'");
  }
}

double real_or(const pt::ptree& tree, const std::string& key, double fallback) {
  auto v = lookup(tree, key);
  return v ? to_real(key, *v) : fallback;
}

std::uint64_t count_or(const pt::ptree& tree, const std::string& key, std::uint64_t fallback) {
  auto v = lookup(tree, key);
  return v ? to_count(key, *v) : fallback;
}

RunConfig from_tree(const pt::ptree& tree) {
  RunConfig out;
  SimConfig& sim = out.sim;

  const double alpha = to_real("model.alpha", required(tree, "model.alpha"));
  const double eps = to_real("model.eps", required(tree, "model.eps"));
  try {
    sim.params = Params(alpha, eps);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(alpha < 1.0 ? "model.alpha" : "model.eps", e.what());
  }
  if (eps > 1.0) throw ConfigError("model.eps", "must lie in [0, 1]");

  const std::string kind = required(tree, "init.kind");
  const double mx = to_real("init.mean_x", required(tree, "init.mean_x"));
  const double my = to_real("init.mean_y", required(tree, "init.mean_y"));
  if (kind == "gaussian") {
    const double var = to_real("init.var", required(tree, "init.var"));
    if (!(var >= 0.0)) throw ConfigError("init.var", "must be >= 0");
    sim.init = InitSpec::gaussian(mx, my, var);
  } else if (kind == "dirac") {
    if (real_or(tree, "init.var", 0.0) != 0.0) {
      throw ConfigError("init.var", "must be 0 for a dirac start");
    }
    sim.init = InitSpec::dirac(mx, my);
  } else {
    throw ConfigError("init.kind", "expected 'gaussian' or 'dirac', got '" + kind + "'");
  }

  sim.n = to_count("sim.N", required(tree, "sim.N"));
  if (sim.n == 0) throw ConfigError("sim.N", "must be >= 1");
  sim.dt = to_real("sim.dt", required(tree, "sim.dt"));
  if (!(sim.dt > 0.0)) throw ConfigError("sim.dt", "must be positive");
  sim.t_end = to_real("sim.t_end", required(tree, "sim.t_end"));
  if (!(sim.t_end >= sim.dt)) throw ConfigError("sim.t_end", "must be >= sim.dt");
  sim.seed = to_count("sim.seed", required(tree, "sim.seed"));
  sim.record_stride = count_or(tree, "sim.record_stride", sim.record_stride);
  if (sim.record_stride == 0) throw ConfigError("sim.record_stride", "must be >= 1");
  sim.k_max = static_cast<int>(count_or(tree, "sim.k_max", 4));
  if (sim.k_max < 2 || sim.k_max % 2 != 0) throw ConfigError("sim.k_max", "must be even and >= 2");
  sim.threads = static_cast<int>(count_or(tree, "sim.threads", 0));

  if (auto list = lookup(tree, "sim.snapshot_times")) {
    sim.snapshot_times.clear();
    std::stringstream ss(*list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const double t = to_real("sim.snapshot_times", item);
      if (!(t >= 0.0 && t <= sim.t_end)) {
        throw ConfigError("sim.snapshot_times", "entries must lie in [0, t_end]");
      }
      sim.snapshot_times.push_back(t);
    }
  } else {
    sim.snapshot_times.erase(
        std::remove_if(sim.snapshot_times.begin(), sim.snapshot_times.end(),
                       [&](double t) { return t > sim.t_end; }),
        sim.snapshot_times.end());
  }

  ClassifierConfig& cls = out.classifier;
  cls.window = real_or(tree, "classifier.window", cls.window);
  cls.osc_threshold = real_or(tree, "classifier.osc_threshold", cls.osc_threshold);
  cls.conv_threshold = real_or(tree, "classifier.conv_threshold", cls.conv_threshold);
  cls.drift_threshold = real_or(tree, "classifier.drift_threshold", cls.drift_threshold);
  if (!(cls.window > 0.0)) throw ConfigError("classifier.window", "must be positive");
  return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("<file>", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  return from_tree(tree);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

nlohmann::json to_json(const RunConfig& c) {
  const SimConfig& s = c.sim;
  return {
      {"model", {{"alpha", s.params.alpha()}, {"eps", s.params.eps()}}},
      {"init",
       {{"kind", s.init.kind == InitSpec::Kind::kDirac ? "dirac" : "gaussian"},
        {"mean_x", s.init.mean_x},
        {"mean_y", s.init.mean_y},
        {"var", s.init.var}}},
      {"sim",
       {{"N", s.n},
        {"dt", s.dt},
        {"t_end", s.t_end},
        {"seed", s.seed},
        {"record_stride", s.record_stride},
        {"k_max", s.k_max},
        {"snapshot_times", s.snapshot_times},
        {"threads", s.threads}}},
      {"classifier",
       {{"window", c.classifier.window},
        {"osc_threshold", c.classifier.osc_threshold},
        {"conv_threshold", c.classifier.conv_threshold},
        {"drift_threshold", c.classifier.drift_threshold}}},
  };
}

}  // namespace mflda
