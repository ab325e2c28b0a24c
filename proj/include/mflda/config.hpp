#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include <json.hpp>

#include "mflda/errors.hpp"
#include "mflda/particle_sim.hpp"

namespace mflda {

/// A configuration problem tied to one `section.key` field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& why)
      : Error(field + ": " + why), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  SimConfig sim;
  ClassifierConfig classifier;
};

/// Parses a sectioned `key = value` file:
///
///   [model]       alpha, eps
///   [init]        kind (gaussian | dirac), mean_x, mean_y, var (gaussian)
///   [sim]         N, dt, t_end, seed, record_stride, k_max,
///                 snapshot_times (comma list), threads
///   [classifier]  window, osc_threshold, conv_threshold, drift_threshold
///
/// model.*, init.kind/mean_x/mean_y and sim.N/dt/t_end/seed are required.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text);

/// Echo of the effective configuration for manifests.
nlohmann::json to_json(const RunConfig& config);

}  // namespace mflda
