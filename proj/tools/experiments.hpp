#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "config.hpp"
#include "run_output.hpp"

namespace sbm::cli {

using Job = std::function<void(RunOutput&)>;

std::span<const std::string_view> experiment_names();

/// Reads and validates every parameter the experiment uses (domain, process,
/// path settings, experiment keys) and returns the simulation job. Throws
/// ConfigError before any simulation starts.
Job plan_experiment(const std::string& name, const Config& cfg);

}  // namespace sbm::cli
