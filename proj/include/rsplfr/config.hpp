#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsplfr/analysis.hpp"
#include "rsplfr/audit.hpp"
#include "rsplfr/pda.hpp"
#include "rsplfr/protocol.hpp"
#include "rsplfr/sim.hpp"

namespace rsplfr::config {

using nlohmann::json;

/// Bad or missing configuration; the message names the field.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Parsed config file. Server indices in JSON are 1-based.
struct Config {
    protocol::SystemParams params;
    std::uint64_t seed = 1;
    std::optional<pda::Pda> pda;

    std::optional<std::vector<ff::FieldVector>> demands;
    std::size_t demand_samples = 1;
    bool zero_library = false;
    std::vector<std::size_t> adversaries;  // 0-based after parsing
    protocol::AdversaryStrategy strategy = protocol::ZeroPayload{};
    std::vector<std::size_t> delivery;     // 0-based after parsing
    bool sweep_delivery = true, sweep_adversaries = true, sweep_strategies = true;
    std::size_t extra_adversaries = 0;
    std::size_t max_runs = 2'000'000;
    std::size_t grid = 200;

    /// The PDA, or ConfigError when the config has none.
    const pda::Pda& require_pda() const;
    sim::Scenario scenario() const;
};

/// `base` resolves a relative "pda" path. RSPLFR_SEED, when set, replaces "seed".
Config parse_config(const json& j, const std::filesystem::path& base = {});
Config load_config(const std::filesystem::path& path);

protocol::AdversaryStrategy parse_strategy(const json& j);

json msc_json(const Rational& M, const Rational& T, const Rational& R, std::size_t subpacketization);
json to_json(const sim::Witness& w);
json to_json(const sim::RunResult& r);
/// Stores and caches, for traces.
json to_json(const sim::Deployment& d);
json to_json(const sim::SweepResult& r);
json to_json(const audit::AuditReport& r);
json params_json(const Config& c);

}  // namespace rsplfr::config
