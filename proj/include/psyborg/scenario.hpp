#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace psyborg {

struct IntRange {
  int min = 0;
  int max = 0;
};

struct RealRange {
  double min = 0.0;
  double max = 0.0;
};

/// Timed credential-file injection on each subnet's first server host.
struct TriggerConfig {
  bool enabled = false;
  int fire_step = 200;
  double fake_fraction = 0.2;
  int payload_size = 10;     // credential files per target host
  int lure_files = 500;      // high-value, high-difficulty files created at init
  RealRange lure_value{8.0, 10.0};
  RealRange lure_hardness{0.95, 0.99};
  bool workstations = false;  // place the payload on the first user host instead
};

/// Knobs of the default red policy that the behavioral model leaves open.
struct PolicyConfig {
  double exploit_success = 0.9;
  double escalate_success = 0.9;
  double noise_probability = 0.05;  // decoy detection in K, degrade/impact in R*
  int rediscovery_interval = 50;    // steps between files discoveries on a host
};

struct ScenarioConfig {
  int subnets = 1;
  IntRange user_hosts{3, 10};
  IntRange server_hosts{1, 6};
  IntRange services_per_host{5, 10};
  int files_per_host = 30;
  double protected_fraction = 0.5;
  RealRange file_value{1.0, 10.0};
  RealRange file_hardness{0.1, 0.9};
  double credential_probability = 0.1;
  IntRange credential_mappings{3, 5};
  IntRange decoy_credentials_per_host{3, 6};
  int horizon = 600;
  double green_rate = 0.5;
  PolicyConfig policy;
  TriggerConfig trigger;
  std::uint64_t seed = 0;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

/// Canonical JSON (sorted keys, schema_version header).
std::string scenario_to_json(const ScenarioConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ScenarioConfig scenario_from_json(std::string_view text);
ScenarioConfig load_scenario(const std::string& path);

/// Stable 64-bit FNV-1a digest of the canonical JSON, as 16 hex digits.
std::string scenario_hash(const ScenarioConfig& cfg);

}  // namespace psyborg
