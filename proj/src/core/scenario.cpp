#include "psyborg/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "psyborg/error.hpp"

namespace psyborg {

using nlohmann::json;

namespace {

constexpr int kScenarioSchema = 1;

json range_json(IntRange r) { return json::array({r.min, r.max}); }
json range_json(RealRange r) { return json::array({r.min, r.max}); }

template <typename Range>
Range read_range(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(std::string(key) + ": expected a [min, max] pair");
  Range r;
  j[0].get_to(r.min);
  j[1].get_to(r.max);
  return r;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_range(IntRange r, int floor, const char* what) {
  require(r.min >= floor && r.min <= r.max,
          std::string(what) + ": need " + std::to_string(floor) + " <= min <= max");
}

void check_range(RealRange r, double lo, double hi, const char* what) {
  require(r.min >= lo && r.min <= r.max && r.max <= hi,
          std::string(what) + ": range must be ordered and inside [" + std::to_string(lo) +
              ", " + std::to_string(hi) + "]");
}

void check_probability(double p, const char* what) {
  require(p >= 0.0 && p <= 1.0, std::string(what) + " must lie in [0, 1]");
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const char* section) {
  std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& item : j.items())
    if (!known.contains(item.key()))
      throw ConfigError(std::string("unknown key '") + item.key() + "' in " + section);
}

json to_json(const ScenarioConfig& c) {
  json trigger = {
      {"enabled", c.trigger.enabled},
      {"fire_step", c.trigger.fire_step},
      {"fake_fraction", c.trigger.fake_fraction},
      {"payload_size", c.trigger.payload_size},
      {"lure_files", c.trigger.lure_files},
      {"lure_value", range_json(c.trigger.lure_value)},
      {"lure_hardness", range_json(c.trigger.lure_hardness)},
      {"workstations", c.trigger.workstations},
  };
  json policy = {
      {"exploit_success", c.policy.exploit_success},
      {"escalate_success", c.policy.escalate_success},
      {"noise_probability", c.policy.noise_probability},
      {"rediscovery_interval", c.policy.rediscovery_interval},
  };
  return {
      {"schema_version", kScenarioSchema},
      {"subnets", c.subnets},
      {"user_hosts", range_json(c.user_hosts)},
      {"server_hosts", range_json(c.server_hosts)},
      {"services_per_host", range_json(c.services_per_host)},
      {"files_per_host", c.files_per_host},
      {"protected_fraction", c.protected_fraction},
      {"file_value", range_json(c.file_value)},
      {"file_hardness", range_json(c.file_hardness)},
      {"credential_probability", c.credential_probability},
      {"credential_mappings", range_json(c.credential_mappings)},
      {"decoy_credentials_per_host", range_json(c.decoy_credentials_per_host)},
      {"horizon", c.horizon},
      {"green_rate", c.green_rate},
      {"policy", policy},
      {"trigger", trigger},
      {"seed", c.seed},
  };
}

}  // namespace

void ScenarioConfig::validate() const {
  require(subnets >= 1, "subnets must be >= 1");
  check_range(user_hosts, 0, "user_hosts");
  check_range(server_hosts, 0, "server_hosts");
  require(user_hosts.max + server_hosts.max >= 1, "a subnet needs at least one host");
  check_range(services_per_host, 1, "services_per_host");
  require(files_per_host >= 0, "files_per_host must be >= 0");
  check_probability(protected_fraction, "protected_fraction");
  check_range(file_value, 0.0, 1e12, "file_value");
  check_range(file_hardness, 0.0, 1.0, "file_hardness");
  check_probability(credential_probability, "credential_probability");
  check_range(credential_mappings, 1, "credential_mappings");
  check_range(decoy_credentials_per_host, 0, "decoy_credentials_per_host");
  require(horizon > 0, "horizon must be > 0");
  check_probability(green_rate, "green_rate");
  check_probability(policy.exploit_success, "policy.exploit_success");
  check_probability(policy.escalate_success, "policy.escalate_success");
  check_probability(policy.noise_probability, "policy.noise_probability");
  require(policy.rediscovery_interval >= 1, "policy.rediscovery_interval must be >= 1");
  if (trigger.enabled) {
    require(trigger.fire_step >= 0 && trigger.fire_step < horizon,
            "trigger.fire_step must lie in [0, horizon)");
    check_probability(trigger.fake_fraction, "trigger.fake_fraction");
    require(trigger.payload_size >= 0, "trigger.payload_size must be >= 0");
    require(trigger.lure_files >= 0, "trigger.lure_files must be >= 0");
    check_range(trigger.lure_value, 0.0, 1e12, "trigger.lure_value");
    check_range(trigger.lure_hardness, 0.0, 1.0, "trigger.lure_hardness");
  }
}

std::string scenario_to_json(const ScenarioConfig& cfg) { return to_json(cfg).dump(2); }

ScenarioConfig scenario_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  reject_unknown(j,
                 {"schema_version", "subnets", "user_hosts", "server_hosts",
                  "services_per_host", "files_per_host", "protected_fraction", "file_value",
                  "file_hardness", "credential_probability", "credential_mappings",
                  "decoy_credentials_per_host", "horizon", "green_rate", "policy", "trigger",
                  "seed"},
                 "scenario");
  if (j.contains("schema_version") && j["schema_version"].get<int>() != kScenarioSchema)
    throw ConfigError("unsupported scenario schema_version");

  ScenarioConfig c;
  try {
    if (j.contains("subnets")) j["subnets"].get_to(c.subnets);
    if (j.contains("user_hosts")) c.user_hosts = read_range<IntRange>(j["user_hosts"], "user_hosts");
    if (j.contains("server_hosts"))
      c.server_hosts = read_range<IntRange>(j["server_hosts"], "server_hosts");
    if (j.contains("services_per_host"))
      c.services_per_host = read_range<IntRange>(j["services_per_host"], "services_per_host");
    if (j.contains("files_per_host")) j["files_per_host"].get_to(c.files_per_host);
    if (j.contains("protected_fraction")) j["protected_fraction"].get_to(c.protected_fraction);
    if (j.contains("file_value")) c.file_value = read_range<RealRange>(j["file_value"], "file_value");
    if (j.contains("file_hardness"))
      c.file_hardness = read_range<RealRange>(j["file_hardness"], "file_hardness");
    if (j.contains("credential_probability"))
      j["credential_probability"].get_to(c.credential_probability);
    if (j.contains("credential_mappings"))
      c.credential_mappings = read_range<IntRange>(j["credential_mappings"], "credential_mappings");
    if (j.contains("decoy_credentials_per_host"))
      c.decoy_credentials_per_host =
          read_range<IntRange>(j["decoy_credentials_per_host"], "decoy_credentials_per_host");
    if (j.contains("horizon")) j["horizon"].get_to(c.horizon);
    if (j.contains("green_rate")) j["green_rate"].get_to(c.green_rate);
    if (j.contains("seed")) j["seed"].get_to(c.seed);
    if (j.contains("policy")) {
      const json& p = j["policy"];
      reject_unknown(p,
                     {"exploit_success", "escalate_success", "noise_probability",
                      "rediscovery_interval"},
                     "policy");
      if (p.contains("exploit_success")) p["exploit_success"].get_to(c.policy.exploit_success);
      if (p.contains("escalate_success")) p["escalate_success"].get_to(c.policy.escalate_success);
      if (p.contains("noise_probability"))
        p["noise_probability"].get_to(c.policy.noise_probability);
      if (p.contains("rediscovery_interval"))
        p["rediscovery_interval"].get_to(c.policy.rediscovery_interval);
    }
    if (j.contains("trigger")) {
      const json& t = j["trigger"];
      reject_unknown(t,
                     {"enabled", "fire_step", "fake_fraction", "payload_size", "lure_files",
                      "lure_value", "lure_hardness", "workstations"},
                     "trigger");
      if (t.contains("enabled")) t["enabled"].get_to(c.trigger.enabled);
      if (t.contains("fire_step")) t["fire_step"].get_to(c.trigger.fire_step);
      if (t.contains("fake_fraction")) t["fake_fraction"].get_to(c.trigger.fake_fraction);
      if (t.contains("payload_size")) t["payload_size"].get_to(c.trigger.payload_size);
      if (t.contains("lure_files")) t["lure_files"].get_to(c.trigger.lure_files);
      if (t.contains("lure_value"))
        c.trigger.lure_value = read_range<RealRange>(t["lure_value"], "lure_value");
      if (t.contains("lure_hardness"))
        c.trigger.lure_hardness = read_range<RealRange>(t["lure_hardness"], "lure_hardness");
      if (t.contains("workstations")) t["workstations"].get_to(c.trigger.workstations);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario field has the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

std::string scenario_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(cfg).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace psyborg
