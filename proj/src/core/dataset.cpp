#include "psyborg/dataset.hpp"

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "parallel.hpp"
#include "psyborg/action_log.hpp"
#include "psyborg/error.hpp"

namespace psyborg {

using nlohmann::json;

namespace {

json prospect_json(const Prospect& p) {
  json out = json::array();
  for (const auto& o : p.outcomes()) out.push_back({o.value, o.probability});
  return out;
}

Prospect prospect_from(const json& j) {
  std::vector<ProspectOutcome> outcomes;
  for (const auto& o : j) outcomes.push_back({o.at(0).get<double>(), o.at(1).get<double>()});
  return Prospect(std::move(outcomes));
}

json choice_json(const ChoiceConfig& cfg) {
  return {{"schema", "psyborg.choice"},
          {"schema_version", 1},
          {"rho", cfg.rho},
          {"mu", cfg.mu},
          {"aggressive", prospect_json(cfg.aggressive)},
          {"stealth", prospect_json(cfg.stealth)}};
}

ChoiceConfig choice_from(const json& j) {
  if (j.at("schema") != "psyborg.choice" || j.at("schema_version") != 1)
    throw IoError("not a version-1 choice config");
  ChoiceConfig cfg;
  j.at("rho").get_to(cfg.rho);
  j.at("mu").get_to(cfg.mu);
  cfg.aggressive = prospect_from(j.at("aggressive"));
  cfg.stealth = prospect_from(j.at("stealth"));
  return cfg;
}

std::string episode_name(int index, BiasState state) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "episodes/ep_%03d_%s.jsonl", index, to_string(state).c_str());
  return buf;
}

std::string label_path(const std::string& log_path) {
  return log_path.substr(0, log_path.size() - std::string_view(".jsonl").size()) + ".label.json";
}

}  // namespace

std::string choice_to_json(const ChoiceConfig& cfg) { return choice_json(cfg).dump(2); }

ChoiceConfig choice_from_json(std::string_view text) {
  try {
    return choice_from(json::parse(text));
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed choice config: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid choice config: ") + e.what());
  }
}

std::string manifest_to_json(const DatasetManifest& m) {
  json doc = {{"schema", "psyborg.manifest"},
              {"schema_version", 1},
              {"version", kLibraryVersion},
              {"scenario", json::parse(scenario_to_json(m.scenario))},
              {"scenario_hash", m.scenario_hash},
              {"master_seed", m.master_seed},
              {"episodes_per_state", m.episodes_per_state},
              {"trigger", m.trigger},
              {"choice", choice_json(m.choice)},
              {"episodes", m.episodes}};
  return doc.dump(2);
}

DatasetManifest manifest_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("schema") != "psyborg.manifest" || doc.at("schema_version") != 1)
      throw IoError("not a version-1 manifest");
    DatasetManifest m;
    m.scenario = scenario_from_json(doc.at("scenario").dump());
    doc.at("scenario_hash").get_to(m.scenario_hash);
    if (m.scenario_hash != scenario_hash(m.scenario))
      throw IoError("manifest scenario hash does not match its scenario");
    doc.at("master_seed").get_to(m.master_seed);
    doc.at("episodes_per_state").get_to(m.episodes_per_state);
    doc.at("trigger").get_to(m.trigger);
    m.choice = choice_from(doc.at("choice"));
    doc.at("episodes").get_to(m.episodes);
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid manifest: ") + e.what());
  }
}

Dataset generate_dataset(const ScenarioConfig& scenario, std::uint64_t master_seed,
                         int episodes_per_state, const ChoiceConfig& cfg, int jobs) {
  scenario.validate();
  if (episodes_per_state < 1) throw ConfigError("episodes_per_state must be >= 1");
  Dataset d;
  d.manifest.scenario = scenario;
  d.manifest.scenario_hash = scenario_hash(scenario);
  d.manifest.master_seed = master_seed;
  d.manifest.episodes_per_state = episodes_per_state;
  d.manifest.trigger = scenario.trigger.enabled;
  d.manifest.choice = cfg;

  const std::size_t total = static_cast<std::size_t>(BiasState::kCount) * static_cast<std::size_t>(episodes_per_state);
  d.runs.resize(total);
  d.manifest.episodes.resize(total);
  detail::parallel_for(total, jobs, [&](std::size_t index) {
    const BiasState state = BiasState::from_index(static_cast<int>(index) / episodes_per_state);
    EpisodeResult r = run_episode(scenario, state, cfg, Rng::derive(master_seed, index));
    d.runs[index] = {std::move(r.log), std::move(r.label)};
    d.manifest.episodes[index] = episode_name(static_cast<int>(index), state);
  });
  return d;
}

void write_dataset(const Dataset& dataset, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::error_code ec;
  std::filesystem::create_directories(root / "episodes", ec);
  if (ec) throw IoError("cannot create " + (root / "episodes").string() + ": " + ec.message());
  for (std::size_t i = 0; i < dataset.runs.size(); ++i) {
    const std::string log = (root / dataset.manifest.episodes[i]).string();
    write_text_file(log, action_log_to_jsonl(dataset.runs[i].log));
    write_text_file(label_path(log), label_to_json(dataset.runs[i].label));
  }
  write_text_file((root / "manifest.json").string(), manifest_to_json(dataset.manifest));
}

Dataset load_dataset(const std::string& dir) {
  const std::filesystem::path root(dir);
  const auto manifest_path = root / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) throw IoError("no manifest.json in " + dir);
  Dataset d;
  d.manifest = manifest_from_json(read_text_file(manifest_path.string()));
  if (d.manifest.episodes.empty()) throw IoError("dataset " + dir + " lists no episodes");
  for (const auto& rel : d.manifest.episodes) {
    const std::string log = (root / rel).string();
    d.runs.push_back({action_log_from_jsonl(read_text_file(log)), label_from_json(read_text_file(label_path(log)))});
  }
  return d;
}

}  // namespace psyborg
