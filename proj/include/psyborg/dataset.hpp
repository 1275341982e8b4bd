#pragma once

// On-disk experiment datasets: a manifest that fully determines the
// episodes, one action log per episode and a label sidecar beside it.
//
//   <dir>/manifest.json
//   <dir>/episodes/ep_<index>_theta<k>.jsonl
//   <dir>/episodes/ep_<index>_theta<k>.label.json

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "psyborg/agents.hpp"
#include "psyborg/bias_model.hpp"
#include "psyborg/eval.hpp"
#include "psyborg/scenario.hpp"

namespace psyborg {

inline constexpr std::string_view kLibraryVersion = "0.3.0";

std::string choice_to_json(const ChoiceConfig& cfg);
ChoiceConfig choice_from_json(std::string_view text);

struct DatasetManifest {
  ScenarioConfig scenario;
  std::string scenario_hash;
  std::uint64_t master_seed = 0;
  int episodes_per_state = 50;
  bool trigger = false;
  ChoiceConfig choice;
  std::vector<std::string> episodes;  // log paths relative to the dataset dir
};

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(std::string_view text);

struct Dataset {
  DatasetManifest manifest;
  std::vector<LabeledRun> runs;  // same order as manifest.episodes
};

/// Episode `state * episodes_per_state + i` is run with seed
/// derive(master_seed, index). The trigger follows scenario.trigger.enabled.
Dataset generate_dataset(const ScenarioConfig& scenario, std::uint64_t master_seed,
                         int episodes_per_state, const ChoiceConfig& cfg, int jobs = 1);

void write_dataset(const Dataset& dataset, const std::string& dir);
/// Throws IoError when the manifest or any listed episode is missing.
Dataset load_dataset(const std::string& dir);

}  // namespace psyborg
