#pragma once

// Line-delimited action logs and their ground-truth label sidecars.
//
// A log starts with a header line
//   {"schema":"psyborg.action_log","schema_version":1}
// followed by one JSON object per record, red and green merged by step:
//   {"step":..,"agent":..,"action_id":..,"action_name":..,"host":..,
//    "target":..,"outcome":..,"stage_before":..,"stage_after":..}
// Green background events carry action_id 0 and null stages.

#include <string>
#include <string_view>

#include "psyborg/agents.hpp"

namespace psyborg {

std::string action_log_to_jsonl(const ActionSequence& seq);
ActionSequence action_log_from_jsonl(std::string_view text);

std::string label_to_json(const EpisodeLabel& label);
EpisodeLabel label_from_json(std::string_view text);

std::string read_text_file(const std::string& path);
/// Creates parent directories as needed.
void write_text_file(const std::string& path, std::string_view contents);

}  // namespace psyborg
