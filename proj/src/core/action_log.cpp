#include "psyborg/action_log.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psyborg/error.hpp"

namespace psyborg {

using nlohmann::json;

namespace {

constexpr int kLogSchema = 1;

json record_json(const ActionRecord& r) {
  json j;
  j["step"] = r.step;
  j["agent"] = r.agent;
  j["action_id"] = static_cast<int>(r.action);
  j["action_name"] = action_kind(r.action).name;
  j["host"] = r.host;
  j["target"] = r.target.empty() ? json(nullptr) : json(r.target);
  j["outcome"] = to_string(r.outcome);
  j["stage_before"] = to_string(r.stage_before);
  j["stage_after"] = to_string(r.stage_after);
  return j;
}

json background_json(const BackgroundEvent& e) {
  json j;
  j["step"] = e.step;
  j["agent"] = e.agent;
  j["action_id"] = 0;
  j["action_name"] = to_string(e.kind);
  j["host"] = e.host;
  j["target"] = e.target.empty() ? json(nullptr) : json(e.target);
  j["outcome"] = "none";
  j["stage_before"] = nullptr;
  j["stage_after"] = nullptr;
  return j;
}

std::string opt_string(const json& j) { return j.is_null() ? std::string() : j.get<std::string>(); }

}  // namespace

std::string action_log_to_jsonl(const ActionSequence& seq) {
  std::string out = json{{"schema", "psyborg.action_log"}, {"schema_version", kLogSchema}}.dump();
  out += '\n';
  std::size_t r = 0, b = 0;
  while (r < seq.records.size() || b < seq.background.size()) {
    const bool take_red = b >= seq.background.size() ||
                          (r < seq.records.size() && seq.records[r].step <= seq.background[b].step);
    out += take_red ? record_json(seq.records[r++]).dump() : background_json(seq.background[b++]).dump();
    out += '\n';
  }
  return out;
}

ActionSequence action_log_from_jsonl(std::string_view text) {
  ActionSequence seq;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool header = false;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (!header) {
        if (j.value("schema", "") != "psyborg.action_log" || j.value("schema_version", 0) != kLogSchema)
          throw IoError("action log lacks a version-1 header");
        header = true;
        continue;
      }
      const int id = j.at("action_id").get<int>();
      if (id == 0) {
        BackgroundEvent e;
        j.at("step").get_to(e.step);
        j.at("agent").get_to(e.agent);
        e.kind = j.at("action_name") == "login" ? BackgroundKind::Login : BackgroundKind::FileAccess;
        j.at("host").get_to(e.host);
        e.target = opt_string(j.at("target"));
        seq.background.push_back(std::move(e));
        continue;
      }
      ActionRecord r;
      j.at("step").get_to(r.step);
      j.at("agent").get_to(r.agent);
      r.action = action_from_int(id);
      j.at("host").get_to(r.host);
      r.target = opt_string(j.at("target"));
      const auto outcome = parse_outcome(j.at("outcome").get<std::string>());
      const auto before = parse_stage(j.at("stage_before").get<std::string>());
      const auto after = parse_stage(j.at("stage_after").get<std::string>());
      if (!outcome || !before || !after) throw IoError("unknown outcome or stage");
      r.outcome = *outcome;
      r.stage_before = *before;
      r.stage_after = *after;
      seq.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw IoError("action log line " + std::to_string(line_no) + ": " + e.what());
  } catch (const ConfigError& e) {
    throw IoError("action log line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!header) throw IoError("action log is empty");
  return seq;
}

std::string label_to_json(const EpisodeLabel& label) {
  json j = {{"schema", "psyborg.label"},
            {"schema_version", 1},
            {"state", label.state ? json(label.state->index()) : json(nullptr)},
            {"lambda", {label.params.lambda_l, label.params.lambda_c, label.params.lambda_s}},
            {"seed", label.seed},
            {"scenario_hash", label.scenario_hash},
            {"trigger", label.trigger}};
  return j.dump(2);
}

EpisodeLabel label_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("schema") != "psyborg.label" || j.at("schema_version") != 1)
      throw IoError("not a version-1 label");
    EpisodeLabel l;
    if (!j.at("state").is_null()) l.state = BiasState::from_index(j.at("state").get<int>());
    const auto& lam = j.at("lambda");
    l.params = {lam.at(0).get<double>(), lam.at(1).get<double>(), lam.at(2).get<double>()};
    j.at("seed").get_to(l.seed);
    j.at("scenario_hash").get_to(l.scenario_hash);
    j.at("trigger").get_to(l.trigger);
    return l;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed label: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace psyborg
