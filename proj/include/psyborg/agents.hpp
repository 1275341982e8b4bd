#pragma once

// Red-agent stage machine over the cyber kill chain, bias-driven decision
// points, green background noise, and whole-episode simulation.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "psyborg/bias_model.hpp"
#include "psyborg/rng.hpp"
#include "psyborg/scenario.hpp"
#include "psyborg/world.hpp"

namespace psyborg {

/// K: IP known, S: services known, U: user shell, RD: root shell,
/// RF: crackable files found, RC: a credential file validated.
enum class CyberStage : std::uint8_t { K, S, U, RD, RF, RC };

std::string_view to_string(CyberStage stage);
std::optional<CyberStage> parse_stage(std::string_view text);

enum class ActionId : int {
  AggressiveDiscovery = 1,
  StealthDiscovery = 2,
  DecoyDetection = 3,
  ServiceExploit = 4,
  PrivilegeEscalate = 5,
  DegradeService = 6,
  Impact = 7,
  FilesDiscovery = 8,
  BruteforceCrack = 9,
  PasswordCrack = 10,
  CredentialConfirm = 11,
  CredentialDisconfirm = 12,
};

struct ActionKind {
  ActionId id;
  std::string_view name;
  int time_cost;
};

const std::array<ActionKind, 12>& action_table();
const ActionKind& action_kind(ActionId id);
/// Throws ConfigError outside 1..12.
ActionId action_from_int(int id);

inline bool is_cracking(ActionId id) {
  return id == ActionId::BruteforceCrack || id == ActionId::PasswordCrack;
}

/// Static action set of a stage, before host-dependent filtering.
std::vector<ActionId> stage_actions(CyberStage stage);

enum class Outcome { Success, Failure, Confirm, Disconfirm };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);

struct ActionRecord {
  int step = 0;
  std::string agent;
  ActionId action = ActionId::AggressiveDiscovery;
  std::string host;
  std::string target;  // service, file or credential name; empty when none
  Outcome outcome = Outcome::Success;
  CyberStage stage_before = CyberStage::K;
  CyberStage stage_after = CyberStage::K;

  friend bool operator==(const ActionRecord&, const ActionRecord&) = default;
};

enum class BackgroundKind { FileAccess, Login };

std::string_view to_string(BackgroundKind kind);

/// Green-agent activity. It never alters red-visible state.
struct BackgroundEvent {
  int step = 0;
  std::string agent;
  BackgroundKind kind = BackgroundKind::FileAccess;
  std::string host;
  std::string target;

  friend bool operator==(const BackgroundEvent&, const BackgroundEvent&) = default;
};

/// The observable log of one episode: red records plus green background,
/// each ordered by step.
struct ActionSequence {
  std::vector<ActionRecord> records;
  std::vector<BackgroundEvent> background;

  friend bool operator==(const ActionSequence&, const ActionSequence&) = default;
};

struct FileKey {
  HostId host = 0;
  int index = 0;
  auto operator<=>(const FileKey&) const = default;
};

struct CredentialKey {
  HostId host = 0;
  int index = 0;
  auto operator<=>(const CredentialKey&) const = default;
};

enum class CredentialStatus { Unchecked, Trusted, Distrusted };

/// What the red agent knows about one host.
struct HostView {
  CyberStage stage = CyberStage::K;
  int services_known = 0;
  int files_seen = 0;  // prefix of Host::files revealed by files discovery
  int creds_seen = 0;  // prefix of Host::credential_files revealed
  int last_files_discovery = -1;
};

class RedAgent {
 public:
  RedAgent(std::string id, BiasParams params, std::optional<BiasState> state,
           std::size_t host_count);

  const std::string& id() const { return id_; }
  const BiasParams& params() const { return params_; }
  std::optional<BiasState> bias_state() const { return state_; }

  CyberStage stage(HostId host) const { return view(host).stage; }
  const HostView& view(HostId host) const;
  HostView& view(HostId host);

  int attempts(FileKey file) const;
  const std::map<FileKey, int>& attempt_counts() const { return attempts_; }
  void record_attempt(FileKey file) { ++attempts_[file]; }

  CredentialStatus credential_status(CredentialKey key) const;
  void set_credential_status(CredentialKey key, CredentialStatus status);

  bool password_failed(FileKey file, CredentialKey cred) const {
    return failed_passwords_.contains({file, cred});
  }
  void mark_password_failed(FileKey file, CredentialKey cred) {
    failed_passwords_.insert({file, cred});
  }

  int busy_until() const { return busy_until_; }
  void occupy(int step, int cost) { busy_until_ = step + cost; }

  std::optional<HostId> working_host() const { return working_host_; }
  void set_working_host(std::optional<HostId> host) { working_host_ = host; }

 private:
  std::string id_;
  BiasParams params_;
  std::optional<BiasState> state_;
  std::vector<HostView> hosts_;
  std::map<FileKey, int> attempts_;  // c(z)
  std::map<CredentialKey, CredentialStatus> credentials_;
  std::set<std::pair<FileKey, CredentialKey>> failed_passwords_;
  int busy_until_ = 0;
  std::optional<HostId> working_host_;
};

/// Stage actions on `host`, filtered by what the agent can act on there.
std::vector<ActionId> available_actions(const RedAgent& agent, const WorldState& world,
                                        HostId host);

ActionId choose_discovery(const RedAgent& agent, const ChoiceConfig& cfg, Rng& rng);

struct CrackCandidate {
  FileKey file;
  double value = 0.0;
};

/// Samples a target by perceived value (reward plus weighted sunk attempts).
/// The caller records the attempt when the cracking action is taken.
FileKey choose_crack_target(const RedAgent& agent, std::span<const CrackCandidate> candidates,
                            Rng& rng);

/// Confirm/disconfirm check of a revealed credential file. A confirm trusts
/// the file and moves the host from RF to RC.
ActionRecord check_credential(RedAgent& agent, const WorldState& world, CredentialKey cred,
                              int step, Rng& rng);

/// One decision of the default policy. Returns nothing while the agent is
/// busy with an earlier action or has nothing left to do.
std::optional<ActionRecord> red_step(RedAgent& agent, WorldState& world,
                                     const ChoiceConfig& cfg, const PolicyConfig& policy,
                                     Rng& rng);

std::optional<BackgroundEvent> green_step(const WorldState& world, double rate, Rng& rng);

/// Ground truth attached to every generated log.
struct EpisodeLabel {
  std::optional<BiasState> state;
  BiasParams params;
  std::uint64_t seed = 0;
  std::string scenario_hash;
  bool trigger = false;
};

struct EpisodeResult {
  ActionSequence log;
  EpisodeLabel label;
  RedAgent agent;
  WorldState world;
};

/// Who to simulate: a bias state (parameters sampled) or explicit parameters.
using EpisodeSubject = std::variant<BiasState, BiasParams>;

EpisodeResult run_episode(const ScenarioConfig& scenario, EpisodeSubject subject,
                          const ChoiceConfig& cfg, std::uint64_t seed,
                          const ParamDistributionTable& table = ParamDistributionTable::defaults());

/// Named-stream seeds used inside an episode.
enum class EpisodeStream : std::uint64_t { World = 1, Params = 2, Red = 3, Green = 4, Trigger = 5 };

inline std::uint64_t episode_stream_seed(std::uint64_t seed, EpisodeStream s) {
  return Rng::derive(seed, static_cast<std::uint64_t>(s));
}

}  // namespace psyborg
