#pragma once

// The simulated network the red agent walks: hosts, files, credential files
// and decoys, plus the scheduled sunk-cost trigger.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "psyborg/rng.hpp"
#include "psyborg/scenario.hpp"

namespace psyborg {

using HostId = int;

enum class HostKind { User, Server };

struct FileRecord {
  std::string name;  // unique within a world
  std::string path;
  double value = 0.0;     // reward r(z)
  double hardness = 0.0;  // bruteforce failure rate, hidden from the attacker
  std::string password;   // empty for unprotected files
  bool is_protected = false;
  bool decoy = false;
  bool lure = false;  // created for the trigger
  bool cracked = false;
};

struct CredentialMapping {
  std::string filename;
  std::string password;
};

struct CredentialFile {
  std::string name;
  HostId host = 0;
  std::vector<CredentialMapping> mappings;
  bool genuine = true;

  const CredentialMapping* find(std::string_view filename) const;
};

struct Host {
  HostId id = 0;
  std::string name;
  HostKind kind = HostKind::User;
  std::string ip;
  std::vector<std::string> services;
  std::vector<FileRecord> files;  // append-only
  std::vector<CredentialFile> credential_files;
};

struct Subnet {
  int id = 0;
  std::vector<HostId> user_hosts;
  std::vector<HostId> server_hosts;
};

struct WorldState {
  std::vector<Subnet> subnets;
  std::vector<Host> hosts;  // indexed by HostId
  int clock = 0;
  int horizon = 0;
  TriggerConfig trigger;
  bool trigger_fired = false;
  std::uint64_t seed = 0;

  Host& host(HostId id);
  const Host& host(HostId id) const;
  /// Advances the clock; throws PreconditionError when moving backwards or
  /// past the horizon.
  void advance_to(int step);
};

WorldState generate_network(const ScenarioConfig& scenario, Rng& rng);

/// Places the trigger payload. Subnets without a target host are skipped and
/// reported in the returned warnings. Throws PreconditionError when fired
/// twice or at the wrong step.
std::vector<std::string> inject_trigger(WorldState& world, const TriggerConfig& spec,
                                        Rng& rng);

/// What files discovery reveals. Hardness and decoy flags are not part of it.
struct VisibleFile {
  std::string name;
  std::string path;
  double value = 0.0;
};

std::vector<VisibleFile> visible_file_listing(const Host& host);

enum class CrackResult { Cracked, Failed };

/// Fails with probability equal to the file's hardness.
CrackResult attempt_bruteforce(FileRecord& file, Rng& rng);
/// Always succeeds with a genuine credential, always fails with a decoy.
CrackResult attempt_password_crack(FileRecord& file, const CredentialFile& cred);

std::string world_to_json(const WorldState& world);
WorldState world_from_json(std::string_view text);

}  // namespace psyborg
