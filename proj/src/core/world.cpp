#include "psyborg/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "psyborg/error.hpp"

namespace psyborg {

using nlohmann::json;

namespace {

constexpr int kWorldSchema = 1;

constexpr std::array<std::string_view, 14> kServices = {
    "ssh", "http", "https", "smb", "rdp", "ftp", "smtp",
    "dns", "ldap", "mysql", "postgres", "vnc", "snmp", "telnet"};

constexpr std::array<std::string_view, 16> kWords = {
    "alder", "birch", "cedar", "delta", "ember", "fjord", "grove", "heron",
    "iris", "juniper", "kestrel", "larch", "maple", "nimbus", "onyx", "pine"};

constexpr std::array<std::string_view, 6> kExtensions = {"doc", "xls", "pdf", "db", "zip", "cfg"};

std::string slug(Rng& rng) {
  std::string s(kWords[static_cast<std::size_t>(rng.uniform_int(0, kWords.size() - 1))]);
  s += '_';
  s += kWords[static_cast<std::size_t>(rng.uniform_int(0, kWords.size() - 1))];
  return s;
}

std::string password(Rng& rng) {
  static constexpr std::string_view kAlphabet = "abcdefghijkmnpqrstuvwxyz23456789";
  std::string p(10, ' ');
  for (char& ch : p) ch = kAlphabet[static_cast<std::size_t>(rng.uniform_int(0, kAlphabet.size() - 1))];
  return p;
}

/// Unique-per-world names come from a running counter.
struct NameSource {
  int files = 0;
  int creds = 0;
  int fabricated = 0;

  std::string file(Rng& rng) {
    auto ext = kExtensions[static_cast<std::size_t>(rng.uniform_int(0, kExtensions.size() - 1))];
    return slug(rng) + "_" + std::to_string(files++) + "." + std::string(ext);
  }
  std::string cred() { return "credentials_" + std::to_string(creds++) + ".txt"; }
  std::string phantom(Rng& rng) {
    return "archive_" + slug(rng) + "_" + std::to_string(fabricated++) + ".vault";
  }
};

FileRecord make_file(const Host& host, NameSource& names, RealRange value, RealRange hardness,
                     bool is_protected, Rng& rng) {
  FileRecord f;
  f.name = names.file(rng);
  f.path = (host.kind == HostKind::Server ? "/srv/" : "/home/") + host.name + "/" + f.name;
  f.value = rng.uniform(value.min, value.max);
  f.hardness = rng.uniform(hardness.min, hardness.max);
  f.is_protected = is_protected;
  if (is_protected) f.password = password(rng);
  return f;
}

/// k distinct entries of `pool` in random order.
template <typename T>
std::vector<T> pick(std::vector<T> pool, int k, Rng& rng) {
  std::shuffle(pool.begin(), pool.end(), rng.engine());
  pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(std::max(k, 0))));
  return pool;
}

int names_seen(const WorldState& w) {
  int n = 0;
  for (const auto& h : w.hosts) n += static_cast<int>(h.files.size());
  return n;
}

}  // namespace

const CredentialMapping* CredentialFile::find(std::string_view filename) const {
  for (const auto& m : mappings)
    if (m.filename == filename) return &m;
  return nullptr;
}

Host& WorldState::host(HostId id) {
  if (id < 0 || static_cast<std::size_t>(id) >= hosts.size())
    throw PreconditionError("unknown host id " + std::to_string(id));
  return hosts[static_cast<std::size_t>(id)];
}

const Host& WorldState::host(HostId id) const {
  return const_cast<WorldState*>(this)->host(id);
}

void WorldState::advance_to(int step) {
  if (step < clock || step > horizon)
    throw PreconditionError("world clock must be nondecreasing and within the horizon");
  clock = step;
}

WorldState generate_network(const ScenarioConfig& scenario, Rng& rng) {
  scenario.validate();
  WorldState world;
  world.horizon = scenario.horizon;
  world.trigger = scenario.trigger;
  world.seed = scenario.seed;
  NameSource names;

  for (int s = 0; s < scenario.subnets; ++s) {
    Subnet subnet;
    subnet.id = s;
    const int users = rng.uniform_int(scenario.user_hosts.min, scenario.user_hosts.max);
    const int servers = rng.uniform_int(scenario.server_hosts.min, scenario.server_hosts.max);
    for (int i = 0; i < users + servers; ++i) {
      Host h;
      h.id = static_cast<HostId>(world.hosts.size());
      h.kind = i < users ? HostKind::User : HostKind::Server;
      const int local = i < users ? i : i - users;
      h.name = "s" + std::to_string(s) + (i < users ? "_user_host_" : "_server_host_") +
               std::to_string(local);
      h.ip = "10.0." + std::to_string(s) + "." + std::to_string(10 + i);
      (i < users ? subnet.user_hosts : subnet.server_hosts).push_back(h.id);

      const int n_services =
          rng.uniform_int(scenario.services_per_host.min, scenario.services_per_host.max);
      std::vector<std::string> services(kServices.begin(), kServices.end());
      h.services = pick(std::move(services), n_services, rng);

      const int n_files = scenario.files_per_host;
      const int n_protected =
          static_cast<int>(std::lround(scenario.protected_fraction * n_files));
      std::vector<int> order(static_cast<std::size_t>(n_files));
      std::iota(order.begin(), order.end(), 0);
      auto protected_idx = pick(order, n_protected, rng);
      std::vector<bool> is_protected(static_cast<std::size_t>(n_files), false);
      for (int idx : protected_idx) is_protected[static_cast<std::size_t>(idx)] = true;
      for (int f = 0; f < n_files; ++f)
        h.files.push_back(make_file(h, names, scenario.file_value, scenario.file_hardness,
                                    is_protected[static_cast<std::size_t>(f)], rng));

      if (rng.bernoulli(scenario.credential_probability)) {
        std::vector<std::size_t> targets;
        for (std::size_t f = 0; f < h.files.size(); ++f)
          if (h.files[f].is_protected) targets.push_back(f);
        const int k = rng.uniform_int(scenario.credential_mappings.min,
                                      scenario.credential_mappings.max);
        targets = pick(std::move(targets), k, rng);
        if (!targets.empty()) {
          CredentialFile cred{names.cred(), h.id, {}, true};
          for (std::size_t f : targets) cred.mappings.push_back({h.files[f].name, h.files[f].password});
          h.credential_files.push_back(std::move(cred));
        }
      }

      const int decoys = rng.uniform_int(scenario.decoy_credentials_per_host.min,
                                         scenario.decoy_credentials_per_host.max);
      for (int d = 0; d < decoys; ++d) {
        CredentialFile cred{names.cred(), h.id, {}, false};
        const int k = rng.uniform_int(scenario.credential_mappings.min,
                                      scenario.credential_mappings.max);
        for (int m = 0; m < k; ++m) cred.mappings.push_back({names.phantom(rng), password(rng)});
        h.credential_files.push_back(std::move(cred));
      }
      world.hosts.push_back(std::move(h));
    }

    if (scenario.trigger.enabled && !subnet.server_hosts.empty()) {
      Host& target = world.hosts[static_cast<std::size_t>(subnet.server_hosts.front())];
      for (int f = 0; f < scenario.trigger.lure_files; ++f) {
        FileRecord lure = make_file(target, names, scenario.trigger.lure_value,
                                    scenario.trigger.lure_hardness, true, rng);
        lure.lure = true;
        target.files.push_back(std::move(lure));
      }
    }
    world.subnets.push_back(std::move(subnet));
  }
  return world;
}

std::vector<std::string> inject_trigger(WorldState& world, const TriggerConfig& spec, Rng& rng) {
  if (world.trigger_fired) throw PreconditionError("trigger already fired in this world");
  if (world.clock != spec.fire_step)
    throw PreconditionError("trigger fired at step " + std::to_string(world.clock) +
                            " but scheduled for " + std::to_string(spec.fire_step));
  if (spec.fake_fraction < 0.0 || spec.fake_fraction > 1.0)
    throw ConfigError("trigger fake_fraction must lie in [0, 1]");

  std::vector<std::string> warnings;
  NameSource names;
  names.files = names_seen(world);
  for (const auto& h : world.hosts) names.creds += static_cast<int>(h.credential_files.size());
  names.fabricated = 1'000'000;  // disjoint from generation-time phantoms

  for (const Subnet& subnet : world.subnets) {
    const auto& pool = spec.workstations ? subnet.user_hosts : subnet.server_hosts;
    if (pool.empty()) {
      warnings.push_back("subnet " + std::to_string(subnet.id) + " has no " +
                         (spec.workstations ? "user" : "server") + " host; trigger skipped");
      continue;
    }
    Host& target = world.host(pool.front());

    // Credentials point at the lure group on the subnet's first server,
    // falling back to the target host's own protected files.
    std::vector<const FileRecord*> covered;
    if (!subnet.server_hosts.empty())
      for (const auto& f : world.host(subnet.server_hosts.front()).files)
        if (f.lure) covered.push_back(&f);
    if (covered.empty())
      for (const auto& f : target.files)
        if (f.is_protected) covered.push_back(&f);

    const int fakes = static_cast<int>(std::lround(spec.fake_fraction * spec.payload_size));
    std::vector<bool> fake(static_cast<std::size_t>(spec.payload_size), false);
    std::fill_n(fake.begin(), fakes, true);
    std::shuffle(fake.begin(), fake.end(), rng.engine());

    std::vector<CredentialFile> payload;
    for (int c = 0; c < spec.payload_size; ++c) {
      CredentialFile cred{names.cred(), target.id, {}, !fake[static_cast<std::size_t>(c)]};
      const int k = rng.uniform_int(3, 5);
      if (covered.empty()) {
        for (int m = 0; m < k; ++m) cred.mappings.push_back({names.phantom(rng), password(rng)});
      } else {
        for (const FileRecord* f : pick(covered, k, rng)) {
          std::string pw = f->password;
          if (!cred.genuine) {
            do pw = password(rng);
            while (pw == f->password);
          }
          cred.mappings.push_back({f->name, pw});
        }
      }
      payload.push_back(std::move(cred));
    }
    for (auto& cred : payload) target.credential_files.push_back(std::move(cred));
  }
  world.trigger_fired = true;
  return warnings;
}

std::vector<VisibleFile> visible_file_listing(const Host& host) {
  std::vector<VisibleFile> out;
  out.reserve(host.files.size());
  for (const auto& f : host.files) out.push_back({f.name, f.path, f.value});
  return out;
}

CrackResult attempt_bruteforce(FileRecord& file, Rng& rng) {
  if (!file.is_protected) throw PreconditionError("file is not protected: " + file.name);
  if (file.cracked) throw PreconditionError("file already cracked: " + file.name);
  if (rng.bernoulli(file.hardness)) return CrackResult::Failed;
  file.cracked = true;
  return CrackResult::Cracked;
}

CrackResult attempt_password_crack(FileRecord& file, const CredentialFile& cred) {
  if (file.cracked) throw PreconditionError("file already cracked: " + file.name);
  const CredentialMapping* m = cred.find(file.name);
  if (!m) throw PreconditionError("credential file has no mapping for " + file.name);
  if (!cred.genuine || m->password != file.password) return CrackResult::Failed;
  file.cracked = true;
  return CrackResult::Cracked;
}

// ---------------------------------------------------------------------------
// Snapshots

namespace {

json trigger_json(const TriggerConfig& t) {
  return {{"enabled", t.enabled},
          {"fire_step", t.fire_step},
          {"fake_fraction", t.fake_fraction},
          {"payload_size", t.payload_size},
          {"lure_files", t.lure_files},
          {"lure_value", {t.lure_value.min, t.lure_value.max}},
          {"lure_hardness", {t.lure_hardness.min, t.lure_hardness.max}},
          {"workstations", t.workstations}};
}

TriggerConfig trigger_from(const json& j) {
  TriggerConfig t;
  j.at("enabled").get_to(t.enabled);
  j.at("fire_step").get_to(t.fire_step);
  j.at("fake_fraction").get_to(t.fake_fraction);
  j.at("payload_size").get_to(t.payload_size);
  j.at("lure_files").get_to(t.lure_files);
  t.lure_value = {j.at("lure_value")[0].get<double>(), j.at("lure_value")[1].get<double>()};
  t.lure_hardness = {j.at("lure_hardness")[0].get<double>(),
                     j.at("lure_hardness")[1].get<double>()};
  j.at("workstations").get_to(t.workstations);
  return t;
}

}  // namespace

std::string world_to_json(const WorldState& w) {
  json hosts = json::array();
  for (const auto& h : w.hosts) {
    json files = json::array();
    for (const auto& f : h.files)
      files.push_back({{"name", f.name},
                       {"path", f.path},
                       {"value", f.value},
                       {"hardness", f.hardness},
                       {"password", f.password},
                       {"protected", f.is_protected},
                       {"decoy", f.decoy},
                       {"lure", f.lure},
                       {"cracked", f.cracked}});
    json creds = json::array();
    for (const auto& c : h.credential_files) {
      json maps = json::array();
      for (const auto& m : c.mappings) maps.push_back({m.filename, m.password});
      creds.push_back({{"name", c.name}, {"host", c.host}, {"genuine", c.genuine}, {"mappings", maps}});
    }
    hosts.push_back({{"id", h.id},
                     {"name", h.name},
                     {"kind", h.kind == HostKind::Server ? "server" : "user"},
                     {"ip", h.ip},
                     {"services", h.services},
                     {"files", files},
                     {"credential_files", creds}});
  }
  json subnets = json::array();
  for (const auto& s : w.subnets)
    subnets.push_back({{"id", s.id}, {"user_hosts", s.user_hosts}, {"server_hosts", s.server_hosts}});
  json doc = {{"schema", "psyborg.world"},
              {"schema_version", kWorldSchema},
              {"clock", w.clock},
              {"horizon", w.horizon},
              {"seed", w.seed},
              {"trigger", trigger_json(w.trigger)},
              {"trigger_fired", w.trigger_fired},
              {"subnets", subnets},
              {"hosts", hosts}};
  return doc.dump(1);
}

WorldState world_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("schema") != "psyborg.world" || doc.at("schema_version") != kWorldSchema)
      throw IoError("not a version-1 world snapshot");
    WorldState w;
    doc.at("clock").get_to(w.clock);
    doc.at("horizon").get_to(w.horizon);
    doc.at("seed").get_to(w.seed);
    w.trigger = trigger_from(doc.at("trigger"));
    doc.at("trigger_fired").get_to(w.trigger_fired);
    for (const auto& s : doc.at("subnets"))
      w.subnets.push_back({s.at("id").get<int>(), s.at("user_hosts").get<std::vector<HostId>>(),
                           s.at("server_hosts").get<std::vector<HostId>>()});
    for (const auto& hj : doc.at("hosts")) {
      Host h;
      hj.at("id").get_to(h.id);
      hj.at("name").get_to(h.name);
      h.kind = hj.at("kind") == "server" ? HostKind::Server : HostKind::User;
      hj.at("ip").get_to(h.ip);
      hj.at("services").get_to(h.services);
      for (const auto& fj : hj.at("files")) {
        FileRecord f;
        fj.at("name").get_to(f.name);
        fj.at("path").get_to(f.path);
        fj.at("value").get_to(f.value);
        fj.at("hardness").get_to(f.hardness);
        fj.at("password").get_to(f.password);
        fj.at("protected").get_to(f.is_protected);
        fj.at("decoy").get_to(f.decoy);
        fj.at("lure").get_to(f.lure);
        fj.at("cracked").get_to(f.cracked);
        h.files.push_back(std::move(f));
      }
      for (const auto& cj : hj.at("credential_files")) {
        CredentialFile c;
        cj.at("name").get_to(c.name);
        cj.at("host").get_to(c.host);
        cj.at("genuine").get_to(c.genuine);
        for (const auto& m : cj.at("mappings"))
          c.mappings.push_back({m[0].get<std::string>(), m[1].get<std::string>()});
        h.credential_files.push_back(std::move(c));
      }
      w.hosts.push_back(std::move(h));
    }
    return w;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed world snapshot: ") + e.what());
  }
}

}  // namespace psyborg
