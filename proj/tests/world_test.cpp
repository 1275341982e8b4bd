#include <doctest.h>

#include <set>
#include <string>

#include "psyborg/error.hpp"
#include "psyborg/world.hpp"

using namespace psyborg;

namespace {

ScenarioConfig small_scenario() {
  ScenarioConfig c;
  c.user_hosts = {3, 10};
  c.server_hosts = {1, 6};
  return c;
}

WorldState world_at(const ScenarioConfig& c, std::uint64_t seed, int clock) {
  Rng rng(seed);
  WorldState w = generate_network(c, rng);
  w.advance_to(clock);
  return w;
}

const FileRecord* file_named(const WorldState& w, const std::string& name) {
  for (const auto& h : w.hosts)
    for (const auto& f : h.files)
      if (f.name == name) return &f;
  return nullptr;
}

}  // namespace

TEST_SUITE("world") {

TEST_CASE("generated networks respect the size bounds") {
  const ScenarioConfig c = small_scenario();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const WorldState w = generate_network(c, rng);
    REQUIRE(w.subnets.size() == 1);
    const auto& s = w.subnets[0];
    CHECK(s.user_hosts.size() >= 3);
    CHECK(s.user_hosts.size() <= 10);
    CHECK(s.server_hosts.size() >= 1);
    CHECK(s.server_hosts.size() <= 6);
    std::set<std::string> ips, names;
    for (const auto& h : w.hosts) {
      CHECK(h.files.size() == 30u);
      CHECK(ips.insert(h.ip).second);
      for (const auto& f : h.files) {
        CHECK(names.insert(f.name).second);
        CHECK(f.value >= 1.0);
        CHECK(f.value <= 10.0);
        CHECK(f.hardness >= 0.1);
        CHECK(f.hardness <= 0.9);
      }
      CHECK(h.services.size() >= static_cast<std::size_t>(c.services_per_host.min));
      CHECK(h.services.size() <= static_cast<std::size_t>(c.services_per_host.max));
    }
  }
}

TEST_CASE("genuine credential files appear on about one host in ten") {
  const ScenarioConfig c = small_scenario();
  int hosts = 0, with_cred = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed * 7 + 1);
    const WorldState w = generate_network(c, rng);
    for (const auto& h : w.hosts) {
      ++hosts;
      bool genuine = false;
      for (const auto& cf : h.credential_files) {
        if (!cf.genuine) continue;
        genuine = true;
        CHECK(cf.mappings.size() >= 3u);
        CHECK(cf.mappings.size() <= 5u);
        for (const auto& m : cf.mappings) {
          const FileRecord* f = file_named(w, m.filename);
          REQUIRE(f);
          CHECK(f->is_protected);
          CHECK(f->password == m.password);
        }
      }
      with_cred += genuine;
    }
  }
  CHECK(std::abs(static_cast<double>(with_cred) / hosts - 0.10) < 0.02);
}

TEST_CASE("decoy credential files never name a real file") {
  const ScenarioConfig c = small_scenario();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const WorldState w = generate_network(c, rng);
    for (const auto& h : w.hosts)
      for (const auto& cf : h.credential_files)
        if (!cf.genuine)
          for (const auto& m : cf.mappings) CHECK(file_named(w, m.filename) == nullptr);
  }
}

TEST_CASE("degenerate ranges give a deterministic topology") {
  ScenarioConfig c;
  c.user_hosts = {4, 4};
  c.server_hosts = {2, 2};
  c.services_per_host = {3, 3};
  for (std::uint64_t seed : {1u, 99u, 12345u}) {
    Rng rng(seed);
    const WorldState w = generate_network(c, rng);
    CHECK(w.subnets[0].user_hosts.size() == 4u);
    CHECK(w.subnets[0].server_hosts.size() == 2u);
    for (const auto& h : w.hosts) CHECK(h.services.size() == 3u);
  }
}

TEST_CASE("invalid scenario ranges are configuration errors") {
  ScenarioConfig c;
  c.user_hosts = {5, 2};
  Rng rng(1);
  CHECK_THROWS_AS(generate_network(c, rng), ConfigError);
  c = ScenarioConfig{};
  c.horizon = 0;
  CHECK_THROWS_AS(generate_network(c, rng), ConfigError);
  c = ScenarioConfig{};
  c.file_hardness = {0.2, 1.5};
  CHECK_THROWS_AS(generate_network(c, rng), ConfigError);
}

TEST_CASE("same scenario and seed replay byte for byte") {
  ScenarioConfig c = small_scenario();
  c.trigger.enabled = true;
  c.trigger.lure_files = 5;
  Rng a(314), b(314);
  const std::string ja = world_to_json(generate_network(c, a));
  CHECK(ja == world_to_json(generate_network(c, b)));
  CHECK(world_to_json(world_from_json(ja)) == ja);
  CHECK_THROWS_AS(world_from_json("{\"schema\":\"other\"}"), IoError);
}

TEST_CASE("trigger payload splits into fakes and genuine files") {
  ScenarioConfig c = small_scenario();
  c.trigger.enabled = true;
  c.trigger.lure_files = 20;
  WorldState w = world_at(c, 8, 200);
  const Host& server = w.host(w.subnets[0].server_hosts.front());
  const std::size_t before = server.credential_files.size();
  Rng rng(4);
  CHECK(inject_trigger(w, c.trigger, rng).empty());
  const Host& after = w.host(w.subnets[0].server_hosts.front());
  REQUIRE(after.credential_files.size() == before + 10);
  int fakes = 0;
  for (std::size_t i = before; i < after.credential_files.size(); ++i) {
    const auto& cf = after.credential_files[i];
    fakes += !cf.genuine;
    for (const auto& m : cf.mappings) {
      const FileRecord* f = file_named(w, m.filename);
      REQUIRE(f);
      CHECK(f->lure);
      CHECK(f->value >= 8.0);
      CHECK((f->password == m.password) == cf.genuine);
    }
  }
  CHECK(fakes == 2);
}

TEST_CASE("trigger boundary fractions") {
  ScenarioConfig c = small_scenario();
  c.trigger.enabled = true;
  c.trigger.lure_files = 20;
  for (double frac : {0.0, 1.0}) {
    WorldState w = world_at(c, 21, 200);
    TriggerConfig spec = c.trigger;
    spec.fake_fraction = frac;
    Rng rng(6);
    inject_trigger(w, spec, rng);
    Host& server = w.host(w.subnets[0].server_hosts.front());
    for (std::size_t i = server.credential_files.size() - 10; i < server.credential_files.size(); ++i) {
      const CredentialFile cf = server.credential_files[i];
      CHECK(cf.genuine == (frac == 0.0));
      for (const auto& m : cf.mappings) {
        for (auto& f : server.files) {
          if (f.name != m.filename || f.cracked) continue;
          FileRecord copy = f;
          CHECK((attempt_password_crack(copy, cf) == CrackResult::Cracked) == (frac == 0.0));
        }
      }
    }
  }
}

TEST_CASE("trigger fires once and only at its step") {
  ScenarioConfig c = small_scenario();
  c.trigger.enabled = true;
  WorldState w = world_at(c, 3, 150);
  Rng rng(1);
  CHECK_THROWS_AS(inject_trigger(w, c.trigger, rng), PreconditionError);
  w.advance_to(200);
  inject_trigger(w, c.trigger, rng);
  CHECK(w.trigger_fired);
  CHECK_THROWS_AS(inject_trigger(w, c.trigger, rng), PreconditionError);
}

TEST_CASE("trigger skips subnets without a target host") {
  ScenarioConfig c;
  c.user_hosts = {3, 3};
  c.server_hosts = {0, 0};
  c.trigger.enabled = true;
  WorldState w = world_at(c, 5, 200);
  Rng rng(2);
  const auto warnings = inject_trigger(w, c.trigger, rng);
  CHECK(warnings.size() == 1u);
  CHECK(w.trigger_fired);
}

TEST_CASE("file listing exposes name, path and value only") {
  Rng rng(10);
  WorldState w = generate_network(small_scenario(), rng);
  Host& h = w.hosts[0];
  auto listing = visible_file_listing(h);
  CHECK(listing.size() == 30u);
  const auto& [name, path, value] = listing[0];  // exactly three fields
  CHECK(name == h.files[0].name);
  CHECK(path == h.files[0].path);
  CHECK(value == h.files[0].value);
  h.files.push_back(FileRecord{"new.doc", "/home/new.doc", 2.0, 0.5, "", false, false, false, false});
  CHECK(visible_file_listing(h).size() == 31u);
  CHECK(visible_file_listing(Host{}).empty());
}

TEST_CASE("bruteforce success rate follows hardness") {
  Rng rng(12);
  const auto trial = [&](double hardness) {
    FileRecord f;
    f.is_protected = true;
    f.hardness = hardness;
    return attempt_bruteforce(f, rng) == CrackResult::Cracked;
  };
  int easy = 0, hard = 0, mid = 0;
  for (int i = 0; i < 10000; ++i) {
    easy += trial(0.0);
    hard += trial(1.0);
    mid += trial(0.7);
  }
  CHECK(easy == 10000);
  CHECK(hard == 0);
  CHECK(std::abs(mid / 10000.0 - 0.30) < 0.02);

  FileRecord f;
  f.is_protected = true;
  f.hardness = 0.0;
  attempt_bruteforce(f, rng);
  CHECK(f.cracked);
  CHECK_THROWS_AS(attempt_bruteforce(f, rng), PreconditionError);
  FileRecord open;
  CHECK_THROWS_AS(attempt_bruteforce(open, rng), PreconditionError);
}

TEST_CASE("password cracking succeeds only with a genuine credential") {
  FileRecord f{"a.doc", "/srv/a.doc", 5.0, 0.99, "secret", true, false, false, false};
  CredentialFile decoy{"c0", 0, {{"a.doc", "guess"}}, false};
  CredentialFile genuine{"c1", 0, {{"a.doc", "secret"}}, true};
  CredentialFile other{"c2", 0, {{"b.doc", "secret"}}, true};
  CHECK(attempt_password_crack(f, decoy) == CrackResult::Failed);
  CHECK_FALSE(f.cracked);
  CHECK_THROWS_AS(attempt_password_crack(f, other), PreconditionError);
  CHECK(attempt_password_crack(f, genuine) == CrackResult::Cracked);
  CHECK(f.cracked);
  CHECK_THROWS_AS(attempt_password_crack(f, genuine), PreconditionError);
}

TEST_CASE("world clock only moves forward within the horizon") {
  Rng rng(1);
  WorldState w = generate_network(ScenarioConfig{}, rng);
  w.advance_to(10);
  CHECK_THROWS_AS(w.advance_to(9), PreconditionError);
  CHECK_THROWS_AS(w.advance_to(w.horizon + 1), PreconditionError);
  CHECK_THROWS_AS(w.host(10000), PreconditionError);
}

}  // TEST_SUITE
