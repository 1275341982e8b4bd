#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "psyborg/agents.hpp"
#include "psyborg/error.hpp"
#include "psyborg/inference.hpp"

using namespace psyborg;
using doctest::Approx;

namespace {

const ChoiceConfig& calibrated() {
  static const ChoiceConfig cfg = calibrate_choice();
  return cfg;
}

int rank(CyberStage s) { return static_cast<int>(s); }

struct Bench {
  WorldState world;
  RedAgent agent;

  explicit Bench(BiasParams params, std::uint64_t seed = 1)
      : world([&] {
          Rng rng(seed);
          return generate_network(ScenarioConfig{}, rng);
        }()),
        agent("red_0", params, std::nullopt, world.hosts.size()) {}
};

int max_attempts(const ActionSequence& seq) { return extract_features(seq).f_max; }

double median(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_SUITE("agents") {

TEST_CASE("action table matches the published ids, names and costs") {
  const std::vector<std::pair<std::string_view, int>> expected = {
      {"Aggressive service discovery", 1}, {"Stealth service discovery", 3},
      {"Decoy detection", 2},              {"Service exploit", 4},
      {"Privilege escalate", 2},           {"Degrade service", 2},
      {"Impact", 2},                       {"Files discovery", 1},
      {"Bruteforce file cracking", 3},     {"Password-based file cracking", 1},
      {"Credential file confirming", 1},   {"Credential file disconfirming", 1}};
  const auto& table = action_table();
  for (int i = 0; i < 12; ++i) {
    CHECK(static_cast<int>(table[i].id) == i + 1);
    CHECK(table[i].name == expected[i].first);
    CHECK(table[i].time_cost == expected[i].second);
  }
  CHECK_THROWS_AS(action_from_int(13), ConfigError);
  CHECK_THROWS_AS(action_from_int(0), ConfigError);
}

TEST_CASE("stage action sets") {
  using enum ActionId;
  CHECK(stage_actions(CyberStage::K) == std::vector{AggressiveDiscovery, StealthDiscovery, DecoyDetection});
  CHECK(stage_actions(CyberStage::S) == std::vector{ServiceExploit});
  CHECK(stage_actions(CyberStage::U) == std::vector{PrivilegeEscalate});
  const auto rd = stage_actions(CyberStage::RD);
  CHECK(std::set(rd.begin(), rd.end()) == std::set{DegradeService, Impact, FilesDiscovery});
  CHECK(stage_actions(CyberStage::RF) == stage_actions(CyberStage::RC));
  for (ActionId id : rd) {
    const auto rf = stage_actions(CyberStage::RF);
    CHECK(std::find(rf.begin(), rf.end(), id) != rf.end());
  }
}

TEST_CASE("property: baseline stage action sets are disjoint and observables have one context") {
  const std::vector<CyberStage> baseline = {CyberStage::K, CyberStage::S, CyberStage::U, CyberStage::RD};
  for (std::size_t i = 0; i < baseline.size(); ++i)
    for (std::size_t j = i + 1; j < baseline.size(); ++j) {
      const auto a = stage_actions(baseline[i]), b = stage_actions(baseline[j]);
      for (ActionId id : a) CHECK(std::find(b.begin(), b.end(), id) == b.end());
    }
  const auto rf = stage_actions(CyberStage::RF);
  for (ActionId id : stage_actions(CyberStage::K)) CHECK(std::find(rf.begin(), rf.end(), id) == rf.end());
  for (ActionId id : {ActionId::CredentialConfirm, ActionId::CredentialDisconfirm}) {
    for (CyberStage s : baseline) {
      const auto set = stage_actions(s);
      CHECK(std::find(set.begin(), set.end(), id) == set.end());
    }
  }
}

TEST_CASE("available actions follow the host stage") {
  Bench b({0.5, 0.5, 100});
  const HostId h = 0;
  CHECK(available_actions(b.agent, b.world, h) == stage_actions(CyberStage::K));
  b.agent.view(h).stage = CyberStage::S;
  CHECK(available_actions(b.agent, b.world, h) == std::vector{ActionId::ServiceExploit});
  b.agent.view(h).stage = CyberStage::RF;
  b.agent.view(h).files_seen = 30;
  b.agent.view(h).creds_seen = static_cast<int>(b.world.host(h).credential_files.size());
  const auto rf = available_actions(b.agent, b.world, h);
  CHECK(std::find(rf.begin(), rf.end(), ActionId::BruteforceCrack) != rf.end());
  CHECK(std::find(rf.begin(), rf.end(), ActionId::PasswordCrack) == rf.end());
  if (b.agent.view(h).creds_seen > 0)
    CHECK(std::find(rf.begin(), rf.end(), ActionId::CredentialConfirm) != rf.end());
  CHECK_THROWS_AS(available_actions(b.agent, b.world, 999), PreconditionError);
}

TEST_CASE("discovery choice rates") {
  Rng rng(17);
  const auto rate = [&](const ChoiceConfig& cfg, double lambda_l) {
    RedAgent a("r", {lambda_l, 0.5, 0}, std::nullopt, 1);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) hits += choose_discovery(a, cfg, rng) == ActionId::AggressiveDiscovery;
    return hits / 10000.0;
  };
  CHECK(std::abs(rate(calibrated(), 0.5) - 0.66) < 0.02);
  CHECK(std::abs(rate(calibrated(), 1.51) - 0.33) < 0.02);
  ChoiceConfig equal;
  equal.aggressive = Prospect::sure(1.0);
  equal.stealth = Prospect::sure(1.0);
  CHECK(std::abs(rate(equal, 0.9) - 0.5) < 0.02);
}

TEST_CASE("crack target choice") {
  Rng rng(23);
  RedAgent a("r", {0.5, 0.5, 798.0}, std::nullopt, 1);
  const std::vector<CrackCandidate> three = {{{0, 0}, 5.0}, {{0, 1}, 5.0}, {{0, 2}, 5.0}};
  for (int i = 0; i < 3; ++i) a.record_attempt({0, 2});
  int third = 0;
  for (int i = 0; i < 10000; ++i) third += choose_crack_target(a, three, rng).index == 2;
  CHECK(std::abs(third / 10000.0 - 2399.0 / 2409.0) < 0.01);

  RedAgent fresh("r", {0.5, 0.5, 798.0}, std::nullopt, 1);
  std::array<int, 3> counts{};
  for (int i = 0; i < 9000; ++i) ++counts[static_cast<std::size_t>(choose_crack_target(fresh, three, rng).index)];
  for (int c : counts) CHECK(std::abs(c / 9000.0 - 1.0 / 3) < 0.02);

  RedAgent flat("r", {0.5, 0.5, 0.0}, std::nullopt, 1);
  for (int i = 0; i < 5; ++i) flat.record_attempt({0, 0});
  const std::vector<CrackCandidate> weighted = {{{0, 0}, 1.0}, {{0, 1}, 3.0}, {{0, 2}, 6.0}};
  counts = {};
  for (int i = 0; i < 10000; ++i) ++counts[static_cast<std::size_t>(choose_crack_target(flat, weighted, rng).index)];
  CHECK(std::abs(counts[0] / 10000.0 - 0.1) < 0.02);
  CHECK(std::abs(counts[1] / 10000.0 - 0.3) < 0.02);
  CHECK(std::abs(counts[2] / 10000.0 - 0.6) < 0.02);

  CHECK_THROWS_AS(choose_crack_target(a, {}, rng), PreconditionError);
}

TEST_CASE("credential checks confirm at the agent's rate") {
  Bench b({0.5, 0.79, 0});
  HostId h = -1;
  for (const auto& host : b.world.hosts)
    if (!host.credential_files.empty()) h = host.id;
  REQUIRE(h >= 0);
  b.agent.view(h).stage = CyberStage::RF;
  b.agent.view(h).creds_seen = 1;
  Rng rng(31);
  int confirms = 0, transitions = 0;
  for (int i = 0; i < 10000; ++i) {
    RedAgent fresh("r", {0.5, 0.79, 0}, std::nullopt, b.world.hosts.size());
    fresh.view(h) = b.agent.view(h);
    const ActionRecord rec = check_credential(fresh, b.world, {h, 0}, 0, rng);
    const bool confirm = rec.action == ActionId::CredentialConfirm;
    confirms += confirm;
    CHECK((rec.outcome == Outcome::Confirm) == confirm);
    CHECK(fresh.credential_status({h, 0}) ==
          (confirm ? CredentialStatus::Trusted : CredentialStatus::Distrusted));
    transitions += rec.stage_before == CyberStage::RF && rec.stage_after == CyberStage::RC;
  }
  CHECK(std::abs(confirms / 10000.0 - 0.79) < 0.02);
  CHECK(transitions == confirms);

  b.agent.view(h).stage = CyberStage::U;
  CHECK_THROWS_AS(check_credential(b.agent, b.world, {h, 0}, 0, rng), PreconditionError);
  b.agent.view(h).stage = CyberStage::RF;
  CHECK_THROWS_AS(check_credential(b.agent, b.world, {h, 5}, 0, rng), PreconditionError);
}

TEST_CASE("an agent that never confirms never trusts or uses passwords") {
  Bench b({0.5, 0.0, 0});
  HostId h = -1;
  for (const auto& host : b.world.hosts)
    if (!host.credential_files.empty()) h = host.id;
  REQUIRE(h >= 0);
  HostView& v = b.agent.view(h);
  v.stage = CyberStage::RF;
  v.files_seen = static_cast<int>(b.world.host(h).files.size());
  v.creds_seen = static_cast<int>(b.world.host(h).credential_files.size());
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto rec = check_credential(b.agent, b.world, {h, i % v.creds_seen}, i, rng);
    CHECK(rec.action == ActionId::CredentialDisconfirm);
  }
  CHECK(b.agent.stage(h) == CyberStage::RF);
  const auto actions = available_actions(b.agent, b.world, h);
  CHECK(std::find(actions.begin(), actions.end(), ActionId::PasswordCrack) == actions.end());
}

TEST_CASE("first record of a fresh agent is a stage-K action") {
  ScenarioConfig quiet;
  quiet.policy.noise_probability = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto r = run_episode(quiet, BiasState::from_index(static_cast<int>(seed % 8)), calibrated(), seed);
    REQUIRE_FALSE(r.log.records.empty());
    const ActionId first = r.log.records.front().action;
    CHECK((first == ActionId::AggressiveDiscovery || first == ActionId::StealthDiscovery));
    CHECK(r.log.records.front().step == 0);
  }
}

TEST_CASE("red step is a no-op while busy") {
  Bench b({0.5, 0.5, 0});
  Rng rng(2);
  const PolicyConfig policy;
  const auto first = red_step(b.agent, b.world, calibrated(), policy, rng);
  REQUIRE(first);
  const int cost = action_kind(first->action).time_cost;
  for (int t = 1; t < cost; ++t) {
    b.world.advance_to(t);
    CHECK_FALSE(red_step(b.agent, b.world, calibrated(), policy, rng));
  }
  b.world.advance_to(cost);
  CHECK(red_step(b.agent, b.world, calibrated(), policy, rng));
}

TEST_CASE("green events follow the rate and leave the world untouched") {
  Rng wr(8);
  WorldState w = generate_network(ScenarioConfig{}, wr);
  const std::string before = world_to_json(w);
  Rng rng(3);
  int none = 0, all = 0;
  for (int i = 0; i < 1000; ++i) {
    none += green_step(w, 0.0, rng).has_value();
    all += green_step(w, 1.0, rng).has_value();
  }
  CHECK(none == 0);
  CHECK(all == 1000);
  CHECK(world_to_json(w) == before);
}

TEST_CASE("property: episodes are bitwise deterministic under a fixed seed") {
  ScenarioConfig c;
  c.trigger.enabled = true;
  for (int s = 0; s < 8; ++s) {
    const auto a = run_episode(c, BiasState::from_index(s), calibrated(), 1000 + s);
    const auto b = run_episode(c, BiasState::from_index(s), calibrated(), 1000 + s);
    CHECK(a.log == b.log);
    CHECK(a.label.params.lambda_l == b.label.params.lambda_l);
    CHECK(world_to_json(a.world) == world_to_json(b.world));
  }
  const auto x = run_episode(ScenarioConfig{}, BiasState::from_index(0), calibrated(), 1);
  const auto y = run_episode(ScenarioConfig{}, BiasState::from_index(0), calibrated(), 2);
  CHECK_FALSE(x.log == y.log);
}

TEST_CASE("high sunk cost with the trigger raises the per-file attempt count") {
  ScenarioConfig c;
  c.trigger.enabled = true;
  std::vector<int> low, high;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    low.push_back(max_attempts(run_episode(c, BiasState::from_index(4), calibrated(), seed).log));
    high.push_back(max_attempts(run_episode(c, BiasState::from_index(5), calibrated(), seed).log));
  }
  CHECK(median(high) > median(low));
}

TEST_CASE("aggressive share converges to the integrated choice probability") {
  // Oracle: average of the choice probability at each episode's own draw.
  for (int state : {0, 4}) {
    int aggressive = 0, discoveries = 0;
    double expected = 0.0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
      const auto r = run_episode(ScenarioConfig{}, BiasState::from_index(state), calibrated(), 50000 + i);
      int a = 0, d = 0;
      for (const auto& rec : r.log.records) {
        a += rec.action == ActionId::AggressiveDiscovery;
        d += rec.action == ActionId::AggressiveDiscovery || rec.action == ActionId::StealthDiscovery;
      }
      aggressive += a;
      discoveries += d;
      expected += d * aggressive_probability(calibrated(), r.label.params.lambda_l);
    }
    CHECK(std::abs(static_cast<double>(aggressive) / discoveries - expected / discoveries) < 0.03);
  }
}

TEST_CASE("property: stage machine invariants over 1000 fuzzed episodes") {
  Rng fuzz(20240601);
  int checked = 0;
  for (int e = 0; e < 1000; ++e) {
    ScenarioConfig c;
    c.user_hosts.min = fuzz.uniform_int(0, 4);
    c.user_hosts.max = c.user_hosts.min + fuzz.uniform_int(0, 6);
    c.server_hosts.min = fuzz.uniform_int(1, 3);
    c.server_hosts.max = c.server_hosts.min + fuzz.uniform_int(0, 3);
    c.services_per_host.min = fuzz.uniform_int(1, 6);
    c.services_per_host.max = c.services_per_host.min + fuzz.uniform_int(0, 6);
    c.files_per_host = fuzz.uniform_int(0, 30);
    c.credential_probability = fuzz.uniform();
    c.decoy_credentials_per_host = {0, fuzz.uniform_int(0, 5)};
    c.horizon = fuzz.uniform_int(50, 600);
    c.policy.noise_probability = fuzz.uniform(0.0, 0.2);
    c.trigger.enabled = fuzz.bernoulli(0.5);
    c.trigger.fire_step = fuzz.uniform_int(0, c.horizon - 1);
    c.trigger.fake_fraction = fuzz.uniform();
    c.trigger.lure_files = fuzz.uniform_int(0, 40);

    const BiasState state = BiasState::from_index(fuzz.uniform_int(0, 7));
    const auto r = run_episode(c, state, calibrated(), fuzz.engine()());
    const auto& recs = r.log.records;

    CHECK(recs.size() <= static_cast<std::size_t>(c.horizon));
    std::map<std::string, CyberStage> stage;
    std::map<std::string, int> attempts;
    int cracking = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto& rec = recs[i];
      CHECK(rec.step < c.horizon);
      if (i > 0) {
        // The agent is occupied for the cost of its previous action.
        CHECK(rec.step - recs[i - 1].step >= action_kind(recs[i - 1].action).time_cost);
      }
      const auto allowed = stage_actions(rec.stage_before);
      CHECK(std::find(allowed.begin(), allowed.end(), rec.action) != allowed.end());

      // Stages only move forward, one edge at a time, and are continuous per host.
      const auto it = stage.find(rec.host);
      CHECK(rec.stage_before == (it == stage.end() ? CyberStage::K : it->second));
      CHECK(rank(rec.stage_after) >= rank(rec.stage_before));
      CHECK(rank(rec.stage_after) - rank(rec.stage_before) <= 1);
      if (rec.stage_after != rec.stage_before) {
        using enum ActionId;
        switch (rec.stage_before) {
          case CyberStage::K: CHECK((rec.action == AggressiveDiscovery || rec.action == StealthDiscovery)); break;
          case CyberStage::S: CHECK(rec.action == ServiceExploit); break;
          case CyberStage::U: CHECK(rec.action == PrivilegeEscalate); break;
          case CyberStage::RD: CHECK(rec.action == FilesDiscovery); break;
          case CyberStage::RF: CHECK(rec.action == CredentialConfirm); break;
          case CyberStage::RC: FAIL("no stage follows RC"); break;
        }
      }
      stage[rec.host] = rec.stage_after;

      // For baseline stages the action alone determines the stage.
      switch (rec.action) {
        case ActionId::AggressiveDiscovery:
        case ActionId::StealthDiscovery:
        case ActionId::DecoyDetection: CHECK(rec.stage_before == CyberStage::K); break;
        case ActionId::ServiceExploit: CHECK(rec.stage_before == CyberStage::S); break;
        case ActionId::PrivilegeEscalate: CHECK(rec.stage_before == CyberStage::U); break;
        case ActionId::CredentialConfirm:
        case ActionId::CredentialDisconfirm:
          CHECK(rank(rec.stage_before) >= rank(CyberStage::RF));
          break;
        default: break;
      }
      if (is_cracking(rec.action)) {
        ++attempts[rec.host + "/" + rec.target];
        ++cracking;
      }
    }

    // c(z) equals the cracking records on z.
    std::map<std::string, int> counted;
    for (const auto& [key, n] : r.agent.attempt_counts()) {
      const Host& h = r.world.host(key.host);
      counted[h.name + "/" + h.files[static_cast<std::size_t>(key.index)].name] = n;
    }
    CHECK(counted == attempts);
    CHECK(extract_features(r.log).f_max <= cracking);

    // Files are never removed.
    for (const auto& h : r.world.hosts) CHECK(h.files.size() >= static_cast<std::size_t>(c.files_per_host));
    ++checked;
  }
  CHECK(checked == 1000);
}

}  // TEST_SUITE
