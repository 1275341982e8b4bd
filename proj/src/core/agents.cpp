#include "psyborg/agents.hpp"

#include <algorithm>

#include "psyborg/error.hpp"

namespace psyborg {

namespace {

constexpr std::array<ActionKind, 12> kActions = {{
    {ActionId::AggressiveDiscovery, "Aggressive service discovery", 1},
    {ActionId::StealthDiscovery, "Stealth service discovery", 3},
    {ActionId::DecoyDetection, "Decoy detection", 2},
    {ActionId::ServiceExploit, "Service exploit", 4},
    {ActionId::PrivilegeEscalate, "Privilege escalate", 2},
    {ActionId::DegradeService, "Degrade service", 2},
    {ActionId::Impact, "Impact", 2},
    {ActionId::FilesDiscovery, "Files discovery", 1},
    {ActionId::BruteforceCrack, "Bruteforce file cracking", 3},
    {ActionId::PasswordCrack, "Password-based file cracking", 1},
    {ActionId::CredentialConfirm, "Credential file confirming", 1},
    {ActionId::CredentialDisconfirm, "Credential file disconfirming", 1},
}};

constexpr std::array<std::string_view, 6> kStageNames = {"K", "S", "U", "RD", "RF", "RC"};
constexpr std::array<std::string_view, 4> kOutcomeNames = {"success", "failure", "confirm",
                                                           "disconfirm"};

/// RF and RC share a rank: both are working stages on a rooted host.
int rank(CyberStage s) { return std::min(static_cast<int>(s), static_cast<int>(CyberStage::RF)); }

bool rooted(CyberStage s) { return s >= CyberStage::RD; }

struct Context {
  RedAgent& agent;
  WorldState& world;
  const ChoiceConfig& cfg;
  const PolicyConfig& policy;
  Rng& rng;
  int step;

  bool rediscovery_due(HostId h) const {
    const HostView& v = agent.view(h);
    return v.last_files_discovery < 0 || step - v.last_files_discovery >= policy.rediscovery_interval;
  }

  std::optional<CredentialKey> unchecked_credential(HostId h) const {
    const HostView& v = agent.view(h);
    for (int c = 0; c < v.creds_seen; ++c)
      if (agent.credential_status({h, c}) == CredentialStatus::Unchecked) return CredentialKey{h, c};
    return std::nullopt;
  }

  std::vector<CrackCandidate> candidates(HostId h) const {
    std::vector<CrackCandidate> out;
    const HostView& v = agent.view(h);
    const Host& host = world.host(h);
    for (int f = 0; f < v.files_seen; ++f) {
      const FileRecord& file = host.files[static_cast<std::size_t>(f)];
      if (file.is_protected && !file.cracked) out.push_back({{h, f}, file.value});
    }
    return out;
  }

  double candidate_value(HostId h) const {
    double total = 0.0;
    for (const auto& c : candidates(h)) total += c.value;
    return total;
  }

  ActionRecord record(ActionId action, HostId h, std::string target, Outcome outcome,
                      CyberStage before) const {
    return {step, agent.id(), action, world.host(h).name, std::move(target), outcome, before,
            agent.stage(h)};
  }
};

/// Trusted credential (anywhere) with an untried mapping for the file.
std::optional<CredentialKey> usable_credential(const RedAgent& agent, const WorldState& world,
                                               FileKey file) {
  const std::string& name = world.host(file.host).files[static_cast<std::size_t>(file.index)].name;
  for (const Host& h : world.hosts) {
    const int seen = agent.view(h.id).creds_seen;
    for (int c = 0; c < seen; ++c) {
      const CredentialKey key{h.id, c};
      if (agent.credential_status(key) != CredentialStatus::Trusted) continue;
      if (!h.credential_files[static_cast<std::size_t>(c)].find(name)) continue;
      if (agent.password_failed(file, key)) continue;
      return key;
    }
  }
  return std::nullopt;
}

ActionRecord files_discovery(Context& ctx, HostId h) {
  HostView& v = ctx.agent.view(h);
  const Host& host = ctx.world.host(h);
  const CyberStage before = v.stage;
  v.files_seen = static_cast<int>(host.files.size());
  v.creds_seen = static_cast<int>(host.credential_files.size());
  v.last_files_discovery = ctx.step;
  if (v.stage == CyberStage::RD && !host.files.empty()) v.stage = CyberStage::RF;
  return ctx.record(ActionId::FilesDiscovery, h, "", Outcome::Success, before);
}

ActionRecord crack(Context& ctx, HostId h) {
  const auto pool = ctx.candidates(h);
  const FileKey target = choose_crack_target(ctx.agent, pool, ctx.rng);
  FileRecord& file = ctx.world.host(h).files[static_cast<std::size_t>(target.index)];
  const CyberStage before = ctx.agent.stage(h);
  ctx.agent.record_attempt(target);

  if (auto cred = usable_credential(ctx.agent, ctx.world, target)) {
    const CredentialFile& cf =
        ctx.world.host(cred->host).credential_files[static_cast<std::size_t>(cred->index)];
    const CrackResult r = attempt_password_crack(file, cf);
    if (r == CrackResult::Failed) ctx.agent.mark_password_failed(target, *cred);
    return ctx.record(ActionId::PasswordCrack, h, file.name,
                      r == CrackResult::Cracked ? Outcome::Success : Outcome::Failure, before);
  }
  const CrackResult r = attempt_bruteforce(file, ctx.rng);
  return ctx.record(ActionId::BruteforceCrack, h, file.name,
                    r == CrackResult::Cracked ? Outcome::Success : Outcome::Failure, before);
}

ActionRecord noise(Context& ctx, HostId h, ActionId id) {
  const CyberStage before = ctx.agent.stage(h);
  std::string target;
  const Host& host = ctx.world.host(h);
  if (id != ActionId::DecoyDetection && !host.services.empty())
    target = host.services[static_cast<std::size_t>(ctx.rng.uniform_int(0, static_cast<int>(host.services.size()) - 1))];
  return ctx.record(id, h, std::move(target), Outcome::Success, before);
}

/// Takes the next action on `h` according to its stage.
ActionRecord act_on(Context& ctx, HostId h) {
  RedAgent& agent = ctx.agent;
  HostView& v = agent.view(h);
  const Host& host = ctx.world.host(h);
  const CyberStage before = v.stage;
  const PolicyConfig& policy = ctx.policy;

  switch (v.stage) {
    case CyberStage::K: {
      if (ctx.rng.bernoulli(policy.noise_probability))
        return noise(ctx, h, ActionId::DecoyDetection);
      const ActionId id = choose_discovery(agent, ctx.cfg, ctx.rng);
      const std::string service = host.services[static_cast<std::size_t>(v.services_known)];
      if (++v.services_known >= static_cast<int>(host.services.size())) v.stage = CyberStage::S;
      return ctx.record(id, h, service, Outcome::Success, before);
    }
    case CyberStage::S: {
      const std::string& service =
          host.services[static_cast<std::size_t>(ctx.rng.uniform_int(0, v.services_known - 1))];
      const bool ok = ctx.rng.bernoulli(policy.exploit_success);
      if (ok) v.stage = CyberStage::U;
      return ctx.record(ActionId::ServiceExploit, h, service,
                        ok ? Outcome::Success : Outcome::Failure, before);
    }
    case CyberStage::U: {
      const bool ok = ctx.rng.bernoulli(policy.escalate_success);
      if (ok) v.stage = CyberStage::RD;
      return ctx.record(ActionId::PrivilegeEscalate, h, "",
                        ok ? Outcome::Success : Outcome::Failure, before);
    }
    case CyberStage::RD:
    case CyberStage::RF:
    case CyberStage::RC:
      break;
  }

  if (ctx.rng.bernoulli(policy.noise_probability))
    return noise(ctx, h, ctx.rng.bernoulli(0.5) ? ActionId::DegradeService : ActionId::Impact);
  if (v.stage == CyberStage::RD || ctx.rediscovery_due(h)) return files_discovery(ctx, h);
  if (auto cred = ctx.unchecked_credential(h))
    return check_credential(agent, ctx.world, *cred, ctx.step, ctx.rng);
  return crack(ctx, h);
}

/// Host the default policy works on next, or none when idle.
std::optional<HostId> select_host(Context& ctx) {
  const auto& hosts = ctx.world.hosts;
  RedAgent& agent = ctx.agent;

  // Least-advanced host first, until every host is rooted and listed.
  std::optional<HostId> least;
  for (const Host& h : hosts) {
    const HostView& v = agent.view(h.id);
    const bool listed = v.stage == CyberStage::RD && v.last_files_discovery >= 0;
    if (rank(v.stage) >= rank(CyberStage::RF) || listed) continue;
    if (!least || rank(v.stage) < rank(agent.stage(*least))) least = h.id;
  }
  if (least) return least;

  for (const Host& h : hosts)
    if (rooted(agent.stage(h.id)) && ctx.unchecked_credential(h.id)) return h.id;

  if (auto w = agent.working_host(); w && !ctx.candidates(*w).empty()) return w;

  std::optional<HostId> best;
  double best_value = 0.0;
  for (const Host& h : hosts) {
    if (!rooted(agent.stage(h.id))) continue;
    const double value = ctx.candidate_value(h.id);
    if (value > best_value) {
      best = h.id;
      best_value = value;
    }
  }
  if (best) {
    agent.set_working_host(best);
    return best;
  }
  agent.set_working_host(std::nullopt);

  // Nothing left to crack: re-list the stalest host once it is due.
  std::optional<HostId> stalest;
  for (const Host& h : hosts) {
    if (!rooted(agent.stage(h.id)) || !ctx.rediscovery_due(h.id)) continue;
    if (!stalest || agent.view(h.id).last_files_discovery < agent.view(*stalest).last_files_discovery)
      stalest = h.id;
  }
  return stalest;
}

}  // namespace

std::string_view to_string(CyberStage stage) { return kStageNames[static_cast<std::size_t>(stage)]; }

std::optional<CyberStage> parse_stage(std::string_view text) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i)
    if (kStageNames[i] == text) return static_cast<CyberStage>(i);
  return std::nullopt;
}

std::string_view to_string(Outcome outcome) { return kOutcomeNames[static_cast<std::size_t>(outcome)]; }

std::optional<Outcome> parse_outcome(std::string_view text) {
  for (std::size_t i = 0; i < kOutcomeNames.size(); ++i)
    if (kOutcomeNames[i] == text) return static_cast<Outcome>(i);
  return std::nullopt;
}

std::string_view to_string(BackgroundKind kind) {
  return kind == BackgroundKind::FileAccess ? "file_access" : "login";
}

const std::array<ActionKind, 12>& action_table() { return kActions; }

const ActionKind& action_kind(ActionId id) { return kActions[static_cast<std::size_t>(id) - 1]; }

ActionId action_from_int(int id) {
  if (id < 1 || id > 12) throw ConfigError("action id out of range: " + std::to_string(id));
  return static_cast<ActionId>(id);
}

std::vector<ActionId> stage_actions(CyberStage stage) {
  using enum ActionId;
  switch (stage) {
    case CyberStage::K: return {AggressiveDiscovery, StealthDiscovery, DecoyDetection};
    case CyberStage::S: return {ServiceExploit};
    case CyberStage::U: return {PrivilegeEscalate};
    case CyberStage::RD: return {DegradeService, Impact, FilesDiscovery};
    case CyberStage::RF:
    case CyberStage::RC:
      return {DegradeService, Impact,        FilesDiscovery,     BruteforceCrack,
              PasswordCrack,  CredentialConfirm, CredentialDisconfirm};
  }
  return {};
}

RedAgent::RedAgent(std::string id, BiasParams params, std::optional<BiasState> state,
                   std::size_t host_count)
    : id_(std::move(id)), params_(params), state_(state), hosts_(host_count) {}

const HostView& RedAgent::view(HostId host) const {
  if (host < 0 || static_cast<std::size_t>(host) >= hosts_.size())
    throw PreconditionError("host unknown to agent: " + std::to_string(host));
  return hosts_[static_cast<std::size_t>(host)];
}

HostView& RedAgent::view(HostId host) {
  return const_cast<HostView&>(static_cast<const RedAgent*>(this)->view(host));
}

int RedAgent::attempts(FileKey file) const {
  auto it = attempts_.find(file);
  return it == attempts_.end() ? 0 : it->second;
}

CredentialStatus RedAgent::credential_status(CredentialKey key) const {
  auto it = credentials_.find(key);
  return it == credentials_.end() ? CredentialStatus::Unchecked : it->second;
}

void RedAgent::set_credential_status(CredentialKey key, CredentialStatus status) {
  credentials_[key] = status;
}

std::vector<ActionId> available_actions(const RedAgent& agent, const WorldState& world,
                                        HostId host) {
  const Host& h = world.host(host);
  const HostView& v = agent.view(host);
  if (!rooted(v.stage) || v.stage == CyberStage::RD) return stage_actions(v.stage);

  using enum ActionId;
  std::vector<ActionId> out = {DegradeService, Impact, FilesDiscovery, BruteforceCrack};
  bool trusted = false;
  bool unchecked = false;
  for (int c = 0; c < v.creds_seen; ++c) {
    const auto status = agent.credential_status({host, c});
    trusted |= status == CredentialStatus::Trusted;
    unchecked |= status == CredentialStatus::Unchecked;
  }
  if (!trusted) {
    // A credential trusted on another host can still cover files here.
    for (int f = 0; f < v.files_seen && !trusted; ++f)
      trusted = !h.files[static_cast<std::size_t>(f)].cracked &&
                usable_credential(agent, world, {host, f}).has_value();
  }
  if (trusted) out.push_back(PasswordCrack);
  if (unchecked) {
    out.push_back(CredentialConfirm);
    out.push_back(CredentialDisconfirm);
  }
  return out;
}

ActionId choose_discovery(const RedAgent& agent, const ChoiceConfig& cfg, Rng& rng) {
  return rng.bernoulli(aggressive_probability(cfg, agent.params().lambda_l))
             ? ActionId::AggressiveDiscovery
             : ActionId::StealthDiscovery;
}

FileKey choose_crack_target(const RedAgent& agent, std::span<const CrackCandidate> candidates,
                            Rng& rng) {
  if (candidates.empty()) throw PreconditionError("no cracking candidates");
  std::vector<double> rewards, sunk;
  rewards.reserve(candidates.size());
  sunk.reserve(candidates.size());
  for (const auto& c : candidates) {
    rewards.push_back(c.value);
    sunk.push_back(static_cast<double>(agent.attempts(c.file)));
  }
  const auto p = target_distribution(rewards, sunk, agent.params().lambda_s);
  return candidates[rng.categorical(p)].file;
}

ActionRecord check_credential(RedAgent& agent, const WorldState& world, CredentialKey cred,
                              int step, Rng& rng) {
  const Host& host = world.host(cred.host);
  HostView& v = agent.view(cred.host);
  if (cred.index < 0 || cred.index >= v.creds_seen)
    throw PreconditionError("credential file not revealed to the agent");
  if (v.stage != CyberStage::RF && v.stage != CyberStage::RC)
    throw PreconditionError("credential checks need a listed, rooted host");

  const CyberStage before = v.stage;
  const Evidence e = confirm_decision(agent.params().lambda_c, rng);
  if (e == Evidence::Confirm) {
    agent.set_credential_status(cred, CredentialStatus::Trusted);
    if (v.stage == CyberStage::RF) v.stage = CyberStage::RC;
  } else {
    agent.set_credential_status(cred, CredentialStatus::Distrusted);
  }
  const bool confirm = e == Evidence::Confirm;
  return {step,
          agent.id(),
          confirm ? ActionId::CredentialConfirm : ActionId::CredentialDisconfirm,
          host.name,
          host.credential_files[static_cast<std::size_t>(cred.index)].name,
          confirm ? Outcome::Confirm : Outcome::Disconfirm,
          before,
          v.stage};
}

std::optional<ActionRecord> red_step(RedAgent& agent, WorldState& world, const ChoiceConfig& cfg,
                                     const PolicyConfig& policy, Rng& rng) {
  const int step = world.clock;
  if (step < agent.busy_until()) return std::nullopt;
  Context ctx{agent, world, cfg, policy, rng, step};
  const auto host = select_host(ctx);
  if (!host) return std::nullopt;
  ActionRecord rec = act_on(ctx, *host);
  agent.occupy(step, action_kind(rec.action).time_cost);
  return rec;
}

std::optional<BackgroundEvent> green_step(const WorldState& world, double rate, Rng& rng) {
  if (world.hosts.empty() || !rng.bernoulli(rate)) return std::nullopt;
  const Host& h =
      world.hosts[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(world.hosts.size()) - 1))];
  BackgroundEvent ev;
  ev.step = world.clock;
  ev.agent = "green_0";
  ev.host = h.name;
  if (rng.bernoulli(0.5) && !h.files.empty()) {
    ev.kind = BackgroundKind::FileAccess;
    ev.target = h.files[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(h.files.size()) - 1))].name;
  } else {
    ev.kind = BackgroundKind::Login;
    ev.target = "user";
  }
  return ev;
}

EpisodeResult run_episode(const ScenarioConfig& scenario, EpisodeSubject subject,
                          const ChoiceConfig& cfg, std::uint64_t seed,
                          const ParamDistributionTable& table) {
  scenario.validate();
  Rng world_rng(episode_stream_seed(seed, EpisodeStream::World));
  Rng param_rng(episode_stream_seed(seed, EpisodeStream::Params));
  Rng red_rng(episode_stream_seed(seed, EpisodeStream::Red));
  Rng green_rng(episode_stream_seed(seed, EpisodeStream::Green));
  Rng trigger_rng(episode_stream_seed(seed, EpisodeStream::Trigger));

  WorldState world = generate_network(scenario, world_rng);
  world.seed = seed;

  EpisodeLabel label;
  label.seed = seed;
  label.scenario_hash = scenario_hash(scenario);
  label.trigger = scenario.trigger.enabled;
  if (const auto* state = std::get_if<BiasState>(&subject)) {
    label.state = *state;
    label.params = sample_params(*state, table, param_rng);
  } else {
    label.params = clamp_params(std::get<BiasParams>(subject));
  }

  RedAgent agent("red_0", label.params, label.state, world.hosts.size());
  ActionSequence log;
  for (int step = 0; step < scenario.horizon; ++step) {
    world.advance_to(step);
    if (scenario.trigger.enabled && step == scenario.trigger.fire_step)
      inject_trigger(world, scenario.trigger, trigger_rng);
    if (auto rec = red_step(agent, world, cfg, scenario.policy, red_rng))
      log.records.push_back(std::move(*rec));
    if (auto ev = green_step(world, scenario.green_rate, green_rng))
      log.background.push_back(std::move(*ev));
  }
  return {std::move(log), std::move(label), std::move(agent), std::move(world)};
}

}  // namespace psyborg
