#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "psyborg/decision_tree.hpp"
#include "psyborg/error.hpp"
#include "psyborg/inference.hpp"

using namespace psyborg;
using doctest::Approx;

namespace {

const ChoiceConfig& calibrated() {
  static const ChoiceConfig cfg = calibrate_choice();
  return cfg;
}

const EmissionTable& default_emissions() {
  static const EmissionTable em = compute_emissions(ParamDistributionTable::defaults(), calibrated());
  return em;
}

ActionRecord rec(ActionId id, std::string host = "h0", std::string target = "") {
  ActionRecord r;
  r.action = id;
  r.host = std::move(host);
  r.target = std::move(target);
  return r;
}

ActionSequence observations(const std::vector<Observable>& us) {
  ActionSequence seq;
  for (Observable u : us) {
    switch (u) {
      case Observable::Aggressive: seq.records.push_back(rec(ActionId::AggressiveDiscovery)); break;
      case Observable::Stealth: seq.records.push_back(rec(ActionId::StealthDiscovery)); break;
      case Observable::Confirm: seq.records.push_back(rec(ActionId::CredentialConfirm)); break;
      case Observable::Disconfirm: seq.records.push_back(rec(ActionId::CredentialDisconfirm)); break;
    }
  }
  return seq;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

FeatureVector fv(double ua, double uc = 0.5, int fmax = 0) {
  FeatureVector f;
  f.p_hat_ua = ua;
  f.p_hat_uc = uc;
  f.f_max = fmax;
  return f;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("default emissions reproduce the reference table") {
  const EmissionTable ref = reference_emissions();
  for (BiasState s : BiasState::all()) {
    const auto& got = default_emissions()[s];
    const auto& want = ref[s];
    CHECK(std::abs(got.p_ua - want.p_ua) <= 0.02);
    CHECK(std::abs(got.p_us - want.p_us) <= 0.02);
    CHECK(std::abs(got.p_uc - want.p_uc) <= 0.01);
    CHECK(std::abs(got.p_ud - want.p_ud) <= 0.01);
    CHECK(got.p_ua + got.p_us == Approx(1.0));
  }
  CHECK(ref[BiasState::from_index(0)].p_ua == 0.66);
  CHECK(ref[BiasState::from_index(4)].p_ua == 0.33);
  CHECK(ref[BiasState::from_index(2)].p_uc == 0.79);
  CHECK(ref[BiasState::from_index(1)].p_ud == 0.81);
}

TEST_CASE("point-mass distributions evaluate the integrand at the mean") {
  const ParamDistributionTable table({0.5, 0.0}, {1.51, 0.0}, {0.19, 0.0}, {0.79, 0.0}, {201, 0}, {798, 0});
  const EmissionTable em = compute_emissions(table, calibrated(), 16);
  CHECK(em[BiasState::from_index(0)].p_ua == aggressive_probability(calibrated(), 0.5));
  CHECK(em[BiasState::from_index(7)].p_ua == aggressive_probability(calibrated(), 1.51));
  CHECK(em[BiasState::from_index(2)].p_uc == 0.79);
  CHECK(em[BiasState::from_index(0)].p_uc == 0.19);
}

TEST_CASE("emission inputs are validated") {
  CHECK_THROWS_AS(compute_emissions(ParamDistributionTable::defaults(), calibrated(), 15), ConfigError);
  CHECK_THROWS_AS(ParamDistributionTable({0.5, -0.1}, {1.51, 0.04}, {0.19, 0.01}, {0.79, 0.01}, {201, 1764},
                                         {798, 1521}),
                  ConfigError);
  std::array<EmissionRow, 8> rows{};
  rows[3] = {0.7, 0.7, 0.5, 0.5};
  CHECK_THROWS_AS(EmissionTable{rows}, ConfigError);
}

TEST_CASE("property: quadrature converges between 64 and 256 nodes") {
  const auto a = compute_emissions(ParamDistributionTable::defaults(), calibrated(), 64);
  const auto b = compute_emissions(ParamDistributionTable::defaults(), calibrated(), 256);
  for (BiasState s : BiasState::all()) {
    CHECK(std::abs(a[s].p_ua - b[s].p_ua) < 1e-6);
    CHECK(std::abs(a[s].p_uc - b[s].p_uc) < 1e-6);
  }
}

TEST_CASE("property: Monte Carlo agrees with the quadrature within three standard errors") {
  std::mt19937_64 gen(99);
  const auto& table = ParamDistributionTable::defaults();
  for (int index : {0, 4}) {
    const BiasState s = BiasState::from_index(index);
    std::normal_distribution<double> loss(table[s].loss.mean, std::sqrt(table[s].loss.variance));
    std::normal_distribution<double> conf(table[s].confirmation.mean, std::sqrt(table[s].confirmation.variance));
    const int n = 1000000;
    double sa = 0, sa2 = 0, sc = 0, sc2 = 0;
    for (int i = 0; i < n; ++i) {
      const double pa = aggressive_probability(calibrated(), loss(gen));
      const double pc = std::clamp(conf(gen), 0.01, 0.99);
      sa += pa;
      sa2 += pa * pa;
      sc += pc;
      sc2 += pc * pc;
    }
    const double ma = sa / n, mc = sc / n;
    const double se_a = std::sqrt((sa2 / n - ma * ma) / n), se_c = std::sqrt((sc2 / n - mc * mc) / n);
    CHECK(std::abs(ma - default_emissions()[s].p_ua) < 3 * se_a);
    CHECK(std::abs(mc - default_emissions()[s].p_uc) < 3 * se_c);
  }
}

TEST_CASE("clamped normal mean") {
  CHECK(clamped_normal_mean(0.5, 0.0, 0.0, 1.0) == 0.5);
  CHECK(clamped_normal_mean(2.0, 0.0, 0.0, 1.0) == 1.0);
  CHECK(clamped_normal_mean(0.5, 1e-8, 0.0, 1.0) == Approx(0.5));
  // Symmetric clamp of a centered normal keeps the mean.
  CHECK(clamped_normal_mean(0.5, 1.0, 0.0, 1.0) == Approx(0.5));
  CHECK_THROWS_AS(clamped_normal_mean(0.5, -1.0, 0.0, 1.0), ConfigError);
}

TEST_CASE("one confirm observation from the uniform prior") {
  const Posterior post = bayes_update(Posterior::uniform(), Observable::Confirm, reference_emissions());
  double high = 0.0;
  for (BiasState s : BiasState::all())
    if (s.confirmation() == BiasLevel::High) high += post[s];
  CHECK(high == Approx(0.79 / (0.79 + 0.19)));
  CHECK(std::abs(high - 0.806) < 5e-4);
}

TEST_CASE("uniform emissions leave the posterior unchanged") {
  const Posterior prior({1, 2, 3, 4, 5, 6, 7, 8});
  const EmissionTable flat;
  for (Observable u : {Observable::Aggressive, Observable::Stealth, Observable::Confirm, Observable::Disconfirm}) {
    const Posterior post = bayes_update(prior, u, flat);
    for (BiasState s : BiasState::all()) CHECK(post[s] == Approx(prior[s]).epsilon(1e-15));
  }
}

TEST_CASE("property: bayes updates stay normalized and commute") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 8> w{};
    for (double& x : w) x = rng.uniform(0.0, 1.0) + 1e-9;
    std::array<EmissionRow, 8> rows{};
    for (auto& r : rows) {
      r.p_ua = rng.uniform(0.01, 0.99);
      r.p_us = 1 - r.p_ua;
      r.p_uc = rng.uniform(0.01, 0.99);
      r.p_ud = 1 - r.p_uc;
    }
    const EmissionTable em(rows);
    std::vector<Observable> us;
    for (int i = 0; i < 30; ++i) us.push_back(static_cast<Observable>(rng.uniform_int(0, 3)));

    Posterior p{w};
    for (Observable u : us) {
      p = bayes_update(p, u, em);
      double total = 0.0;
      for (double x : p.probabilities()) {
        CHECK(x >= 0.0);
        total += x;
      }
      CHECK(total == Approx(1.0).epsilon(1e-12));
    }
    std::shuffle(us.begin(), us.end(), rng.engine());
    const Posterior q = infer_posterior(observations(us), em, Posterior{w});
    for (BiasState s : BiasState::all()) CHECK(q[s] == Approx(p[s]).epsilon(1e-9));
  }
}

TEST_CASE("zero likelihood and invalid posteriors are errors") {
  std::array<EmissionRow, 8> rows{};
  for (auto& r : rows) r = {0.0, 1.0, 0.5, 0.5};
  CHECK_THROWS_AS(bayes_update(Posterior::uniform(), Observable::Aggressive, EmissionTable(rows)),
                  PreconditionError);
  CHECK_THROWS_AS(Posterior({0, 0, 0, 0, 0, 0, 0, 0}), PreconditionError);
  CHECK_THROWS_AS(Posterior({1, -1, 0, 0, 0, 0, 0, 0}), PreconditionError);
}

TEST_CASE("infer_posterior skips non-observable records and records a trace") {
  ActionSequence seq = observations({Observable::Confirm, Observable::Aggressive});
  seq.records.insert(seq.records.begin() + 1, rec(ActionId::BruteforceCrack, "h0", "f"));
  seq.records.push_back(rec(ActionId::Impact));
  seq.background.push_back({0, "green_0", BackgroundKind::Login, "h0", "user"});
  std::vector<Posterior> trace;
  const Posterior p = infer_posterior(seq, default_emissions(), Posterior::uniform(), &trace);
  CHECK(trace.size() == 2u);
  CHECK(trace.back().probabilities() == p.probabilities());
  CHECK(observable_of(ActionId::Impact) == std::nullopt);
  CHECK(observable_of(ActionId::CredentialDisconfirm) == Observable::Disconfirm);
}

TEST_CASE("MAP ties go to the lowest index") {
  CHECK(map_state(Posterior({1, 0, 0, 0, 0, 0, 0, 0})) == BiasState::from_index(0));
  CHECK(map_state(Posterior({1, 1, 0, 0, 0, 0, 0, 0})) == BiasState::from_index(0));
  CHECK(map_state(Posterior({0, 0, 0, 1, 0, 0, 0, 1})) == BiasState::from_index(3));
  CHECK(map_identifiable(Posterior({0, 0, 1, 1, 1, 1, 0, 0})) == 1);
  const auto id = Posterior({1, 1, 2, 2, 3, 3, 4, 4}).identifiable();
  CHECK(id[3] == Approx(0.4));
}

TEST_CASE("long simulated sequences recover the identifiable class") {
  // theta6: high loss aversion, high confirmation, low sunk cost.
  ScenarioConfig c;
  int correct = 0;
  const int n = 40;
  for (int i = 0; i < n; ++i) {
    const auto r = run_episode(c, BiasState::from_index(6), calibrated(), 4242 + i);
    const BiasState map = map_state(infer_posterior(r.log, default_emissions()));
    correct += map.identifiable_index() == 3;
  }
  CHECK(correct >= 0.9 * n);
}

TEST_CASE("property: posterior on the true class grows with sequence length") {
  const auto& table = ParamDistributionTable::defaults();
  for (BiasState s : BiasState::all()) {
    const BiasParams means{table[s].loss.mean, table[s].confirmation.mean, table[s].sunk_cost.mean};
    std::vector<double> at20, at200;
    for (int seed = 0; seed < 100; ++seed) {
      const auto r = run_episode(ScenarioConfig{}, means, calibrated(), 9000 + seed);
      const auto prefix = [&](std::size_t len) {
        ActionSequence p;
        p.records.assign(r.log.records.begin(),
                         r.log.records.begin() + static_cast<long>(std::min(len, r.log.records.size())));
        return infer_posterior(p, default_emissions()).identifiable()[static_cast<std::size_t>(s.identifiable_index())];
      };
      at20.push_back(prefix(20));
      at200.push_back(prefix(200));
    }
    CHECK(median(at200) >= median(at20));
  }
}

TEST_CASE("feature extraction examples") {
  ActionSequence seq;
  for (int i = 0; i < 66; ++i) seq.records.push_back(rec(ActionId::AggressiveDiscovery));
  for (int i = 0; i < 34; ++i) seq.records.push_back(rec(ActionId::StealthDiscovery));
  CHECK(extract_features(seq).p_hat_ua == Approx(0.66));
  CHECK(extract_features(seq).p_hat_uc == 0.5);

  const FeatureVector empty = extract_features(ActionSequence{});
  CHECK(empty.p_hat_ua == 0.5);
  CHECK(empty.p_hat_uc == 0.5);
  CHECK(empty.f_max == 0);

  ActionSequence cracks;
  cracks.records.push_back(rec(ActionId::BruteforceCrack, "h0", "a"));
  cracks.records.push_back(rec(ActionId::BruteforceCrack, "h0", "b"));
  for (int i = 0; i < 15; ++i)
    cracks.records.push_back(rec(i % 2 ? ActionId::PasswordCrack : ActionId::BruteforceCrack, "h1", "c"));
  CHECK(extract_features(cracks).f_max == 15);
  // Same file name on another host is a different file.
  cracks.records.push_back(rec(ActionId::BruteforceCrack, "h2", "c"));
  CHECK(extract_features(cracks).f_max == 15);

  const FeatureVector f = fv(0.1, 0.2, 3);
  CHECK(f[0] == 0.1);
  CHECK(f[1] == 0.2);
  CHECK(f[2] == 3.0);
  CHECK_THROWS_AS(f[3], PreconditionError);
}

TEST_CASE("property: features ignore background and non-observable actions") {
  ScenarioConfig c;
  c.trigger.enabled = true;
  for (int seed = 0; seed < 50; ++seed) {
    const auto r = run_episode(c, BiasState::from_index(seed % 8), calibrated(), 700 + seed);
    ActionSequence stripped;
    for (const auto& x : r.log.records)
      if (observable_of(x.action) || is_cracking(x.action)) stripped.records.push_back(x);
    const FeatureVector a = extract_features(r.log), b = extract_features(stripped);
    CHECK(a.p_hat_ua == b.p_hat_ua);
    CHECK(a.p_hat_uc == b.p_hat_uc);
    CHECK(a.f_max == b.f_max);
    CHECK(a.f_max <= static_cast<int>(stripped.records.size()));

    ActionSequence noisy = r.log;
    for (int i = 0; i < 100; ++i) {
      noisy.background.push_back({i, "green_0", BackgroundKind::FileAccess, "h0", "x"});
      noisy.records.push_back(rec(ActionId::DegradeService));
    }
    CHECK(extract_features(noisy).p_hat_ua == a.p_hat_ua);
    CHECK(extract_features(noisy).f_max == a.f_max);
  }
}

TEST_CASE("tree on a separable toy set") {
  std::vector<LabeledFeatures> rows;
  for (int i = 0; i < 20; ++i) rows.push_back({fv(0.2, 0.1 * (i % 10), i), 0});
  for (int i = 0; i < 20; ++i) rows.push_back({fv(0.8, 0.1 * (i % 10), i), 1});
  const DecisionTree t = train_tree(rows);
  CHECK(t.depth() == 1);
  CHECK(t.nodes()[0].feature == 0);
  CHECK(t.nodes()[0].threshold == Approx(0.5));
  CHECK(t.predict(fv(0.3)) == 0);
  CHECK(t.predict(fv(0.7)) == 1);
  // A value exactly at the threshold goes left.
  CHECK(t.predict(fv(t.nodes()[0].threshold)) == 0);
}

TEST_CASE("single-class data gives a constant depth-0 tree") {
  std::vector<LabeledFeatures> rows;
  for (int i = 0; i < 30; ++i) rows.push_back({fv(0.01 * i, 0.5, i), 1});
  const DecisionTree t = train_tree(rows);
  CHECK(t.depth() == 0);
  CHECK(t.predict(fv(0.9, 0.1, 100)) == 1);
  CHECK(DecisionTree{}.predict(fv(0.3)) == 0);
  CHECK_THROWS_AS(train_tree(std::span<const LabeledFeatures>{}), PreconditionError);
  CHECK_THROWS_AS(train_tree(rows, {6, 2, 0}), ConfigError);
}

TEST_CASE("tree options bound depth and leaf size") {
  Rng rng(4);
  std::vector<LabeledFeatures> rows;
  for (int i = 0; i < 400; ++i) rows.push_back({fv(rng.uniform(), rng.uniform(), rng.uniform_int(0, 40)), rng.uniform_int(0, 1)});
  for (int depth : {0, 1, 3, 6}) CHECK(train_tree(rows, {depth, 2, 1}).depth() <= depth);

  const DecisionTree t = train_tree(rows, {12, 2, 25});
  std::vector<int> per_leaf(t.nodes().size(), 0);
  for (const auto& r : rows) {
    int n = 0;
    while (!t.nodes()[static_cast<std::size_t>(n)].is_leaf()) {
      const auto& node = t.nodes()[static_cast<std::size_t>(n)];
      n = r.features[node.feature] <= node.threshold ? node.left : node.right;
    }
    ++per_leaf[static_cast<std::size_t>(n)];
  }
  for (std::size_t i = 0; i < per_leaf.size(); ++i) {
    const bool leaf = t.nodes()[i].is_leaf();
    CHECK((!leaf || per_leaf[i] >= 25));  // every leaf is reachable and large enough
  }
}

TEST_CASE("property: tree training is deterministic and training accuracy dominates held-out") {
  ScenarioConfig c;
  std::vector<std::pair<FeatureVector, BiasState>> train, test;
  for (int i = 0; i < 320; ++i) {
    const BiasState s = BiasState::from_index(i % 8);
    const auto r = run_episode(c, s, calibrated(), 31000 + i);
    (i < 240 ? train : test).push_back({extract_features(r.log), s});
  }
  const BiasTreeModel a = BiasTreeModel::train(train), b = BiasTreeModel::train(train);
  CHECK(a.to_json() == b.to_json());
  const auto accuracy = [&](const auto& rows) {
    int ok = 0;
    for (const auto& [f, s] : rows) ok += a.classify(f).identifiable_index() == s.identifiable_index();
    return static_cast<double>(ok) / static_cast<double>(rows.size());
  };
  CHECK(accuracy(train) >= accuracy(test));

  const BiasTreeModel back = BiasTreeModel::from_json(a.to_json());
  CHECK(back.to_json() == a.to_json());
  for (const auto& [f, s] : test) CHECK(back.classify(f) == a.classify(f));
  CHECK_THROWS_AS(BiasTreeModel::from_json("{\"schema\":\"x\"}"), IoError);
  CHECK_THROWS_AS(DecisionTree({TreeNode{0, 0.5, 5, 6, 0}}), IoError);
}

TEST_CASE("emission table JSON round trip") {
  const std::string text = emissions_to_json(default_emissions());
  const EmissionTable back = emissions_from_json(text);
  for (BiasState s : BiasState::all()) {
    CHECK(back[s].p_ua == default_emissions()[s].p_ua);
    CHECK(back[s].p_uc == default_emissions()[s].p_uc);
  }
  CHECK_THROWS_AS(emissions_from_json("[]"), IoError);
  CHECK_THROWS_AS(emissions_from_json("{\"schema\":\"psyborg.emissions\",\"schema_version\":1,\"rows\":[]}"),
                  IoError);
}

}  // TEST_SUITE
