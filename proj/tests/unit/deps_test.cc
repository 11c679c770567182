// Copyright 2026 The kprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "kprop/agent.h"
#include "kprop/deps.h"
#include "kprop/emulator.h"
#include "kprop/errors.h"
#include "kprop/log_format.h"
#include "support/oracles.h"
#include "support/temp_dir.h"

namespace kprop {
namespace {

using testing::At;
using testing::MakeEntry;
using testing::MakeObject;

ApiObject WithOwner(ApiObject obj, const ApiObject& owner) {
  obj.meta.owner_references.push_back({owner.resource, owner.meta.name, owner.meta.uid});
  return obj;
}

TEST_SUITE("deps") {
  TEST_CASE("owner rule follows ownerReferences") {
    const ApiObject rs = MakeObject("replicasets", "web-abc12", "rs1");
    const ApiObject pod = WithOwner(MakeObject("pods", "web-abc12-xyz98", "p1"), rs);
    const ApiObject stray = MakeObject("pods", "other", "p2");
    const auto rule = DependencyRule::Owner("replicasets", "pods");
    CHECK(MatchesRule(rule, rs, pod));
    CHECK_FALSE(MatchesRule(rule, rs, stray));
  }

  TEST_CASE("name prefix needs the dash and the namespace") {
    const auto rule = DependencyRule::NamePrefix("deployments", "replicasets");
    const ApiObject d = MakeObject("deployments", "web", "d1");
    CHECK(MatchesRule(rule, d, MakeObject("replicasets", "web-abc12", "r1")));
    CHECK_FALSE(MatchesRule(rule, d, MakeObject("replicasets", "webapp-1", "r2")));
    CHECK_FALSE(MatchesRule(rule, d, MakeObject("replicasets", "web", "r3")));
    ApiObject elsewhere = MakeObject("replicasets", "web-abc12", "r4");
    elsewhere.meta.namespace_ = "prod";
    CHECK_FALSE(MatchesRule(rule, d, elsewhere));
  }

  TEST_CASE("label rule needs a non-empty selector subset") {
    const auto rule = DependencyRule::Label("services", "pods");
    ApiObject svc = MakeObject("services", "web", "s1");
    svc.spec["selector"] = {{"app", "web"}};
    CHECK(MatchesRule(rule, svc, MakeObject("pods", "a", "p1", 1, {{"app", "web"}, {"x", "1"}})));
    CHECK_FALSE(MatchesRule(rule, svc, MakeObject("pods", "b", "p2", 1, {{"app", "db"}})));
    CHECK_FALSE(MatchesRule(rule, svc, MakeObject("pods", "c", "p3")));
    svc.spec["selector"] = Value::object();
    CHECK_FALSE(MatchesRule(rule, svc, MakeObject("pods", "a", "p1", 1, {{"app", "web"}})));
    svc.spec.erase("selector");
    CHECK_THROWS_AS(MatchesRule(rule, svc, MakeObject("pods", "a", "p1")), SelectorMissing);
    svc.spec["selector"] = "app=web";
    CHECK_THROWS_AS(MatchesRule(rule, svc, MakeObject("pods", "a", "p1")), SelectorMissing);
  }

  TEST_CASE("selectors can be read from other fields") {
    ApiObject d = MakeObject("deployments", "web", "d1", 1, {{"tier", "front"}});
    d.spec["template"]["labels"] = {{"app", "web"}};
    CHECK(ReadSelector(d, "spec.template.labels") == Labels{{"app", "web"}});
    CHECK(ReadSelector(d, "meta.labels") == Labels{{"tier", "front"}});
    CHECK_THROWS_AS(ReadSelector(d, "status.selector"), SelectorMissing);
  }

  TEST_CASE("rules validate and describe themselves") {
    CHECK(DependencyRule::Owner("replicasets", "pods").Describe() ==
          "Owner(replicasets->pods)");
    CHECK(DependencyRule::Label("services", "pods").Describe().rfind("Label(services->pods", 0) ==
          0);
    CHECK_NOTHROW(DependencyRule::NamePrefix("a", "b").Validate());
    CHECK_THROWS_AS(DependencyRule::Owner("", "pods").Validate(), ConfigError);
    CHECK_THROWS_AS(DependencyRule::Label("services", "pods", "").Validate(), ConfigError);
    CHECK(ParseRuleKind("Label") == DependencyRule::Kind::kLabel);
    CHECK_FALSE(ParseRuleKind("Sibling").has_value());
    CHECK(RuleKindName(DependencyRule::Kind::kNamePrefix) == "NamePrefix");
  }

  TEST_CASE("empty log resolves to no edges") {
    const auto rules = testing::RandomLogGenerator::Rules();
    CHECK(ResolveEdges({}, rules).empty());
  }

  TEST_CASE("a deployment of four replicas yields one plus four owner edges") {
    testing::TempDir dir;
    EmulatorConfig ec;
    ec.seed = 5;
    Emulator emu(ec);
    AgentConfig ac;
    ac.resources = {"deployments", "replicasets", "pods"};
    ac.output_path = dir.File("a.log");
    auto agent = Agent::Start(ac, emu.store());
    ApiObject d;
    d.resource = "deployments";
    d.meta.name = "web";
    d.meta.namespace_ = "default";
    d.spec = {{"replicas", 4}, {"template", {{"labels", {{"app", "web"}}}}}};
    const Uid duid = emu.store().Create(d).meta.uid;
    emu.RunToQuiescence();
    agent->Stop();

    std::vector<LogEntry> entries;
    for (const auto& line : testing::ReadLines(dir.File("a.log"))) {
      entries.push_back(ParseEntry(line));
    }
    const std::vector<DependencyRule> rules = {
        DependencyRule::Owner("deployments", "replicasets"),
        DependencyRule::Owner("replicasets", "pods")};
    const auto edges = ResolveEdges(entries, rules);
    REQUIRE(edges.size() == 5);
    const auto rs = emu.store().List("replicasets");
    REQUIRE(rs.size() == 1);
    std::size_t to_pods = 0;
    for (const auto& e : edges) {
      if (e.rule == 0) {
        CHECK(e.parent_uid == duid);
        CHECK(e.child_uid == rs[0].meta.uid);
      } else {
        CHECK(e.parent_uid == rs[0].meta.uid);
        ++to_pods;
      }
    }
    CHECK(to_pods == 4);
  }

  TEST_CASE("label edges need overlapping lifetimes") {
    const auto rule = DependencyRule::Label("services", "pods");
    ApiObject svc = MakeObject("services", "web", "s1");
    svc.spec["selector"] = {{"app", "web"}};
    ApiObject relabeled = MakeObject("pods", "p", "p1", 2, {{"app", "web"}});
    const ApiObject before = MakeObject("pods", "p", "p1", 1, {{"app", "web"}});
    relabeled.meta.labels = {{"app", "db"}};
    // The pod stopped matching at 100ms; the service appeared at 200ms.
    const std::vector<LogEntry> late = {
        MakeEntry(At(0), Op::kAdd, before),
        MakeEntry(At(100), Op::kUpdate, relabeled, before),
        MakeEntry(At(200), Op::kAdd, svc)};
    CHECK(ResolveEdges(late, std::vector{rule}).empty());
    // Same facts, but the service appears at 100ms: both intervals hold it.
    const std::vector<LogEntry> touching = {
        MakeEntry(At(0), Op::kAdd, before),
        MakeEntry(At(100), Op::kAdd, svc),
        MakeEntry(At(100), Op::kUpdate, relabeled, before)};
    CHECK(ResolveEdges(touching, std::vector{rule}).size() == 1);
  }

  TEST_CASE("random logs agree with the reference resolver") {
    const auto rules = testing::RandomLogGenerator::Rules();
    std::vector<std::size_t> per_rule(rules.size());
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
      testing::RandomLogGenerator gen(seed);
      const auto entries = gen.Generate(200);
      const auto got = ResolveEdges(entries, rules);
      const auto want = testing::OracleEdges(entries, rules);
      CHECK_MESSAGE(std::set<ObjectEdge>(got.begin(), got.end()) == want, "seed " << seed);
      CHECK(std::is_sorted(got.begin(), got.end()));
      CHECK(std::adjacent_find(got.begin(), got.end()) == got.end());
      for (const auto& e : got) ++per_rule[e.rule];
    }
    // The corpus must exercise every rule.
    for (std::size_t r = 0; r < rules.size(); ++r) {
      CHECK_MESSAGE(per_rule[r] > 0, rules[r].Describe());
    }
  }

  TEST_CASE("reordering entries with equal times does not change the edges") {
    const auto rules = testing::RandomLogGenerator::Rules();
    std::mt19937_64 rng(17);
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
      testing::RandomLogGenerator gen(seed);
      const auto entries = gen.Generate(200);
      auto shuffled = entries;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      std::stable_sort(shuffled.begin(), shuffled.end(),
                       [](const LogEntry& a, const LogEntry& b) { return a.time < b.time; });
      CHECK_MESSAGE(ResolveEdges(entries, rules) == ResolveEdges(shuffled, rules),
                    "seed " << seed);
    }
  }
}

}  // namespace
}  // namespace kprop
