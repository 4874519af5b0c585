#include <doctest.h>

#include <random>

#include "btground/planner.hpp"
#include "btground/universe.hpp"

using namespace btground;

namespace {

UniversePtr tiny_universe(std::size_t n) {
  std::vector<Proposition> props;
  for (std::size_t i = 0; i < n; ++i) props.push_back({"P" + std::to_string(i), {}, i});
  return std::make_shared<DomainUniverse>(std::move(props));
}

std::vector<ActionModel> random_models(std::mt19937_64& rng, std::size_t n,
                                       std::size_t count) {
  std::vector<ActionModel> out;
  std::uniform_int_distribution<std::uint64_t> mask(0, (1ull << n) - 1);
  while (out.size() < count) {
    std::uint64_t pre = mask(rng);
    std::uint64_t add = mask(rng) & ~pre;
    std::uint64_t del = mask(rng) & pre & ~add;
    if (add == 0) continue;
    out.push_back({"a" + std::to_string(out.size()), StateSet::from_mask(n, pre),
                   StateSet::from_mask(n, add), StateSet::from_mask(n, del)});
  }
  return out;
}

}  // namespace

TEST_CASE("bt_expansion: one-action chain produces the canonical tree") {
  const std::size_t n = 2;  // {p, q}
  std::vector<ActionModel> models{{"a1", StateSet::from_mask(n, 0b01),
                                   StateSet::from_mask(n, 0b10), StateSet(n)}};
  Task task{"t", StateSet::from_mask(n, 0b01), StateSet::from_mask(n, 0b10)};

  PlanResult result = bt_expansion(task, models);
  REQUIRE(result.solved());
  const BTNode& tree = result.solution();
  REQUIRE_EQ(tree.kind(), BTNode::Kind::Fallback);
  REQUIRE_EQ(tree.children().size(), 2);
  CHECK_EQ(tree.children()[0], BTNode::condition(task.goal));
  const BTNode& branch = tree.children()[1];
  REQUIRE_EQ(branch.kind(), BTNode::Kind::Sequence);
  CHECK_EQ(branch.children()[0], BTNode::condition(StateSet::from_mask(n, 0b01)));
  CHECK_EQ(branch.children()[1], BTNode::action("a1"));

  CHECK_EQ(forward_search_oracle(task, models).value(), 1);
  CHECK(verify_solution(tree, task, models, 3));
}

TEST_CASE("bt_expansion: satisfied goal returns the bare condition tree") {
  const std::size_t n = 2;
  Task task{"t", StateSet::from_mask(n, 0b11), StateSet::from_mask(n, 0b10)};
  PlanResult result = bt_expansion(task, {});
  REQUIRE(result.solved());
  CHECK_EQ(result.solution(), BTNode::condition(task.goal));
  CHECK_EQ(forward_search_oracle(task, {}).value(), 0);
}

TEST_CASE("bt_expansion: no models yields diagnostics with the goal frontier") {
  const std::size_t n = 2;
  Task task{"t", StateSet::from_mask(n, 0b01), StateSet::from_mask(n, 0b10)};
  PlanResult result = bt_expansion(task, {});
  REQUIRE_FALSE(result.solved());
  const PlanningContext& ctx = result.context();
  CHECK_EQ(ctx.task_id, "t");
  CHECK_FALSE(ctx.solved);
  CHECK_EQ(ctx.expanded_conditions, 1);
  REQUIRE_EQ(ctx.frontier.size(), 1);
  CHECK_EQ(ctx.frontier[0], task.goal);
  CHECK(ctx.actions_used.empty());
  CHECK_EQ(ctx.sketch.kind(), BTNode::Kind::Fallback);
}

TEST_CASE("bt_expansion: expansion budget raises a resource error with partial context") {
  const std::size_t n = 6;
  std::mt19937_64 rng(3);
  auto models = random_models(rng, n, 12);
  Task task{"t", StateSet(n), StateSet::from_mask(n, (1ull << n) - 1)};
  PlannerConfig cfg;
  cfg.max_expansions = 1;
  try {
    (void)bt_expansion(task, models, cfg);
    // Either it solved within one expansion or it must have thrown.
  } catch (const PlanBudgetError& e) {
    CHECK(e.partial().budget_exhausted);
    CHECK_GE(e.partial().expanded_conditions, 1);
  }
}

TEST_CASE("plan_all: failures are collected per task") {
  const std::size_t n = 2;
  std::vector<ActionModel> models{{"a1", StateSet::from_mask(n, 0b01),
                                   StateSet::from_mask(n, 0b10), StateSet(n)}};
  std::vector<Task> tasks{
      {"solvable", StateSet::from_mask(n, 0b01), StateSet::from_mask(n, 0b10)},
      {"impossible", StateSet(n), StateSet::from_mask(n, 0b01)},
      {"trivial", StateSet::from_mask(n, 0b11), StateSet::from_mask(n, 0b01)},
  };
  auto results = plan_all(tasks, models);
  CHECK(results.at("solvable").solved());
  CHECK(results.at("trivial").solved());
  CHECK_FALSE(results.at("impossible").solved());

  int failed = 0;
  for (const auto& [id, r] : results) {
    if (!r.solved()) ++failed;
  }
  CHECK_EQ(failed, 1);
}

TEST_CASE("forward_search_oracle: unreachable goals and the size guard") {
  const std::size_t n = 2;
  Task task{"t", StateSet(n), StateSet::from_mask(n, 0b10)};
  CHECK_FALSE(forward_search_oracle(task, {}).has_value());

  Task big{"big", StateSet(21), StateSet(21)};
  CHECK_THROWS_AS((void)forward_search_oracle(big, {}), ResourceError);
}

TEST_CASE("verify_solution: bare condition fails when the goal is unmet") {
  const std::size_t n = 2;
  Task task{"t", StateSet::from_mask(n, 0b01), StateSet::from_mask(n, 0b10)};
  CHECK_FALSE(verify_solution(BTNode::condition(task.goal), task, {}, 10));
}

TEST_CASE("soundness and completeness vs oracle: exhaustive tiny instances") {
  // Every model set over n=3 drawn from a fixed pool, every (s0, g) pair.
  const std::size_t n = 3;
  std::vector<ActionModel> pool{
      {"a0", StateSet::from_mask(n, 0b000), StateSet::from_mask(n, 0b001), StateSet(n)},
      {"a1", StateSet::from_mask(n, 0b001), StateSet::from_mask(n, 0b010),
       StateSet::from_mask(n, 0b001)},
      {"a2", StateSet::from_mask(n, 0b011), StateSet::from_mask(n, 0b100), StateSet(n)},
      {"a3", StateSet::from_mask(n, 0b100), StateSet::from_mask(n, 0b010), StateSet(n)},
  };
  for (std::uint64_t subset = 0; subset < (1ull << pool.size()); ++subset) {
    std::vector<ActionModel> models;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (subset & (1ull << i)) models.push_back(pool[i]);
    }
    for (std::uint64_t s0 = 0; s0 < (1ull << n); ++s0) {
      for (std::uint64_t g = 0; g < (1ull << n); ++g) {
        Task task{"t", StateSet::from_mask(n, s0), StateSet::from_mask(n, g)};
        PlanResult planned = bt_expansion(task, models);
        auto oracle = forward_search_oracle(task, models);
        REQUIRE_EQ(planned.solved(), oracle.has_value());
        if (planned.solved()) {
          REQUIRE(verify_solution(planned.solution(), task, models,
                                  2 * planned.solution().children().size() + 2));
        }
      }
    }
  }
}

TEST_CASE("soundness and completeness vs oracle: randomized instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 4 + trial % 7;  // up to n=10
    auto models = random_models(rng, n, 3 + trial % 10);
    std::uniform_int_distribution<std::uint64_t> mask(0, (1ull << n) - 1);
    Task task{"t", StateSet::from_mask(n, mask(rng)), StateSet::from_mask(n, mask(rng))};
    PlanResult planned = bt_expansion(task, models);
    auto oracle = forward_search_oracle(task, models);
    REQUIRE_EQ(planned.solved(), oracle.has_value());
    if (planned.solved()) {
      const std::size_t budget = 2 * planned.solution().children().size() + 2;
      REQUIRE(verify_solution(planned.solution(), task, models, budget));
    }
  }
}

TEST_CASE("reactivity: replaying from any nominal trace state still reaches the goal") {
  const std::size_t n = 4;
  std::vector<ActionModel> models{
      {"open", StateSet::from_mask(n, 0b0001), StateSet::from_mask(n, 0b0010),
       StateSet(n)},
      {"pick", StateSet::from_mask(n, 0b0001), StateSet::from_mask(n, 0b0100),
       StateSet::from_mask(n, 0b0001)},
      {"put", StateSet::from_mask(n, 0b0110), StateSet::from_mask(n, 0b1000),
       StateSet::from_mask(n, 0b0100)},
  };
  Task task{"t", StateSet::from_mask(n, 0b0001), StateSet::from_mask(n, 0b1000)};
  PlanResult planned = bt_expansion(task, models);
  REQUIRE(planned.solved());

  // Collect the nominal trace.
  ActionTable table;
  for (const ActionModel& m : models) table.emplace(m.name, m);
  std::vector<StateSet> trace{task.start};
  StateSet s = task.start;
  for (int i = 0; i < 16; ++i) {
    TickResult r = tick(planned.solution(), s, table);
    if (r.status != BTStatus::Running) break;
    s = apply_model(table.at(*r.active_action), s);
    trace.push_back(s);
  }
  for (const StateSet& restart : trace) {
    Task from_here{"replay", restart, task.goal};
    CHECK(verify_solution(planned.solution(), from_here, models, 16));
  }
}

TEST_CASE("determinism: identical inputs give structurally identical trees") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5;
    auto models = random_models(rng, n, 6);
    std::uniform_int_distribution<std::uint64_t> mask(0, (1ull << n) - 1);
    Task task{"t", StateSet::from_mask(n, mask(rng)), StateSet::from_mask(n, mask(rng))};
    PlanResult a = bt_expansion(task, models);
    PlanResult b = bt_expansion(task, models);
    REQUIRE_EQ(a.solved(), b.solved());
    if (a.solved()) CHECK_EQ(a.solution(), b.solution());
  }
}
