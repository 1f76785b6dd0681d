#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <functional>

#include "mentis/questions.hpp"
#include "mentis/rollout.hpp"
#include "mentis/scenario.hpp"

using namespace mentis;

namespace {

const std::vector<Apartment>& apartments() {
    static auto apts = load_apartments("data/apartments.json");
    return apts;
}

Belief full_belief(const Apartment& apt) {
    Belief b;
    for (std::size_t f = 0; f < apt.furniture.size(); ++f) b.candidates.push_back(static_cast<FurnId>(f));
    return b;
}

// Independent expected-cost oracle: depth-limited minimax-free search over
// goal-relevant actions, memoized, written without reference to the
// planner's BFS.
int oracle_cost(const Apartment& apt, const WorldState& s, AgentId agent, const PlanGoal& goal,
                int depth, std::map<std::string, int>& memo) {
    if (detail::goal_achieved(goal, s, agent)) return 0;
    if (depth == 0) return 1 << 20;
    std::string key = s.key() + ":" + std::to_string(depth);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    int best = 1 << 20;
    for (const auto& a : detail::policy_candidates(apt, s, agent, goal.object, false)) {
        WorldState next = apply(apt, s, agent, a);
        next.tick = 0;
        int sub = oracle_cost(apt, next, agent, goal, depth - 1, memo);
        if (sub < best - 1) best = 1 + sub;
    }
    memo[key] = best;
    return best;
}

}  // namespace

TEST_CASE("boltzmann limit: high beta makes the optimal first action the mode") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    ObjectId beer = apt.object_index("beer");
    FurnId coffee = apt.furniture_index("coffee_table");
    WorldState s;
    s.agents = {AgentPose{apt.room_index("living_room"), kNoFurniture},
                AgentPose{apt.room_index("kitchen"), kNoFurniture}};
    s.container_open.assign(apt.furniture.size(), false);
    s.placements[beer] = ObjectPlace::at(coffee);
    Belief b = full_belief(apt);
    b.set_delta(beer, coffee);

    PhysicalGoal goal = PhysicalGoal::rearrange(beer, apt.furniture_index("kitchen_table"));
    SearchBudget budget;
    PolicyDistribution pi = plan_policy(apt, b, s, 0, goal, 50.0, budget);
    CHECK(pi.mode() == PrimitiveAction::walk_furniture(coffee));
    CHECK(pi.probability(pi.mode()) > 0.99);
    CHECK(pi.source == PolicySource::ExactSearch);
}

TEST_CASE("beta=2 probabilities match an independent expected-cost oracle") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    ObjectId beer = apt.object_index("beer");
    FurnId coffee = apt.furniture_index("coffee_table");
    WorldState s;
    s.agents = {AgentPose{apt.room_index("living_room"), kNoFurniture},
                AgentPose{apt.room_index("kitchen"), kNoFurniture}};
    s.container_open.assign(apt.furniture.size(), false);
    s.placements[beer] = ObjectPlace::at(coffee);
    Belief b = full_belief(apt);
    b.set_delta(beer, coffee);
    PlanGoal goal{PlanGoal::Kind::PlaceAt, beer, apt.furniture_index("kitchen_table")};

    SearchBudget budget;
    PolicyDistribution pi = policy_for_goal(apt, b, s, 0, goal, 2.0, budget);

    std::map<std::string, int> memo;
    std::vector<double> q(pi.actions.size(), 0.0);
    for (std::size_t i = 0; i < pi.actions.size(); ++i) {
        WorldState next = is_legal(apt, s, 0, pi.actions[i]) ? apply(apt, s, 0, pi.actions[i]) : s;
        next.tick = 0;
        q[i] = -(1.0 + oracle_cost(apt, next, 0, goal, 10, memo));
    }
    std::vector<double> expected = softmax(q, 2.0);
    for (std::size_t i = 0; i < pi.probs.size(); ++i) {
        CHECK(pi.probs[i] == doctest::Approx(expected[i]).epsilon(1e-9));
    }
}

TEST_CASE("uniform location belief: the policy opens the nearer container first") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    ObjectId beer = apt.object_index("beer");
    FurnId fridge = apt.furniture_index("fridge");
    FurnId bedroom_cabinet = apt.furniture_index("bedroom_cabinet");
    WorldState s;
    s.agents = {AgentPose{apt.room_index("kitchen"), kNoFurniture},
                AgentPose{apt.room_index("kitchen"), kNoFurniture}};
    s.container_open.assign(apt.furniture.size(), false);
    s.placements[beer] = ObjectPlace::at(fridge);

    Belief b = full_belief(apt);
    b.dist[beer] = std::vector<double>(apt.furniture.size(), 0.0);
    b.dist[beer][static_cast<std::size_t>(b.candidate_index(fridge))] = 0.5;
    b.dist[beer][static_cast<std::size_t>(b.candidate_index(bedroom_cabinet))] = 0.5;

    // Greedy argmax trajectory: the fridge (same room) is opened before the
    // bedroom cabinet (two rooms away).
    SearchBudget budget;
    WorldState cur = s;
    Belief cur_b = b;
    bool fridge_opened_first = false;
    for (int step = 0; step < 4; ++step) {
        PolicyDistribution pi =
            policy_for_goal(apt, cur_b, cur, 0, PlanGoal{PlanGoal::Kind::Hold, beer, kNoFurniture},
                            2.0, budget);
        PrimitiveAction a = pi.mode();
        if (a == PrimitiveAction::open(fridge)) {
            fridge_opened_first = true;
            break;
        }
        REQUIRE(!(a == PrimitiveAction::open(bedroom_cabinet)));
        cur = apply(apt, cur, 0, a);
    }
    CHECK(fridge_opened_first);
}

TEST_CASE("policy invariants: normalization, shift invariance, beta monotonicity") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng.uniform(8);
        std::vector<double> q(n);
        for (double& x : q) x = -static_cast<double>(rng.uniform(12));
        double beta = 0.5 + rng.uniform_real() * 4.0;

        std::vector<double> p = softmax(q, beta);
        double sum = 0.0;
        for (double x : p) sum += x;
        CHECK(std::abs(sum - 1.0) < 1e-9);

        // Adding a constant to all action values changes nothing.
        std::vector<double> shifted = q;
        for (double& x : shifted) x += 7.0;
        std::vector<double> p2 = softmax(shifted, beta);
        for (std::size_t i = 0; i < n; ++i) CHECK(p[i] == doctest::Approx(p2[i]).epsilon(1e-12));

        // Raising beta never hurts an optimal action.
        std::vector<double> hotter = softmax(q, beta + 1.0);
        std::size_t best = argmax_index(q);
        CHECK(hotter[best] >= p[best] - 1e-12);
    }
}

TEST_CASE("goal inference: an overheard inquiry pins the goal") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    ObjectId beer = apt.object_index("beer");
    ObjectId book = apt.object_index("book");
    ScenarioTrace hist;
    hist.apartment = apt.id;
    hist.s0.agents = {AgentPose{0, kNoFurniture}, AgentPose{0, kNoFurniture}};
    hist.s0.container_open.assign(apt.furniture.size(), false);
    hist.s0.placements[beer] = ObjectPlace::at(apt.furniture_index("coffee_table"));
    hist.steps.push_back({0, 0, PrimitiveAction::noop(), Utterance::inquiry({beer})});

    std::vector<PhysicalGoal> candidates = {PhysicalGoal::find(beer), PhysicalGoal::find(book)};
    SearchBudget budget;
    GoalBelief gb = infer_other_goal(apt, hist, 1, 1, candidates, 2.0, budget);
    CHECK(gb.probs[0] == doctest::Approx(1.0));
    CHECK(gb.probs[1] == doctest::Approx(0.0));
}

TEST_CASE("goal inference: actions alone favor the pursued object") {
    const Apartment& apt = find_apartment(apartments(), "flat_b");
    ObjectId carrot = apt.object_index("carrot");
    ObjectId juice = apt.object_index("juice");
    ObjectId wine = apt.object_index("wine");
    FurnId fridge = apt.furniture_index("fridge");

    ScenarioTrace hist;
    hist.apartment = apt.id;
    hist.s0.agents = {AgentPose{apt.room_index("kitchen"), kNoFurniture},
                      AgentPose{apt.room_index("living_room"), kNoFurniture}};
    hist.s0.container_open.assign(apt.furniture.size(), false);
    hist.s0.placements[carrot] = ObjectPlace::at(fridge);
    hist.s0.placements[juice] = ObjectPlace::at(apt.furniture_index("tv_stand"));
    hist.s0.placements[wine] = ObjectPlace::at(apt.furniture_index("bathroom_cabinet"));
    // The other agent (agent 0) heads to the fridge and takes the carrot.
    hist.steps = {
        {0, 0, PrimitiveAction::walk_furniture(fridge), Utterance::silence()},
        {0, 1, PrimitiveAction::noop(), Utterance::silence()},
        {1, 0, PrimitiveAction::open(fridge), Utterance::silence()},
        {1, 1, PrimitiveAction::noop(), Utterance::silence()},
        {2, 0, PrimitiveAction::grab(carrot, fridge), Utterance::silence()},
    };

    std::vector<PhysicalGoal> candidates = {PhysicalGoal::find(carrot), PhysicalGoal::find(juice),
                                            PhysicalGoal::find(wine)};
    SearchBudget budget;
    GoalBelief gb = infer_other_goal(apt, hist, hist.steps.size(), 1, candidates, 2.0, budget);
    CHECK(gb.mode() == candidates[0]);

    // Brute-force cross-check: per-step level-0 policy products.
    std::vector<double> logp(candidates.size(), 0.0);
    WorldState s = hist.s0;
    for (const auto& step : hist.steps) {
        if (step.agent == 0) {
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                Belief none;
                PolicyDistribution pi = policy_for_goal(
                    apt, none, s, 0, PlanGoal::from_physical(candidates[i]), 2.0, budget);
                logp[i] += std::log(pi.probability(step.action));
            }
        }
        s = apply(apt, s, step.agent, step.action);
    }
    double z = log_sum_exp(logp);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        CHECK(gb.probs[i] == doctest::Approx(std::exp(logp[i] - z)).epsilon(1e-9));
    }
}

TEST_CASE("goal inference: empty history is uniform") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    ScenarioTrace hist;
    hist.apartment = apt.id;
    hist.s0.agents = {AgentPose{0, kNoFurniture}, AgentPose{0, kNoFurniture}};
    hist.s0.container_open.assign(apt.furniture.size(), false);
    std::vector<PhysicalGoal> candidates = {PhysicalGoal::find(0), PhysicalGoal::find(1),
                                            PhysicalGoal::find(2)};
    SearchBudget budget;
    GoalBelief gb = infer_other_goal(apt, hist, 0, 0, candidates, 2.0, budget);
    for (double p : gb.probs) CHECK(p == doctest::Approx(1.0 / 3));
}

TEST_CASE("social planning: independent equals own-goal planning") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    ObjectId beer = apt.object_index("beer");
    WorldState s;
    s.agents = {AgentPose{apt.room_index("kitchen"), kNoFurniture},
                AgentPose{apt.room_index("kitchen"), kNoFurniture}};
    s.container_open.assign(apt.furniture.size(), false);
    s.placements[beer] = ObjectPlace::at(apt.furniture_index("coffee_table"));
    Belief b = full_belief(apt);
    b.set_delta(beer, apt.furniture_index("coffee_table"));

    AgentSpec spec;
    spec.id = 0;
    spec.social_goal = SocialGoal::Independent;
    spec.physical_goal = PhysicalGoal::find(beer);
    SearchBudget budget;
    GoalBelief inferred = GoalBelief::uniform({PhysicalGoal::find(beer)});

    PolicyDistribution social = social_plan(apt, spec, b, inferred, s, 2.0, budget);
    PolicyDistribution direct = plan_policy(apt, b, s, 0, spec.physical_goal, 2.0, budget);
    REQUIRE(social.actions.size() == direct.actions.size());
    for (std::size_t i = 0; i < social.probs.size(); ++i) {
        CHECK(social.probs[i] == doctest::Approx(direct.probs[i]).epsilon(1e-12));
    }
}

TEST_CASE("social planning: helpers adopt the inferred rearrange goal") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    ObjectId book = apt.object_index("book");
    FurnId coffee = apt.furniture_index("coffee_table");
    FurnId desk = apt.furniture_index("desk");
    WorldState s;
    s.agents = {AgentPose{apt.room_index("bedroom"), kNoFurniture},
                AgentPose{apt.room_index("kitchen"), kNoFurniture}};
    s.container_open.assign(apt.furniture.size(), false);
    s.placements[book] = ObjectPlace::at(desk);
    Belief b = full_belief(apt);
    b.set_delta(book, desk);

    AgentSpec spec;
    spec.id = 0;
    spec.social_goal = SocialGoal::Help;
    spec.physical_goal = PhysicalGoal::find(book);
    SearchBudget budget;
    GoalBelief inferred = GoalBelief::delta({PhysicalGoal::rearrange(book, coffee)}, 0);

    PolicyDistribution pi = social_plan(apt, spec, b, inferred, s, 2.0, budget);
    CHECK(pi.mode() == PrimitiveAction::walk_furniture(desk));  // first leg of the delivery
}

TEST_CASE("social planning: hinderers avoid the other agent's target") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    ObjectId beer = apt.object_index("beer");
    FurnId coffee = apt.furniture_index("coffee_table");
    FurnId sofa = apt.furniture_index("sofa");
    WorldState s;
    s.agents = {AgentPose{apt.room_index("living_room"), coffee},
                AgentPose{apt.room_index("kitchen"), kNoFurniture}};
    s.container_open.assign(apt.furniture.size(), false);
    s.placements[beer] = ObjectPlace::in_hand(0);
    Belief b = full_belief(apt);
    b.set_delta(beer, coffee);

    AgentSpec spec;
    spec.id = 0;
    spec.social_goal = SocialGoal::Hinder;
    spec.physical_goal = PhysicalGoal::find(beer);
    SearchBudget budget;
    GoalBelief inferred = GoalBelief::delta({PhysicalGoal::rearrange(beer, coffee)}, 0);

    PolicyDistribution pi = social_plan(apt, spec, b, inferred, s, 2.0, budget);
    CHECK(!(pi.mode() == PrimitiveAction::put(beer, coffee)));
    CHECK(pi.probability(PrimitiveAction::put(beer, coffee)) < 0.05);
    // Relocating anywhere else is the dominant move.
    WorldState at_sofa = s;
    at_sofa.agents[0].at = sofa;
    PolicyDistribution pi2 = social_plan(apt, spec, b, inferred, at_sofa, 2.0, budget);
    CHECK(pi2.mode() == PrimitiveAction::put(beer, sofa));
}

TEST_CASE("rollout matches the committed golden help trace") {
    std::ifstream in("tests/fixtures/golden_help_trace.json");
    REQUIRE(in);
    json fixture = json::parse(in);
    std::uint64_t seed = fixture.at("seed").get<std::uint64_t>();

    Rng rng = substream(seed, "specs", 0);
    ScenarioConfig cfg = sample_scenario(apartments(), rng, true);
    const Apartment& apt = find_apartment(apartments(), cfg.apartment);
    RolloutParams params;
    params.language_enabled = true;
    params.horizon = 14;
    ScenarioTrace trace =
        rollout(apt, cfg.s0, cfg.specs, params, substream(seed, "rollout", 0).next_u64());
    trace.names = cfg.names;

    CHECK(trace_to_json(apt, trace).dump() == fixture.at("trace").dump());

    // Stated post-conditions: the helpful answer matches ground truth and
    // the inquirer reaches its goal.
    auto inform = first_inform(trace);
    REQUIRE(inform.has_value());
    ObjectId goal_obj = cfg.specs[0].physical_goal.object;
    CHECK(inform->stated == cfg.s0.placements.at(goal_obj).furniture);
    bool grabbed = false;
    for (const auto& s : trace.steps) {
        if (s.agent == 0 && s.action.verb == Verb::Grab && s.action.object == goal_obj) grabbed = true;
    }
    CHECK(grabbed);
    CHECK(replay(apt, trace) == trace.terminal);
}

TEST_CASE("hinder rollout: the lie differs from belief and the seeker is misled") {
    bool found = false;
    for (std::uint64_t seed = 1; seed < 400 && !found; ++seed) {
        Rng rng = substream(seed, "specs", 0);
        ScenarioConfig cfg;
        try {
            cfg = sample_scenario(apartments(), rng, true);
        } catch (const ConstraintUnsatisfiable&) {
            continue;
        }
        if (cfg.specs[1].social_goal != SocialGoal::Hinder) continue;
        const Apartment& apt = find_apartment(apartments(), cfg.apartment);
        RolloutParams params;
        params.language_enabled = true;
        params.horizon = 14;
        ScenarioTrace trace =
            rollout(apt, cfg.s0, cfg.specs, params, substream(seed, "rollout", 0).next_u64());
        auto inform = first_inform(trace);
        if (!inform.has_value() || inform->responder != 1) continue;
        ObjectId obj = inform->object;
        // Responder's belief mode at the inform tick, from the recorded history.
        const Belief* belief_at_inform = nullptr;
        int inform_tick = trace.steps[inform->step_index].tick;
        for (const auto& snap : trace.belief_history) {
            if (snap.agent == 1 && snap.tick == inform_tick) belief_at_inform = &snap.belief;
        }
        REQUIRE(belief_at_inform != nullptr);
        CHECK(inform->stated != belief_at_inform->mode(obj, apt));

        // If the stated location was empty, the misled seeker shows up there.
        auto truth = trace.s0.placements.at(obj);
        if (!truth.held() && truth.furniture != inform->stated) {
            bool visited = false;
            WorldState s = trace.s0;
            for (std::size_t i = 0; i < trace.steps.size(); ++i) {
                s = apply(apt, s, trace.steps[i].agent, trace.steps[i].action);
                if (i > inform->step_index &&
                    s.agents[0].room == apt.furniture[inform->stated].room) {
                    visited = true;
                }
            }
            CHECK(visited);
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("silent rollout: the second mover relocates after the first placement") {
    bool found = false;
    for (std::uint64_t seed = 1; seed < 200 && !found; ++seed) {
        Rng rng = substream(seed, "specs", 0);
        ScenarioConfig cfg;
        try {
            cfg = sample_scenario(apartments(), rng, false);
        } catch (const ConstraintUnsatisfiable&) {
            continue;
        }
        const Apartment& apt = find_apartment(apartments(), cfg.apartment);
        RolloutParams params;
        params.language_enabled = false;
        params.horizon = 16;
        ScenarioTrace trace =
            rollout(apt, cfg.s0, cfg.specs, params, substream(seed, "rollout", 0).next_u64());
        trace.language = false;
        auto reloc = find_relocation(trace);
        if (!reloc.has_value()) continue;
        CHECK(reloc->placer_put_index < reloc->mover_put_index);
        CHECK(reloc->mover_target != reloc->placer_target);
        found = true;
    }
    CHECK(found);
}

TEST_CASE("rollout determinism: identical inputs give identical traces") {
    Rng rng = substream(123, "specs", 0);
    ScenarioConfig cfg = sample_scenario(apartments(), rng, true);
    const Apartment& apt = find_apartment(apartments(), cfg.apartment);
    RolloutParams params;
    ScenarioTrace a = rollout(apt, cfg.s0, cfg.specs, params, 99);
    ScenarioTrace b = rollout(apt, cfg.s0, cfg.specs, params, 99);
    CHECK(trace_to_json(apt, a).dump() == trace_to_json(apt, b).dump());
}

TEST_CASE("unreachable goal: object outside the believed support") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    WorldState s;
    s.agents = {AgentPose{0, kNoFurniture}, AgentPose{0, kNoFurniture}};
    s.container_open.assign(apt.furniture.size(), false);
    Belief b = full_belief(apt);
    SearchBudget budget;
    CHECK_THROWS_AS(plan_policy(apt, b, s, 0, PhysicalGoal::find(0), 2.0, budget), UnreachableGoal);
}

TEST_CASE("mcts agrees with exact search on the argmax (smoke)") {
    Rng rng(7);
    int checked = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const Apartment& apt = apartments()[rng.uniform(apartments().size())];
        WorldState s;
        s.container_open.assign(apt.furniture.size(), false);
        s.agents = {AgentPose{static_cast<RoomId>(rng.uniform(apt.rooms.size())), kNoFurniture},
                    AgentPose{static_cast<RoomId>(rng.uniform(apt.rooms.size())), kNoFurniture}};
        ObjectId obj = static_cast<ObjectId>(rng.uniform(apt.vocabulary.size()));
        s.placements[obj] = ObjectPlace::at(static_cast<FurnId>(rng.uniform(apt.furniture.size())));
        Belief b = full_belief(apt);
        if (rng.bernoulli(0.5)) {
            b.set_delta(obj, static_cast<FurnId>(rng.uniform(apt.furniture.size())));
        } else {
            b.set_uniform(obj);
        }
        PhysicalGoal goal =
            rng.bernoulli(0.5)
                ? PhysicalGoal::find(obj)
                : PhysicalGoal::rearrange(obj, static_cast<FurnId>(rng.uniform(apt.furniture.size())));
        SearchBudget exact_budget;
        exact_budget.prefer = SearchBudget::Prefer::Exact;
        SearchBudget mcts_budget;
        mcts_budget.prefer = SearchBudget::Prefer::Mcts;
        mcts_budget.mcts_seed = rng.next_u64();
        PolicyDistribution pe = plan_policy(apt, b, s, 0, goal, 2.0, exact_budget);
        PolicyDistribution pm = plan_policy(apt, b, s, 0, goal, 2.0, mcts_budget);
        CHECK(pe.source == PolicySource::ExactSearch);
        CHECK(pm.source == PolicySource::Mcts);
        double exact_max = pe.probs[argmax_index(pe.probs)];
        CHECK(pe.probability(pm.mode()) >= exact_max - 1e-9);
        ++checked;
    }
    CHECK(checked == 12);
}

TEST_CASE("goal inference favors the true goal once the trace completes") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed < 120 && checked < 5; ++seed) {
        Rng rng = substream(seed, "specs", 0);
        ScenarioConfig cfg;
        try {
            cfg = sample_scenario(apartments(), rng, true);
        } catch (const ConstraintUnsatisfiable&) {
            continue;
        }
        const Apartment& apt = find_apartment(apartments(), cfg.apartment);
        RolloutParams params;
        ScenarioTrace trace =
            rollout(apt, cfg.s0, cfg.specs, params, substream(seed, "rollout", 0).next_u64());
        if (trace.horizon_exhausted) continue;
        const PhysicalGoal& truth = cfg.specs[0].physical_goal;
        bool achieved = false;
        for (const auto& s : trace.steps) {
            if (s.agent == 0 && (s.action.verb == Verb::Grab || s.action.verb == Verb::Put) &&
                s.action.object == truth.object) {
                achieved = true;
            }
        }
        if (!achieved) continue;
        // Decoy goals over the other placed object.
        std::vector<PhysicalGoal> candidates = {truth};
        for (const auto& [obj, place] : cfg.s0.placements) {
            (void)place;
            if (obj != truth.object) candidates.push_back(PhysicalGoal::find(obj));
        }
        SearchBudget budget;
        GoalBelief gb =
            infer_other_goal(apt, trace, trace.steps.size(), 1, candidates, 2.0, budget);
        for (std::size_t i = 1; i < gb.probs.size(); ++i) CHECK(gb.probs[0] >= gb.probs[i]);
        ++checked;
    }
    CHECK(checked == 5);
}
