#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mentis/dataset.hpp"

using namespace mentis;

namespace {

const std::vector<Apartment>& apartments() {
    static auto apts = load_apartments("data/apartments.json");
    return apts;
}

// A language trace with a known inform, shaped like the running example:
// seeker asks, responder points to the coffee table, seeker finds the beer.
ScenarioTrace informed_trace(const Apartment& apt, FurnId stated, FurnId truth) {
    ObjectId beer = apt.object_index("beer");
    ScenarioTrace t;
    t.apartment = apt.id;
    t.names = {"John", "Mary"};
    t.language = true;
    t.s0.agents = {AgentPose{apt.room_index("kitchen"), kNoFurniture},
                   AgentPose{apt.room_index("kitchen"), kNoFurniture}};
    t.s0.container_open.assign(apt.furniture.size(), false);
    t.s0.placements[beer] = ObjectPlace::at(truth);
    t.steps = {
        {0, 0, PrimitiveAction::noop(), Utterance::inquiry({beer})},
        {0, 1, PrimitiveAction::noop(), Utterance::inform({{beer, stated}})},
        {1, 0, PrimitiveAction::walk_room(apt.room_index("living_room")), Utterance::silence()},
        {1, 1, PrimitiveAction::noop(), Utterance::silence()},
        {2, 0, PrimitiveAction::walk_furniture(apt.furniture_index("coffee_table")),
         Utterance::silence()},
        {2, 1, PrimitiveAction::noop(), Utterance::silence()},
    };
    if (truth == apt.furniture_index("coffee_table")) {
        t.steps.push_back({3, 0, PrimitiveAction::grab(beer, truth), Utterance::silence()});
        t.steps.push_back({3, 1, PrimitiveAction::noop(), Utterance::silence()});
    }
    for (AgentId a = 0; a < 2; ++a) {
        t.specs[a].id = a;
        t.specs[a].physical_goal = PhysicalGoal::find(beer);
        t.specs[a].social_goal = a == 0 ? SocialGoal::Independent : SocialGoal::Help;
        Belief b;
        for (std::size_t f = 0; f < apt.furniture.size(); ++f) {
            b.candidates.push_back(static_cast<FurnId>(f));
        }
        b.set_delta(beer, truth);
        t.specs[a].initial_belief = b;
        t.specs[a].initial_goal_belief = GoalBelief::delta({PhysicalGoal::find(beer)}, 0);
    }
    t.terminal = replay(apt, t);
    return t;
}

}  // namespace

TEST_CASE("sampled scenario fields lie in the documented supports") {
    Rng rng(1);
    ScenarioConfig cfg = sample_scenario(apartments(), rng, true);
    const Apartment& apt = find_apartment(apartments(), cfg.apartment);
    CHECK(cfg.language);
    CHECK(cfg.names[0] != cfg.names[1]);
    for (const auto& spec : cfg.specs) {
        CHECK((spec.social_goal == SocialGoal::Help || spec.social_goal == SocialGoal::Hinder ||
               spec.social_goal == SocialGoal::Independent));
        CHECK(cfg.s0.placements.count(spec.physical_goal.object));
        for (const auto& [obj, d] : spec.initial_belief.dist) {
            (void)obj;
            double sum = 0.0;
            for (double x : d) sum += x;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    for (const auto& [obj, place] : cfg.s0.placements) {
        (void)obj;
        CHECK(!place.held());
        CHECK(place.furniture >= 0);
        CHECK(place.furniture < static_cast<FurnId>(apt.furniture.size()));
    }
    // Both agents co-located at the start so the conversation can happen.
    CHECK(cfg.s0.agents[0].room == cfg.s0.agents[1].room);
}

TEST_CASE("silent scenarios rearrange the same object towards different targets") {
    Rng rng(3);
    ScenarioConfig cfg = sample_scenario(apartments(), rng, false);
    const auto& placer = cfg.specs[0];
    const auto& mover = cfg.specs[1];
    CHECK(placer.physical_goal.kind == PhysicalGoal::Kind::Rearrange);
    CHECK(mover.physical_goal.kind == PhysicalGoal::Kind::Rearrange);
    CHECK(placer.physical_goal.object == mover.physical_goal.object);
    CHECK(placer.physical_goal.target != mover.physical_goal.target);
    CHECK((mover.social_goal == SocialGoal::Help || mover.social_goal == SocialGoal::Hinder));
    // Help pairs with a false belief of the placer's goal, hinder with true.
    const PhysicalGoal& believed = mover.initial_goal_belief.mode();
    if (mover.social_goal == SocialGoal::Hinder) {
        CHECK(believed.target == placer.physical_goal.target);
    } else {
        CHECK(believed.target != placer.physical_goal.target);
    }
}

TEST_CASE("a one-location apartment cannot satisfy the constraints") {
    Apartment tiny;
    tiny.id = "tiny";
    tiny.rooms = {"room"};
    tiny.adjacency = {{}};
    tiny.furniture = {{"shelf", 0, FurnKind::Surface}};
    tiny.vocabulary = {"cup", "keys"};
    Rng rng(5);
    CHECK_THROWS_AS(sample_scenario({tiny}, rng, false), ConstraintUnsatisfiable);
}

TEST_CASE("modality split: conversation versus actions") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    ScenarioTrace t = informed_trace(apt, apt.furniture_index("coffee_table"),
                                     apt.furniture_index("coffee_table"));
    Rng rng(1);
    ModalityChannels ch = split_modalities(apt, t, rng);
    CHECK(ch.split_kind == SplitKind::ConversationVsActions);
    // Utterances appear only in the text channel, verbatim-templated.
    CHECK(ch.text_channel.find("Do you know where the beer is?") != std::string::npos);
    CHECK(ch.text_channel.find("I discovered a beer on the coffee table in the living room.") !=
          std::string::npos);
    CHECK(ch.observation_channel.find("discovered") == std::string::npos);

    // Coverage: every step index appears in exactly one action record.
    ParsedChannel obs = parse_channel(apt, ch.observation_channel);
    std::set<int> seen;
    for (const auto& ev : obs.events) {
        if (ev.action.has_value()) {
            CHECK(!seen.count(ev.step_index));
            seen.insert(ev.step_index);
        }
    }
    CHECK(seen.size() == t.steps.size());
}

TEST_CASE("modality split: silent traces split at the midpoint") {
    const Apartment& apt = find_apartment(apartments(), "flat_d");
    ObjectId cup = apt.object_index("cup");
    ScenarioTrace t;
    t.apartment = apt.id;
    t.names = {"Alice", "Robert"};
    t.language = false;
    t.s0.agents = {AgentPose{0, kNoFurniture}, AgentPose{1, kNoFurniture}};
    t.s0.container_open.assign(apt.furniture.size(), false);
    t.s0.placements[cup] = ObjectPlace::at(apt.furniture_index("kitchen_table"));
    for (int i = 0; i < 10; ++i) {
        t.steps.push_back({i / 2, i % 2, PrimitiveAction::noop(), Utterance::silence()});
    }
    for (AgentId a = 0; a < 2; ++a) {
        t.specs[a].id = a;
        t.specs[a].physical_goal = PhysicalGoal::find(cup);
        Belief b;
        for (std::size_t f = 0; f < apt.furniture.size(); ++f) {
            b.candidates.push_back(static_cast<FurnId>(f));
        }
        b.set_uniform(cup);
        t.specs[a].initial_belief = b;
        t.specs[a].initial_goal_belief = GoalBelief::uniform({PhysicalGoal::find(cup)});
    }
    t.terminal = replay(apt, t);

    // Scan seeds until the coin lands on first-half text.
    for (std::uint64_t seed = 0;; ++seed) {
        Rng rng(seed);
        ModalityChannels ch = split_modalities(apt, t, rng);
        if (ch.split_kind != SplitKind::FirstHalfText) continue;
        ParsedChannel text = parse_channel(apt, ch.text_channel);
        ParsedChannel obs = parse_channel(apt, ch.observation_channel);
        REQUIRE(text.events.size() == 5);
        REQUIRE(obs.events.size() == 5);
        for (const auto& ev : text.events) CHECK(ev.step_index < 5);
        for (const auto& ev : obs.events) CHECK(ev.step_index >= 5);
        break;
    }

    // Single-step trace: the step lands in exactly one channel.
    ScenarioTrace one = t;
    one.steps = {t.steps[0]};
    one.terminal = replay(apt, one);
    Rng rng(0);
    ModalityChannels ch = split_modalities(apt, one, rng);
    ParsedChannel text = parse_channel(apt, ch.text_channel);
    ParsedChannel obs = parse_channel(apt, ch.observation_channel);
    CHECK(text.events.size() + obs.events.size() == 1);
}

TEST_CASE("belief questions key the stated location under both pairings") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    FurnId coffee = apt.furniture_index("coffee_table");
    ScenarioTrace t = informed_trace(apt, coffee, coffee);
    Rng rng(2);

    auto hinder_least = make_belief_question(apt, t, Polarity::Least, rng);
    REQUIRE(hinder_least.has_value());
    CHECK(hinder_least->record.stem.find("hinder") != std::string::npos);
    CHECK(hinder_least->record.options[static_cast<std::size_t>(hinder_least->record.key)].find(
              "coffee table") != std::string::npos);
    CHECK(hinder_least->keyed_true);  // the beer really was there

    auto help_most = make_belief_question(apt, t, Polarity::Most, rng);
    REQUIRE(help_most.has_value());
    CHECK(help_most->record.stem.find("help") != std::string::npos);
    CHECK(help_most->record.options[static_cast<std::size_t>(help_most->record.key)].find(
              "coffee table") != std::string::npos);

    // Silent trace: no inform, not applicable.
    ScenarioTrace silent = t;
    for (auto& s : silent.steps) s.utterance = Utterance::silence();
    CHECK(!make_belief_question(apt, silent, Polarity::Most, rng).has_value());
}

TEST_CASE("social goal questions key from ground truth at the stated location") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    FurnId coffee = apt.furniture_index("coffee_table");
    FurnId cabinet = apt.furniture_index("bedroom_cabinet");
    Rng rng(2);

    // Stated location truly held the object.
    ScenarioTrace truthful = informed_trace(apt, coffee, coffee);
    auto most = make_social_goal_question(apt, truthful, Polarity::Most, rng);
    REQUIRE(most.has_value());
    CHECK(most->record.options[static_cast<std::size_t>(most->record.key)].find("help") !=
          std::string::npos);
    CHECK(most->keyed_true);
    auto least = make_social_goal_question(apt, truthful, Polarity::Least, rng);
    REQUIRE(least.has_value());
    CHECK(least->record.options[static_cast<std::size_t>(least->record.key)].find("prevent") !=
          std::string::npos);

    // Stated location lacked the object: hindering is most likely.
    ScenarioTrace misled = informed_trace(apt, cabinet, coffee);
    auto hinder = make_social_goal_question(apt, misled, Polarity::Most, rng);
    REQUIRE(hinder.has_value());
    CHECK(hinder->record.options[static_cast<std::size_t>(hinder->record.key)].find("prevent") !=
          std::string::npos);
    CHECK(!hinder->keyed_true);
}

TEST_CASE("belief-of-goal questions pair the mover's stance with the believed target") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    ObjectId book = apt.object_index("book");
    FurnId desk = apt.furniture_index("desk");
    FurnId coffee = apt.furniture_index("coffee_table");

    ScenarioTrace t;
    t.apartment = apt.id;
    t.names = {"David", "Sarah"};
    t.language = false;
    t.s0.agents = {AgentPose{apt.room_index("living_room"), kNoFurniture},
                   AgentPose{apt.room_index("kitchen"), kNoFurniture}};
    t.s0.container_open.assign(apt.furniture.size(), false);
    t.s0.placements[book] = ObjectPlace::at(coffee);
    t.steps = {
        {0, 0, PrimitiveAction::walk_furniture(coffee), Utterance::silence()},
        {0, 1, PrimitiveAction::noop(), Utterance::silence()},
        {1, 0, PrimitiveAction::grab(book, coffee), Utterance::silence()},
        {1, 1, PrimitiveAction::noop(), Utterance::silence()},
        {2, 0, PrimitiveAction::walk_room(apt.room_index("bedroom")), Utterance::silence()},
        {2, 1, PrimitiveAction::noop(), Utterance::silence()},
        {3, 0, PrimitiveAction::walk_furniture(desk), Utterance::silence()},
        {3, 1, PrimitiveAction::noop(), Utterance::silence()},
        {4, 0, PrimitiveAction::put(book, desk), Utterance::silence()},
        {4, 1, PrimitiveAction::walk_room(apt.room_index("living_room")), Utterance::silence()},
        {5, 0, PrimitiveAction::noop(), Utterance::silence()},
        {5, 1, PrimitiveAction::walk_room(apt.room_index("bedroom")), Utterance::silence()},
        {6, 0, PrimitiveAction::noop(), Utterance::silence()},
        {6, 1, PrimitiveAction::walk_furniture(desk), Utterance::silence()},
        {7, 0, PrimitiveAction::noop(), Utterance::silence()},
        {7, 1, PrimitiveAction::grab(book, desk), Utterance::silence()},
        {8, 0, PrimitiveAction::noop(), Utterance::silence()},
        {8, 1, PrimitiveAction::walk_room(apt.room_index("living_room")), Utterance::silence()},
        {9, 0, PrimitiveAction::noop(), Utterance::silence()},
        {9, 1, PrimitiveAction::walk_furniture(coffee), Utterance::silence()},
        {10, 0, PrimitiveAction::noop(), Utterance::silence()},
        {10, 1, PrimitiveAction::put(book, coffee), Utterance::silence()},
    };
    t.specs[0].id = 0;
    t.specs[0].physical_goal = PhysicalGoal::rearrange(book, desk);
    t.specs[0].social_goal = SocialGoal::Independent;
    t.specs[1].id = 1;
    t.specs[1].physical_goal = PhysicalGoal::rearrange(book, coffee);
    t.specs[1].social_goal = SocialGoal::Help;
    for (AgentId a = 0; a < 2; ++a) {
        Belief b;
        for (std::size_t f = 0; f < apt.furniture.size(); ++f) {
            b.candidates.push_back(static_cast<FurnId>(f));
        }
        b.set_delta(book, coffee);
        t.specs[a].initial_belief = b;
    }
    t.specs[0].initial_goal_belief = GoalBelief::uniform({PhysicalGoal::rearrange(book, desk)});
    t.specs[1].initial_goal_belief =
        GoalBelief::delta({PhysicalGoal::rearrange(book, coffee)}, 0);
    t.terminal = replay(apt, t);

    Rng rng(4);
    auto q = make_belief_of_goal_question(apt, t, Polarity::Most, 0, rng);
    REQUIRE(q.has_value());
    // Keyed option: believed coffee table + helping (the ground-truth pair).
    const std::string& keyed = q->record.options[static_cast<std::size_t>(q->record.key)];
    CHECK(keyed.find("coffee table") != std::string::npos);
    CHECK(keyed.find("help") != std::string::npos);
    CHECK(!q->keyed_true);  // David actually wanted the desk

    // Language traces are not applicable.
    ScenarioTrace lang = t;
    lang.language = true;
    CHECK(!make_belief_of_goal_question(apt, lang, Polarity::Most, 0, rng).has_value());

    // No relocation, not applicable.
    ScenarioTrace no_move = t;
    no_move.steps.resize(10);
    no_move.terminal = replay(apt, no_move);
    CHECK(!make_belief_of_goal_question(apt, no_move, Polarity::Most, 0, rng).has_value());
}

TEST_CASE("verify_question accepts sound keys and rejects swapped ones") {
    const Apartment& apt = find_apartment(apartments(), "flat_a");
    FurnId coffee = apt.furniture_index("coffee_table");
    ScenarioTrace t = informed_trace(apt, coffee, coffee);
    Rng rng(8);
    ModalityChannels ch = split_modalities(apt, t, rng);

    auto built = make_belief_question(apt, t, Polarity::Least, rng);
    REQUIRE(built.has_value());
    built->record.channels = ch;
    ScoringParams scoring;
    CHECK(verify_question(apt, built->record, 2.0, scoring));

    // Re-keying to a rival breaks the margin.
    QuestionRecord wrong = built->record;
    wrong.key = (wrong.key + 1) % 3;
    CHECK(!verify_question(apt, wrong, 2.0, scoring));

    QuestionRecord malformed = built->record;
    malformed.key = 5;
    CHECK_THROWS_AS(verify_question(apt, malformed, 2.0, scoring), SchemaError);
}

TEST_CASE("build_dataset: counts, tallies, replay soundness, determinism") {
    GenParams params;
    params.scenarios = 6;
    params.per_type = 8;
    params.workers = 2;
    Dataset a = build_dataset(apartments(), 2025, params);
    Dataset b = build_dataset(apartments(), 2025, params);

    CHECK(a.manifest.at("counts").at("scenarios") == 6);
    CHECK(a.manifest.at("counts").at("questions") == 24);
    CHECK(a.manifest.at("counts").at("scenarios_language") == 4);
    CHECK(a.manifest.at("counts").at("per_type").at("belief") == 8);
    CHECK(a.manifest.at("counts").at("per_type").at("social_goal") == 8);
    CHECK(a.manifest.at("counts").at("per_type").at("belief_of_goal") == 8);

    auto close_to_half = [&](const char* t, const char* f, int total) {
        int x = a.manifest.at("tallies").value(t, 0);
        int y = a.manifest.at("tallies").value(f, 0);
        CHECK(x + y == total);
        CHECK(std::abs(x - y) <= 1);
    };
    close_to_half("belief_keyed_true", "belief_keyed_false", 8);
    close_to_half("social_keyed_help", "social_keyed_hinder", 8);
    close_to_half("belief_of_goal_keyed_true", "belief_of_goal_keyed_false", 8);

    // The manifest's tallies are recomputable from the records alone.
    CHECK(recompute_tallies(apartments(), a.records) == a.manifest.at("tallies"));

    // Deterministic in the seed, byte for byte.
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].dump() == b.records[i].dump());
    }
    CHECK(a.manifest.dump() == b.manifest.dump());

    // Replay soundness and key validity for every emitted record.
    int scenarios = 0, questions = 0;
    for (const auto& rec : a.records) {
        if (rec.at("kind") == "scenario") {
            const Apartment& apt = find_apartment(apartments(), rec.at("apartment"));
            ScenarioTrace trace = trace_from_json(apt, rec);
            CHECK(replay(apt, trace) == trace.terminal);
            ++scenarios;
        } else {
            QuestionRecord q = question_from_json(rec);
            const Apartment& apt = find_apartment(apartments(), q.apartment);
            ScoringParams scoring;
            CHECK(verify_question(apt, q, 2.0, scoring));
            ++questions;
        }
    }
    CHECK(scenarios == 6);
    CHECK(questions == 24);
}

TEST_CASE("build_dataset raises BudgetExceeded when quotas cannot fill") {
    GenParams params;
    params.scenarios = 4;
    params.per_type = 4;
    params.margin = 1e9;  // nothing verifies at this margin
    params.max_attempts = 40;
    CHECK_THROWS_AS(build_dataset(apartments(), 7, params), BudgetExceeded);
}

TEST_CASE("count validation rejects impossible configurations") {
    GenParams params;
    params.scenarios = 4;
    params.per_type = 7;  // odd
    CHECK_THROWS_AS(validate_counts(params), ConstraintUnsatisfiable);
    params.per_type = 40;  // needs 20 language scenarios out of 4
    CHECK_THROWS_AS(validate_counts(params), ConstraintUnsatisfiable);
}
