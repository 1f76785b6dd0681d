#pragma once
// Procedural scenario sampling. Language scenarios stage a seeker and a
// responder in one room; silent scenarios stage a placer and a mover whose
// rearrangement targets for the shared object differ.

#include <array>
#include <vector>

#include "mentis/rollout.hpp"
#include "mentis/templates.hpp"
#include "mentis/trace.hpp"

namespace mentis {

struct ScenarioConfig {
    std::string apartment;
    WorldState s0;
    std::array<AgentSpec, 2> specs;
    std::array<std::string, 2> names;
    bool language = true;
};

namespace detail {

// Initial belief marginal drawn from {ground-truth delta, false delta at a
// wrong location, uniform}.
inline void sample_marginal(Belief& belief, ObjectId obj, FurnId truth, Rng& rng) {
    switch (rng.uniform(3)) {
        case 0:
            belief.set_delta(obj, truth);
            break;
        case 1: {
            std::vector<FurnId> wrong;
            for (FurnId f : belief.candidates) {
                if (f != truth) wrong.push_back(f);
            }
            if (wrong.empty()) throw ConstraintUnsatisfiable("false belief needs >= 2 locations");
            belief.set_delta(obj, rng.pick(wrong));
            break;
        }
        default:
            belief.set_uniform(obj);
            break;
    }
}

inline FurnId pick_other(const Apartment& apt, FurnId avoid, Rng& rng) {
    std::vector<FurnId> pool;
    for (std::size_t f = 0; f < apt.furniture.size(); ++f) {
        if (static_cast<FurnId>(f) != avoid) pool.push_back(static_cast<FurnId>(f));
    }
    if (pool.empty()) throw ConstraintUnsatisfiable("apartment needs >= 2 locations");
    return rng.pick(pool);
}

inline ScenarioConfig try_sample(const std::vector<Apartment>& apartments, Rng& rng,
                                 bool language) {
    const Apartment& apt = apartments[rng.uniform(apartments.size())];
    if (apt.furniture.size() < 2) throw ConstraintUnsatisfiable("apartment too small");
    if (apt.vocabulary.size() < 2) throw ConstraintUnsatisfiable("vocabulary too small");

    ScenarioConfig cfg;
    cfg.apartment = apt.id;
    cfg.language = language;

    std::vector<std::string> names(std::begin(kAgentNames), std::end(kAgentNames));
    rng.shuffle(names);
    cfg.names = {names[0], names[1]};

    // Two goal-relevant objects, placed uniformly; containers start closed.
    std::vector<ObjectId> objects;
    while (objects.size() < 2) {
        ObjectId obj = static_cast<ObjectId>(rng.uniform(apt.vocabulary.size()));
        if (std::find(objects.begin(), objects.end(), obj) == objects.end()) objects.push_back(obj);
    }
    WorldState s0;
    s0.container_open.assign(apt.furniture.size(), false);
    for (ObjectId obj : objects) {
        s0.placements[obj] = ObjectPlace::at(static_cast<FurnId>(rng.uniform(apt.furniture.size())));
    }

    Belief base;
    for (std::size_t f = 0; f < apt.furniture.size(); ++f) {
        base.candidates.push_back(static_cast<FurnId>(f));
    }

    auto sample_beliefs = [&](Rng& r) {
        Belief b = base;
        for (ObjectId obj : objects) {
            sample_marginal(b, obj, s0.placements.at(obj).furniture, r);
        }
        return b;
    };

    const ObjectId x0 = objects[0];
    const ObjectId x1 = objects[1];

    if (language) {
        // Both agents share a starting room so the inquiry can fire.
        RoomId start = static_cast<RoomId>(rng.uniform(apt.rooms.size()));
        s0.agents = {AgentPose{start, kNoFurniture}, AgentPose{start, kNoFurniture}};

        AgentSpec seeker;
        seeker.id = 0;
        seeker.social_goal = SocialGoal::Independent;
        seeker.physical_goal =
            rng.bernoulli(0.5)
                ? PhysicalGoal::find(x0)
                : PhysicalGoal::rearrange(x0, pick_other(apt, s0.placements.at(x0).furniture, rng));
        seeker.initial_belief = sample_beliefs(rng);
        seeker.initial_goal_belief =
            GoalBelief::uniform({PhysicalGoal::find(x0), PhysicalGoal::find(x1)});

        AgentSpec responder;
        responder.id = 1;
        std::size_t social = rng.uniform(3);
        responder.social_goal = social == 0   ? SocialGoal::Help
                                : social == 1 ? SocialGoal::Hinder
                                              : SocialGoal::Independent;
        // An independent responder keeps a pre-satisfied objective so the
        // conversation stays the focal event.
        responder.physical_goal = PhysicalGoal::rearrange(x1, s0.placements.at(x1).furniture);
        responder.initial_belief = sample_beliefs(rng);
        responder.initial_goal_belief =
            GoalBelief::uniform({PhysicalGoal::find(x0), PhysicalGoal::find(x1)});

        cfg.s0 = s0;
        cfg.specs = {seeker, responder};
        return cfg;
    }

    // Silent relocation scenario: the placer rearranges the single object of
    // its kind; the mover follows up per its social stance and its belief of
    // the placer's goal.
    const FurnId origin = s0.placements.at(x0).furniture;
    const FurnId placer_target = pick_other(apt, origin, rng);
    RoomId placer_room = apt.furniture[origin].room;
    RoomId mover_room = static_cast<RoomId>(rng.uniform(apt.rooms.size()));
    s0.agents = {AgentPose{placer_room, kNoFurniture}, AgentPose{mover_room, kNoFurniture}};

    AgentSpec placer;
    placer.id = 0;
    placer.social_goal = SocialGoal::Independent;
    placer.physical_goal = PhysicalGoal::rearrange(x0, placer_target);
    placer.initial_belief = sample_beliefs(rng);
    placer.initial_goal_belief = GoalBelief::uniform({PhysicalGoal::find(x0)});

    AgentSpec mover;
    mover.id = 1;
    bool helping = rng.bernoulli(0.5);
    mover.social_goal = helping ? SocialGoal::Help : SocialGoal::Hinder;
    // Help pairs with a false belief of the placer's goal, Hinder with a
    // true one; either way the mover works toward a different location.
    FurnId believed_target = helping ? pick_other(apt, placer_target, rng) : placer_target;
    mover.initial_goal_belief =
        GoalBelief::delta({PhysicalGoal::rearrange(x0, believed_target)}, 0);
    mover.physical_goal = PhysicalGoal::rearrange(
        x0, helping ? believed_target : pick_other(apt, placer_target, rng));
    mover.initial_belief = sample_beliefs(rng);

    cfg.s0 = s0;
    cfg.specs = {placer, mover};
    return cfg;
}

}  // namespace detail

// Samples a structurally valid scenario configuration, resampling on
// constraint violations; gives up after 100 attempts.
inline ScenarioConfig sample_scenario(const std::vector<Apartment>& apartments, Rng& rng,
                                      bool language) {
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < 100; ++attempt) {
        try {
            return detail::try_sample(apartments, rng, language);
        } catch (const ConstraintUnsatisfiable& e) {
            last_error = e.what();
        }
    }
    throw ConstraintUnsatisfiable("no valid scenario after 100 resamples: " + last_error);
}

}  // namespace mentis
