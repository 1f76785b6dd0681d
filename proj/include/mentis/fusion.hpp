#pragma once
// Multi-channel information fusion: parses the two rendered channels back to
// symbolic steps, fills in redacted object references from the complementary
// channel's context, merges by step index, and recovers the initial state
// from the agents' actions.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mentis/templates.hpp"
#include "mentis/trace.hpp"

namespace mentis {

struct FusedStep {
    int index = 0;
    AgentId agent = 0;
    std::optional<PrimitiveAction> action;  // nullopt: redacted and unresolved
    Utterance utterance;                    // Silence when absent
    bool from_text = false;                 // provenance of the action component
    bool ambiguous_object = false;          // AmbiguousReference recorded here
    FurnId redacted_from = kNoFurniture;    // source furniture of an unresolved grab
};

struct FusedContext {
    std::array<std::string, 2> names = {"", ""};
    std::array<RoomId, 2> initial_rooms = {0, 0};
    // Recovered placements; objects never grabbed stay absent (unknown).
    std::map<ObjectId, FurnId> initial_placements;
    std::vector<FusedStep> merged_steps;
    std::vector<int> ambiguous_steps;
};

// First-grab rule: the earliest Grab(object, from L) with no prior Put of the
// object fixes the object's initial location at L. Later Puts never revise
// it; a Put before the first Grab leaves the initial location unknown.
inline std::map<ObjectId, FurnId> retrieve_initial_state(
    const std::vector<std::pair<int, PrimitiveAction>>& ordered_actions) {
    std::map<ObjectId, FurnId> initial;
    std::map<ObjectId, bool> put_seen;
    for (const auto& [index, a] : ordered_actions) {
        (void)index;
        if (a.verb == Verb::Put) {
            put_seen[a.object] = true;
        } else if (a.verb == Verb::Grab) {
            if (put_seen.count(a.object)) continue;
            auto it = initial.find(a.object);
            if (it == initial.end()) {
                initial[a.object] = a.furniture;
            } else if (it->second != a.furniture) {
                throw InconsistentTrace("object grabbed from two initial locations");
            }
        }
    }
    return initial;
}

inline FusedContext fuse(const Apartment& apt, const std::string& text_channel,
                         const std::string& observation_channel) {
    ParsedChannel text = parse_channel(apt, text_channel);
    ParsedChannel obs = parse_channel(apt, observation_channel);

    FusedContext ctx;
    // Agent identities come from the scene-setting preamble, which lives in
    // whichever channel covers the start of the interaction.
    const auto& intro = !obs.initial_rooms.empty() ? obs.initial_rooms : text.initial_rooms;
    if (intro.size() < 2) throw SchemaError("channels carry no scene-setting preamble");
    ctx.names = {intro[0].first, intro[1].first};
    ctx.initial_rooms = {intro[0].second, intro[1].second};

    auto agent_of = [&](const std::string& name) -> AgentId {
        if (name == ctx.names[0]) return 0;
        if (name == ctx.names[1]) return 1;
        throw SchemaError("channel mentions unknown agent: " + name);
    };

    // A redacted "grabs some object" resolves to the unique object kind the
    // text channel mentions; with several candidates the step stays unknown
    // and an AmbiguousReference is recorded.
    auto resolve = [&](ParsedEvent& ev) {
        if (!ev.object_redacted) return;
        if (text.mentioned_objects.size() == 1) {
            ev.action = PrimitiveAction::grab(text.mentioned_objects[0], ev.redacted_from);
            ev.object_redacted = false;
        }
    };

    std::map<int, FusedStep> by_index;
    auto absorb = [&](ParsedEvent& ev, bool is_text) {
        if (is_text) resolve(ev);
        FusedStep& step = by_index[ev.step_index];
        step.index = ev.step_index;
        step.agent = agent_of(ev.actor);
        if (ev.action.has_value() && !step.action.has_value()) {
            step.action = ev.action;
            step.from_text = is_text;
        }
        if (ev.object_redacted && !step.action.has_value()) {
            step.ambiguous_object = text.mentioned_objects.size() > 1;
            step.redacted_from = ev.redacted_from;
        }
        if (ev.utterance.has_value() && ev.utterance->kind != Utterance::Kind::Silence) {
            step.utterance = *ev.utterance;
        }
    };
    for (ParsedEvent& ev : obs.events) {
        resolve(ev);
        absorb(ev, false);
    }
    for (ParsedEvent& ev : text.events) absorb(ev, true);

    for (auto& [index, step] : by_index) {
        (void)index;
        ctx.merged_steps.push_back(step);
        if (step.ambiguous_object) ctx.ambiguous_steps.push_back(step.index);
    }

    std::vector<std::pair<int, PrimitiveAction>> actions;
    for (const auto& step : ctx.merged_steps) {
        if (step.action.has_value()) actions.push_back({step.index, *step.action});
    }
    ctx.initial_placements = retrieve_initial_state(actions);
    return ctx;
}

// Lenient world reconstruction used by likelihood scoring: trusts the fused
// steps, skips legality checks, and tracks only objects with recovered
// placements. All containers start closed (the generator's convention).
inline WorldState initial_world(const Apartment& apt, const FusedContext& ctx) {
    WorldState s;
    s.agents = {AgentPose{ctx.initial_rooms[0], kNoFurniture},
                AgentPose{ctx.initial_rooms[1], kNoFurniture}};
    for (const auto& [obj, furn] : ctx.initial_placements) {
        s.placements[obj] = ObjectPlace::at(furn);
    }
    s.container_open.assign(apt.furniture.size(), false);
    return s;
}

inline void replay_step(const Apartment& apt, WorldState& s, AgentId agent,
                        const PrimitiveAction& a) {
    AgentPose& pose = s.agents[agent];
    switch (a.verb) {
        case Verb::Noop:
            break;
        case Verb::WalkTowards:
            if (a.furniture != kNoFurniture) {
                pose.room = apt.furniture[a.furniture].room;
                pose.at = a.furniture;
            } else {
                pose.room = a.room;
                pose.at = kNoFurniture;
            }
            break;
        case Verb::Open:
            s.container_open[a.furniture] = true;
            break;
        case Verb::Close:
            s.container_open[a.furniture] = false;
            break;
        case Verb::Grab:
            s.placements[a.object] = ObjectPlace::in_hand(agent);
            break;
        case Verb::Put:
            s.placements[a.object] = ObjectPlace::at(a.furniture);
            break;
    }
    s.tick += 1;
}

}  // namespace mentis
