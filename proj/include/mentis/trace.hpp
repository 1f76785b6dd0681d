#pragma once
// Scenario traces: the time-indexed joint record of both agents' actions and
// utterances, agent specifications, and JSON (de)serialization. Replaying a
// trace's steps from its initial state must reproduce its terminal state.

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "mentis/mind.hpp"
#include "mentis/world.hpp"

namespace mentis {

struct AgentSpec {
    AgentId id = 0;
    PhysicalGoal physical_goal;
    SocialGoal social_goal = SocialGoal::Independent;
    Belief initial_belief;
    GoalBelief initial_goal_belief;
};

struct TraceStep {
    int tick = 0;
    AgentId agent = 0;
    PrimitiveAction action;
    Utterance utterance;
};

struct BeliefSnapshot {
    int tick = 0;
    AgentId agent = 0;
    Belief belief;
};

struct ScenarioTrace {
    std::string apartment;
    std::array<std::string, 2> names = {"agent0", "agent1"};
    bool language = false;
    WorldState s0;
    std::vector<TraceStep> steps;
    WorldState terminal;
    std::array<AgentSpec, 2> specs;
    std::vector<BeliefSnapshot> belief_history;
    bool horizon_exhausted = false;
};

inline WorldState replay(const Apartment& apt, const ScenarioTrace& trace) {
    WorldState s = trace.s0;
    for (const auto& step : trace.steps) {
        s = apply(apt, s, step.agent, step.action);
    }
    return s;
}

// ---------------------------------------------------------------------------
// JSON serialization. Identifiers are written as strings relative to the
// apartment so records stay readable and stable across template edits.

inline json action_to_json(const Apartment& apt, const PrimitiveAction& a) {
    json j;
    switch (a.verb) {
        case Verb::Noop:
            j["verb"] = "noop";
            break;
        case Verb::WalkTowards:
            j["verb"] = "walk";
            if (a.furniture != kNoFurniture) {
                j["furniture"] = apt.furniture[a.furniture].id;
            } else {
                j["room"] = apt.rooms[a.room];
            }
            break;
        case Verb::Open:
            j["verb"] = "open";
            j["furniture"] = apt.furniture[a.furniture].id;
            break;
        case Verb::Close:
            j["verb"] = "close";
            j["furniture"] = apt.furniture[a.furniture].id;
            break;
        case Verb::Grab:
            j["verb"] = "grab";
            j["object"] = apt.vocabulary[a.object];
            j["furniture"] = apt.furniture[a.furniture].id;
            break;
        case Verb::Put:
            j["verb"] = "put";
            j["object"] = apt.vocabulary[a.object];
            j["furniture"] = apt.furniture[a.furniture].id;
            break;
    }
    return j;
}

inline PrimitiveAction action_from_json(const Apartment& apt, const json& j) {
    const std::string verb = j.at("verb").get<std::string>();
    if (verb == "noop") return PrimitiveAction::noop();
    if (verb == "walk") {
        if (j.contains("furniture")) {
            return PrimitiveAction::walk_furniture(apt.furniture_index(j.at("furniture")));
        }
        return PrimitiveAction::walk_room(apt.room_index(j.at("room")));
    }
    if (verb == "open") return PrimitiveAction::open(apt.furniture_index(j.at("furniture")));
    if (verb == "close") return PrimitiveAction::close(apt.furniture_index(j.at("furniture")));
    if (verb == "grab") {
        return PrimitiveAction::grab(apt.object_index(j.at("object")),
                                     apt.furniture_index(j.at("furniture")));
    }
    if (verb == "put") {
        return PrimitiveAction::put(apt.object_index(j.at("object")),
                                    apt.furniture_index(j.at("furniture")));
    }
    throw SchemaError("unknown action verb: " + verb);
}

inline json utterance_to_json(const Apartment& apt, const Utterance& u) {
    json j;
    switch (u.kind) {
        case Utterance::Kind::Silence:
            j["kind"] = "silence";
            break;
        case Utterance::Kind::Inquiry: {
            j["kind"] = "inquiry";
            json asked = json::array();
            for (ObjectId o : u.asked) asked.push_back(apt.vocabulary[o]);
            j["asked"] = asked;
            break;
        }
        case Utterance::Kind::Inform: {
            j["kind"] = "inform";
            json stated = json::array();
            for (const auto& [obj, loc] : u.stated) {
                stated.push_back({{"object", apt.vocabulary[obj]}, {"furniture", apt.furniture[loc].id}});
            }
            j["stated"] = stated;
            break;
        }
    }
    return j;
}

inline Utterance utterance_from_json(const Apartment& apt, const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "silence") return Utterance::silence();
    if (kind == "inquiry") {
        std::vector<ObjectId> asked;
        for (const auto& o : j.at("asked")) asked.push_back(apt.object_index(o));
        return Utterance::inquiry(std::move(asked));
    }
    if (kind == "inform") {
        std::vector<std::pair<ObjectId, FurnId>> stated;
        for (const auto& s : j.at("stated")) {
            stated.push_back({apt.object_index(s.at("object")), apt.furniture_index(s.at("furniture"))});
        }
        return Utterance::inform(std::move(stated));
    }
    throw SchemaError("unknown utterance kind: " + kind);
}

inline json state_to_json(const Apartment& apt, const WorldState& s) {
    json j;
    json agents = json::array();
    for (const auto& pose : s.agents) {
        json p;
        p["room"] = apt.rooms[pose.room];
        if (pose.at != kNoFurniture) p["at"] = apt.furniture[pose.at].id;
        agents.push_back(p);
    }
    j["agents"] = agents;
    json placements = json::object();
    for (const auto& [obj, place] : s.placements) {
        placements[apt.vocabulary[obj]] =
            place.held() ? json{{"held_by", place.held_by}} : json{{"furniture", apt.furniture[place.furniture].id}};
    }
    j["placements"] = placements;
    json open = json::object();
    for (std::size_t f = 0; f < apt.furniture.size(); ++f) {
        if (apt.is_container(static_cast<FurnId>(f))) open[apt.furniture[f].id] = s.container_open[f];
    }
    j["open"] = open;
    j["tick"] = s.tick;
    return j;
}

inline WorldState state_from_json(const Apartment& apt, const json& j) {
    WorldState s;
    for (const auto& p : j.at("agents")) {
        AgentPose pose;
        pose.room = apt.room_index(p.at("room"));
        pose.at = p.contains("at") ? apt.furniture_index(p.at("at")) : kNoFurniture;
        s.agents.push_back(pose);
    }
    for (const auto& [name, place] : j.at("placements").items()) {
        ObjectId obj = apt.object_index(name);
        if (place.contains("held_by")) {
            s.placements[obj] = ObjectPlace::in_hand(place.at("held_by").get<int>());
        } else {
            s.placements[obj] = ObjectPlace::at(apt.furniture_index(place.at("furniture")));
        }
    }
    s.container_open.assign(apt.furniture.size(), false);
    for (const auto& [name, open] : j.at("open").items()) {
        s.container_open[apt.furniture_index(name)] = open.get<bool>();
    }
    s.tick = j.at("tick").get<int>();
    return s;
}

inline json belief_to_json(const Apartment& apt, const Belief& b) {
    json j;
    json cands = json::array();
    for (FurnId f : b.candidates) cands.push_back(apt.furniture[f].id);
    j["candidates"] = cands;
    json dist = json::object();
    for (const auto& [obj, d] : b.dist) {
        json probs = json::object();
        for (std::size_t i = 0; i < d.size(); ++i) probs[apt.furniture[b.candidates[i]].id] = d[i];
        dist[apt.vocabulary[obj]] = probs;
    }
    j["dist"] = dist;
    return j;
}

inline Belief belief_from_json(const Apartment& apt, const json& j) {
    Belief b;
    for (const auto& c : j.at("candidates")) b.candidates.push_back(apt.furniture_index(c));
    for (const auto& [name, probs] : j.at("dist").items()) {
        ObjectId obj = apt.object_index(name);
        std::vector<double> d(b.candidates.size(), 0.0);
        for (const auto& [furn, p] : probs.items()) {
            int i = b.candidate_index(apt.furniture_index(furn));
            if (i >= 0) d[static_cast<std::size_t>(i)] = p.get<double>();
        }
        b.dist[obj] = d;
    }
    return b;
}

inline json goal_to_json(const Apartment& apt, const PhysicalGoal& g) {
    json j;
    j["object"] = apt.vocabulary[g.object];
    if (g.kind == PhysicalGoal::Kind::Find) {
        j["kind"] = "find";
    } else {
        j["kind"] = "rearrange";
        j["target"] = apt.furniture[g.target].id;
    }
    return j;
}

inline PhysicalGoal goal_from_json(const Apartment& apt, const json& j) {
    ObjectId obj = apt.object_index(j.at("object"));
    if (j.at("kind").get<std::string>() == "find") return PhysicalGoal::find(obj);
    return PhysicalGoal::rearrange(obj, apt.furniture_index(j.at("target")));
}

inline json goal_belief_to_json(const Apartment& apt, const GoalBelief& gb) {
    json j = json::array();
    for (std::size_t i = 0; i < gb.candidates.size(); ++i) {
        j.push_back({{"goal", goal_to_json(apt, gb.candidates[i])}, {"p", gb.probs[i]}});
    }
    return j;
}

inline GoalBelief goal_belief_from_json(const Apartment& apt, const json& j) {
    GoalBelief gb;
    for (const auto& e : j) {
        gb.candidates.push_back(goal_from_json(apt, e.at("goal")));
        gb.probs.push_back(e.at("p").get<double>());
    }
    return gb;
}

inline json spec_to_json(const Apartment& apt, const AgentSpec& spec) {
    json j;
    j["id"] = spec.id;
    j["goal"] = goal_to_json(apt, spec.physical_goal);
    j["social"] = to_string(spec.social_goal);
    j["belief"] = belief_to_json(apt, spec.initial_belief);
    j["goal_belief"] = goal_belief_to_json(apt, spec.initial_goal_belief);
    return j;
}

inline AgentSpec spec_from_json(const Apartment& apt, const json& j) {
    AgentSpec spec;
    spec.id = j.at("id").get<int>();
    spec.physical_goal = goal_from_json(apt, j.at("goal"));
    const std::string social = j.at("social").get<std::string>();
    spec.social_goal = social == "help"     ? SocialGoal::Help
                       : social == "hinder" ? SocialGoal::Hinder
                                            : SocialGoal::Independent;
    spec.initial_belief = belief_from_json(apt, j.at("belief"));
    spec.initial_goal_belief = goal_belief_from_json(apt, j.at("goal_belief"));
    return spec;
}

inline json trace_to_json(const Apartment& apt, const ScenarioTrace& trace) {
    json j;
    j["apartment"] = trace.apartment;
    j["names"] = {trace.names[0], trace.names[1]};
    j["language"] = trace.language;
    j["s0"] = state_to_json(apt, trace.s0);
    json steps = json::array();
    for (const auto& step : trace.steps) {
        steps.push_back({{"tick", step.tick},
                         {"agent", step.agent},
                         {"action", action_to_json(apt, step.action)},
                         {"utterance", utterance_to_json(apt, step.utterance)}});
    }
    j["steps"] = steps;
    j["terminal"] = state_to_json(apt, trace.terminal);
    j["specs"] = {spec_to_json(apt, trace.specs[0]), spec_to_json(apt, trace.specs[1])};
    json beliefs = json::array();
    for (const auto& snap : trace.belief_history) {
        beliefs.push_back(
            {{"tick", snap.tick}, {"agent", snap.agent}, {"belief", belief_to_json(apt, snap.belief)}});
    }
    j["belief_history"] = beliefs;
    j["horizon_exhausted"] = trace.horizon_exhausted;
    return j;
}

inline ScenarioTrace trace_from_json(const Apartment& apt, const json& j) {
    ScenarioTrace trace;
    trace.apartment = j.at("apartment").get<std::string>();
    trace.names = {j.at("names")[0].get<std::string>(), j.at("names")[1].get<std::string>()};
    trace.language = j.at("language").get<bool>();
    trace.s0 = state_from_json(apt, j.at("s0"));
    for (const auto& s : j.at("steps")) {
        TraceStep step;
        step.tick = s.at("tick").get<int>();
        step.agent = s.at("agent").get<int>();
        step.action = action_from_json(apt, s.at("action"));
        step.utterance = utterance_from_json(apt, s.at("utterance"));
        trace.steps.push_back(step);
    }
    trace.terminal = state_from_json(apt, j.at("terminal"));
    trace.specs = {spec_from_json(apt, j.at("specs")[0]), spec_from_json(apt, j.at("specs")[1])};
    for (const auto& b : j.at("belief_history")) {
        BeliefSnapshot snap;
        snap.tick = b.at("tick").get<int>();
        snap.agent = b.at("agent").get<int>();
        snap.belief = belief_from_json(apt, b.at("belief"));
        trace.belief_history.push_back(snap);
    }
    trace.horizon_exhausted = j.at("horizon_exhausted").get<bool>();
    return trace;
}

}  // namespace mentis
