#pragma once
// Ground-truth household environment: apartment layouts, world state,
// primitive actions with legality rules, deterministic transitions, and
// per-agent partial observations.
//
// Topology is grid-free: rooms form an adjacency graph and furniture pieces
// are attachment points inside rooms. One WalkTowards step either hops to an
// adjacent room or attaches to a furniture piece in the current room.

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "mentis/core.hpp"

namespace mentis {

using json = nlohmann::json;

using AgentId = int;   // 0 or 1
using RoomId = int;    // index into Apartment::rooms
using FurnId = int;    // index into Apartment::furniture
using ObjectId = int;  // index into Apartment::vocabulary

constexpr int kNoFurniture = -1;
constexpr int kHandCapacity = 2;

enum class FurnKind { Surface, Container };

struct Furniture {
    std::string id;
    RoomId room = 0;
    FurnKind kind = FurnKind::Surface;
};

// Immutable apartment template loaded from the JSON fixture file.
class Apartment {
public:
    std::string id;
    std::vector<std::string> rooms;
    std::vector<std::vector<RoomId>> adjacency;
    std::vector<Furniture> furniture;
    std::vector<std::string> vocabulary;

    static Apartment from_json(const json& j) {
        Apartment a;
        a.id = j.at("id").get<std::string>();
        std::map<std::string, RoomId> room_index;
        for (const auto& r : j.at("rooms")) {
            room_index[r.at("id").get<std::string>()] = static_cast<RoomId>(a.rooms.size());
            a.rooms.push_back(r.at("id").get<std::string>());
        }
        a.adjacency.resize(a.rooms.size());
        for (const auto& r : j.at("rooms")) {
            RoomId from = room_index.at(r.at("id").get<std::string>());
            for (const auto& adj : r.at("adjacent")) {
                a.adjacency[from].push_back(room_index.at(adj.get<std::string>()));
            }
        }
        for (const auto& f : j.at("furniture")) {
            Furniture piece;
            piece.id = f.at("id").get<std::string>();
            piece.room = room_index.at(f.at("room").get<std::string>());
            piece.kind = f.at("kind").get<std::string>() == "container" ? FurnKind::Container
                                                                        : FurnKind::Surface;
            a.furniture.push_back(piece);
        }
        for (const auto& o : j.at("object_vocabulary")) {
            a.vocabulary.push_back(o.get<std::string>());
        }
        return a;
    }

    FurnId furniture_index(const std::string& name) const {
        for (std::size_t i = 0; i < furniture.size(); ++i) {
            if (furniture[i].id == name) return static_cast<FurnId>(i);
        }
        throw UnknownLocation("no furniture named " + name + " in " + id);
    }

    RoomId room_index(const std::string& name) const {
        for (std::size_t i = 0; i < rooms.size(); ++i) {
            if (rooms[i] == name) return static_cast<RoomId>(i);
        }
        throw UnknownLocation("no room named " + name + " in " + id);
    }

    ObjectId object_index(const std::string& name) const {
        for (std::size_t i = 0; i < vocabulary.size(); ++i) {
            if (vocabulary[i] == name) return static_cast<ObjectId>(i);
        }
        throw UnknownLocation("no object kind named " + name + " in " + id);
    }

    bool is_container(FurnId f) const { return furniture[f].kind == FurnKind::Container; }

    bool rooms_adjacent(RoomId a, RoomId b) const {
        for (RoomId r : adjacency[a]) {
            if (r == b) return true;
        }
        return false;
    }

    std::vector<FurnId> furniture_in_room(RoomId r) const {
        std::vector<FurnId> out;
        for (std::size_t i = 0; i < furniture.size(); ++i) {
            if (furniture[i].room == r) out.push_back(static_cast<FurnId>(i));
        }
        return out;
    }
};

// Loads every apartment template from a fixture file
// (schema: rooms[], furniture[{id, room, kind}], object_vocabulary[]).
inline std::vector<Apartment> load_apartments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open apartment fixture file: " + path);
    json j = json::parse(in);
    std::vector<Apartment> out;
    for (const auto& a : j.at("apartments")) out.push_back(Apartment::from_json(a));
    return out;
}

inline const Apartment& find_apartment(const std::vector<Apartment>& apts, const std::string& id) {
    for (const auto& a : apts) {
        if (a.id == id) return a;
    }
    throw SchemaError("unknown apartment id: " + id);
}

struct AgentPose {
    RoomId room = 0;
    FurnId at = kNoFurniture;  // adjacent furniture, or none

    bool operator==(const AgentPose&) const = default;
};

// Where an object instance currently is: a furniture piece or an agent's hand.
struct ObjectPlace {
    FurnId furniture = kNoFurniture;
    AgentId held_by = -1;  // -1 when placed

    bool held() const { return held_by >= 0; }
    bool operator==(const ObjectPlace&) const = default;

    static ObjectPlace at(FurnId f) { return ObjectPlace{f, -1}; }
    static ObjectPlace in_hand(AgentId a) { return ObjectPlace{kNoFurniture, a}; }
};

struct WorldState {
    std::vector<AgentPose> agents;          // per agent
    std::map<ObjectId, ObjectPlace> placements;
    std::vector<bool> container_open;       // indexed by FurnId; false for surfaces
    int tick = 0;

    bool operator==(const WorldState&) const = default;

    int held_count(AgentId a) const {
        int n = 0;
        for (const auto& [obj, place] : placements) {
            (void)obj;
            if (place.held_by == a) ++n;
        }
        return n;
    }

    std::vector<ObjectId> held_objects(AgentId a) const {
        std::vector<ObjectId> out;
        for (const auto& [obj, place] : placements) {
            if (place.held_by == a) out.push_back(obj);
        }
        return out;
    }

    // Compact key for search visited-sets; ignores tick.
    std::string key() const {
        std::string k;
        for (const auto& p : agents) {
            k += static_cast<char>('A' + p.room);
            k += static_cast<char>('a' + p.at + 1);
        }
        for (const auto& [obj, place] : placements) {
            k += static_cast<char>('0' + obj);
            k += static_cast<char>(place.held() ? 'H' + place.held_by : 'f' + place.furniture);
        }
        for (bool b : container_open) k += b ? '1' : '0';
        return k;
    }
};

enum class Verb { WalkTowards, Open, Close, Grab, Put, Noop };

struct PrimitiveAction {
    Verb verb = Verb::Noop;
    // WalkTowards: exactly one of room / furniture set.
    // Open/Close: furniture. Grab/Put: object + furniture.
    RoomId room = -1;
    FurnId furniture = kNoFurniture;
    ObjectId object = -1;

    bool operator==(const PrimitiveAction&) const = default;
    bool operator<(const PrimitiveAction& o) const {
        return std::tie(verb, room, furniture, object) <
               std::tie(o.verb, o.room, o.furniture, o.object);
    }

    static PrimitiveAction noop() { return {}; }
    static PrimitiveAction walk_room(RoomId r) { return {Verb::WalkTowards, r, kNoFurniture, -1}; }
    static PrimitiveAction walk_furniture(FurnId f) { return {Verb::WalkTowards, -1, f, -1}; }
    static PrimitiveAction open(FurnId f) { return {Verb::Open, -1, f, -1}; }
    static PrimitiveAction close(FurnId f) { return {Verb::Close, -1, f, -1}; }
    static PrimitiveAction grab(ObjectId o, FurnId from) { return {Verb::Grab, -1, from, o}; }
    static PrimitiveAction put(ObjectId o, FurnId to) { return {Verb::Put, -1, to, o}; }
};

struct Observation {
    AgentId viewer = 0;
    RoomId room = 0;
    // Objects the viewer can see: on surfaces in the room, inside open
    // containers in the room, or held by a co-located agent.
    std::vector<std::pair<ObjectId, ObjectPlace>> visible_objects;
    // Every agent in the viewer's room, with that agent's last action if known.
    std::vector<std::pair<AgentId, std::optional<PrimitiveAction>>> visible_agents;
    std::map<FurnId, bool> open_state;  // in-room containers only
};

namespace detail {

inline bool adjacent_to(const WorldState& s, AgentId agent, FurnId f) {
    return s.agents[agent].at == f;
}

inline void require(bool cond, const std::string& what) {
    if (!cond) throw IllegalAction(what);
}

}  // namespace detail

inline bool is_legal(const Apartment& apt, const WorldState& s, AgentId agent,
                     const PrimitiveAction& a) {
    const AgentPose& pose = s.agents[agent];
    switch (a.verb) {
        case Verb::Noop:
            return true;
        case Verb::WalkTowards:
            if (a.furniture != kNoFurniture) {
                return apt.furniture[a.furniture].room == pose.room;
            }
            return a.room >= 0 && apt.rooms_adjacent(pose.room, a.room);
        case Verb::Open:
            return a.furniture != kNoFurniture && apt.is_container(a.furniture) &&
                   detail::adjacent_to(s, agent, a.furniture) && !s.container_open[a.furniture];
        case Verb::Close:
            return a.furniture != kNoFurniture && apt.is_container(a.furniture) &&
                   detail::adjacent_to(s, agent, a.furniture) && s.container_open[a.furniture];
        case Verb::Grab: {
            auto it = s.placements.find(a.object);
            if (it == s.placements.end() || it->second.held()) return false;
            if (it->second.furniture != a.furniture) return false;
            if (!detail::adjacent_to(s, agent, a.furniture)) return false;
            if (apt.is_container(a.furniture) && !s.container_open[a.furniture]) return false;
            return s.held_count(agent) < kHandCapacity;
        }
        case Verb::Put: {
            auto it = s.placements.find(a.object);
            if (it == s.placements.end() || it->second.held_by != agent) return false;
            if (!detail::adjacent_to(s, agent, a.furniture)) return false;
            if (apt.is_container(a.furniture) && !s.container_open[a.furniture]) return false;
            return true;
        }
    }
    return false;
}

// Deterministic transition. Throws IllegalAction on a precondition violation,
// which signals a generator or planner bug rather than a recoverable state.
inline WorldState apply(const Apartment& apt, const WorldState& s, AgentId agent,
                        const PrimitiveAction& a) {
    detail::require(is_legal(apt, s, agent, a), "illegal action by agent " + std::to_string(agent));
    WorldState next = s;
    AgentPose& pose = next.agents[agent];
    switch (a.verb) {
        case Verb::Noop:
            break;
        case Verb::WalkTowards:
            if (a.furniture != kNoFurniture) {
                pose.at = a.furniture;
            } else {
                pose.room = a.room;
                pose.at = kNoFurniture;
            }
            break;
        case Verb::Open:
            next.container_open[a.furniture] = true;
            break;
        case Verb::Close:
            next.container_open[a.furniture] = false;
            break;
        case Verb::Grab:
            next.placements[a.object] = ObjectPlace::in_hand(agent);
            break;
        case Verb::Put:
            next.placements[a.object] = ObjectPlace::at(a.furniture);
            break;
    }
    next.tick = s.tick + 1;
    return next;
}

// Every legal action for the agent. Noop is always included, so the result is
// never empty.
inline std::vector<PrimitiveAction> legal_actions(const Apartment& apt, const WorldState& s,
                                                  AgentId agent) {
    std::vector<PrimitiveAction> out;
    out.push_back(PrimitiveAction::noop());
    const AgentPose& pose = s.agents[agent];
    for (RoomId r : apt.adjacency[pose.room]) {
        out.push_back(PrimitiveAction::walk_room(r));
    }
    for (FurnId f : apt.furniture_in_room(pose.room)) {
        out.push_back(PrimitiveAction::walk_furniture(f));
    }
    if (pose.at != kNoFurniture && apt.is_container(pose.at)) {
        out.push_back(s.container_open[pose.at] ? PrimitiveAction::close(pose.at)
                                                : PrimitiveAction::open(pose.at));
    }
    for (const auto& [obj, place] : s.placements) {
        if (!place.held() && place.furniture == pose.at && pose.at != kNoFurniture) {
            PrimitiveAction g = PrimitiveAction::grab(obj, pose.at);
            if (is_legal(apt, s, agent, g)) out.push_back(g);
        }
        if (place.held_by == agent && pose.at != kNoFurniture) {
            PrimitiveAction p = PrimitiveAction::put(obj, pose.at);
            if (is_legal(apt, s, agent, p)) out.push_back(p);
        }
    }
    return out;
}

// Partial observation: deterministic function of the state (plus the other
// agents' most recent actions, which are not part of WorldState).
inline Observation observe(const Apartment& apt, const WorldState& s, AgentId agent,
                           const std::map<AgentId, PrimitiveAction>& last_actions = {}) {
    Observation obs;
    obs.viewer = agent;
    obs.room = s.agents[agent].room;
    for (FurnId f : apt.furniture_in_room(obs.room)) {
        if (apt.is_container(f)) obs.open_state[f] = s.container_open[f];
    }
    for (const auto& [obj, place] : s.placements) {
        if (place.held()) {
            if (s.agents[place.held_by].room == obs.room) obs.visible_objects.push_back({obj, place});
            continue;
        }
        FurnId f = place.furniture;
        if (apt.furniture[f].room != obs.room) continue;
        if (apt.is_container(f) && !s.container_open[f]) continue;
        obs.visible_objects.push_back({obj, place});
    }
    for (AgentId a = 0; a < static_cast<AgentId>(s.agents.size()); ++a) {
        if (s.agents[a].room != obs.room) continue;
        auto it = last_actions.find(a);
        obs.visible_agents.push_back(
            {a, it == last_actions.end() ? std::nullopt : std::optional<PrimitiveAction>(it->second)});
    }
    return obs;
}

}  // namespace mentis
