#pragma once
// Mental-state machinery: categorical beliefs over object locations, physical
// and social goals, beliefs about the other agent's goal, interactive states,
// belief updates from observation and communication, and the inquiry /
// response rules for the utterance channel.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mentis/core.hpp"
#include "mentis/world.hpp"

namespace mentis {

// Per-object categorical distribution over a shared set of candidate
// locations. Candidates are furniture pieces of one apartment; every tracked
// object's distribution is aligned to the same candidate list.
struct Belief {
    std::vector<FurnId> candidates;
    std::map<ObjectId, std::vector<double>> dist;

    bool tracks(ObjectId obj) const { return dist.count(obj) > 0; }

    const std::vector<double>& marginal(ObjectId obj) const { return dist.at(obj); }

    int candidate_index(FurnId f) const {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (candidates[i] == f) return static_cast<int>(i);
        }
        return -1;
    }

    double probability(ObjectId obj, FurnId f) const {
        int i = candidate_index(f);
        return i < 0 ? 0.0 : dist.at(obj)[static_cast<std::size_t>(i)];
    }

    void set_uniform(ObjectId obj) {
        dist[obj] = std::vector<double>(candidates.size(), 1.0 / candidates.size());
    }

    void set_delta(ObjectId obj, FurnId f) {
        int i = candidate_index(f);
        if (i < 0) throw UnknownLocation("belief candidate set lacks requested location");
        std::vector<double> d(candidates.size(), 0.0);
        d[static_cast<std::size_t>(i)] = 1.0;
        dist[obj] = d;
    }

    // Argmax location; ties broken by lexicographic furniture identifier.
    FurnId mode(ObjectId obj, const Apartment& apt) const {
        const auto& d = dist.at(obj);
        int best = -1;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (best < 0 || d[i] > d[static_cast<std::size_t>(best)] + 1e-12 ||
                (std::abs(d[i] - d[static_cast<std::size_t>(best)]) <= 1e-12 &&
                 apt.furniture[candidates[i]].id < apt.furniture[candidates[best]].id)) {
                best = static_cast<int>(i);
            }
        }
        return candidates[static_cast<std::size_t>(best)];
    }
};

struct PhysicalGoal {
    enum class Kind { Find, Rearrange };
    Kind kind = Kind::Find;
    ObjectId object = -1;
    FurnId target = kNoFurniture;  // Rearrange only

    bool operator==(const PhysicalGoal&) const = default;
    bool operator<(const PhysicalGoal& o) const {
        return std::tie(kind, object, target) < std::tie(o.kind, o.object, o.target);
    }

    static PhysicalGoal find(ObjectId obj) { return {Kind::Find, obj, kNoFurniture}; }
    static PhysicalGoal rearrange(ObjectId obj, FurnId to) { return {Kind::Rearrange, obj, to}; }
};

enum class SocialGoal { Help, Hinder, Independent };

inline std::string to_string(SocialGoal g) {
    switch (g) {
        case SocialGoal::Help: return "help";
        case SocialGoal::Hinder: return "hinder";
        case SocialGoal::Independent: return "independent";
    }
    return "independent";
}

// Distribution over candidate physical goals of the other agent.
struct GoalBelief {
    std::vector<PhysicalGoal> candidates;
    std::vector<double> probs;

    static GoalBelief uniform(std::vector<PhysicalGoal> goals) {
        GoalBelief b;
        b.probs.assign(goals.size(), 1.0 / goals.size());
        b.candidates = std::move(goals);
        return b;
    }

    static GoalBelief delta(std::vector<PhysicalGoal> goals, std::size_t index) {
        GoalBelief b;
        b.candidates = std::move(goals);
        b.probs.assign(b.candidates.size(), 0.0);
        b.probs[index] = 1.0;
        return b;
    }

    double entropy() const { return entropy_nats(probs); }

    const PhysicalGoal& mode() const { return candidates[argmax_index(probs)]; }
};

// Level-0 carries only the physical state; level-1 additionally nests the
// other agent's belief and goal distribution (and never deeper).
struct InteractiveState {
    int level = 0;
    WorldState physical;
    std::optional<Belief> other_belief;      // level 1 only
    std::optional<GoalBelief> other_goal;    // level 1 only

    static InteractiveState level0(WorldState physical) {
        return {0, std::move(physical), std::nullopt, std::nullopt};
    }

    static InteractiveState level1(WorldState physical, Belief other_belief,
                                   GoalBelief other_goal) {
        return {1, std::move(physical), std::move(other_belief), std::move(other_goal)};
    }

    bool valid() const {
        if (level == 0) return !other_belief.has_value() && !other_goal.has_value();
        return level == 1 && other_belief.has_value() && other_goal.has_value();
    }
};

// Candidate explanation of one agent's mind: what it believes about the
// state, its social stance, and what it thinks the other agent wants.
struct Hypothesis {
    Belief belief_of_state;
    SocialGoal social_goal = SocialGoal::Independent;
    GoalBelief belief_of_goal;
};

struct Utterance {
    enum class Kind { Inquiry, Inform, Silence };
    Kind kind = Kind::Silence;
    std::vector<ObjectId> asked;                       // Inquiry
    std::vector<std::pair<ObjectId, FurnId>> stated;   // Inform, one location per object

    bool operator==(const Utterance&) const = default;

    static Utterance silence() { return {}; }
    static Utterance inquiry(std::vector<ObjectId> objs) {
        return {Kind::Inquiry, std::move(objs), {}};
    }
    static Utterance inform(std::vector<std::pair<ObjectId, FurnId>> stated) {
        return {Kind::Inform, {}, std::move(stated)};
    }
};

// ---------------------------------------------------------------------------
// Belief updates

// Bayes update under deterministic visibility. For each tracked object:
// a direct sighting pins the distribution to the seen location; otherwise
// every candidate location that the observation proves empty is zeroed and
// the rest renormalized. If all mass would vanish (stale belief versus a
// moved object), the distribution resets to uniform over the locations this
// observation says nothing about.
inline Belief update_on_observation(const Belief& belief, const Observation& obs,
                                    const Apartment& apt) {
    Belief next = belief;
    for (auto& [obj, d] : next.dist) {
        // Direct sighting at a furniture location. A sighting in someone's
        // hand pins nothing here; the zeroing below still applies.
        int seen_at = -1;
        for (const auto& [seen_obj, place] : obs.visible_objects) {
            if (seen_obj == obj && !place.held()) seen_at = next.candidate_index(place.furniture);
        }
        if (seen_at >= 0) {
            std::fill(d.begin(), d.end(), 0.0);
            d[static_cast<std::size_t>(seen_at)] = 1.0;
            continue;
        }
        // Locations the observation proves empty: in-room surfaces and open
        // in-room containers where the object was not seen.
        std::vector<bool> proven_empty(d.size(), false);
        for (std::size_t i = 0; i < next.candidates.size(); ++i) {
            FurnId f = next.candidates[i];
            if (apt.furniture[f].room != obs.room) continue;
            if (apt.is_container(f)) {
                auto it = obs.open_state.find(f);
                if (it == obs.open_state.end() || !it->second) continue;
            }
            proven_empty[i] = true;
        }
        double mass = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (proven_empty[i]) d[i] = 0.0;
            mass += d[i];
        }
        if (mass > 0.0) {
            for (double& x : d) x /= mass;
            continue;
        }
        // ContradictoryEvidence: reset to uniform over unobserved locations.
        std::vector<double> reset(d.size(), 0.0);
        int open = 0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!proven_empty[i]) {
                reset[i] = 1.0;
                ++open;
            }
        }
        if (open == 0) {
            // Everything in sight is empty (e.g. the object is in transit in
            // someone's hand): fall back to uniform over all candidates.
            std::fill(reset.begin(), reset.end(), 1.0);
            open = static_cast<int>(reset.size());
        }
        for (double& x : reset) x /= open;
        d = reset;
    }
    return next;
}

// Full-trust inform update: each stated (object, location) pair overwrites
// that object's marginal with a delta. Other marginals are untouched.
inline Belief update_on_inform(const Belief& belief, const Utterance& inform,
                               const Apartment& apt) {
    (void)apt;
    Belief next = belief;
    for (const auto& [obj, loc] : inform.stated) {
        if (!next.tracks(obj)) continue;
        int i = next.candidate_index(loc);
        if (i < 0) throw UnknownLocation("inform names a location outside the candidate set");
        auto& d = next.dist.at(obj);
        std::fill(d.begin(), d.end(), 0.0);
        d[static_cast<std::size_t>(i)] = 1.0;
    }
    return next;
}

inline double entropy(const Belief& belief, ObjectId obj) {
    return entropy_nats(belief.marginal(obj));
}

// Inquiry trigger: a co-located agent asks when its belief about the goal
// object is uncertain beyond the threshold (in nats).
inline bool should_inquire(const Belief& belief, const PhysicalGoal& goal, bool colocated,
                           double threshold) {
    return colocated && entropy(belief, goal.object) > threshold;
}

// Answer to an inquiry. Help and Independent responders state their belief
// mode per asked object; a hinderer states a seeded draw among the locations
// different from its belief mode.
inline Utterance compose_response(const Belief& responder_belief, SocialGoal social,
                                  const Utterance& inquiry,
                                  const std::vector<FurnId>& candidate_locations,
                                  const Apartment& apt, Rng& rng) {
    std::vector<std::pair<ObjectId, FurnId>> stated;
    for (ObjectId obj : inquiry.asked) {
        FurnId mode = responder_belief.mode(obj, apt);
        if (social == SocialGoal::Hinder) {
            std::vector<FurnId> wrong;
            for (FurnId f : candidate_locations) {
                if (f != mode) wrong.push_back(f);
            }
            stated.push_back({obj, rng.pick(wrong)});
        } else {
            stated.push_back({obj, mode});
        }
    }
    return Utterance::inform(std::move(stated));
}

}  // namespace mentis
