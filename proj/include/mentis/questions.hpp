#pragma once
// Question synthesis: the three question types, their stems and option texts,
// hypothesis annotations, and answer keys derived from ground truth. Every
// question conditions on two mental variables and asks about the third.

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mentis/templates.hpp"
#include "mentis/trace.hpp"

namespace mentis {

enum class QType { Belief, SocialGoal, BeliefOfGoal };
enum class Polarity { Most, Least };

inline std::string to_string(QType t) {
    switch (t) {
        case QType::Belief: return "belief";
        case QType::SocialGoal: return "social_goal";
        case QType::BeliefOfGoal: return "belief_of_goal";
    }
    return "belief";
}

inline QType qtype_from_string(const std::string& s) {
    if (s == "belief") return QType::Belief;
    if (s == "social_goal") return QType::SocialGoal;
    if (s == "belief_of_goal") return QType::BeliefOfGoal;
    throw SchemaError("unknown question type: " + s);
}

inline std::string to_string(Polarity p) { return p == Polarity::Most ? "MOST" : "LEAST"; }

inline Polarity polarity_from_string(const std::string& s) {
    if (s == "MOST") return Polarity::Most;
    if (s == "LEAST") return Polarity::Least;
    throw SchemaError("unknown polarity: " + s);
}

struct QuestionRecord {
    std::string id;
    std::string scenario_id;
    std::string apartment;
    QType qtype = QType::Belief;
    Polarity polarity = Polarity::Most;
    std::string stem;
    std::array<std::string, 3> options;
    std::array<json, 3> hypotheses;
    int key = -1;
    ModalityChannels channels;
};

inline json hypothesis_to_json(const Apartment& apt, const Hypothesis& h) {
    return {{"belief", belief_to_json(apt, h.belief_of_state)},
            {"social", to_string(h.social_goal)},
            {"goal_belief", goal_belief_to_json(apt, h.belief_of_goal)}};
}

inline Hypothesis hypothesis_from_json(const Apartment& apt, const json& j) {
    Hypothesis h;
    h.belief_of_state = belief_from_json(apt, j.at("belief"));
    const std::string social = j.at("social").get<std::string>();
    h.social_goal = social == "help"     ? SocialGoal::Help
                    : social == "hinder" ? SocialGoal::Hinder
                                         : SocialGoal::Independent;
    h.belief_of_goal = goal_belief_from_json(apt, j.at("goal_belief"));
    return h;
}

// ---------------------------------------------------------------------------
// Trace analysis

struct InformEvent {
    std::size_t step_index = 0;
    AgentId responder = 0;
    ObjectId object = -1;
    FurnId stated = kNoFurniture;
};

inline std::optional<InformEvent> first_inform(const ScenarioTrace& trace) {
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& u = trace.steps[i].utterance;
        if (u.kind == Utterance::Kind::Inform && !u.stated.empty()) {
            return InformEvent{i, trace.steps[i].agent, u.stated[0].first, u.stated[0].second};
        }
    }
    return std::nullopt;
}

// True whether the object's initial location is recoverable from the actions
// alone (someone grabs it before any put), which offline answering relies on.
inline bool initial_location_recoverable(const ScenarioTrace& trace, ObjectId obj) {
    for (const auto& step : trace.steps) {
        if (step.action.object != obj) continue;
        if (step.action.verb == Verb::Put) return false;
        if (step.action.verb == Verb::Grab) return true;
    }
    return false;
}

// Candidate locations the inquirer has not examined before the inform:
// excludes surfaces of visited rooms and containers the inquirer opened.
inline std::vector<FurnId> unsearched_locations(const Apartment& apt, const ScenarioTrace& trace,
                                                AgentId inquirer, std::size_t before_step) {
    std::set<RoomId> visited = {trace.s0.agents[inquirer].room};
    std::set<FurnId> opened;
    WorldState s = trace.s0;
    for (std::size_t i = 0; i < before_step && i < trace.steps.size(); ++i) {
        const auto& step = trace.steps[i];
        s = apply(apt, s, step.agent, step.action);
        if (step.agent == inquirer) {
            visited.insert(s.agents[inquirer].room);
            if (step.action.verb == Verb::Open) opened.insert(step.action.furniture);
        }
    }
    std::vector<FurnId> out;
    for (std::size_t f = 0; f < apt.furniture.size(); ++f) {
        FurnId id = static_cast<FurnId>(f);
        if (opened.count(id)) continue;
        if (!apt.is_container(id) && visited.count(apt.furniture[f].room)) continue;
        out.push_back(id);
    }
    return out;
}

struct RelocationEvent {
    AgentId placer = 0;
    AgentId mover = 1;
    ObjectId object = -1;
    FurnId placer_target = kNoFurniture;
    std::size_t placer_put_index = 0;
    FurnId mover_target = kNoFurniture;
    std::size_t mover_put_index = 0;
};

// The no-language interaction pattern: one agent places the object, then the
// other relocates it.
inline std::optional<RelocationEvent> find_relocation(const ScenarioTrace& trace) {
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& put1 = trace.steps[i];
        if (put1.action.verb != Verb::Put) continue;
        for (std::size_t j = i + 1; j < trace.steps.size(); ++j) {
            const auto& put2 = trace.steps[j];
            if (put2.action.verb != Verb::Put || put2.action.object != put1.action.object) continue;
            if (put2.agent == put1.agent) continue;
            RelocationEvent ev;
            ev.placer = put1.agent;
            ev.mover = put2.agent;
            ev.object = put1.action.object;
            ev.placer_target = put1.action.furniture;
            ev.placer_put_index = i;
            ev.mover_target = put2.action.furniture;
            ev.mover_put_index = j;
            return ev;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Stems and option texts

inline std::string belief_stem(const std::string& responder, const std::string& inquirer,
                               SocialGoal condition, Polarity polarity) {
    std::string clause = condition == SocialGoal::Hinder
                             ? "hinder " + inquirer + " from achieving " + inquirer + "'s goal"
                             : "help " + inquirer + " achieve " + inquirer + "'s goal";
    return "Given the above interaction, if " + responder + " has been trying to " + clause +
           ", which of the following statements is " + to_string(polarity) + " likely?";
}

inline std::string belief_option_text(const Apartment& apt, const std::string& responder,
                                      ObjectId obj, FurnId loc) {
    return "When giving information, " + responder + " believed that there was a " +
           obj_display(apt, obj) + " " + on_or_inside(apt, loc) + " the " + furn_display(apt, loc) +
           " in the " + room_display(apt, apt.furniture[loc].room);
}

inline std::string social_stem(const Apartment& apt, const std::string& responder, FurnId stated,
                               Polarity polarity) {
    return "Given the above interaction, assuming that " + responder + " knows what is " +
           on_or_inside(apt, stated) + " the " + furn_display(apt, stated) + " in the " +
           room_display(apt, apt.furniture[stated].room) +
           ", which of the following statements is " + to_string(polarity) + " likely?";
}

inline std::string social_option_text(const Apartment& apt, const std::string& responder,
                                      const std::string& inquirer, ObjectId obj, SocialGoal g) {
    switch (g) {
        case SocialGoal::Help:
            return "When giving information, " + responder + " has been trying to help " +
                   inquirer + " locate the " + obj_display(apt, obj);
        case SocialGoal::Hinder:
            return "When giving information, " + responder + " has been trying to prevent " +
                   inquirer + " from finding the " + obj_display(apt, obj);
        case SocialGoal::Independent:
            return "When giving information, " + responder + " was indifferent towards " +
                   inquirer + "'s goals";
    }
    return "";
}

inline std::string bog_stem(Polarity polarity) {
    return "Given the above interaction, based on the actions of the agents, which of the "
           "following statements is " +
           to_string(polarity) + " likely?";
}

inline std::string bog_option_text(const Apartment& apt, const std::string& mover,
                                   const std::string& placer, ObjectId obj, FurnId believed_target,
                                   SocialGoal g, bool already_desired) {
    std::string verb = g == SocialGoal::Help ? "help" : "hinder";
    if (already_desired) {
        return mover + " believed that " + placer + " placed the " + obj_display(apt, obj) +
               " at " + placer + "'s desired location: " + mover + " moved the " +
               obj_display(apt, obj) + " to help " + placer;
    }
    return mover + " believed that " + placer + " wanted to place the " + obj_display(apt, obj) +
           " " + on_or_into(apt, believed_target) + " the " + furn_display(apt, believed_target) +
           ": " + mover + " moved the " + obj_display(apt, obj) + " to " + verb + " " + placer;
}

// ---------------------------------------------------------------------------
// Question builders. Each returns nullopt when the trace lacks the required
// structure (Inapplicable).

struct BuiltQuestion {
    QuestionRecord record;
    bool keyed_true = false;  // type-specific trueness of the keyed option
};

inline Belief full_candidate_belief(const Apartment& apt) {
    Belief b;
    for (std::size_t f = 0; f < apt.furniture.size(); ++f) {
        b.candidates.push_back(static_cast<FurnId>(f));
    }
    return b;
}

// Belief inference: the stem fixes the responder's social goal and the
// inquirer's goal; the keyed option is the stated location. Hinder pairs
// with LEAST (a hinderer least likely believes what it said), Help with
// MOST.
inline std::optional<BuiltQuestion> make_belief_question(const Apartment& apt,
                                                         const ScenarioTrace& trace,
                                                         Polarity polarity, Rng& rng) {
    auto inform = first_inform(trace);
    if (!inform.has_value()) return std::nullopt;
    const AgentId responder = inform->responder;
    const AgentId inquirer = 1 - responder;
    const ObjectId obj = inform->object;
    const FurnId stated = inform->stated;
    SocialGoal condition = polarity == Polarity::Least ? SocialGoal::Hinder : SocialGoal::Help;

    std::vector<FurnId> pool = unsearched_locations(apt, trace, inquirer, inform->step_index);
    std::vector<FurnId> distractors;
    for (FurnId f : pool) {
        if (f != stated) distractors.push_back(f);
    }
    if (distractors.size() < 2) return std::nullopt;
    rng.shuffle(distractors);
    std::vector<FurnId> locations = {stated, distractors[0], distractors[1]};
    rng.shuffle(locations);

    BuiltQuestion out;
    out.record.qtype = QType::Belief;
    out.record.polarity = polarity;
    out.record.apartment = apt.id;
    out.record.stem = belief_stem(trace.names[responder], trace.names[inquirer], condition, polarity);
    for (int i = 0; i < 3; ++i) {
        out.record.options[i] = belief_option_text(apt, trace.names[responder], obj, locations[i]);
        Hypothesis h;
        h.belief_of_state = full_candidate_belief(apt);
        h.belief_of_state.set_delta(obj, locations[i]);
        h.social_goal = condition;
        h.belief_of_goal = GoalBelief::delta({PhysicalGoal::find(obj)}, 0);
        out.record.hypotheses[i] = hypothesis_to_json(apt, h);
        if (locations[i] == stated) out.record.key = i;
    }
    // Trueness of the keyed belief: did the stated location actually hold the
    // object at the start?
    auto place = trace.s0.placements.find(obj);
    out.keyed_true = place != trace.s0.placements.end() && !place->second.held() &&
                     place->second.furniture == stated;
    return out;
}

// Social goal inference: the stem grants the responder knowledge of the
// stated location's contents; the key follows from whether the object was
// actually there.
inline std::optional<BuiltQuestion> make_social_goal_question(const Apartment& apt,
                                                              const ScenarioTrace& trace,
                                                              Polarity polarity, Rng& rng) {
    auto inform = first_inform(trace);
    if (!inform.has_value()) return std::nullopt;
    const AgentId responder = inform->responder;
    const AgentId inquirer = 1 - responder;
    const ObjectId obj = inform->object;
    const FurnId stated = inform->stated;
    if (!initial_location_recoverable(trace, obj)) return std::nullopt;

    auto place = trace.s0.placements.find(obj);
    if (place == trace.s0.placements.end() || place->second.held()) return std::nullopt;
    const bool present = place->second.furniture == stated;
    SocialGoal keyed;
    if (polarity == Polarity::Most) {
        keyed = present ? SocialGoal::Help : SocialGoal::Hinder;
    } else {
        keyed = present ? SocialGoal::Hinder : SocialGoal::Help;
    }

    std::vector<SocialGoal> goals = {SocialGoal::Help, SocialGoal::Hinder, SocialGoal::Independent};
    rng.shuffle(goals);

    BuiltQuestion out;
    out.record.qtype = QType::SocialGoal;
    out.record.polarity = polarity;
    out.record.apartment = apt.id;
    out.record.stem = social_stem(apt, trace.names[responder], stated, polarity);
    Belief conditioned = full_candidate_belief(apt);
    if (present) {
        conditioned.set_delta(obj, stated);
    } else {
        // Knows the stated location is empty: uniform over the others.
        std::vector<double> d(conditioned.candidates.size(), 0.0);
        int stated_idx = conditioned.candidate_index(stated);
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (static_cast<int>(i) != stated_idx) d[i] = 1.0;
        }
        normalize(d);
        conditioned.dist[obj] = d;
    }
    for (int i = 0; i < 3; ++i) {
        out.record.options[i] =
            social_option_text(apt, trace.names[responder], trace.names[inquirer], obj, goals[i]);
        Hypothesis h;
        h.belief_of_state = conditioned;
        h.social_goal = goals[i];
        h.belief_of_goal = GoalBelief::delta({PhysicalGoal::find(obj)}, 0);
        out.record.hypotheses[i] = hypothesis_to_json(apt, h);
        if (goals[i] == keyed) out.record.key = i;
    }
    out.keyed_true = keyed == SocialGoal::Help;  // cooperative key
    return out;
}

// Belief-of-goal inference on silent relocation traces. Options pair a
// belief about the placer's goal with the matching social goal; `variant`
// rotates distractor pairs so one scenario can yield several questions.
inline std::optional<BuiltQuestion> make_belief_of_goal_question(const Apartment& apt,
                                                                 const ScenarioTrace& trace,
                                                                 Polarity polarity, int variant,
                                                                 Rng& rng) {
    if (trace.language) return std::nullopt;
    auto reloc = find_relocation(trace);
    if (!reloc.has_value()) return std::nullopt;
    const AgentId mover = reloc->mover;
    const AgentId placer = reloc->placer;
    const ObjectId obj = reloc->object;
    if (!initial_location_recoverable(trace, obj)) return std::nullopt;

    const AgentSpec& mover_spec = trace.specs[mover];
    if (mover_spec.social_goal == SocialGoal::Independent) return std::nullopt;
    if (mover_spec.initial_goal_belief.candidates.empty()) return std::nullopt;
    const PhysicalGoal believed = mover_spec.initial_goal_belief.mode();
    if (believed.kind != PhysicalGoal::Kind::Rearrange) return std::nullopt;
    const FurnId believed_target = believed.target;
    const SocialGoal gt_social = mover_spec.social_goal;
    const SocialGoal flipped =
        gt_social == SocialGoal::Help ? SocialGoal::Hinder : SocialGoal::Help;

    struct OptionSpec {
        SocialGoal social;
        FurnId target;
        bool already_desired;
    };
    // Two salient targets: the believed one from the ground-truth pair, and
    // the other location this interaction makes salient (the placer's target
    // when it differs, else the mover's own drop-off point).
    const FurnId t1 = believed_target;
    const FurnId t2 =
        t1 == reloc->placer_target ? reloc->mover_target : reloc->placer_target;
    if (t1 == t2) return std::nullopt;
    // A help option toward where the placer actually put the object reads as
    // "believed it was already at the desired location".
    auto desired_text = [&](SocialGoal social, FurnId target) {
        return social == SocialGoal::Help && target == reloc->placer_target;
    };
    OptionSpec gt{gt_social, t1, desired_text(gt_social, t1)};
    OptionSpec flip{flipped, t1, desired_text(flipped, t1)};
    OptionSpec help2{SocialGoal::Help, t2, desired_text(SocialGoal::Help, t2)};
    OptionSpec hinder2{SocialGoal::Hinder, t2, false};

    auto distinct = [](const OptionSpec& a, const OptionSpec& b) {
        return a.social != b.social || a.target != b.target;
    };

    std::vector<OptionSpec> chosen;
    OptionSpec keyed = gt;
    if (polarity == Polarity::Most) {
        std::vector<std::array<OptionSpec, 2>> rival_sets = {
            {flip, help2}, {flip, hinder2}, {help2, hinder2}};
        auto rivals = rival_sets[variant % rival_sets.size()];
        chosen = {gt, rivals[0], rivals[1]};
    } else {
        // The pair most at odds with the observed move: opposite stance
        // toward the same believed goal.
        keyed = flip;
        std::vector<OptionSpec> third_pool = {help2, hinder2};
        chosen = {flip, gt, third_pool[variant % third_pool.size()]};
    }
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        for (std::size_t j = i + 1; j < chosen.size(); ++j) {
            if (!distinct(chosen[i], chosen[j])) return std::nullopt;
        }
    }
    rng.shuffle(chosen);

    // Conditioning: the mover knew the object's initial placement.
    Belief conditioned = full_candidate_belief(apt);
    auto place = trace.s0.placements.find(obj);
    if (place == trace.s0.placements.end() || place->second.held()) return std::nullopt;
    conditioned.set_delta(obj, place->second.furniture);

    BuiltQuestion out;
    out.record.qtype = QType::BeliefOfGoal;
    out.record.polarity = polarity;
    out.record.apartment = apt.id;
    out.record.stem = bog_stem(polarity);
    for (int i = 0; i < 3; ++i) {
        const OptionSpec& opt = chosen[static_cast<std::size_t>(i)];
        out.record.options[i] = bog_option_text(apt, trace.names[mover], trace.names[placer], obj,
                                                opt.target, opt.social, opt.already_desired);
        Hypothesis h;
        h.belief_of_state = conditioned;
        h.social_goal = opt.social;
        h.belief_of_goal = GoalBelief::delta({PhysicalGoal::rearrange(obj, opt.target)}, 0);
        out.record.hypotheses[i] = hypothesis_to_json(apt, h);
        if (!distinct(opt, keyed)) out.record.key = i;
    }
    // Trueness of the keyed belief-of-goal: does it match the placer's actual
    // objective?
    const PhysicalGoal& actual = trace.specs[placer].physical_goal;
    const OptionSpec& k = keyed;
    out.keyed_true = actual.kind == PhysicalGoal::Kind::Rearrange && actual.target == k.target;
    return out;
}

// ---------------------------------------------------------------------------
// Record (de)serialization

inline json question_to_json(const QuestionRecord& q) {
    json j;
    j["kind"] = "question";
    j["id"] = q.id;
    j["scenario_id"] = q.scenario_id;
    j["apartment"] = q.apartment;
    j["qtype"] = to_string(q.qtype);
    j["polarity"] = to_string(q.polarity);
    j["stem"] = q.stem;
    j["text_channel"] = q.channels.text_channel;
    j["observation_channel"] = q.channels.observation_channel;
    j["split_kind"] = to_string(q.channels.split_kind);
    j["options"] = {q.options[0], q.options[1], q.options[2]};
    j["hypotheses"] = {q.hypotheses[0], q.hypotheses[1], q.hypotheses[2]};
    j["key"] = q.key;
    return j;
}

inline QuestionRecord question_from_json(const json& j) {
    QuestionRecord q;
    q.id = j.at("id").get<std::string>();
    q.scenario_id = j.at("scenario_id").get<std::string>();
    q.apartment = j.at("apartment").get<std::string>();
    q.qtype = qtype_from_string(j.at("qtype").get<std::string>());
    q.polarity = polarity_from_string(j.at("polarity").get<std::string>());
    q.stem = j.at("stem").get<std::string>();
    q.channels.text_channel = j.at("text_channel").get<std::string>();
    q.channels.observation_channel = j.at("observation_channel").get<std::string>();
    q.channels.split_kind = split_kind_from_string(j.at("split_kind").get<std::string>());
    for (int i = 0; i < 3; ++i) {
        q.options[i] = j.at("options")[i].get<std::string>();
        q.hypotheses[i] = j.at("hypotheses")[i];
    }
    q.key = j.at("key").get<int>();
    if (q.key < 0 || q.key > 2) throw SchemaError("question key out of range");
    return q;
}

}  // namespace mentis
