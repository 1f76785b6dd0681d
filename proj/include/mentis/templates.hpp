#pragma once
// Deterministic natural-language surfaces for traces, and their inverses.
// The observation channel stands in for video: a templated action record.
// The text channel carries either the conversation or one half of the event.
// Every template is invertible so the fusion stage can recover symbolic
// steps from the rendered channels alone.

#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "mentis/trace.hpp"

namespace mentis {

enum class SplitKind { ConversationVsActions, FirstHalfText, SecondHalfText };

inline std::string to_string(SplitKind k) {
    switch (k) {
        case SplitKind::ConversationVsActions: return "conversation_vs_actions";
        case SplitKind::FirstHalfText: return "first_half_text";
        case SplitKind::SecondHalfText: return "second_half_text";
    }
    return "conversation_vs_actions";
}

inline SplitKind split_kind_from_string(const std::string& s) {
    if (s == "conversation_vs_actions") return SplitKind::ConversationVsActions;
    if (s == "first_half_text") return SplitKind::FirstHalfText;
    if (s == "second_half_text") return SplitKind::SecondHalfText;
    throw SchemaError("unknown split kind: " + s);
}

struct ModalityChannels {
    std::string text_channel;
    std::string observation_channel;
    SplitKind split_kind = SplitKind::ConversationVsActions;
};

constexpr const char* kAgentNames[] = {"John",  "Mary",  "Kevin", "Jessica", "David",  "Sarah",
                                       "Michael", "Emma", "James", "Linda",  "Robert", "Alice"};

inline std::string display(const std::string& identifier) {
    std::string out = identifier;
    for (char& c : out) {
        if (c == '_') c = ' ';
    }
    return out;
}

inline std::string room_display(const Apartment& apt, RoomId r) { return display(apt.rooms[r]); }
inline std::string furn_display(const Apartment& apt, FurnId f) {
    return display(apt.furniture[f].id);
}
inline std::string obj_display(const Apartment& apt, ObjectId o) {
    return display(apt.vocabulary[o]);
}

// "on" for surfaces, "inside" for containers (as a static location phrase).
inline std::string on_or_inside(const Apartment& apt, FurnId f) {
    return apt.is_container(f) ? "inside" : "on";
}
// "onto"/"into" as a placement phrase.
inline std::string on_or_into(const Apartment& apt, FurnId f) {
    return apt.is_container(f) ? "into" : "on";
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string render_action_phrase(const Apartment& apt, const PrimitiveAction& a,
                                        bool redact_object) {
    switch (a.verb) {
        case Verb::Noop:
            return "waits";
        case Verb::WalkTowards:
            if (a.furniture != kNoFurniture) {
                return "walks towards the " + furn_display(apt, a.furniture);
            }
            return "walks to the " + room_display(apt, a.room);
        case Verb::Open:
            return "opens the " + furn_display(apt, a.furniture);
        case Verb::Close:
            return "closes the " + furn_display(apt, a.furniture);
        case Verb::Grab: {
            std::string what = redact_object ? "some object" : "the " + obj_display(apt, a.object);
            return "grabs " + what + " from the " + furn_display(apt, a.furniture);
        }
        case Verb::Put:
            return "puts the " + obj_display(apt, a.object) + " " + on_or_into(apt, a.furniture) +
                   " the " + furn_display(apt, a.furniture);
    }
    return "waits";
}

inline std::string render_action_line(const Apartment& apt, const std::string& name,
                                      int step_index, const PrimitiveAction& a,
                                      bool redact_object = false) {
    return "Step " + std::to_string(step_index) + ": " + name + " " +
           render_action_phrase(apt, a, redact_object) + ".";
}

inline std::string render_utterance_text(const Apartment& apt, const Utterance& u) {
    if (u.kind == Utterance::Kind::Inquiry) {
        std::string out;
        for (std::size_t i = 0; i < u.asked.size(); ++i) {
            if (i > 0) out += " ";
            out += "Do you know where the " + obj_display(apt, u.asked[i]) + " is?";
        }
        return out;
    }
    if (u.kind == Utterance::Kind::Inform) {
        std::string out;
        for (std::size_t i = 0; i < u.stated.size(); ++i) {
            if (i > 0) out += " ";
            const auto& [obj, loc] = u.stated[i];
            out += "I discovered a " + obj_display(apt, obj) + " " + on_or_inside(apt, loc) +
                   " the " + furn_display(apt, loc) + " in the " +
                   room_display(apt, apt.furniture[loc].room) + ".";
        }
        return out;
    }
    return "";
}

inline std::string render_utterance_line(const Apartment& apt, const std::string& name,
                                         int step_index, const Utterance& u) {
    return "Step " + std::to_string(step_index) + ": " + name + ": \"" +
           render_utterance_text(apt, u) + "\"";
}

inline std::string render_preamble(const Apartment& apt, const ScenarioTrace& trace) {
    std::string out;
    for (AgentId a = 0; a < 2; ++a) {
        out += "At the start, " + trace.names[a] + " is in the " +
               room_display(apt, trace.s0.agents[a].room) + ".\n";
    }
    return out;
}

// Splits one trace into the two modality channels. Language traces put the
// conversation in text and all actions in the observation record; silent
// traces carve the step sequence at the midpoint, coin-flipping which half
// is described in text. The channel holding step 0 also carries the
// scene-setting preamble.
inline ModalityChannels split_modalities(const Apartment& apt, const ScenarioTrace& trace,
                                         Rng& rng) {
    ModalityChannels ch;
    const std::size_t n = trace.steps.size();
    bool any_utterance = false;
    for (const auto& s : trace.steps) {
        if (s.utterance.kind != Utterance::Kind::Silence) any_utterance = true;
    }
    if (trace.language && any_utterance) {
        ch.split_kind = SplitKind::ConversationVsActions;
        std::string text, obs;
        obs += render_preamble(apt, trace);
        for (std::size_t i = 0; i < n; ++i) {
            const TraceStep& s = trace.steps[i];
            obs += render_action_line(apt, trace.names[s.agent], static_cast<int>(i), s.action) +
                   "\n";
            if (s.utterance.kind != Utterance::Kind::Silence) {
                text += render_utterance_line(apt, trace.names[s.agent], static_cast<int>(i),
                                              s.utterance) +
                        "\n";
            }
        }
        ch.text_channel = text;
        ch.observation_channel = obs;
        return ch;
    }
    ch.split_kind = rng.bernoulli(0.5) ? SplitKind::FirstHalfText : SplitKind::SecondHalfText;
    const std::size_t mid = (n + 1) / 2;
    std::string first, second;
    first += render_preamble(apt, trace);
    for (std::size_t i = 0; i < n; ++i) {
        const TraceStep& s = trace.steps[i];
        std::string line =
            render_action_line(apt, trace.names[s.agent], static_cast<int>(i), s.action) + "\n";
        (i < mid ? first : second) += line;
    }
    if (ch.split_kind == SplitKind::FirstHalfText) {
        ch.text_channel = first;
        ch.observation_channel = second;
    } else {
        ch.text_channel = second;
        ch.observation_channel = first;
    }
    return ch;
}

// ---------------------------------------------------------------------------
// Parsing (the inverse of the templates above)

struct ParsedEvent {
    int step_index = 0;
    std::string actor;
    std::optional<PrimitiveAction> action;
    bool object_redacted = false;   // "grabs some object from ..."
    FurnId redacted_from = kNoFurniture;
    std::optional<Utterance> utterance;
};

struct ParsedChannel {
    std::vector<std::pair<std::string, RoomId>> initial_rooms;  // preamble facts
    std::vector<ParsedEvent> events;
    std::vector<ObjectId> mentioned_objects;  // kinds named anywhere in the channel
};

namespace detail {

inline FurnId furn_from_display(const Apartment& apt, const std::string& text) {
    for (std::size_t i = 0; i < apt.furniture.size(); ++i) {
        if (display(apt.furniture[i].id) == text) return static_cast<FurnId>(i);
    }
    throw SchemaError("unparsable furniture name: " + text);
}

inline RoomId room_from_display(const Apartment& apt, const std::string& text) {
    for (std::size_t i = 0; i < apt.rooms.size(); ++i) {
        if (display(apt.rooms[i]) == text) return static_cast<RoomId>(i);
    }
    throw SchemaError("unparsable room name: " + text);
}

inline ObjectId obj_from_display(const Apartment& apt, const std::string& text) {
    for (std::size_t i = 0; i < apt.vocabulary.size(); ++i) {
        if (display(apt.vocabulary[i]) == text) return static_cast<ObjectId>(i);
    }
    throw SchemaError("unparsable object name: " + text);
}

inline void note_object(std::vector<ObjectId>& seen, ObjectId obj) {
    if (std::find(seen.begin(), seen.end(), obj) == seen.end()) seen.push_back(obj);
}

}  // namespace detail

inline ParsedChannel parse_channel(const Apartment& apt, const std::string& channel) {
    static const std::regex preamble_re(R"(^At the start, (\w+) is in the (.+)\.$)");
    static const std::regex utterance_re(R"(^Step (\d+): (\w+): \"(.*)\"$)");
    static const std::regex action_re(R"(^Step (\d+): (\w+) (.+)\.$)");
    static const std::regex walk_room_re(R"(^walks to the (.+)$)");
    static const std::regex walk_furn_re(R"(^walks towards the (.+)$)");
    static const std::regex open_re(R"(^opens the (.+)$)");
    static const std::regex close_re(R"(^closes the (.+)$)");
    static const std::regex grab_re(R"(^grabs the (.+?) from the (.+)$)");
    static const std::regex grab_redacted_re(R"(^grabs some object from the (.+)$)");
    static const std::regex put_re(R"(^puts the (.+?) (?:on|into) the (.+)$)");
    static const std::regex inform_re(
        R"(I discovered a (.+?) (?:on|inside) the (.+?) in the (.+?)\.)");
    static const std::regex inquiry_re(R"(Do you know where the (.+?) is\?)");

    ParsedChannel out;
    std::istringstream lines(channel);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        std::smatch m;
        if (std::regex_match(line, m, preamble_re)) {
            out.initial_rooms.push_back({m[1], detail::room_from_display(apt, m[2])});
            continue;
        }
        if (std::regex_match(line, m, utterance_re)) {
            ParsedEvent ev;
            ev.step_index = std::stoi(m[1]);
            ev.actor = m[2];
            std::string text = m[3];
            std::smatch um;
            if (std::regex_search(text, um, inform_re)) {
                std::vector<std::pair<ObjectId, FurnId>> stated;
                std::string rest = text;
                while (std::regex_search(rest, um, inform_re)) {
                    ObjectId obj = detail::obj_from_display(apt, um[1]);
                    stated.push_back({obj, detail::furn_from_display(apt, um[2])});
                    detail::note_object(out.mentioned_objects, obj);
                    rest = um.suffix();
                }
                ev.utterance = Utterance::inform(std::move(stated));
            } else if (std::regex_search(text, um, inquiry_re)) {
                std::vector<ObjectId> asked;
                std::string rest = text;
                while (std::regex_search(rest, um, inquiry_re)) {
                    ObjectId obj = detail::obj_from_display(apt, um[1]);
                    asked.push_back(obj);
                    detail::note_object(out.mentioned_objects, obj);
                    rest = um.suffix();
                }
                ev.utterance = Utterance::inquiry(std::move(asked));
            } else {
                ev.utterance = Utterance::silence();
            }
            out.events.push_back(ev);
            continue;
        }
        if (std::regex_match(line, m, action_re)) {
            ParsedEvent ev;
            ev.step_index = std::stoi(m[1]);
            ev.actor = m[2];
            std::string phrase = m[3];
            std::smatch am;
            if (phrase == "waits") {
                ev.action = PrimitiveAction::noop();
            } else if (std::regex_match(phrase, am, walk_furn_re)) {
                ev.action = PrimitiveAction::walk_furniture(detail::furn_from_display(apt, am[1]));
            } else if (std::regex_match(phrase, am, walk_room_re)) {
                ev.action = PrimitiveAction::walk_room(detail::room_from_display(apt, am[1]));
            } else if (std::regex_match(phrase, am, open_re)) {
                ev.action = PrimitiveAction::open(detail::furn_from_display(apt, am[1]));
            } else if (std::regex_match(phrase, am, close_re)) {
                ev.action = PrimitiveAction::close(detail::furn_from_display(apt, am[1]));
            } else if (std::regex_match(phrase, am, grab_redacted_re)) {
                ev.object_redacted = true;
                ev.redacted_from = detail::furn_from_display(apt, am[1]);
            } else if (std::regex_match(phrase, am, grab_re)) {
                ObjectId obj = detail::obj_from_display(apt, am[1]);
                ev.action = PrimitiveAction::grab(obj, detail::furn_from_display(apt, am[2]));
                detail::note_object(out.mentioned_objects, obj);
            } else if (std::regex_match(phrase, am, put_re)) {
                ObjectId obj = detail::obj_from_display(apt, am[1]);
                ev.action = PrimitiveAction::put(obj, detail::furn_from_display(apt, am[2]));
                detail::note_object(out.mentioned_objects, obj);
            } else {
                throw SchemaError("unparsable action phrase: " + phrase);
            }
            out.events.push_back(ev);
            continue;
        }
        throw SchemaError("unparsable channel line: " + line);
    }
    return out;
}

}  // namespace mentis
