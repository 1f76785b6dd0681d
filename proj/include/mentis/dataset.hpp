#pragma once
// Benchmark assembly: rejection-samples scenarios along a deterministic seed
// stream, attaches verified questions, enforces the balance quotas, and
// serializes the JSONL dataset plus its manifest. Candidate evaluation is
// pure in the candidate index, so it parallelizes across a worker pool while
// acceptance stays a single-threaded reduction in stream order.

#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mentis/inference.hpp"
#include "mentis/questions.hpp"
#include "mentis/rollout.hpp"
#include "mentis/scenario.hpp"

namespace mentis {

struct GenParams {
    int scenarios = 225;
    int per_type = 300;  // questions per question type; must be even
    double margin = 2.0;
    int language_horizon = 14;
    int silent_horizon = 16;
    int workers = 1;
    std::uint64_t max_attempts = 0;  // 0: derived from the scenario count
    RolloutParams rollout;    // beta, tau, budget shared by both kinds
    ScoringParams scoring;
};

struct Dataset {
    std::vector<json> records;  // scenario and question records, in order
    json manifest;
};

// Offline key check: rebuilds the fused context from the question's own
// channels, scores the annotated hypotheses with the oracle, and demands the
// keyed option win (MOST) or lose (LEAST) against every rival by the margin.
inline bool verify_question(const Apartment& apt, const QuestionRecord& q, double margin,
                            const ScoringParams& scoring) {
    if (q.key < 0 || q.key > 2) throw SchemaError("question key index out of range");
    FusedContext fused;
    std::array<Hypothesis, 3> hypotheses;
    AgentId target = 0;
    try {
        fused = fuse(apt, q.channels.text_channel, q.channels.observation_channel);
        hypotheses = parse_hypotheses(apt, q, fused);
        target = target_agent(q, fused);
    } catch (const std::runtime_error&) {
        return false;
    }
    OracleScorer scorer(apt, scoring);
    PosteriorResult result =
        posterior({hypotheses[0], hypotheses[1], hypotheses[2]}, fused, scorer, target,
                  {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.0);
    if (result.degraded) return false;
    const auto& p = result.posterior;
    const double keyed = p[static_cast<std::size_t>(q.key)];
    for (int i = 0; i < 3; ++i) {
        if (i == q.key) continue;
        if (q.polarity == Polarity::Most) {
            if (!(keyed > 0.0 && keyed >= margin * p[static_cast<std::size_t>(i)])) return false;
        } else {
            if (!(p[static_cast<std::size_t>(i)] > 0.0 &&
                  p[static_cast<std::size_t>(i)] >= margin * keyed)) return false;
        }
    }
    return true;
}

namespace detail {

struct CandidateQuestions {
    ScenarioTrace trace;
    ModalityChannels channels;
    std::uint64_t seed_index = 0;
    bool language = true;
    bool classified_flag = false;  // language: stated location held the object
                                   // silent: keyed belief-of-goal is true
    std::vector<BuiltQuestion> questions;  // verified, in variant order
};

// Evaluates candidate k of the scenario stream end to end: sample, roll out,
// split channels, build every question variant, verify each. Pure in
// (root_seed, k), so results are identical regardless of scheduling.
inline std::optional<CandidateQuestions> evaluate_candidate(
    const std::vector<Apartment>& apartments, std::uint64_t root_seed, std::uint64_t k,
    bool language, const GenParams& params) {
    Rng spec_rng = substream(root_seed, "specs", k);
    ScenarioConfig cfg;
    try {
        cfg = sample_scenario(apartments, spec_rng, language);
    } catch (const ConstraintUnsatisfiable&) {
        return std::nullopt;
    }
    const Apartment& apt = find_apartment(apartments, cfg.apartment);

    RolloutParams rp = params.rollout;
    rp.language_enabled = language;
    rp.horizon = language ? params.language_horizon : params.silent_horizon;
    std::uint64_t rollout_seed = substream(root_seed, "rollout", k).next_u64();
    ScenarioTrace trace;
    try {
        trace = rollout(apt, cfg.s0, cfg.specs, rp, rollout_seed);
    } catch (const std::runtime_error&) {
        return std::nullopt;
    }
    trace.names = cfg.names;

    Rng channel_rng = substream(root_seed, "channels", k);
    ModalityChannels channels = split_modalities(apt, trace, channel_rng);

    CandidateQuestions out;
    out.trace = trace;
    out.channels = channels;
    out.seed_index = k;
    out.language = language;

    Rng question_rng = substream(root_seed, "questions", k);
    auto verified = [&](std::optional<BuiltQuestion> built) -> std::optional<BuiltQuestion> {
        if (!built.has_value()) return std::nullopt;
        built->record.channels = channels;
        if (!verify_question(apt, built->record, params.margin, params.scoring)) {
            return std::nullopt;
        }
        return built;
    };

    if (language) {
        auto inform = first_inform(trace);
        if (!inform.has_value()) return std::nullopt;
        // Two belief questions (the two valid condition/polarity pairings)
        // and two social questions (one per polarity; their keys are
        // complementary, which balances cooperative and adversarial keys).
        auto b_most = verified(make_belief_question(apt, trace, Polarity::Most, question_rng));
        auto b_least = verified(make_belief_question(apt, trace, Polarity::Least, question_rng));
        auto s_most = verified(make_social_goal_question(apt, trace, Polarity::Most, question_rng));
        auto s_least =
            verified(make_social_goal_question(apt, trace, Polarity::Least, question_rng));
        if (!b_most || !b_least || !s_most || !s_least) return std::nullopt;
        out.classified_flag = b_most->keyed_true;
        out.questions = {*b_most, *b_least, *s_most, *s_least};
        return out;
    }

    auto reloc = find_relocation(trace);
    if (!reloc.has_value()) return std::nullopt;
    bool keyed_true = false;
    bool classified = false;
    for (int variant = 0; variant < 3; ++variant) {
        for (Polarity polarity : {Polarity::Most, Polarity::Least}) {
            auto q = verified(
                make_belief_of_goal_question(apt, trace, polarity, variant, question_rng));
            if (q.has_value()) {
                if (!classified) {
                    keyed_true = q->keyed_true;
                    classified = true;
                }
                out.questions.push_back(*q);
            }
        }
    }
    if (out.questions.empty()) return std::nullopt;
    out.classified_flag = keyed_true;
    return out;
}

// Evenly spread `total` questions over `buckets` scenarios.
inline std::vector<int> spread(int total, int buckets) {
    std::vector<int> out(static_cast<std::size_t>(buckets), total / std::max(buckets, 1));
    for (int i = 0; i < total % std::max(buckets, 1); ++i) out[static_cast<std::size_t>(i)] += 1;
    return out;
}

}  // namespace detail

inline void validate_counts(const GenParams& params) {
    if (params.scenarios < 2 || params.per_type < 2) {
        throw ConstraintUnsatisfiable("counts too small to balance");
    }
    if (params.per_type % 2 != 0) {
        throw ConstraintUnsatisfiable("per-type question count must be even");
    }
    int lang = params.per_type / 2;
    int silent = params.scenarios - lang;
    if (lang < 1 || silent < 1) {
        throw ConstraintUnsatisfiable("scenario count incompatible with per-type count");
    }
    if (params.per_type > 6 * silent) {
        throw ConstraintUnsatisfiable("too few silent scenarios for the question load");
    }
}

inline Dataset build_dataset(const std::vector<Apartment>& apartments, std::uint64_t root_seed,
                             const GenParams& params) {
    validate_counts(params);
    const int lang_count = params.per_type / 2;
    const int silent_count = params.scenarios - lang_count;

    // Balance quotas. Language scenarios are bucketed by whether the stated
    // location really held the object (the keyed-belief trueness); silent
    // ones by the keyed belief-of-goal trueness.
    int lang_true_quota = lang_count / 2;
    int lang_false_quota = lang_count - lang_true_quota;
    int silent_true_scen = (silent_count + 1) / 2;
    int silent_false_scen = silent_count - silent_true_scen;
    int bog_true_quota = params.per_type / 2;
    int bog_false_quota = params.per_type - bog_true_quota;
    std::vector<int> bog_true_alloc = detail::spread(bog_true_quota, silent_true_scen);
    std::vector<int> bog_false_alloc = detail::spread(bog_false_quota, silent_false_scen);

    struct Accepted {
        detail::CandidateQuestions cand;
        int take = 0;  // questions to keep (silent scenarios)
    };
    std::vector<Accepted> accepted;
    int lang_true = 0, lang_false = 0;
    std::size_t bog_true_i = 0, bog_false_i = 0;

    const std::uint64_t max_attempts =
        params.max_attempts > 0
            ? params.max_attempts
            : std::max<std::uint64_t>(2000, 120ull * static_cast<std::uint64_t>(params.scenarios));
    const int workers = std::max(1, params.workers);
    const std::uint64_t block = static_cast<std::uint64_t>(workers) * 8;

    auto lang_open = [&]() { return lang_true < lang_true_quota || lang_false < lang_false_quota; };
    auto silent_open = [&]() {
        return bog_true_i < bog_true_alloc.size() || bog_false_i < bog_false_alloc.size();
    };

    std::uint64_t next_k = 0;
    while ((lang_open() || silent_open()) && next_k < max_attempts) {
        std::uint64_t begin = next_k;
        std::uint64_t end = std::min<std::uint64_t>(begin + block, max_attempts);
        next_k = end;

        // Candidates at even stream positions try the language pipeline,
        // odd ones the silent pipeline.
        std::vector<std::optional<detail::CandidateQuestions>> results(end - begin);
        auto run = [&](std::uint64_t k) {
            bool language = (k % 2 == 0);
            if (language ? lang_open() : silent_open()) {
                results[k - begin] =
                    detail::evaluate_candidate(apartments, root_seed, k, language, params);
            }
        };
        if (workers == 1) {
            for (std::uint64_t k = begin; k < end; ++k) run(k);
        } else {
            std::atomic<std::uint64_t> cursor{begin};
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (std::uint64_t k = cursor.fetch_add(1); k < end; k = cursor.fetch_add(1)) {
                        run(k);
                    }
                });
            }
            for (auto& t : pool) t.join();
        }

        for (std::uint64_t k = begin; k < end; ++k) {
            auto& result = results[k - begin];
            if (!result.has_value()) continue;
            if (result->language) {
                if (result->classified_flag ? lang_true < lang_true_quota
                                            : lang_false < lang_false_quota) {
                    (result->classified_flag ? lang_true : lang_false) += 1;
                    accepted.push_back({std::move(*result), 4});
                }
            } else {
                auto& index = result->classified_flag ? bog_true_i : bog_false_i;
                auto& alloc = result->classified_flag ? bog_true_alloc : bog_false_alloc;
                if (index < alloc.size() &&
                    static_cast<int>(result->questions.size()) >= alloc[index]) {
                    accepted.push_back({std::move(*result), alloc[index]});
                    index += 1;
                }
            }
        }
    }

    if (lang_open() || silent_open()) {
        std::string tallies = "lang_true=" + std::to_string(lang_true) +
                              " lang_false=" + std::to_string(lang_false) +
                              " silent_true=" + std::to_string(bog_true_i) +
                              " silent_false=" + std::to_string(bog_false_i);
        throw BudgetExceeded("generation budget exhausted before quotas were met (" + tallies +
                             ")");
    }

    // Deterministic assembly ordered by stream position.
    std::sort(accepted.begin(), accepted.end(), [](const Accepted& a, const Accepted& b) {
        return a.cand.seed_index < b.cand.seed_index;
    });

    Dataset out;
    std::map<QType, int> per_type;
    std::map<std::string, int> tallies;
    int scenario_no = 0, question_no = 0;
    for (auto& acc : accepted) {
        const Apartment& apt = find_apartment(apartments, acc.cand.trace.apartment);
        char sid[16];
        std::snprintf(sid, sizeof(sid), "s%04d", scenario_no++);
        json srec = trace_to_json(apt, acc.cand.trace);
        srec["kind"] = "scenario";
        srec["id"] = sid;
        srec["seed_index"] = acc.cand.seed_index;
        srec["text_channel"] = acc.cand.channels.text_channel;
        srec["observation_channel"] = acc.cand.channels.observation_channel;
        srec["split_kind"] = to_string(acc.cand.channels.split_kind);
        out.records.push_back(srec);

        int take = std::min<int>(acc.take, static_cast<int>(acc.cand.questions.size()));
        for (int i = 0; i < take; ++i) {
            BuiltQuestion& q = acc.cand.questions[static_cast<std::size_t>(i)];
            char qid[16];
            std::snprintf(qid, sizeof(qid), "q%05d", question_no++);
            q.record.id = qid;
            q.record.scenario_id = sid;
            out.records.push_back(question_to_json(q.record));
            per_type[q.record.qtype] += 1;
            switch (q.record.qtype) {
                case QType::Belief:
                    tallies[q.keyed_true ? "belief_keyed_true" : "belief_keyed_false"] += 1;
                    break;
                case QType::SocialGoal:
                    tallies[q.keyed_true ? "social_keyed_help" : "social_keyed_hinder"] += 1;
                    break;
                case QType::BeliefOfGoal:
                    tallies[q.keyed_true ? "belief_of_goal_keyed_true"
                                         : "belief_of_goal_keyed_false"] += 1;
                    break;
            }
        }
    }

    json manifest;
    manifest["version"] = "0.1.0";
    manifest["seed"] = root_seed;
    manifest["counts"] = {
        {"scenarios", scenario_no},
        {"scenarios_language", lang_true + lang_false},
        {"scenarios_no_language", scenario_no - lang_true - lang_false},
        {"questions", question_no},
        {"per_type",
         {{"belief", per_type[QType::Belief]},
          {"social_goal", per_type[QType::SocialGoal]},
          {"belief_of_goal", per_type[QType::BeliefOfGoal]}}}};
    json jt = json::object();
    for (const auto& [name, count] : tallies) jt[name] = count;
    manifest["tallies"] = jt;
    out.manifest = manifest;
    return out;
}

// Recomputes the manifest's balance tallies from the emitted records alone:
// each question's keyed hypothesis annotation is checked against its
// scenario's ground truth. Used to cross-check the manifest offline.
inline json recompute_tallies(const std::vector<Apartment>& apartments,
                              const std::vector<json>& records) {
    std::map<std::string, const json*> scenarios;
    for (const auto& rec : records) {
        if (rec.at("kind") == "scenario") scenarios[rec.at("id").get<std::string>()] = &rec;
    }
    std::map<std::string, int> tallies;
    for (const auto& rec : records) {
        if (rec.at("kind") != "question") continue;
        QuestionRecord q = question_from_json(rec);
        const Apartment& apt = find_apartment(apartments, q.apartment);
        auto scen_it = scenarios.find(q.scenario_id);
        if (scen_it == scenarios.end()) {
            throw UnknownQuestionId("question " + q.id + " references missing scenario");
        }
        ScenarioTrace trace = trace_from_json(apt, *scen_it->second);
        Hypothesis keyed =
            hypothesis_from_json(apt, q.hypotheses[static_cast<std::size_t>(q.key)]);
        switch (q.qtype) {
            case QType::Belief: {
                ObjectId obj = keyed.belief_of_goal.mode().object;
                FurnId believed = keyed.belief_of_state.mode(obj, apt);
                auto place = trace.s0.placements.find(obj);
                bool truth = place != trace.s0.placements.end() && !place->second.held() &&
                             place->second.furniture == believed;
                tallies[truth ? "belief_keyed_true" : "belief_keyed_false"] += 1;
                break;
            }
            case QType::SocialGoal:
                tallies[keyed.social_goal == SocialGoal::Help ? "social_keyed_help"
                                                              : "social_keyed_hinder"] += 1;
                break;
            case QType::BeliefOfGoal: {
                // The subject is the mover; the other agent's actual objective
                // decides whether the keyed belief-of-goal is true.
                std::string head = q.options[0].substr(0, q.options[0].find(' '));
                AgentId mover = head == trace.names[0] ? 0 : 1;
                const PhysicalGoal& actual = trace.specs[1 - mover].physical_goal;
                const PhysicalGoal& believed = keyed.belief_of_goal.mode();
                bool truth = actual.kind == PhysicalGoal::Kind::Rearrange &&
                             believed.kind == PhysicalGoal::Kind::Rearrange &&
                             actual.target == believed.target;
                tallies[truth ? "belief_of_goal_keyed_true" : "belief_of_goal_keyed_false"] += 1;
                break;
            }
        }
    }
    json out = json::object();
    for (const auto& [name, count] : tallies) out[name] = count;
    return out;
}

}  // namespace mentis
