#pragma once
// Inverse multi-agent planning: scores each hypothesis about the target
// agent's mind by the likelihood of that agent's observed actions and
// utterances, conditioning every step on all agents' prior actions and
// utterances plus the recovered initial state. The target's belief at each
// step is reconstructed by replaying the observation and inform updates from
// the hypothesis's initial belief.

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "mentis/fusion.hpp"
#include "mentis/plan.hpp"
#include "mentis/questions.hpp"

namespace mentis {

struct ScoringParams {
    double beta = 2.0;            // action inverse temperature
    double utterance_beta = 9.0;  // utterance inverse temperature
    double tau = 0.5;             // goal-knowledge entropy gate (nats)
    SearchBudget budget;
};

// Pluggable per-step likelihood model. The oracle implementation below
// derives probabilities from the planner's own policies; an external scorer
// reaches the same surface over a wire protocol.
class PolicyScorer {
public:
    virtual ~PolicyScorer() = default;
    // Probability of the observed action / utterance at merged-step position
    // `index` under hypothesis `h`, for the agent the question asks about.
    virtual double score_action(const FusedContext& ctx, std::size_t index, const Hypothesis& h,
                                AgentId target) = 0;
    virtual double score_utterance(const FusedContext& ctx, std::size_t index, const Hypothesis& h,
                                   AgentId target) = 0;
};

// ---------------------------------------------------------------------------
// Oracle scorer

class OracleScorer : public PolicyScorer {
public:
    OracleScorer(const Apartment& apt, ScoringParams params) : apt_(apt), params_(params) {}

    double score_action(const FusedContext& ctx, std::size_t index, const Hypothesis& h,
                        AgentId target) override {
        const Replay& replay = replay_for(ctx, h, target);
        const FusedStep& step = ctx.merged_steps[index];
        if (step.agent != target || !step.action.has_value()) return 1.0;
        const Point& pt = replay.points[index];
        PolicyDistribution policy = action_policy(pt, h, target);
        return policy.probability(*step.action);
    }

    double score_utterance(const FusedContext& ctx, std::size_t index, const Hypothesis& h,
                           AgentId target) override {
        const Replay& replay = replay_for(ctx, h, target);
        const FusedStep& step = ctx.merged_steps[index];
        if (step.agent != target) return 1.0;
        const Point& pt = replay.points[index];
        return utterance_probability(pt, h, step.utterance);
    }

private:
    struct Point {
        WorldState world;  // before the step
        Belief belief;     // target's reconstructed belief before the step
        bool goal_active = false;
        std::optional<FurnId> anchor;
        std::optional<Utterance> pending;  // unanswered inquiry addressed to target
    };
    struct Replay {
        std::vector<Point> points;
    };

    const Replay& replay_for(const FusedContext& ctx, const Hypothesis& h, AgentId target) {
        std::string steps_digest;
        for (const auto& s : ctx.merged_steps) {
            steps_digest += std::to_string(s.index) + ":" + std::to_string(s.agent) + ":";
            if (s.action.has_value()) steps_digest += action_to_json(apt_, *s.action).dump();
            steps_digest += utterance_to_json(apt_, s.utterance).dump();
        }
        std::string key = std::to_string(target) + "|" + hypothesis_to_json(apt_, h).dump() + "|" +
                          std::to_string(fnv1a(steps_digest)) + "|" + ctx.names[0] + ctx.names[1];
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;

        Replay replay;
        WorldState world = initial_world(apt_, ctx);
        Belief belief = h.belief_of_state;
        std::optional<Utterance> pending;
        std::vector<Utterance> inbox;
        std::optional<FurnId> anchor;

        // The hypothesized belief-of-goal becomes active once the other agent
        // has voiced its goal; on silent traces it holds from the start.
        long inquiry_at = -1;
        for (std::size_t i = 0; i < ctx.merged_steps.size(); ++i) {
            const FusedStep& s = ctx.merged_steps[i];
            if (s.agent != target && s.utterance.kind == Utterance::Kind::Inquiry) {
                inquiry_at = static_cast<long>(i);
                break;
            }
        }
        bool trace_has_inquiry = inquiry_at >= 0;

        ObjectId focus =
            h.belief_of_goal.candidates.empty() ? -1 : h.belief_of_goal.mode().object;
        for (std::size_t i = 0; i < ctx.merged_steps.size(); ++i) {
            const FusedStep& s = ctx.merged_steps[i];
            Point pt;
            pt.goal_active = !trace_has_inquiry || static_cast<long>(i) > inquiry_at;
            if (s.agent == target) {
                for (const Utterance& inform : inbox) {
                    belief = update_on_inform(belief, inform, apt_);
                }
                inbox.clear();
                Observation obs = observe(apt_, world, target);
                belief = update_on_observation(belief, obs, apt_);
            }
            pt.world = world;
            pt.belief = belief;
            pt.anchor = anchor;
            pt.pending = pending;
            replay.points.push_back(pt);

            if (s.agent == target) {
                pending.reset();  // the target's turn answers or drops the inquiry
                // A hinderer defends its own most recent claim; this step's
                // answer conditions the following steps.
                if (s.utterance.kind == Utterance::Kind::Inform) {
                    for (const auto& [obj, loc] : s.utterance.stated) {
                        if (obj == focus) anchor = loc;
                    }
                }
            } else if (s.utterance.kind == Utterance::Kind::Inquiry) {
                pending = s.utterance;
            } else if (s.utterance.kind == Utterance::Kind::Inform) {
                inbox.push_back(s.utterance);
            }
            if (s.action.has_value()) replay_step(apt_, world, s.agent, *s.action);
        }
        return cache_.emplace(key, std::move(replay)).first->second;
    }

    PolicyDistribution action_policy(const Point& pt, const Hypothesis& h, AgentId target) {
        if (!pt.goal_active) return waiting_policy(apt_, pt.world, target, params_.beta);
        if (h.social_goal == SocialGoal::Independent || h.belief_of_goal.candidates.empty()) {
            return uniform_policy(apt_, pt.world, target, params_.beta);
        }
        const PhysicalGoal& theirs = h.belief_of_goal.mode();
        auto goal = effective_plan_goal(h.social_goal, theirs, h.belief_of_goal, params_.tau,
                                        pt.anchor);
        if (!goal.has_value()) return waiting_policy(apt_, pt.world, target, params_.beta);
        try {
            return policy_for_goal(apt_, pt.belief, pt.world, target, *goal, params_.beta,
                                   params_.budget);
        } catch (const UnreachableGoal&) {
            return uniform_policy(apt_, pt.world, target, params_.beta);
        }
    }

    double utterance_probability(const Point& pt, const Hypothesis& h, const Utterance& observed) {
        const double beta_u = params_.utterance_beta;
        if (pt.pending.has_value() && !pt.pending->asked.empty()) {
            // Answering an inquiry. Utilities over informs: a helper values
            // stating where it believes the object is, a hinderer values
            // stating anywhere else, an indifferent agent values nothing.
            ObjectId asked = pt.pending->asked[0];
            std::vector<double> marginal;
            if (pt.belief.tracks(asked)) {
                marginal = pt.belief.marginal(asked);
            } else {
                marginal.assign(pt.belief.candidates.size(),
                                pt.belief.candidates.empty()
                                    ? 0.0
                                    : 1.0 / static_cast<double>(pt.belief.candidates.size()));
            }
            auto belief_at = [&](FurnId f) {
                int i = pt.belief.candidate_index(f);
                return i < 0 ? 0.0 : marginal[static_cast<std::size_t>(i)];
            };
            auto utility = [&](const Utterance& u) {
                if (u.kind != Utterance::Kind::Inform || u.stated.empty()) return 0.0;
                double b = belief_at(u.stated[0].second);
                switch (h.social_goal) {
                    case SocialGoal::Help: return b;
                    case SocialGoal::Hinder: return 1.0 - b;
                    case SocialGoal::Independent: return 0.0;
                }
                return 0.0;
            };
            // Candidate set: the observed utterance, silence, and one
            // contradicting inform (the believed-mode statement when that
            // differs from the observed one).
            FurnId mode = kNoFurniture;
            double best = -1.0;
            for (std::size_t i = 0; i < pt.belief.candidates.size(); ++i) {
                if (marginal[i] > best + 1e-12 ||
                    (std::abs(marginal[i] - best) <= 1e-12 && mode != kNoFurniture &&
                     apt_.furniture[pt.belief.candidates[i]].id < apt_.furniture[mode].id)) {
                    best = marginal[i];
                    mode = pt.belief.candidates[i];
                }
            }
            FurnId observed_loc = observed.kind == Utterance::Kind::Inform && !observed.stated.empty()
                                      ? observed.stated[0].second
                                      : kNoFurniture;
            FurnId contra_loc = mode;
            if (contra_loc == observed_loc || contra_loc == kNoFurniture) {
                for (FurnId f : pt.belief.candidates) {
                    if (f != observed_loc) {
                        contra_loc = f;
                        break;
                    }
                }
            }
            std::vector<Utterance> candidates = {observed, Utterance::silence()};
            if (contra_loc != kNoFurniture) {
                Utterance contra = Utterance::inform({{asked, contra_loc}});
                if (!(contra == observed)) candidates.push_back(contra);
            }
            if (observed == Utterance::silence() && candidates.size() > 1) {
                candidates.erase(candidates.begin() + 1);  // dedupe silence
            }
            double z = 0.0, w_obs = 0.0;
            for (const Utterance& u : candidates) {
                double w = std::exp(beta_u * utility(u));
                z += w;
                if (u == observed) w_obs = w;
            }
            return w_obs / z;
        }
        // No question pending: silence strongly preferred, identically under
        // every hypothesis (the term cancels in the posterior).
        std::vector<Utterance> candidates = {observed, Utterance::silence()};
        if (observed == Utterance::silence()) candidates.pop_back();
        double z = 0.0, w_obs = 0.0;
        for (const Utterance& u : candidates) {
            double w = std::exp(beta_u * (u.kind == Utterance::Kind::Silence ? 1.0 : 0.0));
            z += w;
            if (u == observed) w_obs = w;
        }
        if (candidates.size() == 1) {
            z += std::exp(0.0);  // a notional alternative keeps this a proper distribution
        }
        return w_obs / z;
    }

    const Apartment& apt_;
    ScoringParams params_;
    std::map<std::string, Replay> cache_;
};

// ---------------------------------------------------------------------------
// Likelihood aggregation

struct LedgerEntry {
    int step_index = 0;
    char kind = 'a';  // 'a' action, 'u' utterance
    double log_prob = 0.0;
};

struct LogLikelihood {
    double total = 0.0;
    std::vector<LedgerEntry> ledger;
    int zero_step = -1;  // first step driven to -inf, if any
};

// Sum of per-step log action and log utterance scores for the target agent.
// `floor` clips scorer outputs before the log (0 disables clipping, the
// oracle's verification mode).
inline LogLikelihood log_likelihood(const FusedContext& ctx, const Hypothesis& h,
                                    PolicyScorer& scorer, AgentId target, double floor = 0.0) {
    LogLikelihood out;
    for (std::size_t i = 0; i < ctx.merged_steps.size(); ++i) {
        if (ctx.merged_steps[i].agent != target) continue;
        double pa = scorer.score_action(ctx, i, h, target);
        double pu = scorer.score_utterance(ctx, i, h, target);
        if (floor > 0.0) {
            pa = std::max(pa, floor);
            pu = std::max(pu, floor);
        }
        double la = std::log(pa);
        double lu = std::log(pu);
        out.ledger.push_back({static_cast<int>(i), 'a', la});
        out.ledger.push_back({static_cast<int>(i), 'u', lu});
        out.total += la + lu;
        if (!std::isfinite(out.total) && out.zero_step < 0) {
            out.zero_step = static_cast<int>(i);
        }
    }
    return out;
}

struct PosteriorResult {
    std::vector<double> log_likelihoods;
    std::vector<double> posterior;
    std::vector<std::vector<LedgerEntry>> ledger;
    bool degraded = false;  // every hypothesis hit -inf: uniform fallback
};

inline PosteriorResult posterior(const std::vector<Hypothesis>& hypotheses,
                                 const FusedContext& ctx, PolicyScorer& scorer, AgentId target,
                                 const std::vector<double>& prior, double floor = 0.0) {
    if (hypotheses.empty()) throw SchemaError("posterior needs at least one hypothesis");
    PosteriorResult out;
    std::vector<double> scores;
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        LogLikelihood ll = log_likelihood(ctx, hypotheses[i], scorer, target, floor);
        out.log_likelihoods.push_back(ll.total);
        out.ledger.push_back(ll.ledger);
        double lp = prior[i] > 0.0 ? std::log(prior[i]) : -std::numeric_limits<double>::infinity();
        scores.push_back(lp + ll.total);
    }
    double z = log_sum_exp(scores);
    out.posterior.assign(hypotheses.size(), 0.0);
    if (!std::isfinite(z)) {
        out.degraded = true;
        for (double& p : out.posterior) p = 1.0 / hypotheses.size();
    } else {
        for (std::size_t i = 0; i < scores.size(); ++i) {
            out.posterior[i] = std::exp(scores[i] - z);
        }
    }
    return out;
}

struct AnswerResult {
    int chosen = 0;
    bool tie = false;
};

// MOST picks the posterior argmax, LEAST the argmin; ties resolve to the
// lowest option index and are flagged.
inline AnswerResult answer(Polarity polarity, const PosteriorResult& result) {
    const auto& p = result.posterior;
    AnswerResult out;
    out.chosen = static_cast<int>(polarity == Polarity::Most ? argmax_index(p) : argmin_index(p));
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (static_cast<int>(i) != out.chosen &&
            std::abs(p[i] - p[static_cast<std::size_t>(out.chosen)]) <= 1e-12) {
            out.tie = true;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hypothesis parsing

// Generated datasets annotate each option with its hypothesis; fixture
// questions instead carry only template text, which parses back against the
// fused context. The conditioning variables fixed by the stem are identical
// across the three options by construction.
inline std::array<Hypothesis, 3> parse_hypotheses(const Apartment& apt, const QuestionRecord& q,
                                                  const FusedContext& fused) {
    if (!q.hypotheses[0].is_null() && q.hypotheses[0].is_object() && !q.hypotheses[0].empty()) {
        return {hypothesis_from_json(apt, q.hypotheses[0]),
                hypothesis_from_json(apt, q.hypotheses[1]),
                hypothesis_from_json(apt, q.hypotheses[2])};
    }

    static const std::regex belief_stem_re(
        R"(if (\w+) has been trying to (hinder|help))");
    static const std::regex belief_opt_re(
        R"(believed that there was a (.+?) (?:on|inside) the (.+?) in the (.+)$)");
    static const std::regex social_stem_re(
        R"(assuming that (\w+) knows what is (?:inside|on) the (.+?) in the (.+?),)");
    static const std::regex social_help_re(R"(trying to help \w+ locate the (.+)$)");
    static const std::regex social_hinder_re(R"(trying to prevent \w+ from finding the (.+)$)");
    static const std::regex social_indep_re(R"(was indifferent towards)");
    static const std::regex bog_opt_re(
        R"((\w+) believed that (\w+) wanted to place the (.+?) (?:on|into) the (.+?): \w+ moved the .+? to (help|hinder))");
    static const std::regex bog_desired_re(
        R"((\w+) believed that (\w+) placed the (.+?) at \w+'s desired location)");

    std::array<Hypothesis, 3> out;
    std::smatch m;
    if (q.qtype == QType::Belief) {
        if (!std::regex_search(q.stem, m, belief_stem_re)) {
            throw UnresolvableCondition("belief stem does not fix a social goal");
        }
        SocialGoal condition = m[2] == "hinder" ? SocialGoal::Hinder : SocialGoal::Help;
        for (int i = 0; i < 3; ++i) {
            std::smatch om;
            if (!std::regex_search(q.options[i], om, belief_opt_re)) {
                throw UnresolvableCondition("belief option does not name a location");
            }
            ObjectId obj = detail::obj_from_display(apt, om[1]);
            FurnId loc = detail::furn_from_display(apt, om[2]);
            Hypothesis h;
            h.belief_of_state = full_candidate_belief(apt);
            h.belief_of_state.set_delta(obj, loc);
            h.social_goal = condition;
            h.belief_of_goal = GoalBelief::delta({PhysicalGoal::find(obj)}, 0);
            out[i] = h;
        }
        return out;
    }
    if (q.qtype == QType::SocialGoal) {
        if (!std::regex_search(q.stem, m, social_stem_re)) {
            throw UnresolvableCondition("social stem does not grant location knowledge");
        }
        FurnId stated = detail::furn_from_display(apt, m[2]);
        ObjectId obj = -1;
        std::array<SocialGoal, 3> socials{};
        for (int i = 0; i < 3; ++i) {
            std::smatch om;
            if (std::regex_search(q.options[i], om, social_help_re)) {
                socials[i] = SocialGoal::Help;
                obj = detail::obj_from_display(apt, om[1]);
            } else if (std::regex_search(q.options[i], om, social_hinder_re)) {
                socials[i] = SocialGoal::Hinder;
                obj = detail::obj_from_display(apt, om[1]);
            } else if (std::regex_search(q.options[i], om, social_indep_re)) {
                socials[i] = SocialGoal::Independent;
            } else {
                throw UnresolvableCondition("social option names no stance");
            }
        }
        if (obj < 0) throw UnresolvableCondition("social options never name the object");
        auto known = fused.initial_placements.find(obj);
        if (known == fused.initial_placements.end()) {
            throw UnresolvableCondition("stated location's contents are not recoverable");
        }
        Belief conditioned = full_candidate_belief(apt);
        if (known->second == stated) {
            conditioned.set_delta(obj, stated);
        } else {
            std::vector<double> d(conditioned.candidates.size(), 1.0);
            int si = conditioned.candidate_index(stated);
            if (si >= 0) d[static_cast<std::size_t>(si)] = 0.0;
            normalize(d);
            conditioned.dist[obj] = d;
        }
        for (int i = 0; i < 3; ++i) {
            Hypothesis h;
            h.belief_of_state = conditioned;
            h.social_goal = socials[i];
            h.belief_of_goal = GoalBelief::delta({PhysicalGoal::find(obj)}, 0);
            out[i] = h;
        }
        return out;
    }
    // Belief of goal.
    for (int i = 0; i < 3; ++i) {
        std::smatch om;
        Hypothesis h;
        ObjectId obj = -1;
        if (std::regex_search(q.options[i], om, bog_opt_re)) {
            obj = detail::obj_from_display(apt, om[3]);
            FurnId target = detail::furn_from_display(apt, om[4]);
            h.social_goal = om[5] == "help" ? SocialGoal::Help : SocialGoal::Hinder;
            h.belief_of_goal = GoalBelief::delta({PhysicalGoal::rearrange(obj, target)}, 0);
        } else if (std::regex_search(q.options[i], om, bog_desired_re)) {
            obj = detail::obj_from_display(apt, om[3]);
            // "Desired location" resolves to where the other agent actually
            // put the object.
            std::string placer = om[2];
            FurnId target = kNoFurniture;
            int placer_agent = placer == fused.names[0] ? 0 : 1;
            for (const auto& step : fused.merged_steps) {
                if (step.agent == placer_agent && step.action.has_value() &&
                    step.action->verb == Verb::Put && step.action->object == obj) {
                    target = step.action->furniture;
                    break;
                }
            }
            if (target == kNoFurniture) {
                throw UnresolvableCondition("desired location is not visible in the channels");
            }
            h.social_goal = SocialGoal::Help;
            h.belief_of_goal = GoalBelief::delta({PhysicalGoal::rearrange(obj, target)}, 0);
        } else {
            throw UnresolvableCondition("belief-of-goal option does not parse");
        }
        auto known = fused.initial_placements.find(obj);
        if (known == fused.initial_placements.end()) {
            throw UnresolvableCondition("object's initial placement is not recoverable");
        }
        h.belief_of_state = full_candidate_belief(apt);
        h.belief_of_state.set_delta(obj, known->second);
        out[i] = h;
    }
    return out;
}

// The hypotheses' subject: the agent the question asks about.
inline AgentId target_agent(const QuestionRecord& q, const FusedContext& fused) {
    // The subject is named at the head of belief/social option texts and at
    // the head of belief-of-goal options.
    static const std::regex giving_re(R"(When giving information, (\w+))");
    static const std::regex head_re(R"(^(\w+) believed)");
    std::smatch m;
    if (std::regex_search(q.options[0], m, giving_re) ||
        std::regex_search(q.options[0], m, head_re)) {
        if (m[1] == fused.names[0]) return 0;
        if (m[1] == fused.names[1]) return 1;
    }
    throw UnresolvableCondition("cannot identify the question's subject agent");
}

}  // namespace mentis
