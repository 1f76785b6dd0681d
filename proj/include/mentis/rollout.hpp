#pragma once
// Full scenario simulation. Agents take alternating turns within each tick
// (agent 0 then agent 1); on its turn an agent observes, updates its beliefs,
// optionally inquires or answers a pending inquiry, then samples an action
// from its social-goal-conditioned policy.

#include <array>
#include <map>
#include <optional>

#include "mentis/core.hpp"
#include "mentis/mind.hpp"
#include "mentis/plan.hpp"
#include "mentis/trace.hpp"
#include "mentis/world.hpp"

namespace mentis {

struct RolloutParams {
    int horizon = 14;        // ticks; both agents act once per tick
    double beta = 2.0;       // action inverse temperature
    double tau = 0.5;        // entropy threshold (nats) for inquiries and goal knowledge
    bool language_enabled = true;
    SearchBudget budget;
};

namespace detail {

struct AgentRuntime {
    AgentSpec spec;
    Belief belief;
    GoalBelief goal_belief;
    std::optional<FurnId> stated_anchor;       // location of my latest answer
    std::optional<Utterance> pending_inquiry;  // awaiting my answer
    std::vector<Utterance> inbox;              // informs I have not yet absorbed
};

inline bool colocated(const WorldState& s) { return s.agents[0].room == s.agents[1].room; }

// Simulation samples only goal-relevant actions: navigation, open/close, and
// handling of the agent's active goal object. The policy itself (and the
// likelihood model scoring it) keeps the full legal support.
inline PrimitiveAction sample_goal_relevant(const PolicyDistribution& policy, ObjectId focus,
                                            Rng& rng) {
    std::vector<std::size_t> kept;
    std::vector<double> weights;
    for (std::size_t i = 0; i < policy.actions.size(); ++i) {
        const PrimitiveAction& a = policy.actions[i];
        bool handles_object = a.verb == Verb::Grab || a.verb == Verb::Put;
        if (!handles_object || a.object == focus) {
            kept.push_back(i);
            weights.push_back(policy.probs[i]);
        }
    }
    if (kept.empty()) return policy.sample(rng);
    return policy.actions[kept[rng.weighted(weights)]];
}

}  // namespace detail

inline ScenarioTrace rollout(const Apartment& apt, const WorldState& world,
                             const std::array<AgentSpec, 2>& specs, const RolloutParams& params,
                             std::uint64_t seed) {
    if (params.horizon < 1) throw ConstraintUnsatisfiable("rollout horizon must be >= 1");
    Rng rng = substream(seed, "rollout");

    ScenarioTrace trace;
    trace.apartment = apt.id;
    trace.language = params.language_enabled;
    trace.s0 = world;
    trace.specs = specs;

    std::array<detail::AgentRuntime, 2> minds;
    for (AgentId a = 0; a < 2; ++a) {
        minds[a].spec = specs[a];
        minds[a].belief = specs[a].initial_belief;
        minds[a].goal_belief = specs[a].initial_goal_belief;
    }

    WorldState state = world;
    std::map<AgentId, PrimitiveAction> last_actions;
    bool finished = false;

    for (int tick = 0; tick < params.horizon && !finished; ++tick) {
        for (AgentId me = 0; me < 2; ++me) {
            detail::AgentRuntime& mind = minds[me];
            AgentId other = 1 - me;

            // Perception: absorb utterances received since my last turn, then
            // observe (a direct sighting overrides a stale inform).
            for (const Utterance& inform : mind.inbox) {
                mind.belief = update_on_inform(mind.belief, inform, apt);
            }
            mind.inbox.clear();
            Observation obs = observe(apt, state, me, last_actions);
            mind.belief = update_on_observation(mind.belief, obs, apt);
            trace.belief_history.push_back({tick, me, mind.belief});

            // The active goal, if any, after social-goal substitution. The
            // anchor a hinderer defends is whatever it stated on an earlier
            // turn; this turn's own answer takes effect next turn, matching
            // the history conditioning of the likelihood model.
            auto active = effective_plan_goal(mind.spec.social_goal, mind.spec.physical_goal,
                                              mind.goal_belief, params.tau, mind.stated_anchor);

            // Utterance phase: answer a pending inquiry, or inquire.
            Utterance utterance = Utterance::silence();
            if (mind.pending_inquiry.has_value()) {
                utterance = compose_response(mind.belief, mind.spec.social_goal,
                                             *mind.pending_inquiry, mind.belief.candidates, apt,
                                             rng);
                minds[other].inbox.push_back(utterance);
                mind.pending_inquiry.reset();
            } else if (params.language_enabled && active.has_value()) {
                ObjectId seek = active->object;
                bool holding = state.placements.count(seek) > 0 &&
                               state.placements.at(seek).held_by == me;
                bool achieved = detail::goal_achieved(*active, state, me);
                if (!holding && !achieved && mind.belief.tracks(seek) &&
                    should_inquire(mind.belief, PhysicalGoal::find(seek), detail::colocated(state),
                                   params.tau)) {
                    utterance = Utterance::inquiry({seek});
                    minds[other].pending_inquiry = utterance;
                    minds[other].goal_belief = GoalBelief::delta({PhysicalGoal::find(seek)}, 0);
                }
            }

            // Action phase.
            PolicyDistribution policy =
                active.has_value()
                    ? policy_for_goal(apt, mind.belief, state, me, *active, params.beta,
                                      params.budget)
                    : waiting_policy(apt, state, me, params.beta);
            PrimitiveAction action = detail::sample_goal_relevant(
                policy, active.has_value() ? active->object : -1, rng);
            state = apply(apt, state, me, action);
            last_actions[me] = action;
            trace.steps.push_back({tick, me, action, utterance});

            if (utterance.kind == Utterance::Kind::Inform && !mind.goal_belief.candidates.empty()) {
                ObjectId focus = mind.goal_belief.mode().object;
                for (const auto& [obj, loc] : utterance.stated) {
                    if (obj == focus) mind.stated_anchor = loc;
                }
            }
        }

        // Early termination once no agent holds an unachieved objective
        // (agents still waiting to learn a goal do not block).
        bool all_resolved = true;
        for (AgentId a = 0; a < 2; ++a) {
            auto active = effective_plan_goal(minds[a].spec.social_goal,
                                              minds[a].spec.physical_goal, minds[a].goal_belief,
                                              params.tau, minds[a].stated_anchor);
            if (active.has_value() && !detail::goal_achieved(*active, state, a)) {
                all_resolved = false;
                break;
            }
        }
        finished = all_resolved;
    }

    trace.horizon_exhausted = !finished;
    trace.terminal = state;
    return trace;
}

}  // namespace mentis
