#pragma once
// Forward planning: Boltzmann-rational goal-directed policies over the
// believed world, computed by exact breadth-first search with an MCTS
// fallback for large state spaces, plus level-1 goal inference and
// social-goal-conditioned goal substitution.
//
// Action values follow Q(a) = -(expected remaining action cost after a),
// with uniform action cost 1 and no discount. Under location uncertainty the
// expectation runs over the believed placements of the goal object, one
// deterministic world per candidate location; an action that is illegal in
// some world counts there as a wasted step.

#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "mentis/core.hpp"
#include "mentis/mind.hpp"
#include "mentis/trace.hpp"
#include "mentis/world.hpp"

namespace mentis {

enum class PolicySource { ExactSearch, Mcts };

struct PolicyDistribution {
    std::vector<PrimitiveAction> actions;  // canonical order
    std::vector<double> probs;             // sums to 1
    double beta = 0.0;
    PolicySource source = PolicySource::ExactSearch;

    double probability(const PrimitiveAction& a) const {
        for (std::size_t i = 0; i < actions.size(); ++i) {
            if (actions[i] == a) return probs[i];
        }
        return 0.0;
    }

    const PrimitiveAction& mode() const { return actions[argmax_index(probs)]; }

    PrimitiveAction sample(Rng& rng) const { return actions[rng.weighted(probs)]; }
};

struct SearchBudget {
    enum class Prefer { Auto, Exact, Mcts };
    std::size_t exact_state_limit = 100000;  // reachable-state bound for exact search
    int mcts_simulations = 10000;
    int mcts_horizon = 40;
    double uct_c = 1.4;
    std::uint64_t mcts_seed = 0x5EEDull;
    Prefer prefer = Prefer::Auto;
};

// Internal goal language. Find maps to Hold, Rearrange to PlaceAt; social
// substitution additionally uses KeepPlaced (leave the object wherever it
// is) and AvoidAt (the object must sit anywhere except the anchor).
struct PlanGoal {
    enum class Kind { Hold, PlaceAt, KeepPlaced, AvoidAt };
    Kind kind = Kind::Hold;
    ObjectId object = -1;
    FurnId target = kNoFurniture;

    bool operator<(const PlanGoal& o) const {
        return std::tie(kind, object, target) < std::tie(o.kind, o.object, o.target);
    }

    static PlanGoal from_physical(const PhysicalGoal& g) {
        if (g.kind == PhysicalGoal::Kind::Find) return {Kind::Hold, g.object, kNoFurniture};
        return {Kind::PlaceAt, g.object, g.target};
    }
};

namespace detail {

inline bool goal_achieved(const PlanGoal& goal, const WorldState& s, AgentId agent) {
    auto it = s.placements.find(goal.object);
    if (it == s.placements.end()) return false;
    const ObjectPlace& place = it->second;
    switch (goal.kind) {
        case PlanGoal::Kind::Hold:
            return place.held_by == agent;
        case PlanGoal::Kind::PlaceAt:
            return !place.held() && place.furniture == goal.target;
        case PlanGoal::Kind::KeepPlaced:
            return place.held_by != agent;
        case PlanGoal::Kind::AvoidAt:
            return !place.held() && place.furniture != goal.target;
    }
    return false;
}

// Goal-relevant action candidates: navigation, open/close at the current
// attachment point, and grab/put of the goal object only. This is the edge
// set of the cost search; policies themselves span all legal actions.
inline std::vector<PrimitiveAction> policy_candidates(const Apartment& apt, const WorldState& s,
                                                      AgentId agent, ObjectId goal_object,
                                                      bool include_noop) {
    std::vector<PrimitiveAction> out;
    if (include_noop) out.push_back(PrimitiveAction::noop());
    const AgentPose& pose = s.agents[agent];
    for (RoomId r : apt.adjacency[pose.room]) out.push_back(PrimitiveAction::walk_room(r));
    for (FurnId f : apt.furniture_in_room(pose.room)) {
        out.push_back(PrimitiveAction::walk_furniture(f));
    }
    if (pose.at != kNoFurniture && apt.is_container(pose.at)) {
        out.push_back(s.container_open[pose.at] ? PrimitiveAction::close(pose.at)
                                                : PrimitiveAction::open(pose.at));
    }
    auto it = s.placements.find(goal_object);
    if (it != s.placements.end()) {
        const ObjectPlace& place = it->second;
        if (!place.held() && place.furniture == pose.at) {
            PrimitiveAction g = PrimitiveAction::grab(goal_object, pose.at);
            if (is_legal(apt, s, agent, g)) out.push_back(g);
        }
        if (place.held_by == agent && pose.at != kNoFurniture) {
            PrimitiveAction p = PrimitiveAction::put(goal_object, pose.at);
            if (is_legal(apt, s, agent, p)) out.push_back(p);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

constexpr int kUnreachable = 1 << 20;

// Exact cost-to-go: breadth-first search over the single-agent projection of
// the (deterministic) world. Returns kUnreachable when no plan exists.
inline int bfs_cost(const Apartment& apt, const WorldState& start, AgentId agent,
                    const PlanGoal& goal, std::size_t state_limit) {
    if (goal_achieved(goal, start, agent)) return 0;
    std::map<std::string, int> dist;
    std::queue<WorldState> frontier;
    WorldState s0 = start;
    s0.tick = 0;
    dist[s0.key()] = 0;
    frontier.push(s0);
    while (!frontier.empty()) {
        WorldState s = frontier.front();
        frontier.pop();
        int d = dist[s.key()];
        for (const auto& a : policy_candidates(apt, s, agent, goal.object, false)) {
            WorldState next = apply(apt, s, agent, a);
            next.tick = 0;
            auto [it, fresh] = dist.insert({next.key(), d + 1});
            if (!fresh) continue;
            if (goal_achieved(goal, next, agent)) return d + 1;
            if (dist.size() > state_limit) return kUnreachable;
            frontier.push(next);
        }
    }
    return kUnreachable;
}

// Counts states reachable from `start`, capped at `limit`.
inline std::size_t reachable_states(const Apartment& apt, const WorldState& start, AgentId agent,
                                    ObjectId goal_object, std::size_t limit) {
    std::map<std::string, bool> seen;
    std::queue<WorldState> frontier;
    WorldState s0 = start;
    s0.tick = 0;
    seen[s0.key()] = true;
    frontier.push(s0);
    while (!frontier.empty() && seen.size() <= limit) {
        WorldState s = frontier.front();
        frontier.pop();
        for (const auto& a : policy_candidates(apt, s, agent, goal_object, false)) {
            WorldState next = apply(apt, s, agent, a);
            next.tick = 0;
            if (seen.insert({next.key(), true}).second) frontier.push(next);
        }
    }
    return seen.size();
}

// Room-graph distance table (small, recomputed on demand).
inline int room_distance(const Apartment& apt, RoomId from, RoomId to) {
    if (from == to) return 0;
    std::vector<int> d(apt.rooms.size(), -1);
    std::queue<RoomId> q;
    d[from] = 0;
    q.push(from);
    while (!q.empty()) {
        RoomId r = q.front();
        q.pop();
        for (RoomId n : apt.adjacency[r]) {
            if (d[n] < 0) {
                d[n] = d[r] + 1;
                if (n == to) return d[n];
                q.push(n);
            }
        }
    }
    return kUnreachable;
}

inline int travel_cost(const Apartment& apt, const AgentPose& pose, FurnId f) {
    if (pose.at == f) return 0;
    return room_distance(apt, pose.room, apt.furniture[f].room) + 1;
}

// Optimistic remaining-cost estimate used to steer MCTS rollouts.
inline int heuristic_cost(const Apartment& apt, const WorldState& s, AgentId agent,
                          const PlanGoal& goal) {
    if (goal_achieved(goal, s, agent)) return 0;
    auto it = s.placements.find(goal.object);
    if (it == s.placements.end()) return kUnreachable;
    const ObjectPlace& place = it->second;
    const AgentPose& pose = s.agents[agent];
    auto fetch_cost = [&]() {
        int c = travel_cost(apt, pose, place.furniture) + 1;  // reach + grab
        if (apt.is_container(place.furniture) && !s.container_open[place.furniture]) c += 1;
        return c;
    };
    switch (goal.kind) {
        case PlanGoal::Kind::Hold:
            return place.held_by == agent ? 0 : fetch_cost();
        case PlanGoal::Kind::PlaceAt: {
            int c = 0;
            AgentPose from = pose;
            if (place.held_by != agent) {
                if (place.held()) return kUnreachable;  // other agent's hand
                c += fetch_cost();
                from = AgentPose{apt.furniture[place.furniture].room, place.furniture};
            }
            c += travel_cost(apt, from, goal.target) + 1;  // reach + put
            if (apt.is_container(goal.target) && !s.container_open[goal.target]) c += 1;
            return c;
        }
        case PlanGoal::Kind::KeepPlaced:
            return 1;  // holding it: put it down somewhere adjacent
        case PlanGoal::Kind::AvoidAt: {
            // Cheapest relocation to any furniture other than the anchor.
            int best = kUnreachable;
            int grab = place.held_by == agent ? 0 : (place.held() ? kUnreachable : fetch_cost());
            if (grab >= kUnreachable) return kUnreachable;
            AgentPose from = place.held_by == agent
                                 ? pose
                                 : AgentPose{apt.furniture[place.furniture].room, place.furniture};
            for (std::size_t f = 0; f < apt.furniture.size(); ++f) {
                if (static_cast<FurnId>(f) == goal.target) continue;
                int c = grab + travel_cost(apt, from, static_cast<FurnId>(f)) + 1;
                if (apt.is_container(static_cast<FurnId>(f)) &&
                    !s.container_open[f]) c += 1;
                best = std::min(best, c);
            }
            return best;
        }
    }
    return kUnreachable;
}

// Deterministic-world MCTS with min-cost backup: each simulation descends the
// tree by UCT, expands one node, and finishes with an epsilon-greedy rollout
// guided by the heuristic. Reports the best cost found from the start state.
class MctsSolver {
public:
    MctsSolver(const Apartment& apt, AgentId agent, PlanGoal goal, const SearchBudget& budget)
        : apt_(apt), agent_(agent), goal_(goal), budget_(budget), rng_(budget.mcts_seed) {}

    int solve(const WorldState& start) {
        nodes_.clear();
        best_ = kUnreachable;
        if (goal_achieved(goal_, start, agent_)) return 0;
        WorldState root = start;
        root.tick = 0;
        for (int sim = 0; sim < budget_.mcts_simulations; ++sim) {
            simulate(root);
        }
        return best_;
    }

    // Best cost observed through each root action, after `solve`-style search
    // from the root. Used to derive Q values for a whole policy from one tree.
    std::map<PrimitiveAction, int> root_costs(const WorldState& start) {
        nodes_.clear();
        best_ = kUnreachable;
        WorldState root = start;
        root.tick = 0;
        for (int sim = 0; sim < budget_.mcts_simulations; ++sim) {
            simulate(root);
        }
        std::map<PrimitiveAction, int> out;
        auto it = nodes_.find(root.key());
        if (it == nodes_.end()) return out;
        const Node& node = it->second;
        for (std::size_t i = 0; i < node.actions.size(); ++i) {
            out[node.actions[i]] = node.best_cost[i];
        }
        return out;
    }

private:
    struct Node {
        std::vector<PrimitiveAction> actions;
        std::vector<int> visits;
        std::vector<int> best_cost;  // best observed cost-to-goal through each action
        int total_visits = 0;
    };

    void simulate(const WorldState& root) {
        WorldState s = root;
        std::vector<std::pair<std::string, std::size_t>> path;  // (node key, action index)
        int spent = 0;
        while (spent < budget_.mcts_horizon) {
            std::string key = s.key();
            auto it = nodes_.find(key);
            if (it == nodes_.end()) {
                Node node;
                node.actions = policy_candidates(apt_, s, agent_, goal_.object, false);
                node.visits.assign(node.actions.size(), 0);
                node.best_cost.assign(node.actions.size(), kUnreachable);
                nodes_[key] = std::move(node);
                // Expansion: finish with a guided rollout from here.
                int tail = rollout(s, budget_.mcts_horizon - spent);
                record(path, spent, tail);
                return;
            }
            Node& node = it->second;
            std::size_t pick = select(node);
            path.push_back({key, pick});
            s = apply(apt_, s, agent_, node.actions[pick]);
            s.tick = 0;
            ++spent;
            if (goal_achieved(goal_, s, agent_)) {
                record(path, spent, 0);
                return;
            }
        }
        record(path, spent, kUnreachable);
    }

    std::size_t select(Node& node) {
        for (std::size_t i = 0; i < node.actions.size(); ++i) {
            if (node.visits[i] == 0) return i;
        }
        // A slice of undirected exploration keeps actions alive whose early
        // rollouts happened to miss the goal.
        if (rng_.bernoulli(0.15)) return rng_.uniform(node.actions.size());
        std::size_t best = 0;
        double best_score = -1e18;
        for (std::size_t i = 0; i < node.actions.size(); ++i) {
            double exploit = -static_cast<double>(std::min(node.best_cost[i], budget_.mcts_horizon)) /
                             budget_.mcts_horizon;
            double explore = budget_.uct_c *
                             std::sqrt(std::log(node.total_visits + 1.0) / node.visits[i]);
            double score = exploit + explore;
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        return best;
    }

    int rollout(WorldState s, int steps_left) {
        for (int step = 0; step < steps_left; ++step) {
            if (goal_achieved(goal_, s, agent_)) return step;
            auto actions = policy_candidates(apt_, s, agent_, goal_.object, false);
            std::size_t pick;
            if (rng_.bernoulli(0.05)) {
                pick = rng_.uniform(actions.size());
            } else {
                int best_h = kUnreachable + 1;
                std::vector<std::size_t> ties;
                for (std::size_t i = 0; i < actions.size(); ++i) {
                    WorldState next = apply(apt_, s, agent_, actions[i]);
                    int h = heuristic_cost(apt_, next, agent_, goal_);
                    if (h < best_h) {
                        best_h = h;
                        ties = {i};
                    } else if (h == best_h) {
                        ties.push_back(i);
                    }
                }
                pick = ties[rng_.uniform(ties.size())];
            }
            s = apply(apt_, s, agent_, actions[pick]);
            s.tick = 0;
        }
        return goal_achieved(goal_, s, agent_) ? steps_left : kUnreachable;
    }

    // Walk the path backwards crediting each node with the cost-to-goal
    // observed downstream of it.
    void record(const std::vector<std::pair<std::string, std::size_t>>& path, int total_spent,
                int tail) {
        int to_goal = tail;  // cost from the deepest point reached
        for (std::size_t i = path.size(); i-- > 0;) {
            int depth = static_cast<int>(i);  // actions taken before this edge
            (void)depth;
            Node& node = nodes_[path[i].first];
            std::size_t a = path[i].second;
            to_goal = to_goal >= kUnreachable ? kUnreachable : to_goal + 1;
            node.visits[a] += 1;
            node.total_visits += 1;
            node.best_cost[a] = std::min(node.best_cost[a], to_goal);
        }
        if (!path.empty()) {
            // Cost from the root this simulation achieved.
            const Node& root = nodes_.at(path[0].first);
            std::size_t a = path[0].second;
            best_ = std::min(best_, root.best_cost[a]);
        } else if (tail < kUnreachable) {
            best_ = std::min(best_, tail);
        }
        (void)total_spent;
    }

    const Apartment& apt_;
    AgentId agent_;
    PlanGoal goal_;
    const SearchBudget& budget_;
    Rng rng_;
    std::map<std::string, Node> nodes_;
    int best_ = kUnreachable;
};

// Normalized memo key: the frozen other agent and unrelated placements do not
// influence single-agent search, so they stay out of the key (except through
// the planner's free-hand count, which gates Grab legality).
inline std::string cost_key(const Apartment& apt, const WorldState& s, AgentId agent,
                            const PlanGoal& goal) {
    std::string k = apt.id;
    k += '|';
    k += static_cast<char>('A' + s.agents[agent].room);
    k += static_cast<char>('a' + s.agents[agent].at + 1);
    auto it = s.placements.find(goal.object);
    if (it == s.placements.end()) {
        k += '?';
    } else if (it->second.held_by == agent) {
        k += '@';
    } else if (it->second.held()) {
        k += '!';
    } else {
        k += static_cast<char>('f' + it->second.furniture);
    }
    for (bool b : s.container_open) k += b ? '1' : '0';
    k += static_cast<char>('0' + s.held_count(agent));
    k += static_cast<char>('0' + static_cast<int>(goal.kind));
    k += static_cast<char>('0' + goal.object);
    k += static_cast<char>('a' + goal.target + 1);
    return k;
}

// Cost to goal from `start`, via exact search or MCTS per budget. Exact
// results are memoized; they recur heavily during likelihood scoring.
inline int solve_cost(const Apartment& apt, const WorldState& start, AgentId agent,
                      const PlanGoal& goal, const SearchBudget& budget, PolicySource source) {
    if (source == PolicySource::ExactSearch) {
        thread_local std::map<std::string, int> cache;
        if (cache.size() > 2'000'000) cache.clear();
        std::string key = cost_key(apt, start, agent, goal);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        int cost = bfs_cost(apt, start, agent, goal, budget.exact_state_limit);
        cache[key] = cost;
        return cost;
    }
    MctsSolver solver(apt, agent, goal, budget);
    return solver.solve(start);
}

// Closed-form upper bound on the single-agent reachable space: poses times
// goal-object positions times container-flag combinations.
inline std::size_t state_space_bound(const Apartment& apt) {
    std::size_t poses = apt.rooms.size() + apt.furniture.size();
    std::size_t containers = 0;
    for (const auto& f : apt.furniture) {
        if (f.kind == FurnKind::Container) ++containers;
    }
    std::size_t flags = containers >= 20 ? (1u << 20) : (1u << containers);
    return poses * (apt.furniture.size() + 2) * flags;
}

}  // namespace detail

// Boltzmann policy for one internal plan goal under a believed object
// location distribution. The expectation runs per candidate world.
inline PolicyDistribution policy_for_goal(const Apartment& apt, const Belief& belief,
                                          const WorldState& proxy, AgentId agent,
                                          const PlanGoal& goal, double beta,
                                          const SearchBudget& budget) {
    // Believed worlds: if the agent itself holds the object its location is
    // known; otherwise one world per positive-probability candidate.
    std::vector<std::pair<double, WorldState>> worlds;
    auto held = proxy.placements.find(goal.object);
    bool in_own_hand = held != proxy.placements.end() && held->second.held_by == agent;
    if (in_own_hand || !belief.tracks(goal.object)) {
        if (proxy.placements.find(goal.object) == proxy.placements.end()) {
            throw UnreachableGoal("goal object absent from believed support");
        }
        worlds.push_back({1.0, proxy});
    } else {
        const auto& d = belief.marginal(goal.object);
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d[i] <= 0.0) continue;
            WorldState w = proxy;
            w.placements[goal.object] = ObjectPlace::at(belief.candidates[i]);
            worlds.push_back({d[i], w});
        }
        if (worlds.empty()) throw UnreachableGoal("goal object absent from believed support");
    }

    PolicySource source = PolicySource::ExactSearch;
    if (budget.prefer == SearchBudget::Prefer::Mcts) {
        source = PolicySource::Mcts;
    } else if (budget.prefer == SearchBudget::Prefer::Auto &&
               detail::state_space_bound(apt) > budget.exact_state_limit) {
        std::size_t states = detail::reachable_states(apt, worlds[0].second, agent, goal.object,
                                                      budget.exact_state_limit);
        if (states > budget.exact_state_limit) source = PolicySource::Mcts;
    }

    // Candidate actions: every legal action, unioned over worlds so that
    // believed-possible grabs stay available. Search below still expands
    // only goal-relevant edges.
    std::vector<PrimitiveAction> candidates;
    for (const auto& [p, w] : worlds) {
        (void)p;
        for (const auto& a : legal_actions(apt, w, agent)) {
            if (std::find(candidates.begin(), candidates.end(), a) == candidates.end()) {
                candidates.push_back(a);
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<double> q(candidates.size(), 0.0);
    bool any_reachable = false;
    for (const auto& [p, w] : worlds) {
        // Cost through each root action in this world. Exact search solves
        // each successor; MCTS reads every root action off one shared tree.
        std::map<PrimitiveAction, int> through;
        if (source == PolicySource::Mcts) {
            detail::MctsSolver solver(apt, agent, goal, budget);
            through = solver.root_costs(w);
        }
        int stay_cost = detail::kUnreachable;  // cost-to-go of standing still
        if (detail::goal_achieved(goal, w, agent)) {
            stay_cost = 0;
        } else if (source == PolicySource::Mcts) {
            for (const auto& [a, c] : through) {
                (void)a;
                stay_cost = std::min(stay_cost, c);
            }
        } else {
            stay_cost = detail::solve_cost(apt, w, agent, goal, budget, source);
        }
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            bool legal_here = is_legal(apt, w, agent, candidates[i]);
            int cost_through;
            if (source == PolicySource::Mcts) {
                auto it = through.find(candidates[i]);
                cost_through = legal_here && it != through.end() && it->second < detail::kUnreachable
                                   ? it->second
                                   : 1 + std::min(stay_cost, detail::kUnreachable - 1);
            } else if (legal_here) {
                WorldState next = apply(apt, w, agent, candidates[i]);
                int cost = detail::solve_cost(apt, next, agent, goal, budget, source);
                cost_through = cost >= detail::kUnreachable ? detail::kUnreachable : 1 + cost;
            } else {
                // Illegal in this world: the step is wasted.
                cost_through = 1 + std::min(stay_cost, detail::kUnreachable - 1);
            }
            if (cost_through < detail::kUnreachable) any_reachable = true;
            q[i] -= p * std::min(cost_through, detail::kUnreachable);
        }
    }
    if (!any_reachable && goal.kind != PlanGoal::Kind::KeepPlaced &&
        goal.kind != PlanGoal::Kind::AvoidAt) {
        throw UnreachableGoal("goal unreachable in every believed world");
    }

    PolicyDistribution policy;
    policy.actions = candidates;
    policy.probs = softmax(q, beta);
    policy.beta = beta;
    policy.source = source;
    return policy;
}

// Boltzmann-rational policy toward a physical goal.
inline PolicyDistribution plan_policy(const Apartment& apt, const Belief& belief,
                                      const WorldState& proxy, AgentId agent,
                                      const PhysicalGoal& goal, double beta,
                                      const SearchBudget& budget) {
    if (goal.object < 0 ||
        (!belief.tracks(goal.object) && proxy.placements.find(goal.object) == proxy.placements.end())) {
        throw UnreachableGoal("goal object absent from believed support");
    }
    return policy_for_goal(apt, belief, proxy, agent, PlanGoal::from_physical(goal), beta, budget);
}

// Policy of an agent that has no actionable goal yet: it observes, with a
// strong preference for staying put.
inline PolicyDistribution waiting_policy(const Apartment& apt, const WorldState& proxy,
                                         AgentId agent, double beta) {
    std::vector<PrimitiveAction> candidates = legal_actions(apt, proxy, agent);
    std::sort(candidates.begin(), candidates.end());
    std::vector<double> q(candidates.size(), -3.0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].verb == Verb::Noop) q[i] = 0.0;
    }
    PolicyDistribution policy;
    policy.actions = candidates;
    policy.probs = softmax(q, beta);
    policy.beta = beta;
    policy.source = PolicySource::ExactSearch;
    return policy;
}

// Maximum-entropy policy over legal actions; used when an agent's own
// objective is unknown to the model scoring it.
inline PolicyDistribution uniform_policy(const Apartment& apt, const WorldState& proxy,
                                         AgentId agent, double beta) {
    PolicyDistribution policy;
    policy.actions = legal_actions(apt, proxy, agent);
    std::sort(policy.actions.begin(), policy.actions.end());
    policy.probs.assign(policy.actions.size(), 1.0 / policy.actions.size());
    policy.beta = beta;
    policy.source = PolicySource::ExactSearch;
    return policy;
}

// Goal substitution for social planning. Returns the internal goal the agent
// actually plans toward, or nullopt when it should wait and observe.
//
// A hinderer of a Find goal keeps the object away from wherever it last
// claimed it to be (`stated_anchor`): until it has answered there is nothing
// to defend, and after an accidental truthful answer it relocates the object.
inline std::optional<PlanGoal> effective_plan_goal(SocialGoal social,
                                                   const PhysicalGoal& own_goal,
                                                   const GoalBelief& inferred,
                                                   double goal_known_threshold,
                                                   std::optional<FurnId> stated_anchor) {
    if (social == SocialGoal::Independent) return PlanGoal::from_physical(own_goal);
    if (inferred.candidates.empty() || inferred.entropy() >= goal_known_threshold) {
        return std::nullopt;  // other's goal still unknown: observe
    }
    const PhysicalGoal& theirs = inferred.mode();
    if (social == SocialGoal::Help) {
        if (theirs.kind == PhysicalGoal::Kind::Find) {
            return PlanGoal{PlanGoal::Kind::KeepPlaced, theirs.object, kNoFurniture};
        }
        return PlanGoal{PlanGoal::Kind::PlaceAt, theirs.object, theirs.target};
    }
    // Hinder: keep the object away from where the other expects to use it.
    if (theirs.kind == PhysicalGoal::Kind::Rearrange) {
        return PlanGoal{PlanGoal::Kind::AvoidAt, theirs.object, theirs.target};
    }
    if (!stated_anchor.has_value()) return std::nullopt;
    return PlanGoal{PlanGoal::Kind::AvoidAt, theirs.object, *stated_anchor};
}

// Social-goal-conditioned planning: Help adopts the other agent's inferred
// goal, Hinder plans toward its negation, Independent plans its own goal.
inline PolicyDistribution social_plan(const Apartment& apt, const AgentSpec& spec,
                                      const Belief& own_belief, const GoalBelief& inferred,
                                      const WorldState& proxy, double beta,
                                      const SearchBudget& budget,
                                      double goal_known_threshold = 0.5,
                                      std::optional<FurnId> stated_anchor = std::nullopt) {
    auto goal = effective_plan_goal(spec.social_goal, spec.physical_goal, inferred,
                                    goal_known_threshold, stated_anchor);
    if (!goal.has_value()) return waiting_policy(apt, proxy, spec.id, beta);
    return policy_for_goal(apt, own_belief, proxy, spec.id, *goal, beta, budget);
}

// Level-1 goal inference about the other agent. An overheard inquiry pins the
// goal immediately; otherwise the posterior weighs each candidate goal by the
// likelihood of the other agent's observed actions under a level-0
// (fully-observed) policy.
inline GoalBelief infer_other_goal(const Apartment& apt, const ScenarioTrace& history,
                                   std::size_t prefix_len, AgentId observer,
                                   const std::vector<PhysicalGoal>& candidates, double beta,
                                   const SearchBudget& budget) {
    AgentId other = 1 - observer;
    prefix_len = std::min(prefix_len, history.steps.size());
    for (std::size_t t = 0; t < prefix_len; ++t) {
        const TraceStep& step = history.steps[t];
        if (step.agent != other || step.utterance.kind != Utterance::Kind::Inquiry) continue;
        std::vector<double> probs(candidates.size(), 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            for (ObjectId asked : step.utterance.asked) {
                if (candidates[i].object == asked) {
                    probs[i] = 1.0;
                    total += 1.0;
                    break;
                }
            }
        }
        if (total > 0.0) {
            for (double& p : probs) p /= total;
            GoalBelief gb;
            gb.candidates = candidates;
            gb.probs = probs;
            return gb;
        }
    }
    // Bayesian inverse planning over the observed actions.
    std::vector<double> log_post(candidates.size(), 0.0);
    WorldState s = history.s0;
    for (std::size_t t = 0; t < prefix_len; ++t) {
        const TraceStep& step = history.steps[t];
        if (step.agent == other) {
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                Belief level0;  // level-0 policies condition on the true state
                PolicyDistribution pi =
                    policy_for_goal(apt, level0, s, other, PlanGoal::from_physical(candidates[i]),
                                    beta, budget);
                double p = pi.probability(step.action);
                log_post[i] += std::log(std::max(p, 1e-12));
            }
        }
        s = apply(apt, s, step.agent, step.action);
    }
    double z = log_sum_exp(log_post);
    GoalBelief gb;
    gb.candidates = candidates;
    gb.probs.resize(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) gb.probs[i] = std::exp(log_post[i] - z);
    return gb;
}

}  // namespace mentis
