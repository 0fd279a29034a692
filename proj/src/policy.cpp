#include "das/policy.hpp"

#include <chrono>

#include "das/mathutil.hpp"

namespace das {

double DecisionDistribution::entropy_nats() const {
  return binary_entropy_nats(p_answer);
}

SimulatedPolicy::SimulatedPolicy(const WorldSpec& world,
                                 SimulatedPolicyConfig cfg)
    : world_(&world), by_id_(world.index_by_id()), cfg_(cfg) {
  if (cfg_.t_max < 1) {
    fail(ErrorCode::ConfigError, "simulated policy: t_max must be >= 1");
  }
}

const WorldQuestion& SimulatedPolicy::question_for(
    const DecisionState& state) const {
  auto it = by_id_.find(state.question_id);
  if (it == by_id_.end()) {
    fail(ErrorCode::UnknownQuestion,
         "question '" + state.question_id + "' not in world");
  }
  return world_->questions[it->second];
}

std::array<double, 3> SimulatedPolicy::features(
    const DecisionState& state) const {
  const WorldQuestion& q = question_for(state);
  double frac = facts_held_fraction(*world_, q, state);
  double t_norm =
      static_cast<double>(state.steps.size()) / static_cast<double>(cfg_.t_max);
  return {frac, t_norm, 1.0};
}

DecisionDistribution SimulatedPolicy::decision_distribution(
    const DecisionState& state) const {
  double p_answer = logistic(cfg_.params.dot(features(state)));
  return DecisionDistribution{1.0 - p_answer, p_answer};
}

std::string SimulatedPolicy::oracle_answer(const WorldQuestion& q,
                                           const DecisionState& state,
                                           Rng& rng) const {
  bool sufficient =
      latent_knowledge(*world_, state) == KnowledgeLabel::Sufficient;
  if (world_->answer_noise > 0.0 && rng.bernoulli(world_->answer_noise)) {
    sufficient = !sufficient;
  }
  return sufficient ? q.gold_answer : std::string("unknown");
}

std::string SimulatedPolicy::emit_query(const WorldQuestion& q,
                                        const DecisionState& state,
                                        Rng& rng) const {
  auto held = facts_in_state(*world_, q, state);
  const std::string* target = nullptr;
  for (const std::string& f : q.required_facts) {
    if (!held.count(f)) {
      target = &f;
      break;
    }
  }
  if (!target) {
    // Nothing is missing; a redundant search just re-queries a known fact.
    return world_->fact_texts.at(q.required_facts.front());
  }
  bool hit = world_->retrieval_success_prob >= 1.0 ||
             rng.bernoulli(world_->retrieval_success_prob);
  if (hit) return world_->fact_texts.at(*target);
  // Token-disjoint from every chunk by construction, so retrieval finds
  // nothing and the gap stays open.
  return "noresult " + state.question_id + " s" +
         std::to_string(state.steps.size());
}

ActionChoice SimulatedPolicy::next_action(const DecisionState& state,
                                          Rng& rng) {
  const WorldQuestion& q = question_for(state);
  DecisionDistribution dist = decision_distribution(state);
  ActionChoice choice;
  choice.decision_entropy = dist.entropy_nats();
  if (rng.bernoulli(dist.p_answer)) {
    choice.action = Action::answer(oracle_answer(q, state, rng));
  } else {
    choice.action = Action::search(emit_query(q, state, rng));
  }
  return choice;
}

std::string SimulatedPolicy::forced_answer(const DecisionState& state,
                                           Rng& rng) {
  return oracle_answer(question_for(state), state, rng);
}

Action SimulatedPolicy::forced_search(const DecisionState& state, Rng& rng) {
  return Action::search(emit_query(question_for(state), state, rng));
}

std::string SimulatedPolicy::recall_probe(const DecisionState& state,
                                          const std::string& query, Rng& rng) {
  (void)query;
  (void)rng;
  // Recall is about parametric knowledge plus what the context already
  // shows, which in the simulator is exactly the latent state.
  const WorldQuestion& q = question_for(state);
  return latent_knowledge(*world_, state) == KnowledgeLabel::Sufficient
             ? q.gold_answer
             : std::string("unknown");
}

std::string SimulatedPolicy::meta_probe(const DecisionState& state,
                                        const std::string& query, Rng& rng) {
  (void)query;
  (void)rng;
  return latent(state) == KnowledgeLabel::Sufficient ? "Yes" : "No";
}

std::optional<DecisionDistribution> SimulatedPolicy::peek_distribution(
    const DecisionState& state) {
  return decision_distribution(state);
}

KnowledgeLabel SimulatedPolicy::latent(const DecisionState& state) const {
  return latent_knowledge(*world_, state);
}

QuestionSpec question_spec(const WorldQuestion& q) {
  return QuestionSpec{q.question_id, q.question, {q.gold_answer}, q.meta};
}

int continue_episode(Policy& policy, const Index& index, DecisionState& state,
                     int searches_used, const RolloutConfig& cfg, Rng& rng) {
  int added = 0;
  while (true) {
    bool budget_exhausted = searches_used >= cfg.budget;
    Step step;
    step.index = static_cast<int>(state.steps.size());
    if (budget_exhausted) {
      // Out of searches: the episode must resolve, so an answer is forced.
      // The entropy recorded is still the policy's own distribution there.
      if (auto dist = policy.peek_distribution(state)) {
        step.decision_entropy = dist->entropy_nats();
      }
      step.action = Action::answer(policy.forced_answer(state, rng));
    } else {
      ActionChoice choice = policy.next_action(state, rng);
      step.think = std::move(choice.think);
      step.action = std::move(choice.action);
      step.decision_entropy = choice.decision_entropy;
    }
    bool is_answer = step.action.kind == ActionKind::Answer;
    if (!is_answer) {
      step.evidence = index.retrieve(step.action.text, cfg.topk);
      ++searches_used;
    }
    state.steps.push_back(std::move(step));
    ++added;
    if (is_answer) return added;
  }
}

Trajectory rollout(Policy& policy, const Index& index, const QuestionSpec& q,
                   const RolloutConfig& cfg) {
  Rng rng = derive_stream(cfg.seed, q.question_id, cfg.stream_salt, "rollout");
  auto started = std::chrono::steady_clock::now();

  DecisionState state;
  state.question_id = q.question_id;
  state.question = q.question;
  continue_episode(policy, index, state, 0, cfg, rng);

  Trajectory t;
  t.question_id = q.question_id;
  t.question = q.question;
  t.gold_answers = q.gold_answers;
  t.meta = q.meta;
  t.steps = std::move(state.steps);
  if (cfg.measure_wall_clock) {
    t.wall_time_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - started)
                        .count();
  } else {
    int searches = t.search_count();
    t.wall_time_s = cfg.sim_time.per_step_s * static_cast<double>(t.steps.size()) +
                    cfg.sim_time.per_search_s * static_cast<double>(searches);
  }
  return t;
}

}  // namespace das
