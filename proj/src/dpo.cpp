#include "das/dpo.hpp"

#include <cmath>
#include <fstream>

#include "das/mathutil.hpp"
#include "das/parallel.hpp"

namespace das {

SequenceScorer::SequenceScorer(const WorldSpec& world, const Index& index,
                               int topk, int t_max)
    : world_(&world),
      by_id_(world.index_by_id()),
      index_(&index),
      topk_(topk),
      t_max_(t_max) {
  if (topk_ < 1) fail(ErrorCode::ConfigError, "scorer: topk < 1");
  if (t_max_ < 1) fail(ErrorCode::ConfigError, "scorer: t_max < 1");
}

/// Advance through y from x, calling visit(features, action_kind) at each
/// decision. Search evidence is replayed through the index so later
/// decisions see what the agent would have seen.
template <class Visit>
void SequenceScorer::walk(const DecisionState& x, const std::vector<Action>& y,
                          Visit&& visit) const {
  if (y.empty()) {
    fail(ErrorCode::InvalidContinuation, "empty continuation");
  }
  auto qit = by_id_.find(x.question_id);
  if (qit == by_id_.end()) {
    fail(ErrorCode::UnknownQuestion,
         "question '" + x.question_id + "' not in world");
  }
  const WorldQuestion& q = world_->questions[qit->second];

  DecisionState state = x;
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j].kind == ActionKind::Answer && j + 1 != y.size()) {
      fail(ErrorCode::InvalidContinuation,
           x.question_id + ": Answer before the end of the continuation");
    }
    double frac = facts_held_fraction(*world_, q, state);
    double t_norm = static_cast<double>(state.steps.size()) /
                    static_cast<double>(t_max_);
    visit(std::array<double, 3>{frac, t_norm, 1.0}, y[j].kind);

    Step step;
    step.index = static_cast<int>(state.steps.size());
    step.action = y[j];
    if (y[j].kind == ActionKind::Search) {
      step.evidence = index_->retrieve(y[j].text, topk_);
    }
    state.steps.push_back(std::move(step));
  }
}

double SequenceScorer::seq_logprob(const PolicyParams& w,
                                   const DecisionState& x,
                                   const std::vector<Action>& y) const {
  double total = 0.0;
  walk(x, y, [&](const std::array<double, 3>& phi, ActionKind kind) {
    double z = w.dot(phi);
    // log sigmoid(z) = -softplus(-z); log(1 - sigmoid(z)) = -softplus(z)
    total -= kind == ActionKind::Answer ? softplus(-z) : softplus(z);
  });
  return total;
}

std::array<double, 3> SequenceScorer::seq_logprob_grad(
    const PolicyParams& w, const DecisionState& x,
    const std::vector<Action>& y) const {
  std::array<double, 3> g{0.0, 0.0, 0.0};
  walk(x, y, [&](const std::array<double, 3>& phi, ActionKind kind) {
    double z = w.dot(phi);
    double coeff = (kind == ActionKind::Answer ? 1.0 : 0.0) - logistic(z);
    for (int i = 0; i < 3; ++i) g[i] += coeff * phi[i];
  });
  return g;
}

namespace {

double pair_logit(const SequenceScorer& scorer, const PolicyParams& params,
                  const PolicyParams& ref, const PreferencePair& p,
                  double beta) {
  double chosen_margin = scorer.seq_logprob(params, p.state, p.chosen) -
                         scorer.seq_logprob(ref, p.state, p.chosen);
  double rejected_margin = scorer.seq_logprob(params, p.state, p.rejected) -
                           scorer.seq_logprob(ref, p.state, p.rejected);
  return beta * (chosen_margin - rejected_margin);
}

}  // namespace

double dpo_loss(const SequenceScorer& scorer, const PolicyParams& params,
                const PolicyParams& ref,
                const std::vector<PreferencePair>& batch, double beta,
                int threads) {
  if (batch.empty()) fail(ErrorCode::EmptyBatch, "dpo_loss over zero pairs");
  std::vector<double> losses(batch.size());
  par::for_each_index(batch.size(), threads, [&](std::size_t i) {
    losses[i] = softplus(-pair_logit(scorer, params, ref, batch[i], beta));
  });
  double sum = 0.0;
  for (double l : losses) sum += l;  // fixed order, independent of threads
  return sum / static_cast<double>(batch.size());
}

std::array<double, 3> dpo_grad(const SequenceScorer& scorer,
                               const PolicyParams& params,
                               const PolicyParams& ref,
                               const std::vector<PreferencePair>& batch,
                               double beta, int threads) {
  if (batch.empty()) fail(ErrorCode::EmptyBatch, "dpo_grad over zero pairs");
  std::vector<std::array<double, 3>> grads(batch.size());
  par::for_each_index(batch.size(), threads, [&](std::size_t i) {
    const PreferencePair& p = batch[i];
    double u = pair_logit(scorer, params, ref, p, beta);
    auto gc = scorer.seq_logprob_grad(params, p.state, p.chosen);
    auto gr = scorer.seq_logprob_grad(params, p.state, p.rejected);
    double coeff = -logistic(-u) * beta;  // d/du of softplus(-u), chained
    for (int k = 0; k < 3; ++k) grads[i][k] = coeff * (gc[k] - gr[k]);
  });
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  for (const auto& g : grads) {
    for (int k = 0; k < 3; ++k) mean[k] += g[k];
  }
  for (int k = 0; k < 3; ++k) mean[k] /= static_cast<double>(batch.size());
  return mean;
}

AlignResult align(const SequenceScorer& scorer, const PolicyParams& init,
                  const PolicyParams& ref,
                  const std::vector<PreferencePair>& dataset,
                  const AlignmentConfig& cfg, int threads) {
  if (dataset.empty()) fail(ErrorCode::EmptyBatch, "align over zero pairs");
  if (cfg.epochs < 1) fail(ErrorCode::ConfigError, "align: epochs < 1");
  if (cfg.batch_size < 1) fail(ErrorCode::ConfigError, "align: batch_size < 1");
  if (!(cfg.learning_rate > 0.0)) {
    fail(ErrorCode::ConfigError, "align: learning_rate must be > 0");
  }
  if (!(cfg.beta > 0.0)) fail(ErrorCode::ConfigError, "align: beta must be > 0");

  AlignResult result;
  result.params = init;
  Rng shuffle_rng = derive_stream(cfg.seed, "align.shuffle");

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(order.size(),
                                 begin + static_cast<std::size_t>(cfg.batch_size));
      std::vector<PreferencePair> batch;
      batch.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) batch.push_back(dataset[order[i]]);
      auto g = dpo_grad(scorer, result.params, ref, batch, cfg.beta, threads);
      for (int k = 0; k < 3; ++k) {
        result.params.weights[k] -= cfg.learning_rate * g[k];
        if (!std::isfinite(result.params.weights[k])) {
          fail(ErrorCode::Divergence,
               "weights went non-finite in epoch " + std::to_string(epoch));
        }
      }
    }
    double epoch_loss =
        dpo_loss(scorer, result.params, ref, dataset, cfg.beta, threads);
    if (!std::isfinite(epoch_loss)) {
      fail(ErrorCode::Divergence,
           "loss went non-finite in epoch " + std::to_string(epoch));
    }
    result.epoch_loss.push_back(epoch_loss);
  }
  return result;
}

void write_loss_trace(const std::string& path,
                      const std::vector<double>& epoch_loss) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open for writing: " + path);
  out << "epoch,mean_loss\n";
  for (std::size_t i = 0; i < epoch_loss.size(); ++i) {
    out << (i + 1) << "," << nlohmann::json(epoch_loss[i]).dump() << "\n";
  }
  if (!out) fail(ErrorCode::IoFailure, "write failed: " + path);
}

void write_aligned_params(const std::string& path, const PolicyParams& params,
                          const AlignmentConfig& cfg) {
  nlohmann::json j;
  j["weights"] = params.weights;
  j["feature_names"] = kFeatureNames;
  j["config"] = {{"beta", cfg.beta},
                 {"epochs", cfg.epochs},
                 {"learning_rate", cfg.learning_rate},
                 {"batch_size", cfg.batch_size},
                 {"seed", cfg.seed}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorCode::IoFailure, "write failed: " + path);
}

PolicyParams read_aligned_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
    PolicyParams p;
    auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != 3) {
      fail(ErrorCode::IoFailure, path + ": expected 3 weights");
    }
    p.weights = {w[0], w[1], w[2]};
    return p;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoFailure, path + ": " + e.what());
  }
}

}  // namespace das
