#pragma once

// Direct preference optimization over the toy decision policy. For a pair
// (x, y_c, y_r) the loss is
//
//   L = -log sigmoid( beta * [ (log P_th(y_c|x) - log P_ref(y_c|x))
//                            - (log P_th(y_r|x) - log P_ref(y_r|x)) ] )
//
// where a continuation's log-probability is the sum of per-decision
// Search/Answer log-probabilities as the state advances through the
// simulated world (search evidence replayed deterministically through the
// index). The gradient is analytic; a finite-difference oracle pins it in
// the tests.

#include <array>
#include <cstdint>
#include <vector>

#include "das/policy.hpp"
#include "das/preference.hpp"

namespace das {

class SequenceScorer {
 public:
  /// topk and t_max must match the run that produced the pairs, or replayed
  /// evidence diverges from what the factual episodes saw.
  SequenceScorer(const WorldSpec& world, const Index& index, int topk,
                 int t_max);

  /// log P(y | x) under weights w. Throws InvalidContinuation for an empty
  /// y or an Answer anywhere but last; UnknownQuestion for a foreign state.
  double seq_logprob(const PolicyParams& w, const DecisionState& x,
                     const std::vector<Action>& y) const;

  /// d/dw of the above.
  std::array<double, 3> seq_logprob_grad(const PolicyParams& w,
                                         const DecisionState& x,
                                         const std::vector<Action>& y) const;

 private:
  template <class Visit>
  void walk(const DecisionState& x, const std::vector<Action>& y,
            Visit&& visit) const;

  const WorldSpec* world_;
  std::unordered_map<std::string, std::size_t> by_id_;
  const Index* index_;
  int topk_;
  int t_max_;
};

struct AlignmentConfig {
  double beta = 0.3;
  int epochs = 3;
  double learning_rate = 0.1;
  int batch_size = 32;
  uint64_t seed = 0;
};

/// Mean DPO loss over a batch. Throws EmptyBatch on an empty one.
double dpo_loss(const SequenceScorer& scorer, const PolicyParams& params,
                const PolicyParams& ref,
                const std::vector<PreferencePair>& batch, double beta,
                int threads = 1);

/// Mean gradient of the batch loss with respect to params.
std::array<double, 3> dpo_grad(const SequenceScorer& scorer,
                               const PolicyParams& params,
                               const PolicyParams& ref,
                               const std::vector<PreferencePair>& batch,
                               double beta, int threads = 1);

struct AlignResult {
  PolicyParams params;
  std::vector<double> epoch_loss;  // full-dataset loss after each epoch
};

/// Minibatch gradient descent from init against a frozen ref. Batch order
/// reshuffles each epoch from the config seed; non-finite loss or weights
/// abort with Divergence.
AlignResult align(const SequenceScorer& scorer, const PolicyParams& init,
                  const PolicyParams& ref,
                  const std::vector<PreferencePair>& dataset,
                  const AlignmentConfig& cfg, int threads = 1);

// ---- artifacts ----

void write_loss_trace(const std::string& path,
                      const std::vector<double>& epoch_loss);
void write_aligned_params(const std::string& path, const PolicyParams& params,
                          const AlignmentConfig& cfg);
PolicyParams read_aligned_params(const std::string& path);

}  // namespace das
