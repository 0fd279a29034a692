// Serial vs OpenMP timing over the three batch kernels: cohort rollouts,
// decision-point diagnosis, and DPO epochs. The serial path (threads = 1)
// is the reference implementation the parallel path must reproduce
// byte-identically; this tool reports what the parallelism buys on top.

#include <chrono>
#include <cstdio>
#include <vector>

#include "das/dpo.hpp"
#include "das/parallel.hpp"
#include "das/pipeline.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Workload {
  das::WorldSpec world;
  das::Index index;
  std::unique_ptr<das::SimulatedPolicy> policy;
  std::vector<das::QuestionSpec> questions;
  std::vector<das::Trajectory> trajectories;
  std::vector<das::PreferencePair> pairs;
};

Workload make_workload(int n_questions) {
  Workload w;
  das::WorldGenParams gen;
  gen.n_questions = n_questions;
  gen.seed = 99;
  gen.retrieval_success_prob = 0.8;
  w.world = das::generate_world(gen);
  w.index = das::Index::build(das::world_corpus(w.world));

  das::SimulatedPolicyConfig pc;
  pc.params.weights = {2.5, 1.0, -1.5};
  pc.t_max = 6;
  w.policy = std::make_unique<das::SimulatedPolicy>(w.world, pc);
  for (const auto& q : w.world.questions) {
    w.questions.push_back(das::question_spec(q));
  }
  return w;
}

das::RolloutConfig rollout_config() {
  das::RolloutConfig rc;
  rc.budget = 6;
  rc.topk = 3;
  rc.seed = 99;
  return rc;
}

double time_rollouts(Workload& w, int threads) {
  auto rc = rollout_config();
  auto start = Clock::now();
  w.trajectories = das::par::map_indexed<das::Trajectory>(
      w.questions.size(), threads, [&](std::size_t i) {
        return das::rollout(*w.policy, w.index, w.questions[i], rc);
      });
  return seconds_since(start);
}

double time_diagnose(Workload& w, int threads,
                     std::vector<das::DiagnosisRecord>& records_out) {
  das::EngineConfig ec;
  ec.budget = 6;
  ec.topk = 3;
  ec.seed = 99;
  das::InterventionEngine engine(*w.policy, w.index, ec);
  auto start = Clock::now();
  auto diags = engine.diagnose_all(w.trajectories, threads);
  double elapsed = seconds_since(start);
  records_out.clear();
  for (const auto& d : diags) records_out.push_back(das::to_record(d));
  return elapsed;
}

double time_align_epoch(Workload& w, int threads) {
  if (w.pairs.empty()) return 0.0;
  das::SequenceScorer scorer(w.world, w.index, 3, 6);
  das::PolicyParams ref;
  ref.weights = {2.5, 1.0, -1.5};
  das::AlignmentConfig ac;
  ac.epochs = 1;
  ac.seed = 99;
  auto start = Clock::now();
  das::align(scorer, ref, ref, w.pairs, ac, threads);
  return seconds_since(start);
}

}  // namespace

int main() {
  const int n_questions = 512;
  Workload w = make_workload(n_questions);

  int max_threads = das::par::resolve_threads(0);
  std::printf("bench: %d questions, serial vs %d threads\n", n_questions,
              max_threads);
  std::printf("%-22s %12s %12s %9s\n", "kernel", "serial_s", "parallel_s",
              "speedup");

  std::vector<das::DiagnosisRecord> records;
  double serial, parallel;

  serial = time_rollouts(w, 1);
  parallel = time_rollouts(w, max_threads);
  std::printf("%-22s %12.4f %12.4f %8.2fx\n", "rollout_cohort", serial,
              parallel, serial / parallel);

  serial = time_diagnose(w, 1, records);
  parallel = time_diagnose(w, max_threads, records);
  std::printf("%-22s %12.4f %12.4f %8.2fx\n", "diagnose_all", serial, parallel,
              serial / parallel);

  w.pairs = das::build_pairs(records, w.trajectories);
  std::printf("(%zu preference pairs)\n", w.pairs.size());
  serial = time_align_epoch(w, 1);
  parallel = time_align_epoch(w, max_threads);
  std::printf("%-22s %12.4f %12.4f %8.2fx\n", "dpo_epoch", serial, parallel,
              serial / parallel);
  return 0;
}
