#include "das/world.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "das/rng.hpp"

namespace das {

const WorldQuestion* WorldSpec::find(const std::string& question_id) const {
  for (const WorldQuestion& q : questions) {
    if (q.question_id == question_id) return &q;
  }
  return nullptr;
}

std::unordered_map<std::string, std::size_t> WorldSpec::index_by_id() const {
  std::unordered_map<std::string, std::size_t> m;
  m.reserve(questions.size());
  for (std::size_t i = 0; i < questions.size(); ++i) {
    m.emplace(questions[i].question_id, i);
  }
  return m;
}

void WorldSpec::validate() const {
  if (retrieval_success_prob < 0.0 || retrieval_success_prob > 1.0) {
    fail(ErrorCode::ConfigError, "world: retrieval_success_prob outside [0,1]");
  }
  if (answer_noise < 0.0 || answer_noise > 1.0) {
    fail(ErrorCode::ConfigError, "world: answer_noise outside [0,1]");
  }
  std::set<std::string> seen;
  for (const WorldQuestion& q : questions) {
    if (q.question_id.empty()) {
      fail(ErrorCode::ConfigError, "world: empty question_id");
    }
    if (!seen.insert(q.question_id).second) {
      fail(ErrorCode::ConfigError,
           "world: duplicate question_id '" + q.question_id + "'");
    }
    if (q.required_facts.empty()) {
      fail(ErrorCode::ConfigError,
           q.question_id + ": required_facts is empty");
    }
    if (q.gold_answer.empty()) {
      fail(ErrorCode::ConfigError, q.question_id + ": empty gold_answer");
    }
    std::set<std::string> required(q.required_facts.begin(),
                                   q.required_facts.end());
    if (required.size() != q.required_facts.size()) {
      fail(ErrorCode::ConfigError,
           q.question_id + ": duplicate required fact");
    }
    for (const std::string& f : q.internal_facts) {
      if (!required.count(f)) {
        fail(ErrorCode::ConfigError,
             q.question_id + ": internal fact '" + f + "' not required");
      }
    }
    for (const std::string& f : q.required_facts) {
      if (!fact_texts.count(f)) {
        fail(ErrorCode::ConfigError,
             q.question_id + ": no text for fact '" + f + "'");
      }
    }
  }
}

std::vector<int> quota_counts(int n, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) fail(ErrorCode::ConfigError, "quota weights sum to zero");
  std::vector<int> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double exact = n * weights[i] / total;
    counts[i] = static_cast<int>(exact);
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int r = 0; r < n - assigned; ++r) {
    ++counts[remainders[r % remainders.size()].second];
  }
  return counts;
}

namespace {

template <class T>
std::vector<T> quota_labels(int n, const std::vector<T>& values,
                            const std::vector<double>& weights, Rng& rng) {
  std::vector<int> counts = quota_counts(n, weights);
  std::vector<T> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (int c = 0; c < counts[i]; ++c) labels.push_back(values[i]);
  }
  rng.shuffle(labels);
  return labels;
}

std::string fresh_fact_text(int tokens_per_fact, int& token_counter) {
  std::string text;
  for (int t = 0; t < tokens_per_fact; ++t) {
    if (t) text += " ";
    text += "w" + std::to_string(token_counter++);
  }
  return text;
}

}  // namespace

WorldSpec generate_world(const WorldGenParams& params) {
  if (params.n_questions < 1) {
    fail(ErrorCode::ConfigError, "genworld: n_questions must be >= 1");
  }
  const int n = params.n_questions;
  Rng rng = derive_stream(params.seed, "world.gen");

  std::vector<Category> categories = quota_labels<Category>(
      n, {Category::Comparison, Category::Bridge},
      {params.comparison_share, 1.0 - params.comparison_share}, rng);
  std::vector<Difficulty> difficulties = quota_labels<Difficulty>(
      n, {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard},
      params.difficulty_mix, rng);

  std::vector<int> fact_values;
  std::vector<double> fact_weights;
  for (const auto& [count, weight] : params.supporting_facts_mix) {
    if (count < 2) fail(ErrorCode::ConfigError, "supporting_facts_mix: counts start at 2");
    fact_values.push_back(count);
    fact_weights.push_back(weight);
  }
  std::vector<int> fact_counts = quota_labels<int>(n, fact_values, fact_weights, rng);
  std::vector<int> internal_flags = quota_labels<int>(
      n, {1, 0}, {params.fully_internal_share, 1.0 - params.fully_internal_share},
      rng);

  WorldSpec world;
  world.retrieval_success_prob = params.retrieval_success_prob;
  world.answer_noise = params.answer_noise;
  world.seed = params.seed;

  int token_counter = 0;
  for (int i = 0; i < n; ++i) {
    WorldQuestion q;
    q.question_id = "q" + std::to_string(i);
    q.gold_answer = "entity " + std::to_string(i);
    q.meta.category = categories[i];
    q.meta.difficulty = difficulties[i];
    q.meta.n_supporting_facts = fact_counts[i];

    for (int f = 0; f < fact_counts[i]; ++f) {
      std::string fid = q.question_id + "_f" + std::to_string(f);
      world.fact_texts[fid] =
          fresh_fact_text(params.tokens_per_fact, token_counter);
      q.required_facts.push_back(std::move(fid));
    }

    if (internal_flags[i]) {
      q.internal_facts = q.required_facts;
    } else {
      double rate = categories[i] == Category::Comparison
                        ? params.internal_rate_comparison
                        : params.internal_rate_bridge;
      for (const std::string& fid : q.required_facts) {
        if (rng.bernoulli(rate)) q.internal_facts.push_back(fid);
      }
      // Keep the fully-internal quota meaningful: a question outside it must
      // have at least one gap to search for.
      if (q.internal_facts.size() == q.required_facts.size()) {
        q.internal_facts.pop_back();
      }
    }

    std::string joined;
    for (std::size_t f = 0; f < q.required_facts.size(); ++f) {
      if (f) joined += " and ";
      joined += q.required_facts[f];
    }
    q.question = categories[i] == Category::Comparison
                     ? "Which entity do " + joined + " both describe?"
                     : "Which entity is reached by chaining " + joined + "?";
    world.questions.push_back(std::move(q));
  }

  for (int d = 0; d < params.distractor_facts; ++d) {
    world.fact_texts["dx_f" + std::to_string(d)] =
        fresh_fact_text(params.tokens_per_fact, token_counter);
  }

  world.validate();
  return world;
}

std::vector<Chunk> world_corpus(const WorldSpec& world) {
  std::vector<Chunk> chunks;
  chunks.reserve(world.fact_texts.size());
  for (const auto& [fid, text] : world.fact_texts) {
    chunks.push_back(Chunk{fid, text, "synthetic"});
  }
  return chunks;
}

std::set<std::string> facts_in_state(const WorldSpec& world,
                                     const WorldQuestion& q,
                                     const DecisionState& state) {
  std::set<std::string> held(q.internal_facts.begin(), q.internal_facts.end());
  for (const Step& s : state.steps) {
    for (const Chunk& c : s.evidence) {
      if (world.fact_texts.count(c.chunk_id)) held.insert(c.chunk_id);
    }
  }
  return held;
}

double facts_held_fraction(const WorldSpec& world, const WorldQuestion& q,
                           const DecisionState& state) {
  if (q.required_facts.empty()) return 1.0;
  auto held = facts_in_state(world, q, state);
  std::size_t have = 0;
  for (const std::string& f : q.required_facts) {
    if (held.count(f)) ++have;
  }
  return static_cast<double>(have) / static_cast<double>(q.required_facts.size());
}

KnowledgeLabel latent_knowledge(const WorldSpec& world,
                                const DecisionState& state) {
  const WorldQuestion* q = world.find(state.question_id);
  if (!q) {
    fail(ErrorCode::UnknownQuestion,
         "question '" + state.question_id + "' not in world");
  }
  auto held = facts_in_state(world, *q, state);
  for (const std::string& f : q->required_facts) {
    if (!held.count(f)) return KnowledgeLabel::Insufficient;
  }
  return KnowledgeLabel::Sufficient;
}

void write_world(const std::string& path, const WorldSpec& world) {
  nlohmann::json j;
  j["retrieval_success_prob"] = world.retrieval_success_prob;
  j["answer_noise"] = world.answer_noise;
  j["seed"] = world.seed;
  j["fact_texts"] = world.fact_texts;
  nlohmann::json qs = nlohmann::json::array();
  for (const WorldQuestion& q : world.questions) {
    qs.push_back({{"question_id", q.question_id},
                  {"question", q.question},
                  {"required_facts", q.required_facts},
                  {"internal_facts", q.internal_facts},
                  {"gold_answer", q.gold_answer},
                  {"meta", meta_to_json(q.meta)}});
  }
  j["questions"] = std::move(qs);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorCode::IoFailure, "write failed: " + path);
}

WorldSpec read_world(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoFailure, path + ": " + e.what());
  }
  WorldSpec world;
  try {
    world.retrieval_success_prob = j.at("retrieval_success_prob").get<double>();
    world.answer_noise = j.at("answer_noise").get<double>();
    world.seed = j.at("seed").get<uint64_t>();
    world.fact_texts = j.at("fact_texts").get<std::map<std::string, std::string>>();
    for (const auto& qj : j.at("questions")) {
      WorldQuestion q;
      q.question_id = qj.at("question_id").get<std::string>();
      q.question = qj.at("question").get<std::string>();
      q.required_facts = qj.at("required_facts").get<std::vector<std::string>>();
      q.internal_facts = qj.at("internal_facts").get<std::vector<std::string>>();
      q.gold_answer = qj.at("gold_answer").get<std::string>();
      q.meta = meta_from_json(qj.at("meta"));
      world.questions.push_back(std::move(q));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoFailure, path + ": " + e.what());
  }
  world.validate();
  return world;
}

}  // namespace das
