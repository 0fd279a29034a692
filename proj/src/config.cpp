#include "das/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace das {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      fail(ErrorCode::ConfigError,
           std::string("config: unknown key '") + key + "' in " + where);
    }
  }
}

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j[key].get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigError,
           std::string("config: bad value for '") + key + "': " + e.what());
    }
  }
}

void parse_world_gen(const json& j, WorldGenParams& w, uint64_t top_seed) {
  check_keys(j,
             {"n_questions", "seed", "retrieval_success_prob", "answer_noise",
              "comparison_share", "difficulty_mix", "supporting_facts_mix",
              "internal_rate_comparison", "internal_rate_bridge",
              "fully_internal_share", "distractor_facts", "tokens_per_fact"},
             "world");
  get_if(j, "n_questions", w.n_questions);
  w.seed = top_seed;
  get_if(j, "seed", w.seed);
  get_if(j, "retrieval_success_prob", w.retrieval_success_prob);
  get_if(j, "answer_noise", w.answer_noise);
  get_if(j, "comparison_share", w.comparison_share);
  get_if(j, "difficulty_mix", w.difficulty_mix);
  if (w.difficulty_mix.size() != 3) {
    fail(ErrorCode::ConfigError,
         "config: difficulty_mix needs 3 entries (easy, medium, hard)");
  }
  if (j.contains("supporting_facts_mix")) {
    w.supporting_facts_mix.clear();
    for (const auto& [key, value] : j["supporting_facts_mix"].items()) {
      try {
        w.supporting_facts_mix.emplace_back(std::stoi(key),
                                            value.get<double>());
      } catch (const std::exception&) {
        fail(ErrorCode::ConfigError,
             "config: supporting_facts_mix maps fact counts to weights");
      }
    }
  }
  get_if(j, "internal_rate_comparison", w.internal_rate_comparison);
  get_if(j, "internal_rate_bridge", w.internal_rate_bridge);
  get_if(j, "fully_internal_share", w.fully_internal_share);
  get_if(j, "distractor_facts", w.distractor_facts);
  get_if(j, "tokens_per_fact", w.tokens_per_fact);
}

void parse_backend(const json& j, RunConfig& cfg) {
  check_keys(j, {"kind", "weights", "remote"}, "backend");
  std::string kind = "simulated";
  get_if(j, "kind", kind);
  if (kind == "simulated") {
    cfg.backend_kind = BackendKind::Simulated;
  } else if (kind == "remote") {
    cfg.backend_kind = BackendKind::Remote;
  } else {
    fail(ErrorCode::ConfigError, "config: backend.kind is simulated or remote");
  }
  if (j.contains("weights")) {
    auto w = j["weights"].get<std::vector<double>>();
    if (w.size() != 3) {
      fail(ErrorCode::ConfigError, "config: backend.weights needs 3 entries");
    }
    cfg.backend_weights.weights = {w[0], w[1], w[2]};
  }
  if (j.contains("remote")) {
    const json& r = j["remote"];
    check_keys(r,
               {"url", "temperature", "max_tokens", "request_logprobs",
                "answer_retries", "timeout_s"},
               "backend.remote");
    get_if(r, "url", cfg.remote.url);
    get_if(r, "temperature", cfg.remote.temperature);
    get_if(r, "max_tokens", cfg.remote.max_tokens);
    get_if(r, "request_logprobs", cfg.remote.request_logprobs);
    get_if(r, "answer_retries", cfg.remote.answer_retries);
    get_if(r, "timeout_s", cfg.remote.timeout_s);
  }
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigError, "config file not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, path + ": " + e.what());
  }

  check_keys(j,
             {"seed", "out_dir", "parallelism", "budget", "topk", "world_path",
              "corpus_path", "questions_path", "acc_mode", "world", "backend",
              "utility", "alignment", "sim_time", "report"},
             "the top level");

  RunConfig cfg;
  get_if(j, "seed", cfg.seed);
  get_if(j, "out_dir", cfg.out_dir);
  get_if(j, "parallelism", cfg.parallelism);
  get_if(j, "budget", cfg.budget);
  get_if(j, "topk", cfg.topk);
  get_if(j, "world_path", cfg.world_path);
  get_if(j, "corpus_path", cfg.corpus_path);
  get_if(j, "questions_path", cfg.questions_path);
  if (j.contains("acc_mode")) {
    std::string mode = j["acc_mode"].get<std::string>();
    if (mode == "em") {
      cfg.acc_mode = AccMode::ExactMatch;
    } else if (mode == "containment") {
      cfg.acc_mode = AccMode::Containment;
    } else {
      fail(ErrorCode::ConfigError, "config: acc_mode is em or containment");
    }
  }

  cfg.world_gen.seed = cfg.seed;
  if (j.contains("world")) parse_world_gen(j["world"], cfg.world_gen, cfg.seed);
  if (j.contains("backend")) parse_backend(j["backend"], cfg);

  if (j.contains("utility")) {
    const json& u = j["utility"];
    check_keys(u, {"r_correct", "r_incorrect", "c_search", "r_info"},
               "utility");
    get_if(u, "r_correct", cfg.utility.r_correct);
    get_if(u, "r_incorrect", cfg.utility.r_incorrect);
    get_if(u, "c_search", cfg.utility.c_search);
    get_if(u, "r_info", cfg.utility.r_info);
  }
  cfg.utility.validate();

  cfg.alignment.seed = cfg.seed;
  if (j.contains("alignment")) {
    const json& a = j["alignment"];
    check_keys(a, {"beta", "epochs", "learning_rate", "batch_size", "seed"},
               "alignment");
    get_if(a, "beta", cfg.alignment.beta);
    get_if(a, "epochs", cfg.alignment.epochs);
    get_if(a, "learning_rate", cfg.alignment.learning_rate);
    get_if(a, "batch_size", cfg.alignment.batch_size);
    get_if(a, "seed", cfg.alignment.seed);
  }

  if (j.contains("sim_time")) {
    const json& s = j["sim_time"];
    check_keys(s, {"per_step_s", "per_search_s"}, "sim_time");
    get_if(s, "per_step_s", cfg.sim_time.per_step_s);
    get_if(s, "per_search_s", cfg.sim_time.per_search_s);
  }

  if (j.contains("report")) {
    const json& r = j["report"];
    check_keys(r, {"max_rounds", "episodes_per_round", "variants"}, "report");
    get_if(r, "max_rounds", cfg.report.max_rounds);
    get_if(r, "episodes_per_round", cfg.report.episodes_per_round);
    if (r.contains("variants")) {
      for (const auto& v : r["variants"]) {
        check_keys(v, {"name", "report_path"}, "report.variants");
        ReportVariant rv;
        rv.name = v.at("name").get<std::string>();
        rv.report_path = v.at("report_path").get<std::string>();
        cfg.report.variants.push_back(std::move(rv));
      }
    }
  }

  if (cfg.budget < 0) fail(ErrorCode::ConfigError, "config: budget < 0");
  if (cfg.topk < 1) fail(ErrorCode::ConfigError, "config: topk < 1");
  if (cfg.parallelism < 0) {
    fail(ErrorCode::ConfigError, "config: parallelism < 0");
  }
  return cfg;
}

void apply_overrides(RunConfig& cfg, const ConfigOverrides& o) {
  if (o.seed) {
    // A seed override re-seeds the derived defaults too, unless the file
    // pinned them separately (it did not if they tracked the old top seed).
    bool world_followed = cfg.world_gen.seed == cfg.seed;
    bool align_followed = cfg.alignment.seed == cfg.seed;
    cfg.seed = *o.seed;
    if (world_followed) cfg.world_gen.seed = cfg.seed;
    if (align_followed) cfg.alignment.seed = cfg.seed;
  }
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.parallelism) cfg.parallelism = *o.parallelism;
  if (o.budget) cfg.budget = *o.budget;
  if (o.topk) cfg.topk = *o.topk;
  if (o.corpus_path) cfg.corpus_path = *o.corpus_path;
  if (cfg.parallelism < 0 || cfg.budget < 0 || cfg.topk < 1) {
    fail(ErrorCode::ConfigError, "flag overrides out of range");
  }
}

}  // namespace das
