#include "das/retrieval.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "das/error.hpp"
#include "das/trajectory.hpp"

namespace das {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Index Index::build(std::vector<Chunk> chunks) {
  std::sort(chunks.begin(), chunks.end(),
            [](const Chunk& a, const Chunk& b) { return a.chunk_id < b.chunk_id; });
  for (std::size_t i = 1; i < chunks.size(); ++i) {
    if (chunks[i].chunk_id == chunks[i - 1].chunk_id) {
      fail(ErrorCode::DuplicateChunkId,
           "duplicate chunk_id '" + chunks[i].chunk_id + "'");
    }
  }
  Index idx;
  idx.chunks_ = std::move(chunks);
  idx.term_counts_.resize(idx.chunks_.size());
  idx.token_totals_.resize(idx.chunks_.size());
  for (std::size_t i = 0; i < idx.chunks_.size(); ++i) {
    auto tokens = tokenize(idx.chunks_[i].text);
    idx.token_totals_[i] = static_cast<int>(tokens.size());
    for (auto& t : tokens) {
      ++idx.term_counts_[i][t];
    }
    for (const auto& [term, count] : idx.term_counts_[i]) {
      (void)count;
      ++idx.doc_freq_[term];
    }
  }
  return idx;
}

std::vector<Chunk> Index::retrieve(const std::string& query, int k) const {
  if (k < 1) fail(ErrorCode::ConfigError, "retrieve: k must be >= 1");
  std::unordered_map<std::string, int> query_counts;
  int query_total = 0;
  for (auto& t : tokenize(query)) {
    ++query_counts[t];
    ++query_total;
  }
  if (query_total == 0) return {};

  const double n_docs = static_cast<double>(chunks_.size());
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < chunks_.size(); ++i) {
    if (token_totals_[i] == 0) continue;
    double s = 0.0;
    for (const auto& [term, qc] : query_counts) {
      auto it = term_counts_[i].find(term);
      if (it == term_counts_[i].end()) continue;
      auto df = doc_freq_.find(term);
      s += static_cast<double>(qc) * it->second * (n_docs / df->second);
    }
    if (s <= 0.0) continue;
    s /= static_cast<double>(query_total) * token_totals_[i];
    scored.emplace_back(s, i);
  }
  std::sort(scored.begin(), scored.end(),
            [this](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return chunks_[a.second].chunk_id < chunks_[b.second].chunk_id;
            });
  if (scored.size() > static_cast<std::size_t>(k)) scored.resize(k);
  std::vector<Chunk> out;
  out.reserve(scored.size());
  for (const auto& [score, i] : scored) {
    (void)score;
    out.push_back(chunks_[i]);
  }
  return out;
}

std::vector<Chunk> read_corpus(const std::string& path) {
  std::vector<Chunk> chunks;
  for (const auto& j : read_jsonl(path)) {
    Chunk c;
    if (!j.contains("chunk_id") || !j.contains("text")) {
      fail(ErrorCode::IoFailure, path + ": corpus record needs chunk_id and text");
    }
    c.chunk_id = j["chunk_id"].get<std::string>();
    c.text = j["text"].get<std::string>();
    if (j.contains("source_doc")) c.source_doc = j["source_doc"].get<std::string>();
    chunks.push_back(std::move(c));
  }
  return chunks;
}

void write_corpus(const std::string& path, const std::vector<Chunk>& chunks) {
  std::vector<nlohmann::json> records;
  records.reserve(chunks.size());
  for (const Chunk& c : chunks) {
    nlohmann::json j = {{"chunk_id", c.chunk_id}, {"text", c.text}};
    if (!c.source_doc.empty()) j["source_doc"] = c.source_doc;
    records.push_back(std::move(j));
  }
  write_jsonl(path, records);
}

}  // namespace das
