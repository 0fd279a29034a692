#pragma once

// In-memory lexical index over a chunk corpus.
//
// Scoring is term-frequency overlap weighted by inverse document frequency
// and normalized by both token counts:
//
//   score(q, c) = sum_t tf_q(t) * tf_c(t) * (N / df(t)) / (|q| * |c|)
//
// The plain N/df idf (no log, no +1 smoothing) is deliberate: it factors out
// of score ratios, so adding a chunk that shares no token with the query
// rescales every matching chunk's score by the same (N+1)/N factor and the
// ranking of previous results is preserved exactly. Log-idf schemes do not
// have that property. Ties break by ascending chunk_id.

#include <string>
#include <unordered_map>
#include <vector>

#include "das/chunk.hpp"

namespace das {

/// Lowercased maximal alphanumeric runs; everything else is a separator.
std::vector<std::string> tokenize(const std::string& text);

class Index {
 public:
  /// Build from a corpus. Throws DuplicateChunkId on repeated ids.
  static Index build(std::vector<Chunk> chunks);

  /// Top-k chunks with positive score, ranked by (score desc, chunk_id asc).
  /// Fewer than k results when fewer chunks match; empty query gives no
  /// results. k must be >= 1.
  std::vector<Chunk> retrieve(const std::string& query, int k) const;

  std::size_t size() const { return chunks_.size(); }
  const std::vector<Chunk>& chunks() const { return chunks_; }

 private:
  std::vector<Chunk> chunks_;  // sorted by chunk_id
  std::vector<std::unordered_map<std::string, int>> term_counts_;
  std::vector<int> token_totals_;
  std::unordered_map<std::string, int> doc_freq_;
};

// ---- corpus files: JSONL of {chunk_id, text, source_doc} ----

std::vector<Chunk> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<Chunk>& chunks);

}  // namespace das
