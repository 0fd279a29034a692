#pragma once

#include <string>

namespace das {

/// One retrievable unit of text. chunk_id is unique within a corpus;
/// source_doc is empty when the origin is unknown.
struct Chunk {
  std::string chunk_id;
  std::string text;
  std::string source_doc;

  bool operator==(const Chunk&) const = default;
};

}  // namespace das
