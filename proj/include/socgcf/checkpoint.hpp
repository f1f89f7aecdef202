#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "socgcf/model.hpp"

namespace socgcf {

// Embedding checkpoint: a "SOCGCF1" magic line, a "n m d" header line, then
// row-major float32 values, users first. Values round-trip at 32-bit
// precision.
void write_checkpoint(const EmbeddingState& state, std::ostream& out);
EmbeddingState read_checkpoint(std::istream& in);

void save_checkpoint(const EmbeddingState& state, const std::string& path);
EmbeddingState load_checkpoint(const std::string& path);

}  // namespace socgcf
