#include "socgcf/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace socgcf {

namespace {

constexpr const char* kMagic = "SOCGCF1";

void write_matrix(const DenseMatrix& m, std::ostream& out) {
  std::vector<std::uint32_t> bits(m.values.size());
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    bits[i] = std::bit_cast<std::uint32_t>(static_cast<float>(m.values[i]));
    if constexpr (std::endian::native == std::endian::big) {
      bits[i] = __builtin_bswap32(bits[i]);
    }
  }
  out.write(reinterpret_cast<const char*>(bits.data()),
            static_cast<std::streamsize>(bits.size() * sizeof(std::uint32_t)));
}

DenseMatrix read_matrix(Index n_rows, Index n_cols, std::istream& in) {
  DenseMatrix m(n_rows, n_cols);
  std::vector<std::uint32_t> bits(m.values.size());
  in.read(reinterpret_cast<char*>(bits.data()),
          static_cast<std::streamsize>(bits.size() * sizeof(std::uint32_t)));
  if (!in) throw std::runtime_error("checkpoint: truncated value block");
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if constexpr (std::endian::native == std::endian::big) {
      bits[i] = __builtin_bswap32(bits[i]);
    }
    m.values[i] = static_cast<double>(std::bit_cast<float>(bits[i]));
  }
  return m;
}

}  // namespace

void write_checkpoint(const EmbeddingState& state, std::ostream& out) {
  if (state.users.n_cols != state.items.n_cols) {
    throw std::invalid_argument("checkpoint: user/item embedding widths differ");
  }
  out << kMagic << '\n'
      << state.users.n_rows << ' ' << state.items.n_rows << ' ' << state.users.n_cols << '\n';
  write_matrix(state.users, out);
  write_matrix(state.items, out);
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

EmbeddingState read_checkpoint(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kMagic) {
    throw std::runtime_error("checkpoint: bad magic line");
  }
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("checkpoint: missing header line");
  std::istringstream hs(header);
  Index n = 0, m = 0, d = 0;
  if (!(hs >> n >> m >> d) || n < 1 || m < 1 || d < 1) {
    throw std::runtime_error("checkpoint: bad dimension header");
  }
  EmbeddingState state;
  state.users = read_matrix(n, d, in);
  state.items = read_matrix(m, d, in);
  return state;
}

void save_checkpoint(const EmbeddingState& state, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_checkpoint(state, f);
}

EmbeddingState load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return read_checkpoint(f);
}

}  // namespace socgcf
