#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "socgcf/sparse.hpp"

namespace socgcf {

// One raw interaction record. Ratings in explicit datasets are parsed and
// dropped; the model treats all interactions as implicit.
struct RawInteraction {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;
};

enum class InteractionFormat { canonical, adjacency };

struct ParseResult {
  std::vector<RawInteraction> records;
  std::vector<std::pair<int, std::string>> malformed;  // (line number, reason)
};

// Interaction remapped to contiguous indices, pre-split.
struct IndexedInteraction {
  Index user = 0;
  Index item = 0;
  std::int64_t timestamp = 0;
};

// Remapped user/item universe with train/test splits and social edges.
// Index assignment is lexicographic over original IDs, so `user_ids` and
// `item_ids` double as the original-ID -> index maps.
struct Dataset {
  Index n_users = 0;
  Index n_items = 0;
  std::vector<std::pair<Index, Index>> train;  // sorted by (user, item)
  std::vector<std::pair<Index, Index>> test;   // sorted by (user, item)
  std::vector<std::pair<Index, Index>> social_edges;  // undirected, u < v, sorted
  std::vector<std::string> user_ids;  // index -> original id
  std::vector<std::string> item_ids;
};

struct DatasetStats {
  Index n_users = 0;
  Index n_items = 0;
  Index n_edges = 0;   // |train| + |test|
  Index n_social = 0;  // directed count, 2x the undirected pairs
};

struct PreprocessConfig {
  Index k_core = 10;
  double ratio = 0.0;  // items-per-user target; q = round(n_items / ratio)
  double test_fraction = 0.2;
};

// canonical: "user item timestamp [rating]" per line.
// adjacency: "user item1 item2 ..." per line, timestamps = position order.
ParseResult parse_interactions(std::istream& in, InteractionFormat format);

// Loads and parses a file; malformed lines are reported to stderr with their
// line numbers. Throws when the file is unreadable or holds no valid record.
std::vector<RawInteraction> load_interactions(const std::string& path, InteractionFormat format);

// Social edge file: one "u v" pair per line (original IDs).
std::vector<std::pair<std::string, std::string>> load_social_edges(const std::string& path);

// Collapses duplicate (user, item) pairs, keeping the earliest timestamp.
std::vector<RawInteraction> dedup_interactions(std::vector<RawInteraction> raw);

// Single-pass item filter: keeps exactly the records whose item has at least
// k interactions in `raw`. Throws when nothing survives.
std::vector<RawInteraction> kcore_filter_items(const std::vector<RawInteraction>& raw, Index k = 10);

// Keeps the q = round(|items|/ratio) users with the highest Jaccard similarity
// between their item set and the full filtered item set. Ties broken by
// smaller original ID. Returns the selected IDs sorted lexicographically.
std::vector<std::string> select_users_by_jaccard(const std::vector<RawInteraction>& filtered,
                                                 double ratio);

// Per user, sends the ceil(test_fraction * n_u) latest interactions to test
// (ties by item index ascending); users with fewer than 2 interactions keep
// everything in train.
std::pair<std::vector<std::pair<Index, Index>>, std::vector<std::pair<Index, Index>>>
temporal_split(std::vector<IndexedInteraction> interactions, double test_fraction = 0.2);

// Keeps edges whose endpoints both survive, drops self-loops, deduplicates
// unordered pairs, remaps to indices. `user_ids` must be sorted.
std::vector<std::pair<Index, Index>> rebuild_social(
    const std::vector<std::pair<std::string, std::string>>& raw_edges,
    const std::vector<std::string>& user_ids);

DatasetStats dataset_stats(const Dataset& d);

// Full pipeline: dedup -> item k-core -> user selection -> remap -> temporal
// split -> social rebuild. The item universe is fixed at the k-core stage, so
// items keep their index even when user selection empties their column.
Dataset build_dataset(std::vector<RawInteraction> raw,
                      const std::vector<std::pair<std::string, std::string>>& social_raw,
                      const PreprocessConfig& cfg);

// Text persistence: train.txt / test.txt / social.txt ("a b" pairs) and
// maps.txt ("user|item original_id index" lines), plus stats.txt.
void save_dataset(const Dataset& d, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace socgcf
