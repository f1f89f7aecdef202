#include "socgcf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace socgcf {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) tokens.push_back(std::move(tok));
  return tokens;
}

bool parse_i64(const std::string& s, std::int64_t& out) {
  try {
    std::size_t pos = 0;
    out = std::stoll(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

// ceil with a snap window so that binary rounding noise in fraction * n
// (e.g. 0.2 * 10 = 2.0000000000000004) cannot inflate the count.
Index snapped_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) < 1e-9) return static_cast<Index>(r);
  return static_cast<Index>(std::ceil(x));
}

Index index_of(const std::vector<std::string>& sorted_ids, const std::string& id) {
  auto it = std::lower_bound(sorted_ids.begin(), sorted_ids.end(), id);
  if (it == sorted_ids.end() || *it != id) return -1;
  return static_cast<Index>(it - sorted_ids.begin());
}

}  // namespace

ParseResult parse_interactions(std::istream& in, InteractionFormat format) {
  ParseResult result;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> tok = split_ws(line);
    if (tok.empty()) continue;
    if (format == InteractionFormat::canonical) {
      std::int64_t ts = 0;
      if (tok.size() < 3 || tok.size() > 4) {
        result.malformed.emplace_back(line_no, "expected 'user item timestamp [rating]'");
        continue;
      }
      if (!parse_i64(tok[2], ts)) {
        result.malformed.emplace_back(line_no, "timestamp is not an integer");
        continue;
      }
      result.records.push_back({tok[0], tok[1], ts});
    } else {
      if (tok.size() < 2) {
        result.malformed.emplace_back(line_no, "adjacency line lists no items");
        continue;
      }
      for (std::size_t p = 1; p < tok.size(); ++p) {
        result.records.push_back({tok[0], tok[p], static_cast<std::int64_t>(p - 1)});
      }
    }
  }
  return result;
}

std::vector<RawInteraction> load_interactions(const std::string& path, InteractionFormat format) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open interactions file: " + path);
  ParseResult parsed = parse_interactions(f, format);
  for (const auto& [line_no, reason] : parsed.malformed) {
    std::cerr << path << ":" << line_no << ": skipped malformed line (" << reason << ")\n";
  }
  if (parsed.records.empty()) {
    throw std::runtime_error("zero valid records in " + path);
  }
  return std::move(parsed.records);
}

std::vector<std::pair<std::string, std::string>> load_social_edges(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open social file: " + path);
  std::vector<std::pair<std::string, std::string>> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    std::vector<std::string> tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 2) {
      std::cerr << path << ":" << line_no << ": skipped malformed social line\n";
      continue;
    }
    edges.emplace_back(std::move(tok[0]), std::move(tok[1]));
  }
  return edges;
}

std::vector<RawInteraction> dedup_interactions(std::vector<RawInteraction> raw) {
  std::sort(raw.begin(), raw.end(), [](const RawInteraction& a, const RawInteraction& b) {
    return std::tie(a.user_id, a.item_id, a.timestamp) < std::tie(b.user_id, b.item_id, b.timestamp);
  });
  raw.erase(std::unique(raw.begin(), raw.end(),
                        [](const RawInteraction& a, const RawInteraction& b) {
                          return a.user_id == b.user_id && a.item_id == b.item_id;
                        }),
            raw.end());
  return raw;
}

std::vector<RawInteraction> kcore_filter_items(const std::vector<RawInteraction>& raw, Index k) {
  if (k < 1) throw std::invalid_argument("kcore_filter_items: k must be >= 1");
  std::unordered_map<std::string, Index> item_count;
  for (const auto& r : raw) item_count[r.item_id]++;

  std::vector<RawInteraction> kept;
  kept.reserve(raw.size());
  for (const auto& r : raw) {
    if (item_count[r.item_id] >= k) kept.push_back(r);
  }
  if (kept.empty()) {
    throw std::runtime_error("k-core filter removed every item (k=" + std::to_string(k) + ")");
  }
  return kept;
}

std::vector<std::string> select_users_by_jaccard(const std::vector<RawInteraction>& filtered,
                                                 double ratio) {
  if (ratio <= 0.0) throw std::invalid_argument("select_users_by_jaccard: ratio must be positive");

  std::unordered_set<std::string> item_universe;
  std::unordered_map<std::string, std::unordered_set<std::string>> user_items;
  for (const auto& r : filtered) {
    item_universe.insert(r.item_id);
    user_items[r.user_id].insert(r.item_id);
  }
  const Index n_items = static_cast<Index>(item_universe.size());
  const Index q = static_cast<Index>(std::llround(static_cast<double>(n_items) / ratio));
  if (q < 1) {
    throw std::runtime_error("user selection ratio " + std::to_string(ratio) +
                             " keeps zero of " + std::to_string(n_items) + " items worth of users");
  }

  // Jaccard(set_u, I) as an exact rational so ties compare deterministically.
  // After item filtering set_u is a subset of I, but the formula is evaluated
  // as written.
  struct Scored {
    Index inter;
    Index uni;
    const std::string* id;
  };
  std::vector<Scored> scored;
  scored.reserve(user_items.size());
  for (const auto& [id, items] : user_items) {
    Index inter = 0;
    for (const auto& it : items) {
      if (item_universe.count(it)) ++inter;
    }
    const Index uni = static_cast<Index>(items.size()) + n_items - inter;
    scored.push_back({inter, uni, &id});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    const Index lhs = a.inter * b.uni;
    const Index rhs = b.inter * a.uni;
    if (lhs != rhs) return lhs > rhs;
    return *a.id < *b.id;
  });

  Index keep = q;
  if (q > static_cast<Index>(scored.size())) {
    std::cerr << "warning: requested " << q << " users but only " << scored.size()
              << " are available; keeping all\n";
    keep = static_cast<Index>(scored.size());
  }
  std::vector<std::string> selected;
  selected.reserve(static_cast<std::size_t>(keep));
  for (Index i = 0; i < keep; ++i) selected.push_back(*scored[static_cast<std::size_t>(i)].id);
  std::sort(selected.begin(), selected.end());
  return selected;
}

std::pair<std::vector<std::pair<Index, Index>>, std::vector<std::pair<Index, Index>>>
temporal_split(std::vector<IndexedInteraction> interactions, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("temporal_split: test_fraction must lie in (0, 1)");
  }
  std::sort(interactions.begin(), interactions.end(),
            [](const IndexedInteraction& a, const IndexedInteraction& b) {
              return std::tie(a.user, a.timestamp, a.item) < std::tie(b.user, b.timestamp, b.item);
            });

  std::vector<std::pair<Index, Index>> train, test;
  std::size_t begin = 0;
  while (begin < interactions.size()) {
    std::size_t end = begin;
    while (end < interactions.size() && interactions[end].user == interactions[begin].user) ++end;
    const Index n_u = static_cast<Index>(end - begin);
    const Index n_test = n_u < 2 ? 0 : snapped_ceil(test_fraction * static_cast<double>(n_u));
    const std::size_t cut = end - static_cast<std::size_t>(n_test);
    for (std::size_t p = begin; p < end; ++p) {
      auto& dst = p < cut ? train : test;
      dst.emplace_back(interactions[p].user, interactions[p].item);
    }
    begin = end;
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::vector<std::pair<Index, Index>> rebuild_social(
    const std::vector<std::pair<std::string, std::string>>& raw_edges,
    const std::vector<std::string>& user_ids) {
  std::vector<std::pair<Index, Index>> edges;
  for (const auto& [a, b] : raw_edges) {
    const Index ia = index_of(user_ids, a);
    const Index ib = index_of(user_ids, b);
    if (ia < 0 || ib < 0 || ia == ib) continue;
    edges.emplace_back(std::min(ia, ib), std::max(ia, ib));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

DatasetStats dataset_stats(const Dataset& d) {
  DatasetStats s;
  s.n_users = d.n_users;
  s.n_items = d.n_items;
  s.n_edges = static_cast<Index>(d.train.size() + d.test.size());
  s.n_social = 2 * static_cast<Index>(d.social_edges.size());
  return s;
}

Dataset build_dataset(std::vector<RawInteraction> raw,
                      const std::vector<std::pair<std::string, std::string>>& social_raw,
                      const PreprocessConfig& cfg) {
  raw = dedup_interactions(std::move(raw));
  const std::vector<RawInteraction> filtered = kcore_filter_items(raw, cfg.k_core);
  const std::vector<std::string> selected = select_users_by_jaccard(filtered, cfg.ratio);

  Dataset d;
  d.user_ids = selected;  // sorted
  {
    std::vector<std::string> items;
    items.reserve(filtered.size());
    for (const auto& r : filtered) items.push_back(r.item_id);
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    d.item_ids = std::move(items);
  }
  d.n_users = static_cast<Index>(d.user_ids.size());
  d.n_items = static_cast<Index>(d.item_ids.size());

  std::vector<IndexedInteraction> indexed;
  indexed.reserve(filtered.size());
  for (const auto& r : filtered) {
    const Index u = index_of(d.user_ids, r.user_id);
    if (u < 0) continue;  // user dropped by selection
    const Index i = index_of(d.item_ids, r.item_id);
    indexed.push_back({u, i, r.timestamp});
  }
  std::tie(d.train, d.test) = temporal_split(std::move(indexed), cfg.test_fraction);
  d.social_edges = rebuild_social(social_raw, d.user_ids);
  return d;
}

namespace {

void write_pairs(const std::string& path, const std::vector<std::pair<Index, Index>>& pairs) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& [a, b] : pairs) f << a << ' ' << b << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<std::pair<Index, Index>> read_pairs(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::vector<std::pair<Index, Index>> pairs;
  Index a = 0, b = 0;
  while (f >> a >> b) pairs.emplace_back(a, b);
  return pairs;
}

}  // namespace

void save_dataset(const Dataset& d, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_pairs(dir + "/train.txt", d.train);
  write_pairs(dir + "/test.txt", d.test);
  write_pairs(dir + "/social.txt", d.social_edges);

  std::ofstream maps(dir + "/maps.txt");
  if (!maps) throw std::runtime_error("cannot open for writing: " + dir + "/maps.txt");
  for (Index u = 0; u < d.n_users; ++u) {
    maps << "user " << d.user_ids[static_cast<std::size_t>(u)] << ' ' << u << '\n';
  }
  for (Index i = 0; i < d.n_items; ++i) {
    maps << "item " << d.item_ids[static_cast<std::size_t>(i)] << ' ' << i << '\n';
  }
  if (!maps) throw std::runtime_error("write failed: " + dir + "/maps.txt");

  const DatasetStats s = dataset_stats(d);
  std::ofstream stats(dir + "/stats.txt");
  if (!stats) throw std::runtime_error("cannot open for writing: " + dir + "/stats.txt");
  stats << s.n_users << ' ' << s.n_items << ' ' << s.n_edges << ' ' << s.n_social << '\n';
}

Dataset load_dataset(const std::string& dir) {
  Dataset d;
  std::ifstream maps(dir + "/maps.txt");
  if (!maps) throw std::runtime_error("cannot open: " + dir + "/maps.txt");
  std::string kind, id;
  Index idx = 0;
  while (maps >> kind >> id >> idx) {
    auto& ids = kind == "user" ? d.user_ids : d.item_ids;
    if (kind != "user" && kind != "item") throw std::runtime_error("maps.txt: bad row kind " + kind);
    if (idx != static_cast<Index>(ids.size())) {
      throw std::runtime_error("maps.txt: indices not contiguous");
    }
    ids.push_back(id);
  }
  d.n_users = static_cast<Index>(d.user_ids.size());
  d.n_items = static_cast<Index>(d.item_ids.size());

  d.train = read_pairs(dir + "/train.txt");
  d.test = read_pairs(dir + "/test.txt");
  d.social_edges = read_pairs(dir + "/social.txt");
  for (const auto* pairs : {&d.train, &d.test}) {
    for (const auto& [u, i] : *pairs) {
      if (u < 0 || u >= d.n_users || i < 0 || i >= d.n_items) {
        throw std::runtime_error(dir + ": interaction index out of range");
      }
    }
  }
  for (const auto& [a, b] : d.social_edges) {
    if (a < 0 || b < 0 || a >= d.n_users || b >= d.n_users || a >= b) {
      throw std::runtime_error(dir + ": bad social edge");
    }
  }
  return d;
}

}  // namespace socgcf
