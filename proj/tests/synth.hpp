#pragma once

// Synthetic homophily dataset generator for the acceptance suite. Users form
// groups; each group has an exclusive item pool plus globally popular items.
// The friendship graph is drawn first, and each user's latest interactions
// are sampled from their friends' anchor items. Anchors themselves are
// uniform over the group pool, so interaction overlap carries no information
// about who is friends with whom — the held-out items are predictable from
// the social graph but not (beyond group membership) from interactions
// alone.

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "socgcf/rng.hpp"

namespace synth {

// Sized so the task has headroom at recall@20: each user leaves ~38 unseen
// in-group pool items competing for 20 slots, item degrees stay comfortably
// above a 10-core, and the mean friend count (~8) keeps the friends' anchor
// union well below the whole pool.
struct Params {
  socgcf::Index groups = 15;
  socgcf::Index users_per_group = 120;
  socgcf::Index pool_per_group = 44;   // exclusive items per group
  socgcf::Index n_popular = 100;       // items shared across all groups
  socgcf::Index anchors_per_user = 4;  // own pool items, middle timestamps
  socgcf::Index popular_per_user = 2;  // popular items, early timestamps
  socgcf::Index friend_per_user = 2;   // items from friends' anchors, latest
  double social_p_in = 0.05;           // in-group friendship probability
  double social_p_out = 0.0005;        // cross-group noise probability
  std::uint64_t seed = 1234;

  socgcf::Index n_users() const { return groups * users_per_group; }
  socgcf::Index n_items() const { return groups * pool_per_group + n_popular; }
};

inline std::string user_id(socgcf::Index u) {
  std::string s = std::to_string(u);
  return "u" + std::string(4 - s.size(), '0') + s;
}

inline std::string pool_item_id(socgcf::Index g, socgcf::Index j) {
  return "g" + std::to_string(g) + "_i" + std::to_string(j);
}

inline std::string popular_item_id(socgcf::Index j) { return "pop" + std::to_string(j); }

// Writes canonical interactions and a social pair file. Popular items carry
// the earliest timestamps, the user's own anchors the middle ones, and the
// friend-derived items the latest — so a 0.2 temporal split holds out
// exactly the friend-derived pair.
inline void write_raw(const Params& params, const std::string& interactions_path,
                      const std::string& social_path) {
  if (params.anchors_per_user > params.pool_per_group) {
    throw std::invalid_argument("anchors_per_user exceeds pool_per_group");
  }
  socgcf::Rng rng(params.seed);
  const socgcf::Index n = params.n_users();

  // Friendship graph first: it drives the held-out interactions.
  std::vector<std::vector<socgcf::Index>> friends(static_cast<std::size_t>(n));
  std::vector<std::pair<socgcf::Index, socgcf::Index>> edges;
  for (socgcf::Index a = 0; a < n; ++a) {
    for (socgcf::Index b = a + 1; b < n; ++b) {
      const bool same_group = a / params.users_per_group == b / params.users_per_group;
      const double p = same_group ? params.social_p_in : params.social_p_out;
      if (rng.next_double() < p) {
        edges.emplace_back(a, b);
        friends[static_cast<std::size_t>(a)].push_back(b);
        friends[static_cast<std::size_t>(b)].push_back(a);
      }
    }
  }

  // Anchors: uniform draws from the group's pool, independent of friendship.
  std::vector<std::vector<socgcf::Index>> anchors(static_cast<std::size_t>(n));
  for (socgcf::Index u = 0; u < n; ++u) {
    std::vector<socgcf::Index> pool(static_cast<std::size_t>(params.pool_per_group));
    for (socgcf::Index j = 0; j < params.pool_per_group; ++j) {
      pool[static_cast<std::size_t>(j)] = j;
    }
    rng.shuffle(pool);
    pool.resize(static_cast<std::size_t>(params.anchors_per_user));
    anchors[static_cast<std::size_t>(u)] = pool;
  }

  std::ofstream inter(interactions_path);
  if (!inter) throw std::runtime_error("cannot open " + interactions_path);
  for (socgcf::Index u = 0; u < n; ++u) {
    const socgcf::Index g = u / params.users_per_group;

    std::set<socgcf::Index> pops;
    while (static_cast<socgcf::Index>(pops.size()) < params.popular_per_user) {
      pops.insert(
          static_cast<socgcf::Index>(rng.next_below(static_cast<std::uint64_t>(params.n_popular))));
    }
    socgcf::Index t = 0;
    for (socgcf::Index j : pops) {
      inter << user_id(u) << ' ' << popular_item_id(j) << ' ' << 100 + t << '\n';
      ++t;
    }

    const auto& own = anchors[static_cast<std::size_t>(u)];
    for (std::size_t k = 0; k < own.size(); ++k) {
      inter << user_id(u) << ' ' << pool_item_id(g, own[k]) << ' '
            << 200 + static_cast<socgcf::Index>(k) << '\n';
    }

    // Latest interactions: drawn from friends' anchors, minus the user's own.
    std::set<socgcf::Index> union_set;
    for (socgcf::Index f : friends[static_cast<std::size_t>(u)]) {
      if (f / params.users_per_group != g) continue;  // cross-group noise friends
      for (socgcf::Index j : anchors[static_cast<std::size_t>(f)]) union_set.insert(j);
    }
    for (socgcf::Index j : own) union_set.erase(j);
    std::vector<socgcf::Index> candidates(union_set.begin(), union_set.end());
    if (static_cast<socgcf::Index>(candidates.size()) < params.friend_per_user) {
      // Friendless (or anchor-saturated) user: fall back to unseen pool items.
      for (socgcf::Index j = 0; j < params.pool_per_group; ++j) {
        if (!union_set.count(j) && std::find(own.begin(), own.end(), j) == own.end()) {
          candidates.push_back(j);
        }
      }
    }
    rng.shuffle(candidates);
    for (socgcf::Index k = 0; k < params.friend_per_user; ++k) {
      inter << user_id(u) << ' ' << pool_item_id(g, candidates[static_cast<std::size_t>(k)])
            << ' ' << 300 + k << '\n';
    }
  }

  std::ofstream soc(social_path);
  if (!soc) throw std::runtime_error("cannot open " + social_path);
  for (const auto& [a, b] : edges) {
    soc << user_id(a) << ' ' << user_id(b) << '\n';
  }
}

}  // namespace synth
