// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/split.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "fanal/error.hpp"
#include "fanal/random.hpp"

namespace fanal {
namespace {

constexpr double kFracTol = 1e-9;

// Largest-remainder apportionment of `total` over `fractions`.
std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<double>& fractions) {
  const std::size_t m = fractions.size();
  std::vector<std::int64_t> out(m);
  std::vector<std::pair<double, std::size_t>> rema;
  std::int64_t assigned = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double q = static_cast<double>(total) * fractions[j];
    out[j] = static_cast<std::int64_t>(std::floor(q + kFracTol));
    assigned += out[j];
    rema.emplace_back(q - static_cast<double>(out[j]), j);
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total && k < rema.size(); ++k, ++assigned) ++out[rema[k].second];
  return out;
}

}  // namespace

std::vector<std::vector<LabeledRecord>> split_stratified(const std::vector<LabeledRecord>& records,
                                                         const std::vector<double>& fractions,
                                                         std::uint64_t seed) {
  if (records.empty()) throw DataError("split_stratified: empty input");
  if (fractions.empty()) throw ConfigError("split_stratified: no fractions given");
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ConfigError("split_stratified: fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > kFracTol) throw ConfigError("split_stratified: fractions must sum to 1");

  const std::size_t m = fractions.size();
  std::array<std::vector<std::size_t>, kNumCategories> members;
  for (std::size_t i = 0; i < records.size(); ++i) members[index_of(records[i].label)].push_back(i);

  // Cell (c, j) ideally holds n_c * N_j / N records. Take floors, then round
  // up exactly enough fractional cells that every class total and every split
  // total comes out right; a unit-capacity flow from classes to splits finds
  // such a set of cells.
  const auto total = static_cast<std::int64_t>(records.size());
  const auto targets = apportion(total, fractions);
  std::array<std::vector<std::int64_t>, kNumCategories> counts;
  std::array<std::vector<std::int64_t>, kNumCategories> rem;
  std::array<std::int64_t, kNumCategories> owed{};
  std::vector<std::int64_t> room = targets;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    const auto n = static_cast<std::int64_t>(members[c].size());
    counts[c].assign(m, 0);
    rem[c].assign(m, 0);
    std::int64_t floors = 0;
    for (std::size_t j = 0; j < m; ++j) {
      counts[c][j] = n * targets[j] / total;
      rem[c][j] = n * targets[j] % total;
      floors += counts[c][j];
      room[j] -= counts[c][j];
    }
    owed[c] = n - floors;
    if (n == 1 && owed[c] == 1) {
      counts[c][0] = 1;
      --room[0];
      owed[c] = 0;
    }
  }

  // Candidate cells per class, most fractional first.
  std::array<std::vector<std::size_t>, kNumCategories> cells;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    for (std::size_t j = 0; j < m; ++j) {
      if (rem[c][j] > 0) cells[c].push_back(j);
    }
    std::stable_sort(cells[c].begin(), cells[c].end(),
                     [&](std::size_t a, std::size_t b) { return rem[c][a] > rem[c][b]; });
  }
  std::array<std::vector<char>, kNumCategories> up;
  for (auto& u : up) u.assign(m, 0);
  std::vector<std::int64_t> used(m, 0);
  std::vector<char> visited(kNumCategories);
  // Augmenting path: class c takes cell j directly if split j has room, or
  // by displacing another class from j into one of its other cells.
  const auto augment = [&](auto&& self, std::size_t c) -> bool {
    visited[c] = 1;
    for (std::size_t j : cells[c]) {
      if (up[c][j]) continue;
      if (used[j] < room[j]) {
        up[c][j] = 1;
        ++used[j];
        return true;
      }
    }
    for (std::size_t j : cells[c]) {
      if (up[c][j]) continue;
      for (std::size_t d = 0; d < kNumCategories; ++d) {
        if (visited[d] || !up[d][j]) continue;
        up[d][j] = 0;
        up[c][j] = 1;
        if (self(self, d)) return true;
        up[c][j] = 0;
        up[d][j] = 1;
      }
    }
    return false;
  };
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    for (std::int64_t k = 0; k < owed[c]; ++k) {
      std::fill(visited.begin(), visited.end(), 0);
      if (augment(augment, c)) continue;
      // Only reachable when forced singletons overfill split 0; the class
      // total still has to be met, so take any free cell.
      for (std::size_t j : cells[c]) {
        if (!up[c][j]) {
          up[c][j] = 1;
          ++used[j];
          break;
        }
      }
    }
  }
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    for (std::size_t j = 0; j < m; ++j) counts[c][j] += up[c][j];
  }

  // Deal out shuffled members, then restore input order inside each split.
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> picked(m);
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    auto& mem = members[c];
    rng.shuffle(std::span<std::size_t>(mem));
    std::size_t pos = 0;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::int64_t k = 0; k < counts[c][j]; ++k) picked[j].push_back(mem[pos++]);
    }
  }
  std::vector<std::vector<LabeledRecord>> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::sort(picked[j].begin(), picked[j].end());
    out[j].reserve(picked[j].size());
    for (std::size_t i : picked[j]) out[j].push_back(records[i]);
  }
  return out;
}

}  // namespace fanal
