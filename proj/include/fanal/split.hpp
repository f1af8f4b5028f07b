// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <cstdint>
#include <vector>

#include "fanal/news.hpp"

namespace fanal {

/// Splits `records` into fractions.size() parts, per category.
///
/// Each category's members are shuffled with a seeded stream and dealt out so
/// that every (category, split) count is the floor or ceiling of its ideal
/// share and split totals track their targets. A category with a single
/// member always lands in split 0. Within each split, records keep their
/// input order.
///
/// Throws DataError on empty input and ConfigError when the fractions are
/// negative or do not sum to 1 within 1e-9.
std::vector<std::vector<LabeledRecord>> split_stratified(const std::vector<LabeledRecord>& records,
                                                         const std::vector<double>& fractions,
                                                         std::uint64_t seed);

}  // namespace fanal
