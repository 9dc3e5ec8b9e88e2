// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace visref {

struct ChainOutcome {
    std::int64_t chain_id = 0;
    std::string answer;
    std::uint64_t tokens_used = 0;
};

struct VoteResult {
    std::string winner;
    std::map<std::string, std::size_t> counts;
    std::size_t admitted_chains = 0;
    std::uint64_t budget_used = 0;
    bool tie = false;
};

/// Longest generation-order prefix whose total tokens fit in `budget`.
std::span<const ChainOutcome> admit_chains(std::span<const ChainOutcome> outcomes, std::uint64_t budget);

/// Self-consistency vote. Ties go to the answer whose earliest supporting
/// chain_id is smallest. Throws ParseError on empty input.
VoteResult majority_vote(std::span<const ChainOutcome> outcomes);

/// admit_chains followed by majority_vote. Throws InfeasibleError when the
/// first chain alone exceeds the budget.
VoteResult vote_within_budget(std::span<const ChainOutcome> outcomes, std::uint64_t budget);

}  // namespace visref
