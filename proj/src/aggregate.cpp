// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#include "visref/aggregate.hpp"

#include <limits>
#include <string>

#include "visref/error.hpp"

namespace visref {

std::span<const ChainOutcome> admit_chains(std::span<const ChainOutcome> outcomes, std::uint64_t budget) {
    std::uint64_t used = 0;
    std::size_t admitted = 0;
    for (const auto& o : outcomes) {
        // used <= budget holds here, so this cannot wrap.
        if (o.tokens_used > budget - used) break;
        used += o.tokens_used;
        ++admitted;
    }
    return outcomes.first(admitted);
}

VoteResult majority_vote(std::span<const ChainOutcome> outcomes) {
    if (outcomes.empty()) throw ParseError("majority vote needs at least one chain outcome");

    VoteResult result;
    std::map<std::string, std::int64_t> earliest;
    for (const auto& o : outcomes) {
        ++result.counts[o.answer];
        auto [it, inserted] = earliest.try_emplace(o.answer, o.chain_id);
        if (!inserted && o.chain_id < it->second) it->second = o.chain_id;
        if (o.tokens_used > std::numeric_limits<std::uint64_t>::max() - result.budget_used) {
            throw InfeasibleError("token counts overflow");
        }
        result.budget_used += o.tokens_used;
    }
    result.admitted_chains = outcomes.size();

    std::size_t top = 0;
    for (const auto& [label, c] : result.counts) top = std::max(top, c);
    std::size_t tied = 0;
    std::int64_t best_chain = 0;
    for (const auto& [label, c] : result.counts) {
        if (c != top) continue;
        const std::int64_t first = earliest.at(label);
        if (tied == 0 || first < best_chain) {
            result.winner = label;
            best_chain = first;
        }
        ++tied;
    }
    result.tie = tied > 1;
    return result;
}

VoteResult vote_within_budget(std::span<const ChainOutcome> outcomes, std::uint64_t budget) {
    const auto admitted = admit_chains(outcomes, budget);
    if (admitted.empty()) {
        throw InfeasibleError("token budget " + std::to_string(budget) + " admits no chains");
    }
    return majority_vote(admitted);
}

}  // namespace visref
