// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <unordered_map>
#include <vector>

#include "support/oracles.hpp"
#include "visref/aggregate.hpp"
#include "visref/error.hpp"

using namespace visref;
using namespace visref::testing;

namespace {

std::vector<ChainOutcome> chains(std::initializer_list<const char*> answers, std::uint64_t tokens = 100) {
    std::vector<ChainOutcome> out;
    std::int64_t id = 1;
    for (const char* a : answers) out.push_back({id++, a, tokens});
    return out;
}

std::vector<ChainOutcome> random_outcomes(Rng& rng, std::size_t n, std::size_t labels) {
    std::vector<ChainOutcome> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({static_cast<std::int64_t>(i), std::string(1, static_cast<char>('A' + rng.below(labels))),
                       50 + rng.below(750)});
    }
    return out;
}

}  // namespace

TEST_SUITE("aggregate") {

TEST_CASE("admit_chains") {
    const auto three = chains({"A", "B", "C"}, 400);
    CHECK(admit_chains(three, 1000).size() == 2);
    CHECK(admit_chains(three, 1200).size() == 3);
    CHECK(admit_chains(three, 0).empty());
    CHECK(admit_chains(three, 399).empty());
    CHECK(admit_chains(chains({"A"}, 0), 0).size() == 1);

    Rng rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        const auto outs = random_outcomes(rng, 40, 3);
        const std::uint64_t budget = rng.below(20000);
        std::size_t expected = 0;
        std::uint64_t cumsum = 0;
        for (const auto& o : outs) {
            cumsum += o.tokens_used;
            if (cumsum > budget) break;
            ++expected;
        }
        const auto admitted = admit_chains(outs, budget);
        CHECK(admitted.size() == expected);
        std::uint64_t used = 0;
        for (const auto& o : admitted) used += o.tokens_used;
        CHECK(used <= budget);
        CHECK(admit_chains(outs, budget + rng.below(5000)).size() >= admitted.size());
    }
}

TEST_CASE("majority_vote") {
    const auto aab = chains({"A", "A", "B"});
    const VoteResult r = majority_vote(aab);
    CHECK(r.winner == "A");
    CHECK(r.counts.at("A") == 2);
    CHECK(r.counts.at("B") == 1);
    CHECK_FALSE(r.tie);
    CHECK(r.admitted_chains == 3);
    CHECK(r.budget_used == 300);

    const auto ab = chains({"A", "B"});
    const VoteResult t = majority_vote(ab);
    CHECK(t.winner == "A");
    CHECK(t.tie);

    // Earliest supporting chain id decides, not position or label order.
    const std::vector<ChainOutcome> late{{7, "A", 1}, {3, "B", 1}, {9, "B", 1}, {5, "A", 1}};
    CHECK(majority_vote(late).winner == "B");

    CHECK_THROWS_AS(majority_vote({}), ParseError);
}

TEST_CASE("majority_vote matches a counting oracle") {
    Rng rng(62);
    const auto outs = random_outcomes(rng, 1000, 5);
    std::unordered_map<std::string, std::size_t> oracle;
    for (const auto& o : outs) ++oracle[o.answer];
    const VoteResult r = majority_vote(outs);
    CHECK(r.counts.size() == oracle.size());
    for (const auto& [label, c] : oracle) CHECK(r.counts.at(label) == c);
    std::size_t top = 0;
    for (const auto& [label, c] : oracle) top = std::max(top, c);
    CHECK(oracle.at(r.winner) == top);
}

TEST_CASE("vote properties") {
    Rng rng(63);
    for (int trial = 0; trial < 50; ++trial) {
        auto outs = random_outcomes(rng, 1 + rng.below(30), 4);
        const VoteResult base = majority_vote(outs);

        auto shuffled = outs;
        for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        const VoteResult perm = majority_vote(shuffled);
        CHECK(perm.counts == base.counts);
        if (!base.tie) CHECK(perm.winner == base.winner);

        outs.push_back({static_cast<std::int64_t>(outs.size()), base.winner, 10});
        CHECK(majority_vote(outs).winner == base.winner);
    }
}

TEST_CASE("vote_within_budget") {
    const auto three = chains({"B", "A", "A"}, 400);
    const VoteResult r = vote_within_budget(three, 1000);
    CHECK(r.admitted_chains == 2);
    CHECK(r.budget_used == 800);
    CHECK(r.winner == "B");
    CHECK(r.tie);
    CHECK_THROWS_AS(vote_within_budget(three, 100), InfeasibleError);
}

}  // TEST_SUITE
