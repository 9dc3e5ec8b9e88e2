// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "visref/kernel.hpp"

namespace visref {

enum class Strategy { dpp_greedy, relevance_only, random, exact };

std::string_view to_string(Strategy s);
/// Accepts "dpp", "dpp_greedy", "relevance", "relevance_only", "random", "exact".
Strategy parse_strategy(std::string_view name);

struct SelectionConfig {
    std::size_t budget = 1;
    Strategy strategy = Strategy::dpp_greedy;
    /// Weight of the relevance term in the greedy gain. 0.5 ranks candidates
    /// exactly like the plain log det-ratio.
    double lambda = 0.5;
    std::uint64_t seed = 0;
};

/// floor(fraction * n), clamped to [1, n] for n >= 1.
std::size_t default_budget(std::size_t n, double fraction = 0.3);

struct Selection {
    std::vector<std::size_t> indices;
    std::vector<double> gains;
    /// log det(L_S + jitter * I). Empty for selectors that never see the kernel.
    std::optional<double> total_logdet;
    /// First step whose pick was jitter-dominated, if any.
    std::optional<std::size_t> degenerate_from;
    SelectionConfig config;
};

/// Called once per greedy step, before the pick, with the conditional
/// variance of every candidate given the tokens chosen so far. Entries of
/// already-selected tokens are meaningless.
using GreedyObserver = std::function<void(std::size_t step, std::span<const double> cond_var)>;

/// Greedy MAP selection on the DPP kernel.
///
/// Each step picks the candidate maximizing
///   g(v) = lambda * log(r_v^2 + eps) + (1 - lambda) * (log d_v^2 - log(r_v^2 + eps))
/// where d_v^2 is the conditional variance of v given the current selection
/// (the det ratio det(L_{S+v}) / det(L_S)). The second term is the increment
/// of the normalized-kernel log-determinant. At lambda = 0.5 the gain is
/// exactly 0.5 * log d_v^2.
///
/// Conditional variances are maintained incrementally (a pivoted Cholesky on
/// the implicit kernel), costing O(N (T + i)) at step i. Ties go to the
/// lowest index. gains holds g of each pick; total_logdet is sum log d^2.
Selection greedy_select(const KernelFactor& k, const SelectionConfig& cfg,
                        const GreedyObserver& observer = {});

/// Exhaustive maximizer of log det(L_S + eps I) over all size-m subsets.
/// Refuses (InfeasibleError) when N > 20 or C(N, m) > 2^20. Ties go to the
/// lexicographically smallest index set; indices come back sorted and gains
/// are the chain-rule log det-ratios in that order.
Selection exact_select(const KernelFactor& k, std::size_t m);

/// Top-m tokens by relevance, ties to the lowest index. Gains are
/// log(r_i^2 + offset).
Selection relevance_only_select(std::span<const double> r2, std::size_t m, double offset = 0.0);

/// Uniform sample of m of n indices without replacement, in draw order.
/// Deterministic for a fixed seed on every platform.
Selection random_select(std::size_t n, std::size_t m, std::uint64_t seed);

/// Dispatches on cfg.strategy and fills total_logdet from the kernel. For
/// the random strategy gains become the chain-rule log det-ratios in draw
/// order.
Selection select(const KernelFactor& k, const SelectionConfig& cfg);

/// Chain-rule log det-ratio of each element of an ordered subset.
std::vector<double> chain_rule_gains(const KernelFactor& k, std::span<const std::size_t> subset);

}  // namespace visref
