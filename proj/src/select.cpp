// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#include "visref/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "summation.hpp"
#include "visref/error.hpp"

namespace visref {

namespace {

constexpr std::size_t kExactMaxTokens = 20;
constexpr std::uint64_t kExactMaxSubsets = std::uint64_t{1} << 20;

void check_budget(std::size_t m, std::size_t n) {
    if (n == 0) throw InfeasibleError("cannot select from an empty token set");
    if (m == 0) throw InfeasibleError("budget must be at least 1");
    if (m > n) {
        throw InfeasibleError("budget " + std::to_string(m) + " exceeds token count " + std::to_string(n));
    }
}

// C(n, k), saturating at `cap + 1`.
std::uint64_t binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
        if (c > cap) return cap + 1;
    }
    return c;
}

std::optional<std::size_t> first_degenerate(std::span<const double> pivots, double floor) {
    for (std::size_t i = 0; i < pivots.size(); ++i) {
        if (pivots[i] <= 10.0 * floor) return i;
    }
    return std::nullopt;
}

}  // namespace

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::dpp_greedy: return "dpp_greedy";
        case Strategy::relevance_only: return "relevance_only";
        case Strategy::random: return "random";
        case Strategy::exact: return "exact";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "dpp" || name == "dpp_greedy") return Strategy::dpp_greedy;
    if (name == "relevance" || name == "relevance_only") return Strategy::relevance_only;
    if (name == "random") return Strategy::random;
    if (name == "exact") return Strategy::exact;
    throw ParseError("unknown strategy '" + std::string(name) + "'");
}

std::size_t default_budget(std::size_t n, double fraction) {
    if (!(fraction > 0.0) || fraction > 1.0) throw ParseError("budget fraction must lie in (0, 1]");
    if (n == 0) return 0;
    const auto m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(m, 1, n);
}

Selection greedy_select(const KernelFactor& k, const SelectionConfig& cfg, const GreedyObserver& observer) {
    const std::size_t n = k.size();
    const std::size_t m = cfg.budget;
    check_budget(m, n);
    if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) throw ParseError("lambda must lie in [0, 1]");

    const Eigen::MatrixXd& a = k.factor();
    const double eps = k.jitter();
    const double floor = k.variance_floor();
    // g = lambda * rel + (1 - lambda) * (logd - rel) = rel_weight * rel + div_weight * logd.
    // Written this way the lambda = 0.5 and lambda = 1 cases carry no rounding from rel.
    const double rel_weight = 2.0 * cfg.lambda - 1.0;
    const double div_weight = 1.0 - cfg.lambda;

    std::vector<double> cond_var(n);
    std::vector<double> log_rel(n);
    for (std::size_t i = 0; i < n; ++i) {
        cond_var[i] = k.relevance()[i] + eps;
        log_rel[i] = std::log(std::max(cond_var[i], floor));
    }
    std::vector<bool> taken(n, false);

    // Column j holds the j-th Cholesky column of the implicit kernel,
    // restricted to all N tokens.
    Eigen::MatrixXd chol(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    Eigen::VectorXd pivot_row;
    Eigen::VectorXd column;

    Selection out;
    out.config = cfg;
    out.config.strategy = Strategy::dpp_greedy;
    out.indices.reserve(m);
    out.gains.reserve(m);
    detail::CompensatedSum logdet;

    for (std::size_t step = 0; step < m; ++step) {
        if (observer) observer(step, cond_var);

        std::size_t best = n;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            const double logd = std::log(std::max(cond_var[i], floor));
            const double g = rel_weight * log_rel[i] + div_weight * logd;
            if (best == n || g > best_gain) {
                best = i;
                best_gain = g;
            }
        }

        const double var = std::max(cond_var[best], floor);
        if (var <= 10.0 * floor && !out.degenerate_from) out.degenerate_from = step;
        out.indices.push_back(best);
        out.gains.push_back(best_gain);
        logdet.add(std::log(var));
        taken[best] = true;

        if (step + 1 == m) break;

        const auto b = static_cast<Eigen::Index>(best);
        const auto j = static_cast<Eigen::Index>(step);
        pivot_row = a.row(b).transpose();
        column.noalias() = a * pivot_row;
        column(b) += eps;
        if (j > 0) {
            pivot_row = chol.row(b).head(j).transpose();
            column.noalias() -= chol.leftCols(j) * pivot_row;
        }
        column /= std::sqrt(var);
        chol.col(j) = column;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = column(static_cast<Eigen::Index>(i));
            cond_var[i] -= e * e;
        }
    }

    out.total_logdet = logdet.value();
    return out;
}

Selection exact_select(const KernelFactor& k, std::size_t m) {
    const std::size_t n = k.size();
    check_budget(m, n);
    if (n > kExactMaxTokens) {
        throw InfeasibleError("exhaustive search refused: " + std::to_string(n) + " tokens exceeds limit of " +
                              std::to_string(kExactMaxTokens));
    }
    if (binomial_capped(n, m, kExactMaxSubsets) > kExactMaxSubsets) {
        throw InfeasibleError("exhaustive search refused: C(" + std::to_string(n) + ", " + std::to_string(m) +
                              ") exceeds 2^20 subsets");
    }

    const auto full_n = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd full = k.factor() * k.factor().transpose();
    for (Eigen::Index i = 0; i < full_n; ++i) full(i, i) = k.relevance()[static_cast<std::size_t>(i)] + k.jitter();

    std::vector<std::size_t> combo(m);
    std::iota(combo.begin(), combo.end(), std::size_t{0});
    std::vector<std::size_t> best;
    double best_value = -std::numeric_limits<double>::infinity();
    const auto mm = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd sub(mm, mm);

    while (true) {
        for (Eigen::Index r = 0; r < mm; ++r) {
            for (Eigen::Index c = 0; c < mm; ++c) {
                sub(r, c) = full(static_cast<Eigen::Index>(combo[r]), static_cast<Eigen::Index>(combo[c]));
            }
        }
        try {
            const double value = cholesky_pivots(sub).logdet;
            if (best.empty() || value > best_value) {
                best = combo;
                best_value = value;
            }
        } catch (const NumericalError&) {
            // singular subset without jitter: det = 0, never the maximum
        }

        // Next combination in lexicographic order.
        std::size_t i = m;
        while (i > 0 && combo[i - 1] == n - m + (i - 1)) --i;
        if (i == 0) break;
        ++combo[i - 1];
        for (std::size_t t = i; t < m; ++t) combo[t] = combo[t - 1] + 1;
    }

    if (best.empty()) throw NumericalError("every size-" + std::to_string(m) + " subset is singular");

    Selection out;
    out.config.budget = m;
    out.config.strategy = Strategy::exact;
    out.indices = best;
    const CholeskyPivots chain = cholesky_pivots(subset_kernel(k, best));
    for (double p : chain.pivots) out.gains.push_back(std::log(p));
    out.total_logdet = best_value;
    out.degenerate_from = first_degenerate(chain.pivots, k.variance_floor());
    return out;
}

Selection relevance_only_select(std::span<const double> r2, std::size_t m, double offset) {
    check_budget(m, r2.size());
    for (double x : r2) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw ParseError("relevance scores must be finite and nonnegative");
    }
    std::vector<std::size_t> order(r2.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return r2[x] > r2[y]; });

    Selection out;
    out.config.budget = m;
    out.config.strategy = Strategy::relevance_only;
    out.config.lambda = 1.0;
    out.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    for (std::size_t idx : out.indices) out.gains.push_back(std::log(r2[idx] + offset));
    return out;
}

Selection random_select(std::size_t n, std::size_t m, std::uint64_t seed) {
    check_budget(m, n);
    std::mt19937_64 rng(seed);
    // Unbiased bounded draw; std::uniform_int_distribution is not
    // reproducible across standard libraries.
    auto below = [&rng](std::uint64_t range) {
        const std::uint64_t threshold = (std::uint64_t{0} - range) % range;
        std::uint64_t x = rng();
        while (x < threshold) x = rng();
        return x % range;
    };

    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    Selection out;
    out.config.budget = m;
    out.config.strategy = Strategy::random;
    out.config.seed = seed;
    for (std::size_t i = 0; i < m; ++i) {
        const auto j = i + static_cast<std::size_t>(below(n - i));
        std::swap(pool[i], pool[j]);
        out.indices.push_back(pool[i]);
    }
    return out;
}

std::vector<double> chain_rule_gains(const KernelFactor& k, std::span<const std::size_t> subset) {
    const CholeskyPivots chain = cholesky_pivots(subset_kernel(k, subset));
    std::vector<double> gains;
    gains.reserve(chain.pivots.size());
    for (double p : chain.pivots) gains.push_back(std::log(p));
    return gains;
}

Selection select(const KernelFactor& k, const SelectionConfig& cfg) {
    switch (cfg.strategy) {
        case Strategy::dpp_greedy: return greedy_select(k, cfg);
        case Strategy::exact: return exact_select(k, cfg.budget);
        case Strategy::relevance_only: {
            Selection out = relevance_only_select(k.relevance(), cfg.budget, k.jitter());
            const CholeskyPivots chain = cholesky_pivots(subset_kernel(k, out.indices));
            out.total_logdet = chain.logdet;
            out.degenerate_from = first_degenerate(chain.pivots, k.variance_floor());
            out.config = cfg;
            return out;
        }
        case Strategy::random: {
            Selection out = random_select(k.size(), cfg.budget, cfg.seed);
            const CholeskyPivots chain = cholesky_pivots(subset_kernel(k, out.indices));
            for (double p : chain.pivots) out.gains.push_back(std::log(p));
            out.total_logdet = chain.logdet;
            out.degenerate_from = first_degenerate(chain.pivots, k.variance_floor());
            out.config = cfg;
            return out;
        }
    }
    throw ParseError("unknown strategy");
}

}  // namespace visref
