// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#include "visref/stopping.hpp"

#include <cmath>
#include <string>

#include "summation.hpp"
#include "visref/error.hpp"

namespace visref {

void AnswerDistribution::validate() const {
    if (probabilities.empty()) throw ParseError("answer distribution is empty");
    detail::CompensatedSum total;
    for (const auto& [label, p] : probabilities) {
        if (!std::isfinite(p)) throw ParseError("non-finite probability for answer '" + label + "'");
        if (p < 0.0) throw ParseError("negative probability for answer '" + label + "'");
        total.add(p);
    }
    const double s = total.value();
    if (std::abs(s - 1.0) > 1e-6) {
        throw ParseError("answer probabilities sum to " + std::to_string(s) + ", expected 1");
    }
}

AnswerDistribution AnswerDistribution::from_samples(std::span<const std::string> samples) {
    if (samples.empty()) throw ParseError("cannot build an empirical distribution from zero samples");
    std::map<std::string, std::size_t> counts;
    for (const auto& s : samples) ++counts[s];
    AnswerDistribution dist;
    dist.source = Source::empirical;
    dist.sample_count = samples.size();
    const auto n = static_cast<double>(samples.size());
    for (const auto& [label, c] : counts) dist.probabilities[label] = static_cast<double>(c) / n;
    return dist;
}

double shannon_entropy(const AnswerDistribution& dist) {
    dist.validate();
    detail::CompensatedSum h;
    for (const auto& [label, p] : dist.probabilities) {
        if (p > 0.0) h.add(-p * std::log(p));
    }
    // Rounding can push a one-hot distribution a hair below zero.
    return std::max(0.0, h.value());
}

void StoppingPolicy::validate() const {
    if (!(delta_entropy >= 0.0) || !std::isfinite(delta_entropy)) {
        throw ParseError("delta_entropy must be finite and nonnegative");
    }
    if (k_max < 1) throw ParseError("k_max must be at least 1");
}

std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::entropy_converged: return "entropy_converged";
        case StopReason::step_cap: return "step_cap";
    }
    return "unknown";
}

std::optional<StopReason> should_stop(double h, const StoppingPolicy& policy, std::size_t k) {
    if (h < policy.delta_entropy) return StopReason::entropy_converged;
    if (k >= policy.k_max) return StopReason::step_cap;
    return std::nullopt;
}

RefocusController::RefocusController(ModelAdapter& adapter, EmbeddingMatrix visual, ControllerConfig config)
    : adapter_(adapter), visual_(std::move(visual)), config_(std::move(config)) {
    config_.policy.validate();
    // The visual set is fixed for the whole sequence, so the budget is too.
    budget_ = config_.budget.value_or(default_budget(visual_.rows()));
    config_.selection.budget = budget_;
    config_.selection.strategy = Strategy::dpp_greedy;
}

StepDecision RefocusController::step() {
    if (stop_) throw std::logic_error("controller already stopped");
    const std::size_t k = trace_.steps.size() + 1;

    EmbeddingMatrix text = [&] {
        try {
            return adapter_.next_step(trace_);
        } catch (const std::exception& e) {
            throw AdapterFailure("adapter failed to produce step " + std::to_string(k) + ": " + e.what(), trace_);
        }
    }();

    const KernelFactor kernel = build_kernel_factor(visual_, text, config_.kernel);
    Selection sel = greedy_select(kernel, config_.selection);
    trace_.steps.push_back(TraceStep{std::move(text), sel, 0.0});

    AnswerDistribution dist = [&] {
        try {
            return adapter_.answer_distribution(trace_);
        } catch (const std::exception& e) {
            throw AdapterFailure("adapter failed to report answers at step " + std::to_string(k) + ": " + e.what(),
                                 trace_);
        }
    }();
    const double h = shannon_entropy(dist);
    trace_.steps.back().entropy = h;

    StepDecision decision;
    decision.step_index = k;
    decision.entropy = h;
    if (auto reason = should_stop(h, config_.policy, k)) {
        stop_ = *reason;
        decision.verdict = Stop{*reason};
    } else {
        decision.verdict = Continue{std::move(sel)};
    }
    decisions_.push_back(decision);
    return decision;
}

ControllerResult RefocusController::run() {
    while (!stop_) step();
    ControllerResult result;
    try {
        result.answer = adapter_.final_answer(trace_);
    } catch (const std::exception& e) {
        throw AdapterFailure(std::string("adapter failed to produce the final answer: ") + e.what(), trace_);
    }
    result.trace = trace_;
    result.decisions = decisions_;
    result.reason = *stop_;
    return result;
}

ControllerResult refocus_controller(ModelAdapter& adapter, const StoppingPolicy& policy,
                                    const SelectionConfig& selection, const EmbeddingMatrix& visual,
                                    std::optional<std::size_t> budget) {
    ControllerConfig config;
    config.policy = policy;
    config.selection = selection;
    config.budget = budget;
    RefocusController controller(adapter, visual, config);
    return controller.run();
}

}  // namespace visref
