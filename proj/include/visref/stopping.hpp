// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "visref/embedding.hpp"
#include "visref/select.hpp"

namespace visref {

/// Probability over candidate answer labels. Labels are opaque strings.
struct AnswerDistribution {
    enum class Source { exact, empirical };

    std::map<std::string, double> probabilities;
    Source source = Source::exact;
    /// Number of samples behind an empirical distribution; 0 for exact.
    std::size_t sample_count = 0;

    /// Throws ParseError on an empty map, a negative or non-finite entry, or
    /// a total outside [1 - 1e-6, 1 + 1e-6].
    void validate() const;

    /// Plug-in estimate from sampled answers.
    static AnswerDistribution from_samples(std::span<const std::string> samples);
};

/// Shannon entropy in nats. Zero-probability labels contribute nothing.
double shannon_entropy(const AnswerDistribution& dist);

struct StoppingPolicy {
    double delta_entropy = 0.25;
    std::size_t k_max = 10;

    void validate() const;
};

enum class StopReason { entropy_converged, step_cap };

std::string_view to_string(StopReason r);

/// entropy_converged iff h < delta (strict), else step_cap iff k >= k_max.
std::optional<StopReason> should_stop(double h, const StoppingPolicy& policy, std::size_t k);

struct TraceStep {
    EmbeddingMatrix text;
    Selection selection;
    double entropy = 0.0;
};

/// The visual-integrated trajectory: one (z_k, V_k) pair per completed step.
struct TraceRecord {
    std::vector<TraceStep> steps;
};

struct Continue {
    Selection selection;
};

struct Stop {
    StopReason reason;
};

struct StepDecision {
    std::variant<Continue, Stop> verdict;
    std::size_t step_index = 0;
    double entropy = 0.0;

    bool stopped() const noexcept { return std::holds_alternative<Stop>(verdict); }
};

/// Callbacks a model integration provides to drive the refocusing loop.
/// Each receives the trace completed so far.
class ModelAdapter {
public:
    virtual ~ModelAdapter() = default;

    /// Text embeddings of the reasoning step generated after `trace`.
    virtual EmbeddingMatrix next_step(const TraceRecord& trace) = 0;
    /// Answer distribution conditioned on `trace` (which includes the new step).
    virtual AnswerDistribution answer_distribution(const TraceRecord& trace) = 0;
    /// Final answer once the loop has stopped.
    virtual std::string final_answer(const TraceRecord& trace) = 0;
};

/// Raised when an adapter callback throws. Carries the trace up to the
/// failing step.
class AdapterFailure : public std::runtime_error {
public:
    AdapterFailure(const std::string& what, TraceRecord partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}

    const TraceRecord& partial_trace() const noexcept { return partial_; }

private:
    TraceRecord partial_;
};

struct ControllerConfig {
    StoppingPolicy policy;
    SelectionConfig selection;
    KernelOptions kernel;
    /// Per-step budget; defaults to floor(0.3 N) when unset.
    std::optional<std::size_t> budget;
};

struct ControllerResult {
    TraceRecord trace;
    std::vector<StepDecision> decisions;
    StopReason reason = StopReason::step_cap;
    std::string answer;
};

/// Refocusing loop: generate a step, select visual tokens for it, append to
/// the trace, check answer entropy; stop on low entropy or the step cap and
/// ask for the final answer.
///
/// One instance drives one sequence. step() advances by a single reasoning
/// step; run() loops to completion.
class RefocusController {
public:
    RefocusController(ModelAdapter& adapter, EmbeddingMatrix visual, ControllerConfig config);

    StepDecision step();
    ControllerResult run();

    bool finished() const noexcept { return stop_.has_value(); }
    const TraceRecord& trace() const noexcept { return trace_; }
    std::size_t budget() const noexcept { return budget_; }

private:
    ModelAdapter& adapter_;
    EmbeddingMatrix visual_;
    ControllerConfig config_;
    std::size_t budget_;
    TraceRecord trace_;
    std::vector<StepDecision> decisions_;
    std::optional<StopReason> stop_;
};

/// Convenience wrapper around RefocusController::run().
ControllerResult refocus_controller(ModelAdapter& adapter, const StoppingPolicy& policy,
                                    const SelectionConfig& selection, const EmbeddingMatrix& visual,
                                    std::optional<std::size_t> budget = std::nullopt);

}  // namespace visref
