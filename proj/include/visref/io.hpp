// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "visref/aggregate.hpp"
#include "visref/embedding.hpp"
#include "visref/kernel.hpp"
#include "visref/select.hpp"
#include "visref/stopping.hpp"

namespace visref::io {

// EMB1 layout, all little-endian regardless of host:
//   bytes 0..3   "EMB1"
//   bytes 4..7   rows  (uint32)
//   bytes 8..11  cols  (uint32)
//   then rows * cols IEEE-754 binary32 values, row-major.
// Values are widened to double on load; non-finite values are rejected.

std::vector<std::uint8_t> encode_emb1(const EmbeddingMatrix& m);
EmbeddingMatrix decode_emb1(std::span<const std::uint8_t> bytes);
EmbeddingMatrix read_emb1(const std::filesystem::path& path);
void write_emb1(const std::filesystem::path& path, const EmbeddingMatrix& m);

inline constexpr const char* kDistributionSchema = "visref-dist/1";
inline constexpr const char* kOutcomesSchema = "visref-outcomes/1";
inline constexpr const char* kPolicySchema = "visref-policy/1";
inline constexpr const char* kTraceSchema = "visref-trace/1";
inline constexpr const char* kSelectReportSchema = "visref-select-report/1";
inline constexpr const char* kDecomposeReportSchema = "visref-decompose-report/1";
inline constexpr const char* kEntropyReportSchema = "visref-entropy-report/1";
inline constexpr const char* kVoteReportSchema = "visref-vote-report/1";
inline constexpr const char* kReplayReportSchema = "visref-replay-report/1";

/// Reads and parses a JSON document; ParseError on I/O or syntax failure.
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

AnswerDistribution parse_distribution(const nlohmann::json& doc);
nlohmann::json to_json(const AnswerDistribution& dist);

std::vector<ChainOutcome> parse_outcomes(const nlohmann::json& doc);
nlohmann::json to_json(std::span<const ChainOutcome> outcomes);

struct PolicyDocument {
    StoppingPolicy policy;
    std::optional<std::size_t> budget;
    double budget_frac = 0.3;
    double lambda = 0.5;
    double jitter_scale = 1e-6;
};

PolicyDocument parse_policy(const nlohmann::json& doc);
nlohmann::json to_json(const PolicyDocument& policy);

struct TraceStepDocument {
    std::string text;  // EMB1 path, relative to the trace directory
    AnswerDistribution distribution;
    std::optional<double> entropy;
    std::optional<std::vector<std::size_t>> selected;
};

struct TraceDocument {
    std::string visual;  // EMB1 path, relative to the trace directory
    std::vector<TraceStepDocument> steps;
    std::string final_answer;
};

TraceDocument parse_trace(const nlohmann::json& doc);
nlohmann::json to_json(const TraceDocument& trace);

/// Replays a recorded trace directory (trace.json plus EMB1 files) through
/// the ModelAdapter contract. Asking for more steps than were recorded is
/// an adapter failure.
class RecordedTraceAdapter : public ModelAdapter {
public:
    RecordedTraceAdapter(std::filesystem::path dir, TraceDocument doc);

    static RecordedTraceAdapter load(const std::filesystem::path& dir);

    const TraceDocument& document() const noexcept { return doc_; }
    EmbeddingMatrix visual() const;

    EmbeddingMatrix next_step(const TraceRecord& trace) override;
    AnswerDistribution answer_distribution(const TraceRecord& trace) override;
    std::string final_answer(const TraceRecord& trace) override;

private:
    std::filesystem::path dir_;
    TraceDocument doc_;
};

nlohmann::json selection_report(const Selection& sel, const KernelFactor& k, double jitter_scale);
nlohmann::json decomposition_report(const DecompositionReport& rep, std::span<const std::size_t> subset,
                                    double jitter);
nlohmann::json vote_report(const VoteResult& vote);

}  // namespace visref::io
