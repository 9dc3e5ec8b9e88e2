// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#include "visref/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <limits>
#include <string_view>

#include "visref/error.hpp"

namespace visref::io {

using nlohmann::json;

namespace {

constexpr std::uint8_t kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::size_t kHeaderBytes = 12;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
           static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

// Rejects keys outside `allowed` and reports missing `required` keys.
void check_object(const json& doc, std::string_view what, std::initializer_list<std::string_view> allowed,
                  std::initializer_list<std::string_view> required) {
    if (!doc.is_object()) throw ParseError(std::string(what) + ": expected a JSON object");
    for (const auto& [key, value] : doc.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ParseError(std::string(what) + ": unknown field '" + key + "'");
    }
    for (auto r : required) {
        if (!doc.contains(r)) throw ParseError(std::string(what) + ": missing field '" + std::string(r) + "'");
    }
}

void check_schema(const json& doc, const char* schema) {
    const json& s = doc.at("schema");
    if (!s.is_string() || s.get<std::string>() != schema) {
        throw ParseError(std::string("expected schema '") + schema + "'");
    }
}

double get_number(const json& v, std::string_view what) {
    if (!v.is_number()) throw ParseError(std::string(what) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(std::string(what) + " must be finite");
    return x;
}

std::uint64_t get_uint(const json& v, std::string_view what) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ParseError(std::string(what) + " must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::string get_string(const json& v, std::string_view what) {
    if (!v.is_string()) throw ParseError(std::string(what) + " must be a string");
    return v.get<std::string>();
}

std::map<std::string, double> get_probability_map(const json& v, std::string_view what) {
    if (!v.is_object()) throw ParseError(std::string(what) + " must be an object of label -> probability");
    std::map<std::string, double> out;
    for (const auto& [label, p] : v.items()) out[label] = get_number(p, what);
    return out;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json selection_fields(const Selection& sel) {
    json gains = json::array();
    for (double g : sel.gains) gains.push_back(number_or_null(g));
    json out;
    out["indices"] = sel.indices;
    out["gains"] = std::move(gains);
    out["total_logdet"] = sel.total_logdet ? number_or_null(*sel.total_logdet) : json(nullptr);
    out["degenerate"] = sel.degenerate_from.has_value();
    out["degenerate_from"] = sel.degenerate_from ? json(*sel.degenerate_from) : json(nullptr);
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_emb1(const EmbeddingMatrix& m) {
    if (m.rows() > std::numeric_limits<std::uint32_t>::max() || m.dim() > std::numeric_limits<std::uint32_t>::max()) {
        throw ShapeError("matrix too large for EMB1");
    }
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.reserve(kHeaderBytes + m.data().size() * 4);
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.dim()));
    for (double x : m.data()) {
        const auto f = static_cast<float>(x);
        if (!std::isfinite(f)) throw NumericalError("value " + std::to_string(x) + " overflows binary32");
        put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
    return out;
}

EmbeddingMatrix decode_emb1(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes) throw ParseError("EMB1: file shorter than the 12-byte header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ParseError("EMB1: bad magic");
    const std::uint64_t rows = get_u32(bytes, 4);
    const std::uint64_t cols = get_u32(bytes, 8);
    if (rows == 0 || cols == 0) throw ParseError("EMB1: rows and cols must be positive");
    const std::uint64_t expected = rows * cols * 4;
    if (bytes.size() - kHeaderBytes != expected) {
        throw ParseError("EMB1: payload is " + std::to_string(bytes.size() - kHeaderBytes) + " bytes, header implies " +
                         std::to_string(expected));
    }
    std::vector<double> data(rows * cols);
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, kHeaderBytes + 4 * i)));
    }
    return {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(data)};
}

EmbeddingMatrix read_emb1(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_emb1(bytes);
    } catch (const Error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_emb1(const std::filesystem::path& path, const EmbeddingMatrix& m) {
    const auto bytes = encode_emb1(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ParseError("failed writing " + path.string());
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ParseError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

AnswerDistribution parse_distribution(const json& doc) {
    check_object(doc, "distribution", {"schema", "source", "probabilities", "samples", "sample_count"}, {"schema"});
    check_schema(doc, kDistributionSchema);
    if (doc.contains("probabilities") == doc.contains("samples")) {
        throw ParseError("distribution: exactly one of 'probabilities' or 'samples' is required");
    }
    AnswerDistribution dist;
    if (doc.contains("samples")) {
        if (doc.contains("source") || doc.contains("sample_count")) {
            throw ParseError("distribution: 'source' and 'sample_count' are implied by 'samples'");
        }
        const json& s = doc.at("samples");
        if (!s.is_array()) throw ParseError("distribution: 'samples' must be an array of strings");
        std::vector<std::string> samples;
        for (const auto& v : s) samples.push_back(get_string(v, "sample"));
        dist = AnswerDistribution::from_samples(samples);
    } else {
        dist.probabilities = get_probability_map(doc.at("probabilities"), "probability");
        const std::string source = doc.contains("source") ? get_string(doc.at("source"), "source") : "exact";
        if (source == "exact") {
            if (doc.contains("sample_count")) throw ParseError("distribution: exact source takes no sample_count");
        } else if (source == "empirical") {
            dist.source = AnswerDistribution::Source::empirical;
            if (!doc.contains("sample_count")) throw ParseError("distribution: empirical source needs sample_count");
            dist.sample_count = get_uint(doc.at("sample_count"), "sample_count");
        } else {
            throw ParseError("distribution: unknown source '" + source + "'");
        }
    }
    dist.validate();
    return dist;
}

json to_json(const AnswerDistribution& dist) {
    json out;
    out["schema"] = kDistributionSchema;
    out["probabilities"] = dist.probabilities;
    if (dist.source == AnswerDistribution::Source::empirical) {
        out["source"] = "empirical";
        out["sample_count"] = dist.sample_count;
    } else {
        out["source"] = "exact";
    }
    return out;
}

std::vector<ChainOutcome> parse_outcomes(const json& doc) {
    check_object(doc, "outcomes", {"schema", "outcomes"}, {"schema", "outcomes"});
    check_schema(doc, kOutcomesSchema);
    const json& arr = doc.at("outcomes");
    if (!arr.is_array()) throw ParseError("outcomes: 'outcomes' must be an array");
    std::vector<ChainOutcome> out;
    out.reserve(arr.size());
    for (const auto& item : arr) {
        check_object(item, "outcome", {"chain_id", "answer", "tokens_used"}, {"chain_id", "answer", "tokens_used"});
        const json& id = item.at("chain_id");
        if (!id.is_number_integer()) throw ParseError("outcome: chain_id must be an integer");
        out.push_back({id.get<std::int64_t>(), get_string(item.at("answer"), "answer"),
                       get_uint(item.at("tokens_used"), "tokens_used")});
    }
    return out;
}

json to_json(std::span<const ChainOutcome> outcomes) {
    json arr = json::array();
    for (const auto& o : outcomes) {
        arr.push_back({{"chain_id", o.chain_id}, {"answer", o.answer}, {"tokens_used", o.tokens_used}});
    }
    return {{"schema", kOutcomesSchema}, {"outcomes", std::move(arr)}};
}

PolicyDocument parse_policy(const json& doc) {
    check_object(doc, "policy", {"schema", "delta_entropy", "k_max", "budget", "budget_frac", "lambda", "jitter"},
                 {"schema"});
    check_schema(doc, kPolicySchema);
    PolicyDocument p;
    if (doc.contains("delta_entropy")) p.policy.delta_entropy = get_number(doc.at("delta_entropy"), "delta_entropy");
    if (doc.contains("k_max")) p.policy.k_max = get_uint(doc.at("k_max"), "k_max");
    if (doc.contains("budget")) p.budget = get_uint(doc.at("budget"), "budget");
    if (doc.contains("budget_frac")) p.budget_frac = get_number(doc.at("budget_frac"), "budget_frac");
    if (doc.contains("lambda")) p.lambda = get_number(doc.at("lambda"), "lambda");
    if (doc.contains("jitter")) p.jitter_scale = get_number(doc.at("jitter"), "jitter");
    p.policy.validate();
    if (!(p.budget_frac > 0.0 && p.budget_frac <= 1.0)) throw ParseError("policy: budget_frac must lie in (0, 1]");
    if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) throw ParseError("policy: lambda must lie in [0, 1]");
    if (p.jitter_scale < 0.0) throw ParseError("policy: jitter must be nonnegative");
    return p;
}

json to_json(const PolicyDocument& p) {
    json out{{"schema", kPolicySchema},
             {"delta_entropy", p.policy.delta_entropy},
             {"k_max", p.policy.k_max},
             {"budget_frac", p.budget_frac},
             {"lambda", p.lambda},
             {"jitter", p.jitter_scale}};
    if (p.budget) out["budget"] = *p.budget;
    return out;
}

TraceDocument parse_trace(const json& doc) {
    check_object(doc, "trace", {"schema", "visual", "steps", "final_answer"},
                 {"schema", "visual", "steps", "final_answer"});
    check_schema(doc, kTraceSchema);
    TraceDocument t;
    t.visual = get_string(doc.at("visual"), "visual");
    t.final_answer = get_string(doc.at("final_answer"), "final_answer");
    const json& steps = doc.at("steps");
    if (!steps.is_array()) throw ParseError("trace: 'steps' must be an array");
    for (const auto& s : steps) {
        check_object(s, "trace step", {"text", "distribution", "entropy", "selected"}, {"text", "distribution"});
        TraceStepDocument step;
        step.text = get_string(s.at("text"), "text");
        step.distribution.probabilities = get_probability_map(s.at("distribution"), "probability");
        step.distribution.validate();
        if (s.contains("entropy")) step.entropy = get_number(s.at("entropy"), "entropy");
        if (s.contains("selected")) {
            const json& sel = s.at("selected");
            if (!sel.is_array()) throw ParseError("trace step: 'selected' must be an array");
            std::vector<std::size_t> idx;
            for (const auto& v : sel) idx.push_back(get_uint(v, "selected index"));
            step.selected = std::move(idx);
        }
        t.steps.push_back(std::move(step));
    }
    return t;
}

json to_json(const TraceDocument& t) {
    json steps = json::array();
    for (const auto& s : t.steps) {
        json j{{"text", s.text}, {"distribution", s.distribution.probabilities}};
        if (s.entropy) j["entropy"] = *s.entropy;
        if (s.selected) j["selected"] = *s.selected;
        steps.push_back(std::move(j));
    }
    return {{"schema", kTraceSchema}, {"visual", t.visual}, {"steps", std::move(steps)}, {"final_answer", t.final_answer}};
}

RecordedTraceAdapter::RecordedTraceAdapter(std::filesystem::path dir, TraceDocument doc)
    : dir_(std::move(dir)), doc_(std::move(doc)) {}

RecordedTraceAdapter RecordedTraceAdapter::load(const std::filesystem::path& dir) {
    return {dir, parse_trace(read_json(dir / "trace.json"))};
}

EmbeddingMatrix RecordedTraceAdapter::visual() const { return read_emb1(dir_ / doc_.visual); }

EmbeddingMatrix RecordedTraceAdapter::next_step(const TraceRecord& trace) {
    const std::size_t k = trace.steps.size();
    if (k >= doc_.steps.size()) {
        throw std::runtime_error("recorded trace ends after " + std::to_string(doc_.steps.size()) + " steps");
    }
    return read_emb1(dir_ / doc_.steps[k].text);
}

AnswerDistribution RecordedTraceAdapter::answer_distribution(const TraceRecord& trace) {
    const std::size_t k = trace.steps.size();
    if (k == 0 || k > doc_.steps.size()) throw std::runtime_error("no recorded distribution for this step");
    return doc_.steps[k - 1].distribution;
}

std::string RecordedTraceAdapter::final_answer(const TraceRecord&) { return doc_.final_answer; }

json selection_report(const Selection& sel, const KernelFactor& k, double jitter_scale) {
    json out{{"schema", kSelectReportSchema},
             {"strategy", std::string(to_string(sel.config.strategy))},
             {"tokens", k.size()},
             {"text_tokens", k.text_rows()},
             {"budget", sel.config.budget},
             {"jitter_scale", jitter_scale},
             {"jitter", k.jitter()}};
    if (sel.config.strategy == Strategy::dpp_greedy) out["lambda"] = sel.config.lambda;
    if (sel.config.strategy == Strategy::random) out["seed"] = sel.config.seed;
    out.update(selection_fields(sel));
    return out;
}

json decomposition_report(const DecompositionReport& rep, std::span<const std::size_t> subset, double jitter) {
    return {{"schema", kDecomposeReportSchema},
            {"subset", std::vector<std::size_t>(subset.begin(), subset.end())},
            {"jitter", jitter},
            {"relevance_sum", rep.relevance_sum},
            {"diversity_logdet", rep.diversity_logdet},
            {"total_logdet", rep.total_logdet},
            {"residual", rep.residual},
            {"degenerate", rep.degenerate}};
}

json vote_report(const VoteResult& vote) {
    return {{"schema", kVoteReportSchema},       {"winner", vote.winner},
            {"counts", vote.counts},             {"admitted_chains", vote.admitted_chains},
            {"budget_used", vote.budget_used},   {"tie", vote.tie}};
}

}  // namespace visref::io
