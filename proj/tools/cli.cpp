// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "visref/aggregate.hpp"
#include "visref/error.hpp"
#include "visref/io.hpp"
#include "visref/kernel.hpp"
#include "visref/select.hpp"
#include "visref/stopping.hpp"

namespace visref::cli {

namespace {

using nlohmann::json;

constexpr int kExitCheckFailed = 1;

void emit(const json& doc, const std::string& out) {
    if (out.empty()) {
        std::cout << doc.dump(2) << '\n';
    } else {
        io::write_json(out, doc);
    }
}

std::vector<std::size_t> parse_subset(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            if (item.empty() || item.front() == '-') throw std::invalid_argument(item);
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            throw ParseError("invalid subset index '" + item + "'");
        }
        if (used != item.size()) throw ParseError("invalid subset index '" + item + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw ParseError("subset is empty");
    return out;
}

struct KernelArgs {
    std::string visual;
    std::string text;
    double jitter = 1e-6;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--visual", visual, "EMB1 file of visual token embeddings")->required();
        cmd->add_option("--text", text, "EMB1 file of text token embeddings")->required();
        cmd->add_option("--jitter", jitter, "jitter scale relative to mean kernel diagonal")->capture_default_str();
    }

    KernelFactor load() const {
        return build_kernel_factor(io::read_emb1(visual), io::read_emb1(text), KernelOptions{jitter, false});
    }
};

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Visual token coreset selection, entropy stopping and chain voting"};
    app.require_subcommand(1);

    // select
    KernelArgs sel_kernel;
    std::optional<std::size_t> sel_budget;
    double sel_frac = 0.3;
    std::string sel_strategy = "dpp";
    double sel_lambda = 0.5;
    std::uint64_t sel_seed = 0;
    std::string sel_out;
    auto* select_cmd = app.add_subcommand("select", "select a visual token coreset");
    sel_kernel.add_to(select_cmd);
    auto* budget_opt = select_cmd->add_option("--budget", sel_budget, "number of tokens to select");
    select_cmd->add_option("--budget-frac", sel_frac, "budget as a fraction of the token count")
        ->capture_default_str()
        ->excludes(budget_opt);
    select_cmd->add_option("--strategy", sel_strategy, "dpp | relevance | random")
        ->capture_default_str()
        ->check(CLI::IsMember({"dpp", "relevance", "random"}));
    select_cmd->add_option("--lambda", sel_lambda, "relevance weight of the greedy gain")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    select_cmd->add_option("--seed", sel_seed, "seed for the random strategy")->capture_default_str();
    select_cmd->add_option("--out", sel_out, "report path")->required();

    // decompose
    KernelArgs dec_kernel;
    std::string dec_subset;
    std::string dec_out;
    auto* decompose_cmd = app.add_subcommand("decompose", "split a subset log-determinant into relevance and diversity");
    dec_kernel.add_to(decompose_cmd);
    decompose_cmd->add_option("--subset", dec_subset, "comma-separated token indices")->required();
    decompose_cmd->add_option("--out", dec_out, "report path (default stdout)");

    // entropy
    std::string ent_dist;
    double ent_delta = 0.25;
    std::size_t ent_step = 1;
    std::size_t ent_kmax = 10;
    std::string ent_out;
    auto* entropy_cmd = app.add_subcommand("entropy", "answer entropy and stop verdict");
    entropy_cmd->add_option("--dist", ent_dist, "distribution file")->required();
    entropy_cmd->add_option("--delta", ent_delta, "entropy threshold in nats")->capture_default_str();
    entropy_cmd->add_option("--step", ent_step, "current reasoning step (1-based)")->capture_default_str();
    entropy_cmd->add_option("--k-max", ent_kmax, "step cap")->capture_default_str();
    entropy_cmd->add_option("--out", ent_out, "report path (default stdout)");

    // vote
    std::string vote_outcomes;
    std::optional<std::uint64_t> vote_budget;
    std::string vote_out;
    auto* vote_cmd = app.add_subcommand("vote", "majority vote over chain outcomes");
    vote_cmd->add_option("--outcomes", vote_outcomes, "outcomes file")->required();
    vote_cmd->add_option("--budget", vote_budget, "total token budget across chains");
    vote_cmd->add_option("--out", vote_out, "report path (default stdout)");

    // loop-replay
    std::string replay_dir;
    std::string replay_policy;
    std::string replay_out;
    auto* replay_cmd = app.add_subcommand("loop-replay", "replay a recorded trace through the refocusing loop");
    replay_cmd->add_option("--trace-dir", replay_dir, "directory holding trace.json")->required();
    replay_cmd->add_option("--policy", replay_policy, "policy file")->required();
    replay_cmd->add_option("--out", replay_out, "report path (default stdout)");

    // oracle
    KernelArgs orc_kernel;
    std::size_t orc_budget = 0;
    std::string orc_out;
    auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive log-det maximizer (small inputs only)");
    orc_kernel.add_to(oracle_cmd);
    oracle_cmd->add_option("--budget", orc_budget, "subset size")->required();
    oracle_cmd->add_option("--out", orc_out, "report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "visref: error: " << e.what() << '\n';
        return static_cast<int>(ErrorCode::parse);
    }

    try {
        if (*select_cmd) {
            const KernelFactor k = sel_kernel.load();
            SelectionConfig cfg;
            cfg.strategy = parse_strategy(sel_strategy);
            cfg.budget = sel_budget ? *sel_budget : default_budget(k.size(), sel_frac);
            cfg.lambda = sel_lambda;
            cfg.seed = sel_seed;
            const auto t0 = std::chrono::steady_clock::now();
            const Selection sel = select(k, cfg);
            const auto t1 = std::chrono::steady_clock::now();
            json report = io::selection_report(sel, k, sel_kernel.jitter);
            report["elapsed_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
            emit(report, sel_out);
        } else if (*decompose_cmd) {
            const KernelFactor k = dec_kernel.load();
            const auto subset = parse_subset(dec_subset);
            emit(io::decomposition_report(decompose(k, subset), subset, k.jitter()), dec_out);
        } else if (*entropy_cmd) {
            const AnswerDistribution dist = io::parse_distribution(io::read_json(ent_dist));
            const StoppingPolicy policy{ent_delta, ent_kmax};
            policy.validate();
            if (ent_step < 1) throw ParseError("--step must be at least 1");
            const double h = shannon_entropy(dist);
            const auto reason = should_stop(h, policy, ent_step);
            json report{{"schema", io::kEntropyReportSchema},
                        {"entropy", h},
                        {"delta_entropy", ent_delta},
                        {"step", ent_step},
                        {"k_max", ent_kmax},
                        {"verdict", reason ? "stop" : "continue"},
                        {"reason", reason ? json(std::string(to_string(*reason))) : json(nullptr)}};
            emit(report, ent_out);
        } else if (*vote_cmd) {
            const auto outcomes = io::parse_outcomes(io::read_json(vote_outcomes));
            const VoteResult vote = vote_budget ? vote_within_budget(outcomes, *vote_budget) : majority_vote(outcomes);
            emit(io::vote_report(vote), vote_out);
        } else if (*replay_cmd) {
            auto adapter = io::RecordedTraceAdapter::load(replay_dir);
            const io::PolicyDocument policy = io::parse_policy(io::read_json(replay_policy));
            const EmbeddingMatrix visual = adapter.visual();
            ControllerConfig config;
            config.policy = policy.policy;
            config.selection.lambda = policy.lambda;
            config.kernel.jitter_scale = policy.jitter_scale;
            config.budget = policy.budget ? *policy.budget : default_budget(visual.rows(), policy.budget_frac);

            const auto& recorded = adapter.document().steps;
            json report{{"schema", io::kReplayReportSchema}, {"recorded_steps", recorded.size()}};
            bool ok = true;
            std::optional<ControllerResult> result;
            try {
                result = RefocusController(adapter, visual, config).run();
            } catch (const AdapterFailure& e) {
                report["error"] = e.what();
                report["stop_step"] = nullptr;
                report["stop_matches"] = false;
                emit(report, replay_out);
                std::cerr << "visref: error: replay ran past the recorded trace\n";
                return kExitCheckFailed;
            }
            const std::size_t stop_step = result->trace.steps.size();
            report["stop_step"] = stop_step;
            report["reason"] = std::string(to_string(result->reason));
            report["answer"] = result->answer;
            report["budget"] = *config.budget;
            report["stop_matches"] = stop_step == recorded.size();
            ok = ok && stop_step == recorded.size();

            json steps = json::array();
            for (std::size_t i = 0; i < stop_step; ++i) {
                const TraceStep& s = result->trace.steps[i];
                json j{{"step", i + 1}, {"entropy", s.entropy}, {"selected", s.selection.indices}};
                if (recorded[i].entropy) {
                    const bool match = std::abs(*recorded[i].entropy - s.entropy) <= 1e-9;
                    j["entropy_matches"] = match;
                    ok = ok && match;
                }
                if (recorded[i].selected) {
                    const bool match = *recorded[i].selected == s.selection.indices;
                    j["selection_matches"] = match;
                    ok = ok && match;
                }
                steps.push_back(std::move(j));
            }
            report["steps"] = std::move(steps);
            report["ok"] = ok;
            emit(report, replay_out);
            if (!ok) {
                std::cerr << "visref: error: replay does not match the recorded trace\n";
                return kExitCheckFailed;
            }
        } else if (*oracle_cmd) {
            const KernelFactor k = orc_kernel.load();
            const auto t0 = std::chrono::steady_clock::now();
            const Selection sel = exact_select(k, orc_budget);
            const auto t1 = std::chrono::steady_clock::now();
            json report = io::selection_report(sel, k, orc_kernel.jitter);
            report["elapsed_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
            emit(report, orc_out);
        }
    } catch (const Error& e) {
        std::cerr << "visref: error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "visref: error: " << e.what() << '\n';
        return static_cast<int>(ErrorCode::numerical);
    }
    return 0;
}

}  // namespace visref::cli
