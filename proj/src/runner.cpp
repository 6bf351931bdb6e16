#include "tnss/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "tnss/bundle.hpp"

namespace tnss {
namespace {

SourceTag source_from_string(const std::string& s) {
    if (s == "init") return SourceTag::Init;
    if (s == "neighborhood") return SourceTag::Neighborhood;
    if (s == "enumeration") return SourceTag::Enumeration;
    if (s == "llm") return SourceTag::Llm;
    throw Error("unknown source tag: " + s);
}

std::string iso_timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<int> parse_int_list(const std::string& csv, const std::string& what) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ConfigError("invalid " + what + " entry '" + tok + "' in '" + csv + "'");
        }
    }
    if (out.empty()) throw ConfigError(what + " list is empty");
    return out;
}

std::vector<std::string> load_scripted_replies(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scripted replies file: " + path);
    try {
        return nlohmann::json::parse(in).get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed scripted replies file " + path + ": " + e.what());
    }
}

DomainInfo sizes_only_domain(std::span<const std::size_t> shape) {
    DomainInfo out;
    out.domain_aware = false;
    for (std::size_t k = 0; k < shape.size(); ++k)
        out.modes.push_back({"Mode " + std::to_string(k + 1), shape[k], ""});
    return out;
}

struct Splits {
    TensorDataset train;
    std::optional<TensorDataset> test;
};

Splits prepare_splits(const RunConfig& config) {
    TensorDataset data = load_bundle(config.dataset);
    switch (data.tag()) {
        case SplitTag::Unsplit: {
            auto [train, test] = split_dataset(data, config.train_fraction);
            return {std::move(train), std::move(test)};
        }
        case SplitTag::Train: {
            std::optional<TensorDataset> test;
            if (!config.test_dataset.empty()) {
                TensorDataset t = load_bundle(config.test_dataset);
                if (t.shape() != data.shape())
                    throw ConfigError("test dataset shape does not match train dataset");
                test = std::move(t);
            }
            return {std::move(data), std::move(test)};
        }
        case SplitTag::Test:
            throw ConfigError("dataset is tagged as a test split; refusing to train on it");
    }
    throw Error("unreachable");
}

TNStructure initial_structure(const RunConfig& config, std::size_t order) {
    if (config.init_ranks.empty()) return TNStructure::all_ones(order);
    return TNStructure(order, parse_int_list(config.init_ranks, "init_ranks"));
}

}  // namespace

int default_r_max(std::span<const std::size_t> shape) {
    std::size_t largest = 1;
    for (std::size_t d : shape) largest = std::max(largest, d);
    const int bound =
        static_cast<int>(std::lround(2.0 * std::sqrt(static_cast<double>(largest))));
    return std::clamp(bound, 1, 32);
}

std::string record_to_json(const RunLogRecord& record, bool with_timestamp) {
    nlohmann::ordered_json j;
    j["eval_index"] = record.eval_index;
    j["ranks"] = record.ranks;
    j["phi"] = record.phi;
    j["mean_relative_error"] = record.mean_relative_error;
    j["objective"] = record.objective;
    j["source"] = to_string(record.source);
    if (with_timestamp) j["timestamp"] = record.timestamp;
    if (!record.explanation_ref.empty()) j["explanation"] = record.explanation_ref;
    return j.dump();
}

RunLogRecord record_from_json(const std::string& line) {
    RunLogRecord r;
    try {
        const auto j = nlohmann::json::parse(line);
        r.eval_index = j.at("eval_index").get<int>();
        r.ranks = j.at("ranks").get<std::vector<int>>();
        r.phi = j.at("phi").get<double>();
        r.mean_relative_error = j.at("mean_relative_error").get<double>();
        r.objective = j.at("objective").get<double>();
        r.source = source_from_string(j.at("source").get<std::string>());
        r.timestamp = j.value("timestamp", "");
        r.explanation_ref = j.value("explanation", "");
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed run log record: ") + e.what());
    }
    return r;
}

RunArtifacts execute_run(const RunConfig& config) {
    static const std::vector<std::string> kAlgorithms = {"tnls", "tnale", "tnllm", "hybrid",
                                                         "exhaustive"};
    if (std::find(kAlgorithms.begin(), kAlgorithms.end(), config.algorithm) ==
        kAlgorithms.end())
        throw ConfigError("unknown algorithm '" + config.algorithm +
                          "' (expected tnls, tnale, tnllm, hybrid, or exhaustive)");
    if (config.dataset.empty()) throw ConfigError("dataset path is required");

    Splits splits = prepare_splits(config);
    const TensorDataset& train = splits.train;
    const std::size_t order = train.order();

    const int r_max = config.r_max > 0 ? config.r_max : default_r_max(train.shape());
    FitConfig fit;
    fit.max_iters = config.fit_max_iters;
    fit.tolerance = config.fit_tolerance;
    fit.restarts = config.fit_restarts;
    fit.seed = config.seed;
    const StoppingConfig stopping{config.max_evals, config.patience, config.delta};

    const bool llm_mode = config.algorithm == "tnllm" || config.algorithm == "hybrid";
    std::unique_ptr<ChatClient> client;
    DomainInfo domain;
    PromptTemplates templates = PromptTemplates::defaults();
    if (llm_mode) {
        if (!config.scripted_replies.empty()) {
            client = std::make_unique<ScriptedChatClient>(
                load_scripted_replies(config.scripted_replies));
        } else {
            if (config.endpoint.empty() || config.model.empty())
                throw ConfigError(config.algorithm +
                                  " needs an endpoint and model, or scripted replies");
            LLMClientConfig lc;
            lc.endpoint = config.endpoint;
            lc.model = config.model;
            lc.temperature = config.temperature;
            lc.timeout_s = config.timeout_s;
            lc.retries = config.retries;
            lc.api_key_env = config.api_key_env;
            client = std::make_unique<HttpChatClient>(std::move(lc));
        }
        domain = config.domain_info.empty() ? sizes_only_domain(train.shape())
                                            : load_domain_info(config.domain_info);
        if (!config.templates_dir.empty())
            templates = PromptTemplates::load_dir(config.templates_dir);
    }

    EvalCache cache;
    RunArtifacts out;
    if (config.algorithm == "exhaustive") {
        ExhaustiveConfig ec{r_max, config.lambda, fit, 10000};
        EvaluationResult best = exhaustive_search(train, order, ec, cache);
        out.state.center = best.structure;
        out.state.best = best;
        out.state.history = cache.results_in_order();
        out.state.evals_used = cache.evaluations();
        out.state.iterations_done = cache.evaluations();
    } else if (config.algorithm == "tnls" || config.algorithm == "tnale") {
        LocalSearchConfig lc;
        lc.strategy = config.algorithm == "tnls" ? SearchStrategy::Neighborhood
                                                 : SearchStrategy::Alternating;
        lc.neighborhood = {config.n_sample, config.perturb_prob, r_max, config.seed};
        lc.enumeration = {config.radius, config.rounds, r_max};
        lc.stopping = stopping;
        lc.lambda = config.lambda;
        lc.fit = fit;
        out.state = run_local_search(train, initial_structure(config, order), lc, cache);
    } else if (config.algorithm == "tnllm") {
        LlmSearchConfig sc;
        sc.stopping = stopping;
        sc.lambda = config.lambda;
        sc.fit = fit;
        sc.r_max = r_max;
        sc.templates = templates;
        LlmSearchResult r = run_llm_search(train, domain, *client, sc, cache);
        out.state = std::move(r.search);
        out.dialogue = std::move(r.dialogue);
    } else {  // hybrid
        if (config.hybrid_local != "tnale" && config.hybrid_local != "tnls")
            throw ConfigError("hybrid_local must be tnale or tnls, got '" +
                              config.hybrid_local + "'");
        HybridConfig hc;
        hc.llm_budget = config.llm_budget;
        hc.stopping = stopping;
        hc.lambda = config.lambda;
        hc.fit = fit;
        hc.r_max = r_max;
        hc.templates = templates;
        hc.local_strategy = config.hybrid_local == "tnls" ? SearchStrategy::Neighborhood
                                                          : SearchStrategy::Alternating;
        hc.neighborhood = {config.n_sample, config.perturb_prob, r_max, config.seed};
        hc.enumeration = {config.radius, config.rounds, r_max};
        HybridResult r = hybrid_search(train, domain, *client, hc, cache);
        out.state = std::move(r.search);
        out.dialogue = std::move(r.dialogue);
    }

    out.best = out.state.best;

    const std::string timestamp = iso_timestamp_utc();
    for (const auto& e : cache.results_in_order()) {
        RunLogRecord rec;
        rec.eval_index = e.eval_index;
        rec.ranks = e.structure.ranks();
        rec.phi = e.phi;
        rec.mean_relative_error = e.mean_relative_error;
        rec.objective = e.objective;
        rec.source = e.source;
        rec.timestamp = timestamp;
        if (out.dialogue) {
            for (const auto& [idx, text] : out.dialogue->explanations)
                if (idx == e.eval_index) {
                    rec.explanation_ref = "explanations.md#eval-" + std::to_string(idx);
                    break;
                }
        }
        out.records.push_back(std::move(rec));
    }

    out.evals_to_best = 0;
    for (const auto& rec : out.records)
        if (rec.objective == out.best.objective) {
            out.evals_to_best = rec.eval_index;
            break;
        }

    if (splits.test) {
        EvalCache test_cache;
        out.test_result = evaluate_structure(*splits.test, out.best.structure, config.lambda,
                                             fit, test_cache, out.best.source);
    }
    return out;
}

int cmd_run(const RunConfig& config) {
    RunArtifacts artifacts = execute_run(config);
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);

    {
        std::ofstream log(dir / "run.jsonl");
        if (!log) throw IoError("cannot write " + (dir / "run.jsonl").string());
        for (const auto& rec : artifacts.records) log << record_to_json(rec) << "\n";
    }

    {
        nlohmann::ordered_json best;
        best["ranks"] = artifacts.best.structure.ranks();
        best["order"] = artifacts.best.structure.order();
        best["objective_train"] = artifacts.best.objective;
        best["mean_relative_error_train"] = artifacts.best.mean_relative_error;
        best["phi"] = artifacts.best.phi;
        best["params"] = artifacts.best.params;
        if (artifacts.test_result) {
            best["objective_test"] = artifacts.test_result->objective;
            best["mean_relative_error_test"] = artifacts.test_result->mean_relative_error;
        }
        best["evals_used"] = artifacts.state.evals_used;
        best["evals_to_best"] = artifacts.evals_to_best;
        best["iterations"] = artifacts.state.iterations_done;
        best["settings"] = {{"algorithm", config.algorithm},
                            {"lambda", config.lambda},
                            {"max_evals", config.max_evals},
                            {"patience", config.patience},
                            {"delta", config.delta},
                            {"r_max", config.r_max},
                            {"seed", config.seed},
                            {"recenter_policy", "after each variable"}};
        std::ofstream bj(dir / "best.json");
        if (!bj) throw IoError("cannot write " + (dir / "best.json").string());
        bj << best.dump(2) << "\n";
    }

    if (artifacts.dialogue) {
        std::ofstream ex(dir / "explanations.md");
        if (!ex) throw IoError("cannot write " + (dir / "explanations.md").string());
        ex << "# Proposal explanations\n";
        for (const auto& [idx, text] : artifacts.dialogue->explanations) {
            ex << "\n## eval-" << idx << "\n\n";
            ex << (text.empty() ? "(no reasoning text)" : text) << "\n";
        }
        if (!artifacts.dialogue->notes.empty()) {
            ex << "\n## notes\n\n";
            for (const auto& note : artifacts.dialogue->notes) ex << "- " << note << "\n";
        }
    }

    std::cout << "best " << format_ranks(artifacts.best.structure) << " objective "
              << artifacts.best.objective << " after " << artifacts.state.evals_used
              << " evaluations (" << config.out_dir << ")\n";
    return 0;
}

int cmd_report(const std::string& run_dir) {
    const std::filesystem::path dir(run_dir);
    std::ifstream log(dir / "run.jsonl");
    if (!log) throw IoError("cannot open " + (dir / "run.jsonl").string());

    std::vector<RunLogRecord> records;
    std::string line;
    while (std::getline(log, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_json(line));
    }
    if (records.empty()) throw IoError("run log is empty: " + (dir / "run.jsonl").string());

    const auto best_it =
        std::min_element(records.begin(), records.end(),
                         [](const auto& a, const auto& b) { return a.objective < b.objective; });
    int evals_to_best = 0;
    for (const auto& r : records)
        if (r.objective == best_it->objective) {
            evals_to_best = r.eval_index;
            break;
        }

    std::cout << "evaluations: " << records.size() << "\n";
    std::cout << "best train objective: " << best_it->objective << " at ranks [";
    for (std::size_t k = 0; k < best_it->ranks.size(); ++k)
        std::cout << (k ? ", " : "") << best_it->ranks[k];
    std::cout << "]\n";

    std::ifstream bj(dir / "best.json");
    if (bj) {
        try {
            const auto j = nlohmann::json::parse(bj);
            if (j.contains("objective_test"))
                std::cout << "best test objective: " << j.at("objective_test").get<double>()
                          << "\n";
        } catch (const nlohmann::json::exception&) {
            std::cout << "(best.json unreadable)\n";
        }
    }

    std::cout << "evals to best: " << evals_to_best << "\n";
    std::cout << "best-so-far curve:\neval,objective,best_so_far\n";
    double running = records.front().objective;
    for (const auto& r : records) {
        running = std::min(running, r.objective);
        std::cout << r.eval_index << "," << r.objective << "," << running << "\n";
    }

    std::ifstream ex(dir / "explanations.md");
    if (ex) {
        std::cout << "explanation excerpts:\n";
        int shown = 0;
        while (std::getline(ex, line) && shown < 12) {
            if (line.rfind("## ", 0) == 0) {
                std::cout << "  " << line.substr(3) << "\n";
                ++shown;
            }
        }
    }
    return 0;
}

}  // namespace tnss
