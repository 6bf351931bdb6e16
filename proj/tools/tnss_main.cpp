#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tnss/bundle.hpp"
#include "tnss/runner.hpp"
#include "tnss/structure.hpp"

namespace {

std::vector<std::size_t> parse_shape(const std::string& csv) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        const std::string tok = csv.substr(pos, comma - pos);
        try {
            const long v = std::stol(tok);
            if (v < 1) throw std::invalid_argument("non-positive");
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw tnss::ConfigError("invalid shape entry '" + tok + "' in '" + csv + "'");
        }
        pos = comma + 1;
    }
    return out;
}

std::vector<int> parse_ranks(const std::string& csv) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        const std::string tok = csv.substr(pos, comma - pos);
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw tnss::ConfigError("invalid rank entry '" + tok + "' in '" + csv + "'");
        }
        pos = comma + 1;
    }
    return out;
}

std::size_t order_for_pairs(std::size_t pairs) {
    for (std::size_t n = 2; n <= 64; ++n)
        if (tnss::TNStructure::num_pairs(n) == pairs) return n;
    throw tnss::ConfigError("rank list length " + std::to_string(pairs) +
                            " is not N*(N-1)/2 for any order N");
}

std::string trimmed_copy(const std::string& text) {
    const std::size_t first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const std::size_t last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
}

// Expand `run --config FILE` into ordinary --key=value tokens. The expansion
// is inserted right after the subcommand name and explicit flags keep their
// position, so with take-last option semantics the command line wins over the
// file.
std::vector<std::string> expand_run_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args.front() != "run") return args;

    std::string config_file;
    for (std::size_t k = 1; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size())
            config_file = args[k + 1];
        else if (args[k].rfind("--config=", 0) == 0)
            config_file = args[k].substr(std::string("--config=").size());
    }
    if (config_file.empty()) return args;

    std::ifstream in(config_file);
    if (!in) throw tnss::IoError("cannot open config file: " + config_file);

    std::vector<std::string> expanded{"run"};
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::string entry = trimmed_copy(line);
        if (entry.empty() || entry.front() == '#') continue;
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos || eq == 0)
            throw tnss::ConfigError("config file " + config_file + " line " +
                                    std::to_string(line_number) +
                                    " is not a key=value entry: " + entry);
        const std::string key = trimmed_copy(entry.substr(0, eq));
        std::string value = trimmed_copy(entry.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        expanded.push_back("--" + key + "=" + value);
    }
    expanded.insert(expanded.end(), args.begin() + 1, args.end());
    return expanded;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tensor network structure search"};
    app.require_subcommand(1);

    tnss::RunConfig config;
    std::string config_file;
    auto* run = app.add_subcommand("run", "Execute a structure search");
    // Take-last lets a config-file entry and an explicit flag coexist; the
    // later (explicit) occurrence wins.
    run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    run->add_option("--config", config_file,
                    "Config file with key=value lines; explicit flags override it");
    run->add_option("--dataset", config.dataset, "Tensor bundle directory");
    run->add_option("--algorithm", config.algorithm, "tnls | tnale | tnllm | hybrid | exhaustive");
    run->add_option("--lambda", config.lambda, "Error weight in the objective");
    run->add_option("--max-evals", config.max_evals, "Evaluation budget");
    run->add_option("--patience", config.patience, "Early-stop patience");
    run->add_option("--delta", config.delta, "Early-stop minimum improvement");
    run->add_option("--r-max", config.r_max, "Rank upper bound (0 = derive from shape)");
    run->add_option("--seed", config.seed, "Base RNG seed");
    run->add_option("--out-dir", config.out_dir, "Output directory");
    run->add_option("--train-fraction", config.train_fraction, "Train split fraction");
    run->add_option("--init-ranks", config.init_ranks, "Comma list; default all-ones");
    run->add_option("--test-dataset", config.test_dataset, "Bundle for the test objective");
    run->add_option("--fit-max-iters", config.fit_max_iters, "Inner fit iteration cap");
    run->add_option("--fit-tolerance", config.fit_tolerance, "Inner fit loss tolerance");
    run->add_option("--fit-restarts", config.fit_restarts, "Inner fit restarts");
    run->add_option("--n-sample", config.n_sample, "Neighborhood batch size (tnls)");
    run->add_option("--perturb-prob", config.perturb_prob, "Per-rank perturbation probability");
    run->add_option("--radius", config.radius, "Enumeration radius (tnale)");
    run->add_option("--rounds", config.rounds, "Alternation rounds per iteration (tnale)");
    run->add_option("--llm-budget", config.llm_budget, "LLM-phase evaluations (hybrid)");
    run->add_option("--hybrid-local", config.hybrid_local, "Local phase of hybrid: tnale | tnls");
    run->add_option("--endpoint", config.endpoint, "Chat-completion endpoint URL");
    run->add_option("--model", config.model, "Model identifier");
    run->add_option("--temperature", config.temperature, "Sampling temperature");
    run->add_option("--api-key-env", config.api_key_env, "Env var holding the API key");
    run->add_option("--timeout", config.timeout_s, "HTTP timeout in seconds");
    run->add_option("--retries", config.retries, "HTTP transport retries");
    run->add_option("--scripted-replies", config.scripted_replies,
                    "JSON array of canned replies (offline mode)");
    run->add_option("--domain-info", config.domain_info, "Domain description JSON");
    run->add_option("--templates-dir", config.templates_dir, "Prompt template directory");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Summarize a run directory");
    report->add_option("dir", report_dir, "Run directory")->required();

    std::string gen_shape, gen_ranks, gen_out, gen_names;
    std::size_t gen_samples = 8;
    double gen_noise = 0.0;
    std::uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("gen-synthetic", "Write a planted synthetic bundle");
    gen->add_option("--shape", gen_shape, "Comma list, e.g. 6,6,6")->required();
    gen->add_option("--ranks", gen_ranks, "Planted ranks, upper-triangular order")->required();
    gen->add_option("--samples", gen_samples, "Number of samples");
    gen->add_option("--noise", gen_noise, "Gaussian noise sigma");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "Output bundle directory")->required();
    gen->add_option("--mode-names", gen_names, "Comma list of mode names");

    std::string split_in, split_train, split_test;
    double split_frac = 0.8;
    auto* split = app.add_subcommand("split", "Split a bundle into train/test bundles");
    split->add_option("bundle", split_in, "Input bundle directory")->required();
    split->add_option("--frac", split_frac, "Train fraction");
    split->add_option("--out-train", split_train, "Train bundle directory")->required();
    split->add_option("--out-test", split_test, "Test bundle directory")->required();

    try {
        std::vector<std::string> args = expand_run_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*run) return tnss::cmd_run(config);
        if (*report) return tnss::cmd_report(report_dir);
        if (*gen) {
            const auto shape = parse_shape(gen_shape);
            const auto ranks = parse_ranks(gen_ranks);
            tnss::TNStructure planted(shape.size(), ranks);
            auto dataset =
                tnss::generate_synthetic(shape, planted, gen_samples, gen_noise, gen_seed);
            std::vector<std::string> names;
            if (!gen_names.empty()) {
                std::size_t pos = 0;
                while (pos <= gen_names.size()) {
                    std::size_t comma = gen_names.find(',', pos);
                    if (comma == std::string::npos) comma = gen_names.size();
                    names.push_back(gen_names.substr(pos, comma - pos));
                    pos = comma + 1;
                }
            }
            tnss::save_bundle(dataset, gen_out, names, ranks);
            std::cout << "wrote " << dataset.num_samples() << " samples to " << gen_out << "\n";
            return 0;
        }
        if (*split) {
            auto dataset = tnss::load_bundle(split_in);
            auto [train, test] = tnss::split_dataset(dataset, split_frac);
            tnss::save_bundle(train, split_train);
            tnss::save_bundle(test, split_test);
            std::cout << "wrote " << train.num_samples() << " train / " << test.num_samples()
                      << " test samples\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
