#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tnss/llm.hpp"
#include "tnss/search.hpp"

namespace tnss {

/// Flat run configuration; maps one-to-one onto CLI flags and key=value
/// config-file entries. A zero r_max means "derive from the data shape".
struct RunConfig {
    std::string dataset;
    std::string algorithm = "tnale";  ///< tnls | tnale | tnllm | hybrid | exhaustive
    double lambda = 10.0;
    int max_evals = 500;
    int patience = 5;
    double delta = 0.0;
    int r_max = 0;
    std::uint64_t seed = 0;
    std::string out_dir = "run-out";
    double train_fraction = 0.8;
    std::string init_ranks;  ///< comma list; empty -> all-ones
    std::string test_dataset;

    int fit_max_iters = 500;
    double fit_tolerance = 1e-6;
    int fit_restarts = 1;

    int n_sample = 4;           // tnls
    double perturb_prob = 0.5;  // tnls
    int radius = 1;             // tnale
    int rounds = 1;             // tnale

    int llm_budget = 10;              // hybrid
    std::string hybrid_local = "tnale";  ///< local phase of hybrid: tnale | tnls
    std::string endpoint;
    std::string model;
    double temperature = 0.2;
    std::string api_key_env = "LLM_API_KEY";
    int timeout_s = 120;
    int retries = 2;
    std::string scripted_replies;  ///< JSON array of canned replies; offline mode
    std::string domain_info;       ///< JSON DomainInfo; empty -> sizes only
    std::string templates_dir;     ///< empty -> built-in prompt templates
};

struct RunLogRecord {
    int eval_index = 0;
    std::vector<int> ranks;
    double phi = 0.0;
    double mean_relative_error = 0.0;
    double objective = 0.0;
    SourceTag source = SourceTag::Init;
    std::string timestamp;
    std::string explanation_ref;  ///< "explanations.md#eval-N" for LLM proposals
};

/// One JSON line; timestamps are optional so logs can be compared across
/// reruns.
std::string record_to_json(const RunLogRecord& record, bool with_timestamp = true);

RunLogRecord record_from_json(const std::string& line);

/// Default rank bound for a data shape: 2 * sqrt(max extent), rounded,
/// clamped to [1, 32].
int default_r_max(std::span<const std::size_t> shape);

/// Everything a run produces before it is written to disk.
struct RunArtifacts {
    SearchState state;
    std::optional<DialogueState> dialogue;
    std::vector<RunLogRecord> records;
    EvaluationResult best;
    std::optional<EvaluationResult> test_result;
    int evals_to_best = 0;
};

/// Execute the configured algorithm on the train split and collect logs;
/// pure apart from reading the dataset/scripts/domain files.
RunArtifacts execute_run(const RunConfig& config);

/// Run and persist run.jsonl, best.json, and (for LLM modes)
/// explanations.md under out_dir. Returns the process exit code.
int cmd_run(const RunConfig& config);

/// Summarize a run directory: best objectives, evals-to-best, the best-so-far
/// curve as CSV, and explanation excerpts. Returns the process exit code.
int cmd_report(const std::string& run_dir);

}  // namespace tnss
