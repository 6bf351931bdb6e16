#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tnss/objective.hpp"
#include "tnss/search.hpp"
#include "tnss/structure.hpp"
#include "tnss/tensor.hpp"

namespace tnss {

struct ModeInfo {
    std::string name;
    std::size_t size = 0;
    std::string description;
};

/// What the model is told about the data: one entry per tensor mode plus an
/// optional dataset-level blurb. With domain_aware off only the sizes are
/// rendered (the ablation mode), and descriptions may be empty.
struct DomainInfo {
    std::vector<ModeInfo> modes;
    std::string dataset_description;
    bool domain_aware = true;
};

/// Read a DomainInfo from a JSON file: {"modes": [{"name", "size",
/// "description"}...], "dataset_description"?, "domain_aware"?}.
DomainInfo load_domain_info(const std::string& path);

/// Throws ConfigError unless the domain matches the data shape and, in
/// domain-aware mode, every mode carries a description.
void validate_domain(const DomainInfo& domain, std::span<const std::size_t> shape);

enum class ChatRole { System, User, Assistant };

std::string to_string(ChatRole role);

struct ChatMessage {
    ChatRole role;
    std::string content;
};

/// Chat-completion backend. complete() validates the transcript (non-empty,
/// system message first) and serializes calls so at most one request is in
/// flight; backends implement do_complete.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    std::string complete(const std::vector<ChatMessage>& transcript);

protected:
    virtual std::string do_complete(const std::vector<ChatMessage>& transcript) = 0;

private:
    std::mutex in_flight_;
};

/// Canned replies consumed in order; running past the end throws.
class ScriptedChatClient final : public ChatClient {
public:
    explicit ScriptedChatClient(std::vector<std::string> replies);
    std::size_t remaining() const { return replies_.size() - next_; }

protected:
    std::string do_complete(const std::vector<ChatMessage>& transcript) override;

private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
};

struct LLMClientConfig {
    std::string endpoint;  ///< full URL, e.g. https://host/v1/chat/completions
    std::string model;
    double temperature = 0.2;
    int timeout_s = 120;
    int retries = 2;            ///< transport retries beyond the first attempt
    int retry_base_ms = 250;    ///< backoff starts here and doubles per retry
    std::string api_key_env = "LLM_API_KEY";
};

/// Live HTTP backend speaking the {model, temperature, messages} JSON wire
/// format; the reply is choices[0].message.content. Transport failures are
/// retried with exponential backoff; HTTP error statuses are not retried.
class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(LLMClientConfig config);

protected:
    std::string do_complete(const std::vector<ChatMessage>& transcript) override;

private:
    LLMClientConfig config_;
};

/// The three directive templates. Placeholders use {name} syntax; the
/// documented set is tensor_order, mode_table, lambda, rank_bounds,
/// best_structure, best_objective, last_structure, last_objective,
/// format_spec.
struct PromptTemplates {
    std::string behavior;      ///< system message
    std::string task;          ///< first user message (initialization)
    std::string optimization;  ///< iterative user message (discovery)

    static PromptTemplates defaults();

    /// Load behavior.txt / task.txt / optimization.txt from a directory,
    /// falling back to the default for any file that is absent.
    static PromptTemplates load_dir(const std::string& dir);
};

/// Substitute {name} placeholders; any unresolved {identifier} left after
/// substitution throws TemplateError naming it.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);

/// The output-format block embedded verbatim at the end of prompts.
std::string default_format_spec(std::size_t order, int r_max);

std::string render_behavior_prompt(double lambda, const PromptTemplates& templates);

std::string render_task_prompt(const DomainInfo& domain, std::span<const std::size_t> shape,
                               int r_max, const std::string& format_spec,
                               const PromptTemplates& templates);

/// `feedback` is prepended as its own paragraph when non-empty (used to tell
/// the model a proposal could not be evaluated).
std::string render_optimization_prompt(const EvaluationResult& best,
                                       const EvaluationResult& last, const DomainInfo& domain,
                                       const std::string& format_spec,
                                       const PromptTemplates& templates,
                                       const std::string& feedback = "");

struct ParsedSolution {
    TNStructure structure;
    std::string reasoning;
};

/// Find the last line starting with "RANKS:" and parse its bracketed integer
/// list. Arity must be order*(order-1)/2 and every value must lie in
/// [1, r_max]; out-of-bounds values are an error, never clipped. Everything
/// before that line is the reasoning text.
ParsedSolution parse_solution(const std::string& reply, std::size_t order, int r_max);

struct DialogueState {
    std::vector<ChatMessage> transcript;
    std::optional<EvaluationResult> best;
    std::optional<EvaluationResult> last;
    /// (eval_index, reasoning) per successfully evaluated proposal, verbatim.
    std::vector<std::pair<int, std::string>> explanations;
    /// Parse failures and skipped proposals, for the run log.
    std::vector<std::string> notes;
    int evals_used = 0;
};

struct LlmSearchConfig {
    StoppingConfig stopping;
    double lambda = 10.0;
    FitConfig fit;
    int r_max = 8;
    PromptTemplates templates = PromptTemplates::defaults();
    std::string format_spec;  ///< empty -> default_format_spec(order, r_max)
};

struct LlmSearchResult {
    SearchState search;
    DialogueState dialogue;
};

/// The dialogue-driven search: behavior + task prompt propose the initial
/// structure, then optimization prompts carry the (best, last) memory until
/// the evaluation budget or the patience (counted per proposal) runs out.
/// Unparseable replies get one re-prompt repeating the format spec; a second
/// failure skips that iteration. Proposals repeating a cached structure cost
/// no evaluation.
LlmSearchResult run_llm_search(const TensorDataset& train, const DomainInfo& domain,
                               ChatClient& client, const LlmSearchConfig& config,
                               EvalCache& cache);

struct HybridConfig {
    int llm_budget = 10;  ///< evaluations granted to the dialogue phase
    StoppingConfig stopping;
    double lambda = 10.0;
    FitConfig fit;
    int r_max = 8;
    PromptTemplates templates = PromptTemplates::defaults();
    SearchStrategy local_strategy = SearchStrategy::Alternating;
    NeighborhoodConfig neighborhood;
    EnumConfig enumeration;
};

struct HybridResult {
    SearchState search;
    DialogueState dialogue;
};

/// Dialogue phase capped at llm_budget evaluations, then local search seeded
/// with its best structure. Both phases draw on one cache, so the shared
/// max_evals budget covers their sum; the returned history concatenates both
/// phases.
HybridResult hybrid_search(const TensorDataset& train, const DomainInfo& domain,
                           ChatClient& client, const HybridConfig& config, EvalCache& cache);

}  // namespace tnss
