#include "tnss/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tnss {
namespace {

std::string trimmed(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string format_number(double v) {
    // Trim trailing zeros so "lambda = 10" reads naturally while non-integral
    // values keep their digits.
    if (v == static_cast<double>(static_cast<long long>(v)))
        return std::to_string(static_cast<long long>(v));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string mode_table(const DomainInfo& domain) {
    std::string out;
    for (std::size_t k = 0; k < domain.modes.size(); ++k) {
        const auto& m = domain.modes[k];
        if (k > 0) out += "\n";
        out += "Mode " + std::to_string(k + 1);
        if (domain.domain_aware && !m.name.empty()) out += " (" + m.name + ")";
        out += ": size " + std::to_string(m.size) + ".";
        if (domain.domain_aware && !m.description.empty()) out += " " + m.description;
    }
    if (domain.domain_aware && !domain.dataset_description.empty())
        out += "\n\n" + domain.dataset_description;
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kBehaviorDefault =
    R"(You are an expert in tensor network structure search, with deep knowledge of
tensor decompositions, data compression, and combinatorial optimization.

You help search for the best fully connected tensor network structure for a
tensor dataset. A structure assigns one integer bond rank to every pair of
tensor modes; a rank of 1 means the two modes share no edge. The goal is to
minimize

    ln( phi + lambda * mean_relative_error ),   with lambda = {lambda}

where phi is the compression ratio (total parameter count of the core tensors
divided by the number of tensor entries) and mean_relative_error is the
average over samples of ||X - TNC(cores)||_F / ||X||_F after fitting the
cores to each sample. Lower is better: small ranks compress harder but fit
worse, large ranks fit better but compress less.

Rules you must follow:
- Reason step by step, but keep the reasoning concise.
- Never invent objective values; every evaluation is performed for you.
- Always end your reply with the exact output line the format requires.)";

const char* kTaskDefault =
    R"(We need an initial structure for the following data, consisting of
order-{tensor_order} tensors with these modes:

{mode_table}

Reason step-by-step and utilize domain knowledge about how these modes relate
to each other pairwise: strongly coupled modes deserve a larger bond rank,
nearly independent modes a rank close to 1. {rank_bounds}

{format_spec})";

const char* kOptimizationDefault =
    R"(Evaluation update for the structure search.

- Best structure so far: {best_structure} with objective {best_objective}.
- Last evaluated structure: {last_structure} with objective {last_objective}.

Remember the trade-off: raising a bond rank adds parameters (larger phi) but
can lower the reconstruction error; lowering a rank does the opposite. Use
the results above to decide where that trade is worth making.

Propose the next structure to evaluate: explore new solutions when necessary
and exploit good solutions. Do not re-propose a structure that was already
evaluated.

{format_spec})";

}  // namespace

std::string to_string(ChatRole role) {
    switch (role) {
        case ChatRole::System: return "system";
        case ChatRole::User: return "user";
        case ChatRole::Assistant: return "assistant";
    }
    throw Error("unknown chat role");
}

DomainInfo load_domain_info(const std::string& path) {
    nlohmann::json j;
    try {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open domain info file: " + path);
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed domain info file " + path + ": " + e.what());
    }

    DomainInfo out;
    try {
        for (const auto& m : j.at("modes")) {
            ModeInfo info;
            info.name = m.value("name", "");
            info.size = m.at("size").get<std::size_t>();
            info.description = m.value("description", "");
            out.modes.push_back(std::move(info));
        }
        out.dataset_description = j.value("dataset_description", "");
        out.domain_aware = j.value("domain_aware", true);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed domain info file " + path + ": " + e.what());
    }
    return out;
}

void validate_domain(const DomainInfo& domain, std::span<const std::size_t> shape) {
    if (domain.modes.size() != shape.size())
        throw ConfigError("domain info has " + std::to_string(domain.modes.size()) +
                          " modes, data has " + std::to_string(shape.size()));
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (domain.modes[k].size != shape[k])
            throw ConfigError("domain mode " + std::to_string(k + 1) + " has size " +
                              std::to_string(domain.modes[k].size) + ", data has " +
                              std::to_string(shape[k]));
        if (domain.domain_aware && domain.modes[k].description.empty())
            throw ConfigError("domain-aware mode " + std::to_string(k + 1) +
                              " is missing a description");
    }
}

std::string ChatClient::complete(const std::vector<ChatMessage>& transcript) {
    if (transcript.empty()) throw Error("chat transcript must not be empty");
    if (transcript.front().role != ChatRole::System)
        throw Error("chat transcript must start with the system message");
    std::lock_guard<std::mutex> lock(in_flight_);
    return do_complete(transcript);
}

ScriptedChatClient::ScriptedChatClient(std::vector<std::string> replies)
    : replies_(std::move(replies)) {}

std::string ScriptedChatClient::do_complete(const std::vector<ChatMessage>&) {
    if (next_ >= replies_.size())
        throw Error("scripted replies exhausted after " + std::to_string(replies_.size()));
    return replies_[next_++];
}

PromptTemplates PromptTemplates::defaults() {
    return {kBehaviorDefault, kTaskDefault, kOptimizationDefault};
}

PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
    PromptTemplates out = defaults();
    const std::filesystem::path base(dir);
    if (!std::filesystem::is_directory(base))
        throw IoError("prompt template directory not found: " + dir);
    if (std::filesystem::exists(base / "behavior.txt"))
        out.behavior = read_text_file(base / "behavior.txt");
    if (std::filesystem::exists(base / "task.txt"))
        out.task = read_text_file(base / "task.txt");
    if (std::filesystem::exists(base / "optimization.txt"))
        out.optimization = read_text_file(base / "optimization.txt");
    return out;
}

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const std::size_t close = tmpl.find('}', i);
            if (close != std::string::npos) {
                const std::string name = tmpl.substr(i + 1, close - i - 1);
                if (is_identifier(name)) {
                    auto it = values.find(name);
                    if (it == values.end())
                        throw TemplateError("unresolved placeholder {" + name + "}");
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

std::string default_format_spec(std::size_t order, int r_max) {
    if (order < 2) throw ConfigError("structure order must be at least 2");
    if (r_max < 1) throw ConfigError("r_max must be at least 1");
    const std::string bound = std::to_string(r_max);
    if (order == 2)
        return "End your reply with exactly one line: RANKS: [k_12] — an integer between 1 and " +
               bound + ", for the mode pair (1,2).";
    const std::string n = std::to_string(order);
    const std::string n1 = std::to_string(order - 1);
    return "End your reply with exactly one line: RANKS: [k_12, k_13, ..., k_" + n1 + n +
           "] — integers between 1 and " + bound + ", upper-triangular order (1,2),(1,3),...,(" +
           n1 + "," + n + ").";
}

std::string render_behavior_prompt(double lambda, const PromptTemplates& templates) {
    if (lambda <= 0.0) throw ConfigError("lambda must be positive");
    return render_template(templates.behavior, {{"lambda", format_number(lambda)}});
}

std::string render_task_prompt(const DomainInfo& domain, std::span<const std::size_t> shape,
                               int r_max, const std::string& format_spec,
                               const PromptTemplates& templates) {
    validate_domain(domain, shape);
    if (r_max < 1) throw ConfigError("r_max must be at least 1");
    return render_template(
        templates.task,
        {{"tensor_order", std::to_string(shape.size())},
         {"mode_table", mode_table(domain)},
         {"rank_bounds",
          "Every bond rank must be an integer between 1 and " + std::to_string(r_max) + "."},
         {"format_spec", format_spec}});
}

std::string render_optimization_prompt(const EvaluationResult& best,
                                       const EvaluationResult& last, const DomainInfo& domain,
                                       const std::string& format_spec,
                                       const PromptTemplates& templates,
                                       const std::string& feedback) {
    if (best.objective > last.objective)
        throw ConfigError("best objective must not exceed last objective");
    std::string body = render_template(
        templates.optimization,
        {{"tensor_order", std::to_string(domain.modes.size())},
         {"mode_table", mode_table(domain)},
         {"best_structure", format_ranks(best.structure)},
         {"best_objective", fmt4(best.objective)},
         {"last_structure", format_ranks(last.structure)},
         {"last_objective", fmt4(last.objective)},
         {"format_spec", format_spec}});
    if (!feedback.empty()) body = feedback + "\n\n" + body;
    return body;
}

ParsedSolution parse_solution(const std::string& reply, std::size_t order, int r_max) {
    if (order < 2) throw ConfigError("structure order must be at least 2");
    if (r_max < 1) throw ConfigError("r_max must be at least 1");
    const std::size_t arity = TNStructure::num_pairs(order);

    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= reply.size()) {
        std::size_t end = reply.find('\n', start);
        if (end == std::string::npos) end = reply.size();
        lines.push_back(reply.substr(start, end - start));
        start = end + 1;
    }

    constexpr const char* kMarker = "RANKS:";
    std::size_t chosen = lines.size();
    for (std::size_t k = 0; k < lines.size(); ++k)
        if (trimmed(lines[k]).rfind(kMarker, 0) == 0) chosen = k;
    if (chosen == lines.size())
        throw ParseError(ParseError::Kind::NoRanksLine, "reply has no RANKS: [...] line");

    const std::string payload = trimmed(trimmed(lines[chosen]).substr(std::string(kMarker).size()));
    if (payload.size() < 2 || payload.front() != '[' || payload.back() != ']')
        throw ParseError(ParseError::Kind::NoRanksLine,
                         "RANKS line is not of the form RANKS: [...]");

    std::vector<std::string> tokens;
    const std::string inner = payload.substr(1, payload.size() - 2);
    if (!trimmed(inner).empty()) {
        std::size_t pos = 0;
        while (pos <= inner.size()) {
            std::size_t comma = inner.find(',', pos);
            if (comma == std::string::npos) comma = inner.size();
            tokens.push_back(trimmed(inner.substr(pos, comma - pos)));
            pos = comma + 1;
        }
    }
    if (tokens.size() != arity)
        throw ParseError(ParseError::Kind::WrongArity,
                         "expected " + std::to_string(arity) + " ranks, got " +
                             std::to_string(tokens.size()));

    std::vector<int> ranks;
    ranks.reserve(arity);
    for (const auto& tok : tokens) {
        std::size_t digits = 0;
        if (!tok.empty() && (tok[0] == '+' || tok[0] == '-')) digits = 1;
        if (digits >= tok.size())
            throw ParseError(ParseError::Kind::NotInteger, "'" + tok + "' is not an integer");
        for (std::size_t k = digits; k < tok.size(); ++k)
            if (!std::isdigit(static_cast<unsigned char>(tok[k])))
                throw ParseError(ParseError::Kind::NotInteger,
                                 "'" + tok + "' is not an integer");
        long long value = 0;
        try {
            value = std::stoll(tok);
        } catch (const std::out_of_range&) {
            throw ParseError(ParseError::Kind::OutOfBounds,
                             "rank " + tok + " outside [1, " + std::to_string(r_max) + "]");
        }
        if (value < 1 || value > r_max)
            throw ParseError(ParseError::Kind::OutOfBounds,
                             "rank " + tok + " outside [1, " + std::to_string(r_max) + "]");
        ranks.push_back(static_cast<int>(value));
    }

    std::string reasoning;
    for (std::size_t k = 0; k < chosen; ++k) {
        if (k > 0) reasoning += "\n";
        reasoning += lines[k];
    }
    return {TNStructure(order, std::move(ranks)), std::move(reasoning)};
}

LlmSearchResult run_llm_search(const TensorDataset& train, const DomainInfo& domain,
                               ChatClient& client, const LlmSearchConfig& config,
                               EvalCache& cache) {
    if (config.stopping.max_evals < 1) throw ConfigError("max_evals must be at least 1");
    if (config.stopping.patience < 1) throw ConfigError("patience must be at least 1");
    if (config.stopping.delta < 0.0) throw ConfigError("delta must be non-negative");
    validate_domain(domain, train.shape());
    const std::size_t order = train.order();
    const std::string fmt = config.format_spec.empty()
                                ? default_format_spec(order, config.r_max)
                                : config.format_spec;

    DialogueState dialogue;
    const ChatMessage system{ChatRole::System,
                             render_behavior_prompt(config.lambda, config.templates)};
    dialogue.transcript.push_back(system);

    SearchState state{TNStructure::all_ones(order), {}, {}, {}, 0, 0};
    std::vector<double> best_curve;
    std::string feedback;
    std::string next_user =
        render_task_prompt(domain, train.shape(), config.r_max, fmt, config.templates);

    // Hard cap on model calls so a pathological script or endpoint cannot
    // spin the dialogue forever: every evaluation takes at most two calls
    // (original + one re-prompt), plus slack for skipped iterations.
    const int max_turns = config.stopping.max_evals * 2 + 10;
    int turns = 0;

    while (turns < max_turns) {
        dialogue.transcript.push_back({ChatRole::User, next_user});
        std::vector<ChatMessage> wire{system, dialogue.transcript.back()};
        std::string reply = client.complete(wire);
        ++turns;
        dialogue.transcript.push_back({ChatRole::Assistant, reply});

        ParsedSolution sol{TNStructure::all_ones(order), ""};
        bool parsed = false;
        try {
            sol = parse_solution(reply, order, config.r_max);
            parsed = true;
        } catch (const ParseError& first) {
            dialogue.notes.push_back(std::string("parse failure: ") + first.what());
            if (turns >= max_turns) break;
            const std::string reprompt = "Your previous reply could not be used: " +
                                         std::string(first.what()) +
                                         ". Reply again and follow the output format "
                                         "exactly.\n\n" +
                                         fmt;
            dialogue.transcript.push_back({ChatRole::User, reprompt});
            wire.push_back({ChatRole::Assistant, reply});
            wire.push_back(dialogue.transcript.back());
            std::string retry = client.complete(wire);
            ++turns;
            dialogue.transcript.push_back({ChatRole::Assistant, retry});
            try {
                sol = parse_solution(retry, order, config.r_max);
                parsed = true;
            } catch (const ParseError& second) {
                dialogue.notes.push_back(std::string("parse failure after re-prompt: ") +
                                         second.what());
                if (!dialogue.best)
                    throw ParseError(second.kind(),
                                     "initial proposal unparseable after one re-prompt: " +
                                         std::string(second.what()));
                feedback =
                    "Note: your previous two replies could not be parsed, so that "
                    "iteration was skipped.";
            }
        }

        if (parsed) {
            const bool fresh = !cache.lookup(sol.structure.ranks()).has_value();
            if (fresh && cache.evaluations() >= config.stopping.max_evals) break;
            bool evaluated = false;
            EvaluationResult result;
            try {
                result = evaluate_structure(train, sol.structure, config.lambda, config.fit,
                                            cache, SourceTag::Llm);
                evaluated = true;
            } catch (const NumericalError& e) {
                dialogue.notes.push_back("evaluation failure at " +
                                         format_ranks(sol.structure) + ": " + e.what());
                if (!dialogue.best) throw;
                feedback = "Note: your previous proposal " + format_ranks(sol.structure) +
                           " is an invalid structure (its evaluation failed); propose a "
                           "different one.";
            }
            if (evaluated) {
                dialogue.explanations.emplace_back(result.eval_index, sol.reasoning);
                state.history.push_back(result);
                dialogue.last = result;
                if (!dialogue.best || result_improves(result, *dialogue.best))
                    dialogue.best = result;
                best_curve.push_back(dialogue.best->objective);
                ++state.iterations_done;
                feedback.clear();
            }
        }

        if (cache.evaluations() >= config.stopping.max_evals) break;
        if (early_stop_check(best_curve, config.stopping.patience, config.stopping.delta))
            break;
        next_user = render_optimization_prompt(*dialogue.best, *dialogue.last, domain, fmt,
                                               config.templates, feedback);
        feedback.clear();
    }

    if (!dialogue.best) throw Error("dialogue ended without a single evaluated proposal");
    state.best = *dialogue.best;
    state.center = dialogue.best->structure;
    state.last_candidates.assign(1, *dialogue.last);
    state.evals_used = cache.evaluations();
    dialogue.evals_used = cache.evaluations();
    return {std::move(state), std::move(dialogue)};
}

HybridResult hybrid_search(const TensorDataset& train, const DomainInfo& domain,
                           ChatClient& client, const HybridConfig& config, EvalCache& cache) {
    if (config.llm_budget < 1) throw ConfigError("llm_budget must be at least 1");

    LlmSearchConfig phase1;
    phase1.stopping = config.stopping;
    phase1.stopping.max_evals = std::min(config.llm_budget, config.stopping.max_evals);
    phase1.lambda = config.lambda;
    phase1.fit = config.fit;
    phase1.r_max = config.r_max;
    phase1.templates = config.templates;
    LlmSearchResult llm = run_llm_search(train, domain, client, phase1, cache);

    SearchState combined = llm.search;
    if (cache.evaluations() < config.stopping.max_evals) {
        LocalSearchConfig phase2;
        phase2.strategy = config.local_strategy;
        phase2.neighborhood = config.neighborhood;
        phase2.neighborhood.r_max = config.r_max;
        phase2.enumeration = config.enumeration;
        phase2.enumeration.r_max = config.r_max;
        phase2.stopping = config.stopping;
        phase2.lambda = config.lambda;
        phase2.fit = config.fit;
        SearchState local =
            run_local_search(train, llm.search.best.structure, phase2, cache);
        combined.center = local.center;
        combined.history.insert(combined.history.end(), local.history.begin(),
                                local.history.end());
        combined.last_candidates = local.last_candidates;
        if (result_improves(local.best, combined.best)) combined.best = local.best;
        combined.iterations_done += local.iterations_done;
    }
    combined.evals_used = cache.evaluations();
    llm.dialogue.evals_used = cache.evaluations();
    return {std::move(combined), std::move(llm.dialogue)};
}

}  // namespace tnss
