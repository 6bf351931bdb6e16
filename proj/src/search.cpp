#include "tnss/search.hpp"

#include <algorithm>
#include <cmath>

namespace tnss {
namespace {

void check_stopping(const StoppingConfig& s) {
    if (s.max_evals < 1) throw ConfigError("max_evals must be at least 1");
    if (s.patience < 1) throw ConfigError("patience must be at least 1");
    if (s.delta < 0.0) throw ConfigError("delta must be non-negative");
}

void check_bounds(const TNStructure& s, int r_max) {
    if (r_max < 1) throw ConfigError("r_max must be at least 1");
    for (int r : s.ranks())
        if (r > r_max)
            throw ConfigError("structure " + format_ranks(s) + " exceeds r_max " +
                              std::to_string(r_max));
}

}  // namespace

bool early_stop_check(std::span<const double> best_objectives, int patience, double delta) {
    if (patience < 1) throw ConfigError("patience must be at least 1");
    if (delta < 0.0) throw ConfigError("delta must be non-negative");
    if (best_objectives.empty()) return false;
    double best = best_objectives[0];
    int stalled = 0;
    for (std::size_t k = 1; k < best_objectives.size(); ++k) {
        if (best_objectives[k] < best - delta) {
            best = best_objectives[k];
            stalled = 0;
        } else {
            ++stalled;
        }
        if (stalled >= patience) return true;
    }
    return false;
}

bool result_improves(const EvaluationResult& a, const EvaluationResult& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    if (a.params != b.params) return a.params < b.params;
    return a.structure.ranks() < b.structure.ranks();
}

std::vector<TNStructure> sample_neighborhood(const TNStructure& center,
                                             const NeighborhoodConfig& config) {
    std::mt19937_64 rng(config.seed);
    return sample_neighborhood(center, config, rng);
}

std::vector<TNStructure> sample_neighborhood(const TNStructure& center,
                                             const NeighborhoodConfig& config,
                                             std::mt19937_64& rng) {
    if (config.n_sample < 1) throw ConfigError("n_sample must be at least 1");
    // p == 0 is allowed as a degenerate no-move sampler: every candidate
    // stays at the center.
    if (config.perturb_prob < 0.0 || config.perturb_prob > 1.0)
        throw ConfigError("perturb_prob must lie in [0, 1]");
    check_bounds(center, config.r_max);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<TNStructure> out;
    out.reserve(static_cast<std::size_t>(config.n_sample));
    for (int k = 0; k < config.n_sample; ++k) {
        TNStructure candidate = center;
        for (int attempt = 0; attempt < 10; ++attempt) {
            std::vector<int> ranks = center.ranks();
            for (int& r : ranks) {
                if (unit(rng) >= config.perturb_prob) continue;
                r += (unit(rng) < 0.5) ? -1 : 1;
                r = std::clamp(r, 1, config.r_max);
            }
            candidate = TNStructure(center.order(), std::move(ranks));
            if (candidate != center) break;
        }
        out.push_back(std::move(candidate));
    }
    return out;
}

std::vector<TNStructure> enumerate_variable(const TNStructure& center, std::size_t var,
                                            const EnumConfig& config) {
    if (config.radius < 1) throw ConfigError("radius must be at least 1");
    if (config.rounds < 1) throw ConfigError("rounds must be at least 1");
    if (var >= center.ranks().size()) throw ConfigError("variable index out of range");
    check_bounds(center, config.r_max);

    const int c = center.ranks()[var];
    const int lo = std::max(1, c - config.radius);
    const int hi = std::min(config.r_max, c + config.radius);
    std::vector<TNStructure> out;
    for (int v = lo; v <= hi; ++v) {
        if (v == c) continue;
        std::vector<int> ranks = center.ranks();
        ranks[var] = v;
        out.emplace_back(center.order(), std::move(ranks));
    }
    return out;
}

SearchState run_local_search(const TensorDataset& train, const TNStructure& init,
                             const LocalSearchConfig& config, EvalCache& cache) {
    check_stopping(config.stopping);
    const int r_max = config.strategy == SearchStrategy::Neighborhood
                          ? config.neighborhood.r_max
                          : config.enumeration.r_max;
    check_bounds(init, r_max);
    const SourceTag tag = config.strategy == SearchStrategy::Neighborhood
                              ? SourceTag::Neighborhood
                              : SourceTag::Enumeration;

    SearchState state{init, EvaluationResult{init, 0, 0, 0, 0, 0, SourceTag::Init}, {}, {}, 0, 0};

    // Evaluate a candidate against the shared budget. Cache hits are free;
    // a fresh evaluation is only allowed while the budget lasts.
    auto try_evaluate = [&](const TNStructure& s, SourceTag source,
                            EvaluationResult& out) -> bool {
        if (auto hit = cache.lookup(s.ranks())) {
            out = *hit;
            return true;
        }
        if (cache.evaluations() >= config.stopping.max_evals) return false;
        out = evaluate_structure(train, s, config.lambda, config.fit, cache, source);
        return true;
    };

    EvaluationResult init_result;
    if (!try_evaluate(init, SourceTag::Init, init_result))
        throw ConfigError("evaluation budget exhausted before the initial evaluation");
    state.best = init_result;
    state.history.push_back(init_result);
    state.last_candidates.assign(1, init_result);
    double center_objective = init_result.objective;

    std::mt19937_64 rng(config.neighborhood.seed);
    std::vector<double> best_curve{state.best.objective};

    auto recenter = [&] {
        if (state.best.objective < center_objective) {
            state.center = state.best.structure;
            center_objective = state.best.objective;
        }
    };

    while (cache.evaluations() < config.stopping.max_evals &&
           !early_stop_check(best_curve, config.stopping.patience, config.stopping.delta)) {
        state.last_candidates.clear();
        bool budget_hit = false;

        auto consume = [&](const std::vector<TNStructure>& candidates) {
            for (const auto& c : candidates) {
                EvaluationResult r;
                if (!try_evaluate(c, tag, r)) {
                    budget_hit = true;
                    return;
                }
                state.history.push_back(r);
                state.last_candidates.push_back(r);
                if (result_improves(r, state.best)) state.best = r;
            }
        };

        if (config.strategy == SearchStrategy::Neighborhood) {
            consume(sample_neighborhood(state.center, config.neighborhood, rng));
            recenter();
        } else {
            for (int round = 0; round < config.enumeration.rounds && !budget_hit; ++round) {
                for (std::size_t var = 0; var < init.ranks().size() && !budget_hit; ++var) {
                    consume(enumerate_variable(state.center, var, config.enumeration));
                    recenter();
                }
            }
        }

        ++state.iterations_done;
        best_curve.push_back(state.best.objective);
        if (budget_hit) break;
    }

    state.evals_used = cache.evaluations();
    return state;
}

EvaluationResult exhaustive_search(const TensorDataset& train, std::size_t order,
                                   const ExhaustiveConfig& config, EvalCache& cache,
                                   std::vector<EvaluationResult>* history) {
    if (order < 2) throw ConfigError("structure order must be at least 2");
    if (config.r_max < 1) throw ConfigError("r_max must be at least 1");

    const std::size_t pairs = TNStructure::num_pairs(order);
    if (std::pow(static_cast<double>(config.r_max), static_cast<double>(pairs)) >
        static_cast<double>(config.guard))
        throw ConfigError("exhaustive space exceeds the guard of " +
                          std::to_string(config.guard) + " structures");

    std::vector<int> ranks(pairs, 1);
    EvaluationResult best;
    bool have_best = false;
    bool done = false;
    while (!done) {
        EvaluationResult r = evaluate_structure(train, TNStructure(order, ranks), config.lambda,
                                                config.fit, cache, SourceTag::Enumeration);
        if (history) history->push_back(r);
        if (!have_best || result_improves(r, best)) {
            best = r;
            have_best = true;
        }

        done = true;  // lexicographic odometer, last variable fastest
        for (std::size_t k = pairs; k-- > 0;) {
            if (ranks[k] < config.r_max) {
                ++ranks[k];
                std::fill(ranks.begin() + static_cast<std::ptrdiff_t>(k) + 1, ranks.end(), 1);
                done = false;
                break;
            }
        }
    }
    return best;
}

}  // namespace tnss
