#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tnss/objective.hpp"
#include "tnss/structure.hpp"
#include "tnss/tensor.hpp"

namespace tnss {

/// Random neighborhood settings: each rank is independently perturbed by +-1
/// with probability perturb_prob and clipped to [1, r_max]. Candidates that
/// collapse back onto the center are redrawn up to 10 times, then kept.
struct NeighborhoodConfig {
    int n_sample = 4;
    double perturb_prob = 0.5;
    int r_max = 8;
    std::uint64_t seed = 0;
};

/// Alternating enumeration settings: each variable in upper-triangular order
/// takes every value within `radius` of the center (bounded by [1, r_max]),
/// for `rounds` full passes per outer iteration.
struct EnumConfig {
    int radius = 1;
    int rounds = 1;
    int r_max = 8;
};

struct StoppingConfig {
    int max_evals = 500;
    int patience = 5;
    double delta = 0.0;
};

enum class SearchStrategy { Neighborhood, Alternating };

struct SearchState {
    TNStructure center;
    EvaluationResult best;
    std::vector<EvaluationResult> history;          ///< P: every candidate result, in order
    std::vector<EvaluationResult> last_candidates;  ///< H of the final iteration
    int evals_used = 0;
    int iterations_done = 0;
};

struct LocalSearchConfig {
    SearchStrategy strategy = SearchStrategy::Alternating;
    NeighborhoodConfig neighborhood;
    EnumConfig enumeration;
    StoppingConfig stopping;
    double lambda = 10.0;
    FitConfig fit;
};

/// True iff the running best has not improved by more than delta for
/// `patience` consecutive entries. best_objectives[0] is the baseline.
bool early_stop_check(std::span<const double> best_objectives, int patience, double delta);

/// a is strictly better than b: smaller objective, ties broken by smaller
/// parameter count, then lexicographically smaller rank vector.
bool result_improves(const EvaluationResult& a, const EvaluationResult& b);

std::vector<TNStructure> sample_neighborhood(const TNStructure& center,
                                             const NeighborhoodConfig& config);
std::vector<TNStructure> sample_neighborhood(const TNStructure& center,
                                             const NeighborhoodConfig& config,
                                             std::mt19937_64& rng);

/// Candidates identical to the center except rank `var` sweeps
/// [max(1, c - radius), min(r_max, c + radius)] without c itself.
std::vector<TNStructure> enumerate_variable(const TNStructure& center, std::size_t var,
                                            const EnumConfig& config);

/// Sampling-based structure search: evaluate the init, then per iteration
/// generate candidates (one neighborhood batch, or `rounds` alternating
/// passes re-centering after each variable), evaluate them against the shared
/// cache, and move the center to the historical best when it improves
/// strictly. Stops on the evaluation budget (counted on the cache, so phases
/// sharing a cache share the budget) or when the best objective stalls for
/// `patience` iterations.
SearchState run_local_search(const TensorDataset& train, const TNStructure& init,
                             const LocalSearchConfig& config, EvalCache& cache);

struct ExhaustiveConfig {
    int r_max = 2;
    double lambda = 10.0;
    FitConfig fit;
    std::size_t guard = 10000;  ///< refuse spaces larger than this
};

/// Evaluate every rank vector in [1, r_max]^(N(N-1)/2) and return the argmin
/// (ties broken as in result_improves). If `history` is given it receives
/// every result in enumeration order.
EvaluationResult exhaustive_search(const TensorDataset& train, std::size_t order,
                                   const ExhaustiveConfig& config, EvalCache& cache,
                                   std::vector<EvaluationResult>* history = nullptr);

}  // namespace tnss
