#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tnss/contraction.hpp"
#include "tnss/structure.hpp"
#include "tnss/tensor.hpp"

namespace tnss {

/// Where a candidate structure came from.
enum class SourceTag { Init, Neighborhood, Enumeration, Llm };

std::string to_string(SourceTag tag);

/// Settings for fitting cores to one sample by joint gradient descent with
/// backtracking line search.
struct FitConfig {
    int max_iters = 500;
    double tolerance = 1e-6;  ///< stop when the relative loss drop falls below this
    int restarts = 1;         ///< independent inits; the best final loss wins
    double init_step = 1.0;   ///< first trial step of the first line search
    double shrink = 0.5;      ///< backtracking factor
    double armijo_c = 1e-4;   ///< sufficient-decrease constant
    std::uint64_t seed = 0;
};

struct FitResult {
    CoreSet cores;
    double relative_error = 0.0;
    double loss = 0.0;  ///< 0.5 * ||tnc - sample||_F^2 at the returned cores
};

/// The scalar being minimized: ln(phi + lambda * mean_relative_error).
double objective_value(double phi, double lambda, double mean_relative_error);

struct EvaluationResult {
    TNStructure structure;
    double phi = 0.0;
    double mean_relative_error = 0.0;
    double objective = 0.0;
    std::int64_t params = 0;
    int eval_index = 0;  ///< 1-based order of first evaluation
    SourceTag source = SourceTag::Init;
};

/// Memo of evaluated structures keyed by their rank vector. Lookups that hit
/// do not count as evaluations; the evaluation counter only moves when a new
/// structure is inserted. Thread-safe.
class EvalCache {
public:
    std::optional<EvaluationResult> lookup(const std::vector<int>& ranks) const;

    /// Store a freshly computed result, assigning the next eval_index. If the
    /// key is already present (a racing duplicate), the stored result wins and
    /// the counter stays put.
    EvaluationResult insert_or_get(EvaluationResult result);

    int evaluations() const;

    /// All distinct results ordered by eval_index.
    std::vector<EvaluationResult> results_in_order() const;

private:
    mutable std::mutex mutex_;
    std::map<std::vector<int>, EvaluationResult> by_ranks_;
    std::vector<const EvaluationResult*> in_order_;
    int count_ = 0;
};

/// Random cores for a structure. Entries of core i are N(0, sigma_i) with
/// sigma_i chosen so each product over a bond tuple has unit scale:
/// sigma_i = (prod of core i's bond ranks)^(-1/2). Deterministic per seed.
CoreSet init_cores(const TNStructure& s, std::span<const std::size_t> shape, std::uint64_t seed);

/// Loss 0.5 * ||tnc(cores) - sample||_F^2 and its gradient per core.
std::pair<double, std::vector<DenseTensor>> loss_and_gradient(const DenseTensor& sample,
                                                              const CoreSet& cores,
                                                              const TNStructure& s);

/// Fit cores to one sample. Each restart runs gradient descent with Armijo
/// backtracking from an independent random init; the restart with the lowest
/// final loss wins. If loss_trace is given it receives the accepted loss
/// sequence of the winning restart (monotonically non-increasing).
FitResult fit_cores(const DenseTensor& sample, const TNStructure& s, const FitConfig& config,
                    std::vector<double>* loss_trace = nullptr);

/// Fit every sample in the dataset at the structure (independent fits, one
/// derived seed per sample), average the relative errors, and combine with
/// the compression ratio into the objective. Consults the cache first; a hit
/// is returned as-is and counts no evaluation.
EvaluationResult evaluate_structure(const TensorDataset& dataset, const TNStructure& s,
                                    double lambda, const FitConfig& config, EvalCache& cache,
                                    SourceTag source = SourceTag::Init);

}  // namespace tnss
