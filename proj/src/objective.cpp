#include "tnss/objective.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "tnss/parallel.hpp"
#include "tnss/seeding.hpp"

namespace tnss {
namespace {

// Residual tnc(cores) - sample and half its squared norm.
std::pair<double, DenseTensor> residual_and_loss(const DenseTensor& sample, const CoreSet& cores,
                                                 const TNStructure& s) {
    DenseTensor r = tnc_contract(cores, s);
    if (r.shape() != sample.shape())
        throw ShapeError("sample shape does not match the cores' physical modes");
    double loss = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] -= sample[i];
        loss += r[i] * r[i];
    }
    return {0.5 * loss, std::move(r)};
}

std::vector<DenseTensor> gradients_from_residual(const DenseTensor& residual,
                                                 const CoreSet& cores, const TNStructure& s) {
    std::vector<DenseTensor> grads;
    grads.reserve(s.order());
    for (std::size_t v = 0; v < s.order(); ++v)
        grads.push_back(contract_environment(residual, cores, s, v));
    return grads;
}

double squared_norm(const std::vector<DenseTensor>& grads) {
    double g2 = 0.0;
    for (const auto& g : grads)
        for (std::size_t i = 0; i < g.size(); ++i) g2 += g[i] * g[i];
    return g2;
}

void step_cores(CoreSet& out, const CoreSet& base, const std::vector<DenseTensor>& grads,
                double t) {
    for (std::size_t v = 0; v < base.cores.size(); ++v) {
        const auto& b = base.cores[v];
        const auto& g = grads[v];
        auto& o = out.cores[v];
        for (std::size_t i = 0; i < b.size(); ++i) o[i] = b[i] - t * g[i];
    }
}

struct RestartOutcome {
    CoreSet cores;
    double loss = 0.0;
    std::vector<double> trace;
};

RestartOutcome run_restart(const DenseTensor& sample, const TNStructure& s,
                           const FitConfig& cfg, std::uint64_t seed) {
    CoreSet cores = init_cores(s, sample.shape(), seed);
    auto [loss, residual] = residual_and_loss(sample, cores, s);
    if (!std::isfinite(loss))
        throw NumericalError("fit at structure " + format_ranks(s) +
                             " started from a non-finite loss");

    RestartOutcome out;
    out.trace.push_back(loss);

    CoreSet trial = cores;  // same shapes, reused as the step buffer
    double step = cfg.init_step;
    for (int it = 0; it < cfg.max_iters; ++it) {
        auto grads = gradients_from_residual(residual, cores, s);
        const double g2 = squared_norm(grads);
        if (!std::isfinite(g2))
            throw NumericalError("fit at structure " + format_ranks(s) +
                                 " produced a non-finite gradient");
        if (g2 == 0.0) break;

        double t = step;
        bool accepted = false;
        double trial_loss = 0.0;
        DenseTensor trial_residual;
        while (t > 1e-18) {
            step_cores(trial, cores, grads, t);
            auto [l, r] = residual_and_loss(sample, trial, s);
            if (std::isfinite(l) && l <= loss - cfg.armijo_c * t * g2) {
                accepted = true;
                trial_loss = l;
                trial_residual = std::move(r);
                break;
            }
            t *= cfg.shrink;
        }
        if (!accepted) break;

        std::swap(cores, trial);
        residual = std::move(trial_residual);
        const double drop = (loss - trial_loss) / std::max(loss, 1e-300);
        loss = trial_loss;
        out.trace.push_back(loss);
        if (drop < cfg.tolerance) break;
        // Warm-start the next search above the accepted step so it can grow
        // back after a cautious stretch.
        step = t * 2.0;
    }

    out.cores = std::move(cores);
    out.loss = loss;
    return out;
}

}  // namespace

std::string to_string(SourceTag tag) {
    switch (tag) {
        case SourceTag::Init: return "init";
        case SourceTag::Neighborhood: return "neighborhood";
        case SourceTag::Enumeration: return "enumeration";
        case SourceTag::Llm: return "llm";
    }
    throw Error("unknown source tag");
}

double objective_value(double phi, double lambda, double mean_relative_error) {
    if (lambda <= 0.0) throw ConfigError("lambda must be positive");
    if (phi <= 0.0) throw ConfigError("compression ratio must be positive");
    if (mean_relative_error < 0.0) throw ConfigError("relative error must be non-negative");
    return std::log(phi + lambda * mean_relative_error);
}

std::optional<EvaluationResult> EvalCache::lookup(const std::vector<int>& ranks) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = by_ranks_.find(ranks);
    if (it == by_ranks_.end()) return std::nullopt;
    return it->second;
}

EvaluationResult EvalCache::insert_or_get(EvaluationResult result) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = by_ranks_.find(result.structure.ranks());
    if (it != by_ranks_.end()) return it->second;
    result.eval_index = ++count_;
    auto [pos, inserted] = by_ranks_.emplace(result.structure.ranks(), std::move(result));
    in_order_.push_back(&pos->second);
    return pos->second;
}

int EvalCache::evaluations() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return count_;
}

std::vector<EvaluationResult> EvalCache::results_in_order() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<EvaluationResult> out;
    out.reserve(in_order_.size());
    for (const auto* r : in_order_) out.push_back(*r);
    return out;
}

CoreSet init_cores(const TNStructure& s, std::span<const std::size_t> shape, std::uint64_t seed) {
    if (shape.size() != s.order())
        throw ShapeError("shape order does not match structure order");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    CoreSet out;
    out.cores.reserve(s.order());
    for (std::size_t v = 0; v < s.order(); ++v) {
        double bond_volume = 1.0;
        for (std::size_t j = 0; j < s.order(); ++j)
            if (j != v) bond_volume *= s.rank(v, j);
        const double sigma = 1.0 / std::sqrt(bond_volume);
        DenseTensor core = DenseTensor::zeros(core_shape(s, shape, v));
        for (std::size_t i = 0; i < core.size(); ++i) core[i] = sigma * normal(rng);
        out.cores.push_back(std::move(core));
    }
    return out;
}

std::pair<double, std::vector<DenseTensor>> loss_and_gradient(const DenseTensor& sample,
                                                              const CoreSet& cores,
                                                              const TNStructure& s) {
    auto [loss, residual] = residual_and_loss(sample, cores, s);
    return {loss, gradients_from_residual(residual, cores, s)};
}

FitResult fit_cores(const DenseTensor& sample, const TNStructure& s, const FitConfig& config,
                    std::vector<double>* loss_trace) {
    if (config.max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (config.restarts < 1) throw ConfigError("restarts must be at least 1");
    if (config.tolerance <= 0.0) throw ConfigError("tolerance must be positive");
    if (config.init_step <= 0.0) throw ConfigError("init_step must be positive");
    if (config.shrink <= 0.0 || config.shrink >= 1.0)
        throw ConfigError("shrink must lie in (0, 1)");
    const double sample_norm = sample.frobenius_norm();
    if (sample_norm == 0.0) throw Error("fit_cores: sample tensor is zero");

    RestartOutcome best;
    bool have_best = false;
    for (int r = 0; r < config.restarts; ++r) {
        RestartOutcome cur = run_restart(sample, s, config, derive_seed(config.seed, r));
        if (!have_best || cur.loss < best.loss) {
            best = std::move(cur);
            have_best = true;
        }
    }

    if (loss_trace) *loss_trace = best.trace;
    FitResult out;
    out.relative_error = std::sqrt(2.0 * best.loss) / sample_norm;
    out.loss = best.loss;
    out.cores = std::move(best.cores);
    return out;
}

EvaluationResult evaluate_structure(const TensorDataset& dataset, const TNStructure& s,
                                    double lambda, const FitConfig& config, EvalCache& cache,
                                    SourceTag source) {
    if (dataset.order() != s.order())
        throw ShapeError("dataset order does not match structure order");
    if (lambda <= 0.0) throw ConfigError("lambda must be positive");

    if (auto hit = cache.lookup(s.ranks())) return *hit;

    const std::size_t count = dataset.num_samples();
    std::vector<double> errors(count, 0.0);
    parallel_for(count, [&](std::size_t l) {
        FitConfig per_sample = config;
        per_sample.seed = derive_seed(config.seed, l);
        errors[l] = fit_cores(dataset.sample(l), s, per_sample).relative_error;
    });

    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= static_cast<double>(count);

    EvaluationResult result{s,
                            compression_ratio(s, dataset.shape()),
                            mean,
                            0.0,
                            param_count(s, dataset.shape()),
                            0,
                            source};
    result.objective = objective_value(result.phi, lambda, mean);
    return cache.insert_or_get(std::move(result));
}

}  // namespace tnss
