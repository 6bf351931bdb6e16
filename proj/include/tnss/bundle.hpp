#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tnss/structure.hpp"
#include "tnss/tensor.hpp"

namespace tnss {

/// Sidecar metadata of an on-disk tensor bundle.
struct BundleManifest {
    std::vector<std::size_t> shape;
    std::size_t num_samples = 0;
    std::string dtype = "f64";
    SplitTag order_tag = SplitTag::Unsplit;
    std::vector<std::string> mode_names;  ///< optional, empty when absent
    std::vector<int> planted_ranks;       ///< optional, set by generate_synthetic
};

BundleManifest read_manifest(const std::filesystem::path& dir);

/// Load a bundle directory (manifest.json + data.bin, little-endian f64,
/// row-major samples back to back). Validates dtype and byte counts.
TensorDataset load_bundle(const std::filesystem::path& dir);

/// Write a bundle directory; the round trip through load_bundle is lossless.
void save_bundle(const TensorDataset& dataset, const std::filesystem::path& dir,
                 const std::vector<std::string>& mode_names = {},
                 const std::vector<int>& planted_ranks = {});

/// Order-preserving split: the first ceil(train_fraction * L) samples become
/// the train set (clamped so both halves are non-empty), the rest the test
/// set. Needs at least two samples.
std::pair<TensorDataset, TensorDataset> split_dataset(const TensorDataset& dataset,
                                                      double train_fraction = 0.8);

/// Draw L samples at a planted structure: per sample, seeded random cores are
/// contracted to the full tensor, optional i.i.d. Gaussian noise of the given
/// sigma is added, and the whole dataset is min-max normalized at the end.
/// The cores carry a constant fiber so the normalization's affine shift stays
/// exactly representable at the planted structure; with zero noise a refit at
/// the planted ranks can reach (numerically) zero error.
TensorDataset generate_synthetic(std::span<const std::size_t> shape, const TNStructure& planted,
                                 std::size_t num_samples, double noise_sigma,
                                 std::uint64_t seed);

}  // namespace tnss
