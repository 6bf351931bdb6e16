#include "tnss/bundle.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <json.hpp>

#include "tnss/contraction.hpp"
#include "tnss/objective.hpp"
#include "tnss/seeding.hpp"

namespace tnss {
namespace {

std::uint64_t to_le_bits(double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    return bits;
}

double from_le_bits(std::uint64_t bits) {
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    return std::bit_cast<double>(bits);
}

}  // namespace

BundleManifest read_manifest(const std::filesystem::path& dir) {
    const auto path = dir / "manifest.json";
    nlohmann::json j;
    try {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path.string());
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed manifest " + path.string() + ": " + e.what());
    }

    BundleManifest m;
    try {
        m.shape = j.at("shape").get<std::vector<std::size_t>>();
        m.num_samples = j.at("num_samples").get<std::size_t>();
        m.dtype = j.at("dtype").get<std::string>();
        m.order_tag = split_tag_from_string(j.at("order_tag").get<std::string>());
        if (j.contains("mode_names"))
            m.mode_names = j.at("mode_names").get<std::vector<std::string>>();
        if (j.contains("planted_ranks"))
            m.planted_ranks = j.at("planted_ranks").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed manifest " + path.string() + ": " + e.what());
    }
    return m;
}

TensorDataset load_bundle(const std::filesystem::path& dir) {
    const BundleManifest m = read_manifest(dir);
    if (m.dtype != "f64") throw IoError("unsupported dtype '" + m.dtype + "', expected f64");
    if (m.num_samples == 0) throw IoError("bundle declares zero samples");
    const std::size_t numel = shape_numel(m.shape);

    const auto data_path = dir / "data.bin";
    std::ifstream in(data_path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open " + data_path.string());
    const auto bytes = static_cast<std::size_t>(in.tellg());
    const std::size_t expected = m.num_samples * numel * sizeof(double);
    if (bytes != expected)
        throw IoError("data.bin holds " + std::to_string(bytes) + " bytes, manifest wants " +
                      std::to_string(expected));
    in.seekg(0);

    std::vector<DenseTensor> samples;
    samples.reserve(m.num_samples);
    std::vector<std::uint64_t> raw(numel);
    for (std::size_t s = 0; s < m.num_samples; ++s) {
        in.read(reinterpret_cast<char*>(raw.data()),
                static_cast<std::streamsize>(numel * sizeof(std::uint64_t)));
        if (!in) throw IoError("short read from " + data_path.string());
        std::vector<double> values(numel);
        for (std::size_t i = 0; i < numel; ++i) values[i] = from_le_bits(raw[i]);
        samples.emplace_back(m.shape, std::move(values));
    }
    return TensorDataset(std::move(samples), m.order_tag);
}

void save_bundle(const TensorDataset& dataset, const std::filesystem::path& dir,
                 const std::vector<std::string>& mode_names,
                 const std::vector<int>& planted_ranks) {
    std::filesystem::create_directories(dir);

    nlohmann::json j;
    j["shape"] = dataset.shape();
    j["num_samples"] = dataset.num_samples();
    j["dtype"] = "f64";
    j["order_tag"] = to_string(dataset.tag());
    if (!mode_names.empty()) {
        if (mode_names.size() != dataset.order())
            throw ConfigError("mode_names count does not match tensor order");
        j["mode_names"] = mode_names;
    }
    if (!planted_ranks.empty()) j["planted_ranks"] = planted_ranks;

    const auto manifest_path = dir / "manifest.json";
    std::ofstream mout(manifest_path);
    if (!mout) throw IoError("cannot write " + manifest_path.string());
    mout << j.dump(2) << "\n";
    if (!mout) throw IoError("failed writing " + manifest_path.string());

    const auto data_path = dir / "data.bin";
    std::ofstream out(data_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + data_path.string());
    std::vector<std::uint64_t> raw;
    for (const auto& s : dataset.samples()) {
        raw.resize(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) raw[i] = to_le_bits(s[i]);
        out.write(reinterpret_cast<const char*>(raw.data()),
                  static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
    }
    if (!out) throw IoError("failed writing " + data_path.string());
}

std::pair<TensorDataset, TensorDataset> split_dataset(const TensorDataset& dataset,
                                                      double train_fraction) {
    const std::size_t total = dataset.num_samples();
    if (total < 2) throw Error("need at least two samples to split");
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ConfigError("train fraction must lie in (0, 1)");

    auto count = static_cast<std::size_t>(
        std::ceil(train_fraction * static_cast<double>(total)));
    count = std::min(std::max<std::size_t>(count, 1), total - 1);

    std::vector<DenseTensor> train(dataset.samples().begin(),
                                   dataset.samples().begin() + static_cast<std::ptrdiff_t>(count));
    std::vector<DenseTensor> test(dataset.samples().begin() + static_cast<std::ptrdiff_t>(count),
                                  dataset.samples().end());
    return {TensorDataset(std::move(train), SplitTag::Train),
            TensorDataset(std::move(test), SplitTag::Test)};
}

TensorDataset generate_synthetic(std::span<const std::size_t> shape, const TNStructure& planted,
                                 std::size_t num_samples, double noise_sigma,
                                 std::uint64_t seed) {
    if (shape.size() != planted.order())
        throw ShapeError("shape order does not match planted structure order");
    if (num_samples == 0) throw ConfigError("num_samples must be at least 1");
    if (noise_sigma < 0.0) throw ConfigError("noise sigma must be non-negative");

    const std::size_t n = planted.order();
    std::vector<DenseTensor> samples;
    samples.reserve(num_samples);
    for (std::size_t l = 0; l < num_samples; ++l) {
        CoreSet cores = init_cores(planted, shape, derive_seed(seed, l));

        // Pin a constant fiber: in every core but the first, the slice where
        // the bond toward vertex 0 is index 0 holds sigma_v at the all-zero
        // remaining bonds and 0 elsewhere. The contraction of that fiber
        // pattern across cores is a constant tensor, so the affine shift from
        // min-max normalization below can be absorbed into core 0 exactly and
        // the normalized sample keeps an exact representation at the planted
        // structure.
        for (std::size_t v = 1; v < n; ++v) {
            auto& core = cores.cores[v];
            double bond_volume = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != v) bond_volume *= planted.rank(v, j);
            const double pinned = 1.0 / std::sqrt(bond_volume);

            const auto& cshape = core.shape();
            const auto strides = row_major_strides(cshape);
            // Bond modes follow the physical mode in ascending partner order,
            // so the bond toward vertex 0 is always mode 1 of this core.
            std::vector<std::size_t> idx(cshape.size(), 0);
            for (std::size_t flat = 0; flat < core.size(); ++flat) {
                if (idx[1] == 0) {
                    bool rest_zero = true;
                    for (std::size_t k = 2; k < cshape.size(); ++k)
                        if (idx[k] != 0) rest_zero = false;
                    core[flat] = rest_zero ? pinned : 0.0;
                }
                for (std::size_t k = cshape.size(); k-- > 0;) {
                    if (++idx[k] < cshape[k]) break;
                    idx[k] = 0;
                }
            }
        }

        DenseTensor x = tnc_contract(cores, planted);
        if (noise_sigma > 0.0) {
            std::mt19937_64 rng(derive_seed(seed ^ 0x6e6f697365ULL, l));
            std::normal_distribution<double> normal(0.0, noise_sigma);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += normal(rng);
        }
        samples.push_back(std::move(x));
    }
    return minmax_normalize(TensorDataset(std::move(samples), SplitTag::Unsplit));
}

}  // namespace tnss
