#pragma once

// Multinomial logistic regression over hashed features: the built-in,
// deterministic classifier backend.

#include "dialam/dataset.hpp"
#include "dialam/error.hpp"
#include "dialam/features.hpp"
#include "dialam/rng.hpp"
#include "dialam/task.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace dialam {

struct TrainingParams
{
    std::uint32_t epochs = 10;
    double lr = 0.1;
    double l2 = 1e-6;
    std::uint64_t seed = 0;

    friend bool operator==(const TrainingParams&, const TrainingParams&) = default;
};

/// Normalised scores in TaskSpec label order.
struct LabelDistribution
{
    std::vector<double> scores;

    /// Highest score; ties go to the lowest index.
    std::size_t argmax() const noexcept
    {
        std::size_t best = 0;
        for (std::size_t i = 1; i < scores.size(); ++i)
            if (scores[i] > scores[best])
                best = i;
        return best;
    }

    friend bool operator==(const LabelDistribution&, const LabelDistribution&) = default;
};

struct LinearModel
{
    TaskSpec task;
    FeatureConfig features;
    std::vector<double> weights; // K rows of dim, row-major
    std::vector<double> bias;    // K
    TrainingParams hyper;
    std::vector<double> epoch_loss; // full objective after each epoch

    std::size_t classes() const noexcept { return task.size(); }
    std::size_t dim() const noexcept { return features.dim(); }
    double final_loss() const noexcept { return epoch_loss.empty() ? std::nan("") : epoch_loss.back(); }

    std::span<double> row(std::size_t k) noexcept { return {weights.data() + k * dim(), dim()}; }
    std::span<const double> row(std::size_t k) const noexcept { return {weights.data() + k * dim(), dim()}; }

    friend bool operator==(const LinearModel& a, const LinearModel& b)
    {
        auto bits_equal = [](std::span<const double> x, std::span<const double> y) {
            return x.size() == y.size() && (x.empty() || std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
        };
        return a.task == b.task && a.features == b.features && a.hyper == b.hyper
            && bits_equal(a.weights, b.weights) && bits_equal(a.bias, b.bias)
            && bits_equal(a.epoch_loss, b.epoch_loss);
    }
};

/// An all-zero model, which predicts the uniform distribution.
inline LinearModel zero_model(TaskSpec task, FeatureConfig features = {}, TrainingParams hyper = {})
{
    LinearModel m{std::move(task), features, {}, {}, hyper, {}};
    m.weights.assign(m.classes() * m.dim(), 0.0);
    m.bias.assign(m.classes(), 0.0);
    return m;
}

/// A featurized example.
struct LabeledVector
{
    SparseVector x;
    std::size_t label;
};

namespace detail {

inline void softmax_in_place(std::span<double> z) noexcept
{
    const double top = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - top);
        sum += v;
    }
    for (auto& v : z)
        v /= sum;
}

inline double dot(std::span<const double> row, const SparseVector& x) noexcept
{
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
        s += row[x.indices[j]] * x.values[j];
    return s;
}

inline void scores(const LinearModel& m, const SparseVector& x, std::span<double> out) noexcept
{
    for (std::size_t k = 0; k < m.classes(); ++k)
        out[k] = dot(m.row(k), x) + m.bias[k];
}

/// -log softmax(z)[label], computed stably.
inline double cross_entropy(std::span<const double> z, std::size_t label) noexcept
{
    const double top = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z)
        sum += std::exp(v - top);
    return (top + std::log(sum)) - z[label];
}

inline double squared_norm(std::span<const double> w) noexcept
{
    double s = 0.0;
    for (double v : w)
        s += v * v;
    return s;
}

} // namespace detail

inline LabelDistribution predict_vector(const LinearModel& model, const SparseVector& x)
{
    LabelDistribution d;
    d.scores.resize(model.classes());
    detail::scores(model, x, d.scores);
    detail::softmax_in_place(d.scores);
    return d;
}

/// softmax(W x + b) for the featurized instance.
inline LabelDistribution predict(const LinearModel& model, const PairInstance& inst)
{
    return predict_vector(model, featurize(inst, model.features));
}

/// Mean softmax cross-entropy of the batch plus l2/2 * ||W||^2 (bias is not
/// penalised), using model.hyper.l2.
inline double objective(const LinearModel& model, std::span<const LabeledVector> batch)
{
    std::vector<double> z(model.classes());
    double ce = 0.0;
    for (const auto& ex : batch) {
        detail::scores(model, ex.x, z);
        ce += detail::cross_entropy(z, ex.label);
    }
    return ce / static_cast<double>(batch.size()) + 0.5 * model.hyper.l2 * detail::squared_norm(model.weights);
}

struct Gradient
{
    std::vector<double> weights; // same layout as LinearModel::weights
    std::vector<double> bias;
};

struct LossAndGrad
{
    double loss;
    Gradient grad;
};

/// The objective and its analytic gradient:
///   dL/dW_k = mean_i (p_ik - [y_i = k]) x_i + l2 W_k
///   dL/db_k = mean_i (p_ik - [y_i = k])
inline LossAndGrad loss_and_grad(const LinearModel& model, std::span<const LabeledVector> batch)
{
    const std::size_t K = model.classes();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    LossAndGrad out{0.0, {std::vector<double>(model.weights.size()), std::vector<double>(K, 0.0)}};
    for (std::size_t i = 0; i < model.weights.size(); ++i)
        out.grad.weights[i] = model.hyper.l2 * model.weights[i];

    std::vector<double> z(K);
    double ce = 0.0;
    for (const auto& ex : batch) {
        detail::scores(model, ex.x, z);
        ce += detail::cross_entropy(z, ex.label);
        detail::softmax_in_place(z);
        for (std::size_t k = 0; k < K; ++k) {
            const double g = (z[k] - (k == ex.label ? 1.0 : 0.0)) * inv_n;
            out.grad.bias[k] += g;
            double* row = out.grad.weights.data() + k * model.dim();
            for (std::size_t j = 0; j < ex.x.size(); ++j)
                row[ex.x.indices[j]] += g * ex.x.values[j];
        }
    }
    out.loss = ce * inv_n + 0.5 * model.hyper.l2 * detail::squared_norm(model.weights);
    return out;
}

/// Map records onto label indices and feature vectors. Throws DegenerateData
/// for labels outside the vocabulary.
inline std::vector<LabeledVector> vectorize(std::span<const ExampleRecord> records, const TaskSpec& task,
                                            const FeatureConfig& features)
{
    std::vector<LabeledVector> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        const auto label = task.index_of(r.label);
        if (!label)
            throw Error(ErrorCode::DegenerateData, r.label,
                        "label is not in the " + std::string(to_string(task.name)) + " vocabulary");
        out.push_back({featurize(r.instance, features), *label});
    }
    return out;
}

/// Seeded-shuffle SGD on the regularised softmax cross-entropy, one example
/// per step with a constant learning rate:
///   W <- (1 - lr l2) W - lr (p - y) x^T,   b <- b - lr (p - y)
/// The weight decay is applied through a running scale factor so each step
/// only touches the active features. Every label must occur at least once.
inline LinearModel train_vectors(std::span<const LabeledVector> data, const TaskSpec& task,
                                 const TrainingParams& hyper = {}, const FeatureConfig& features = {})
{
    const std::size_t K = task.size();
    std::vector<std::size_t> seen(K, 0);
    for (const auto& ex : data) {
        if (ex.label >= K)
            throw Error(ErrorCode::DegenerateData, std::to_string(ex.label), "label index out of range");
        ++seen[ex.label];
    }
    for (std::size_t k = 0; k < K; ++k)
        if (seen[k] == 0)
            throw Error(ErrorCode::DegenerateData, task.labels[k], "no training example carries this label");
    if (!(hyper.lr > 0.0) || !(hyper.l2 >= 0.0) || hyper.lr * hyper.l2 >= 1.0)
        throw Error(ErrorCode::DegenerateData, "", "learning rate must be positive and lr * l2 below 1");

    LinearModel model = zero_model(task, features, hyper);
    const std::size_t dim = model.dim();
    std::vector<double>& v = model.weights; // W = scale * v during training
    double scale = 1.0;
    const double decay = 1.0 - hyper.lr * hyper.l2;

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(hyper.seed);
    std::vector<double> z(K);

    for (std::uint32_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        shuffle(order, rng);
        for (auto idx : order) {
            const auto& ex = data[idx];
            for (std::size_t k = 0; k < K; ++k)
                z[k] = scale * detail::dot({v.data() + k * dim, dim}, ex.x) + model.bias[k];
            detail::softmax_in_place(z);
            scale *= decay;
            const double step = hyper.lr / scale;
            for (std::size_t k = 0; k < K; ++k) {
                const double g = z[k] - (k == ex.label ? 1.0 : 0.0);
                model.bias[k] -= hyper.lr * g;
                double* row = v.data() + k * dim;
                for (std::size_t j = 0; j < ex.x.size(); ++j)
                    row[ex.x.indices[j]] -= step * g * ex.x.values[j];
            }
            if (scale < 1e-9) {
                for (auto& w : v)
                    w *= scale;
                scale = 1.0;
            }
        }
        if (scale != 1.0) {
            for (auto& w : v)
                w *= scale;
            scale = 1.0;
        }
        const double loss = objective(model, data);
        if (!std::isfinite(loss))
            throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch + 1),
                        "training diverged; lower the learning rate");
        model.epoch_loss.push_back(loss);
    }
    return model;
}

inline LinearModel train(std::span<const ExampleRecord> records, const TaskSpec& task,
                         const TrainingParams& hyper = {}, const FeatureConfig& features = {})
{
    const auto data = vectorize(records, task, features);
    return train_vectors(data, task, hyper, features);
}

// ---------------------------------------------------------------------------
// Model files
//
//   "DLAM"                    magic
//   u32  version (1)
//   u32  n, n bytes           task name
//   u32  log2 dim, u64 hash seed
//   u64  seed, u32 epochs, f64 lr, f64 l2
//   u32  n, n x f64           per-epoch loss
//   u32  K
//   K x f64                   bias
//   K*dim x f64               weights, row-major
//   u64                       FNV-1a of every preceding byte
//
// All integers and floats little endian.

inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

class ByteWriter
{
public:
    void raw(const void* p, std::size_t n) { m_buf.append(static_cast<const char*>(p), n); }

    template <typename T>
    void scalar(T v)
    {
        static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");
        raw(&v, sizeof v);
    }

    void str(std::string_view s)
    {
        scalar(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }

    void doubles(std::span<const double> xs) { raw(xs.data(), xs.size() * sizeof(double)); }

    std::string& buffer() noexcept { return m_buf; }

private:
    std::string m_buf;
};

class ByteReader
{
public:
    explicit ByteReader(std::string_view buf) : m_buf(buf) {}

    void raw(void* p, std::size_t n)
    {
        if (n > m_buf.size() - m_pos)
            throw Error(ErrorCode::CorruptModel, "", "model file is truncated");
        std::memcpy(p, m_buf.data() + m_pos, n);
        m_pos += n;
    }

    template <typename T>
    T scalar()
    {
        T v;
        raw(&v, sizeof v);
        return v;
    }

    std::string str(std::size_t limit)
    {
        const auto n = scalar<std::uint32_t>();
        if (n > limit)
            throw Error(ErrorCode::CorruptModel, "", "string field too long");
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }

    std::vector<double> doubles(std::size_t n)
    {
        if (n > (m_buf.size() - m_pos) / sizeof(double))
            throw Error(ErrorCode::CorruptModel, "", "model file is truncated");
        std::vector<double> xs(n);
        raw(xs.data(), n * sizeof(double));
        return xs;
    }

    std::size_t position() const noexcept { return m_pos; }

private:
    std::string_view m_buf;
    std::size_t m_pos = 0;
};

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, path.string(), "cannot open for reading");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw Error(ErrorCode::IoFailure, path.string(), "read failed");
    return data;
}

/// Write through a sibling temporary file and rename over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view data)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::IoFailure, tmp.string(), "cannot open for writing");
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out)
            throw Error(ErrorCode::IoFailure, tmp.string(), "write failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, path.string(), ec.message());
}

} // namespace detail

inline std::string encode_model(const LinearModel& m)
{
    detail::ByteWriter w;
    w.raw("DLAM", 4);
    w.scalar(kModelVersion);
    w.str(to_string(m.task.name));
    w.scalar(m.features.log2_dim);
    w.scalar(m.features.hash_seed);
    w.scalar(m.hyper.seed);
    w.scalar(m.hyper.epochs);
    w.scalar(m.hyper.lr);
    w.scalar(m.hyper.l2);
    w.scalar(static_cast<std::uint32_t>(m.epoch_loss.size()));
    w.doubles(m.epoch_loss);
    w.scalar(static_cast<std::uint32_t>(m.classes()));
    w.doubles(m.bias);
    w.doubles(m.weights);
    w.scalar(Fnv1a{}.bytes(w.buffer()).value());
    return std::move(w.buffer());
}

inline LinearModel decode_model(std::string_view bytes)
{
    detail::ByteReader r(bytes);
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, "DLAM", 4) != 0)
        throw Error(ErrorCode::CorruptModel, "", "bad magic");
    const auto version = r.scalar<std::uint32_t>();
    if (version != kModelVersion)
        throw Error(ErrorCode::VersionMismatch, std::to_string(version),
                    "expected model version " + std::to_string(kModelVersion));
    if (bytes.size() < 8 + sizeof(std::uint64_t))
        throw Error(ErrorCode::CorruptModel, "", "model file is truncated");
    const auto body = bytes.substr(0, bytes.size() - sizeof(std::uint64_t));
    std::uint64_t stored;
    std::memcpy(&stored, bytes.data() + body.size(), sizeof stored);
    if (Fnv1a{}.bytes(body).value() != stored)
        throw Error(ErrorCode::CorruptModel, "", "checksum mismatch");

    const auto task_name = parse_task_name(r.str(64));
    if (!task_name)
        throw Error(ErrorCode::CorruptModel, "", "unknown task");
    LinearModel m;
    m.task = task_spec(*task_name);
    m.features.log2_dim = r.scalar<std::uint32_t>();
    if (m.features.log2_dim > 30)
        throw Error(ErrorCode::CorruptModel, "", "feature dimension out of range");
    m.features.hash_seed = r.scalar<std::uint64_t>();
    m.hyper.seed = r.scalar<std::uint64_t>();
    m.hyper.epochs = r.scalar<std::uint32_t>();
    m.hyper.lr = r.scalar<double>();
    m.hyper.l2 = r.scalar<double>();
    m.epoch_loss = r.doubles(r.scalar<std::uint32_t>());
    const auto K = r.scalar<std::uint32_t>();
    if (K != m.task.size())
        throw Error(ErrorCode::CorruptModel, "", "class count does not match the task");
    m.bias = r.doubles(K);
    m.weights = r.doubles(static_cast<std::size_t>(K) * m.dim());
    if (r.position() != body.size())
        throw Error(ErrorCode::CorruptModel, "", "trailing bytes");
    return m;
}

inline void save_model(const LinearModel& m, const std::filesystem::path& path)
{
    detail::write_file_atomic(path, encode_model(m));
}

inline LinearModel load_model(const std::filesystem::path& path)
{
    const auto bytes = detail::read_file(path);
    try {
        return decode_model(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string(), e.what());
    }
}

} // namespace dialam
