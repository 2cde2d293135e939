// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/network.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "dvdnet/error.hpp"

namespace dvdnet {

std::string to_string(BlockKind kind)
{
    return kind == BlockKind::spatial ? "spatial" : "temporal";
}

std::string to_string(NormMode mode)
{
    return mode == NormMode::train ? "train" : "eval";
}

BlockKind parse_block_kind(const std::string& text)
{
    if (text == "spatial") {
        return BlockKind::spatial;
    }
    if (text == "temporal") {
        return BlockKind::temporal;
    }
    throw ConfigError("unknown block kind '" + text + "'");
}

NormMode parse_norm_mode(const std::string& text)
{
    if (text == "train") {
        return NormMode::train;
    }
    if (text == "eval") {
        return NormMode::eval;
    }
    throw ConfigError("unknown normalization mode '" + text + "'");
}

BlockGeometry BlockGeometry::spatial(int width, int depth)
{
    return {BlockKind::spatial, depth, width, 0};
}

BlockGeometry BlockGeometry::temporal(int width, int depth, int radius)
{
    return {BlockKind::temporal, depth, width, radius};
}

std::vector<ConvLayerSpec> block_layout(const BlockGeometry& geometry)
{
    if (geometry.depth < 2) {
        throw ConfigError("block depth must be at least 2");
    }
    if (geometry.width < 1) {
        throw ConfigError("block width must be positive");
    }
    if (geometry.kind == BlockKind::temporal && geometry.temporal_radius < 0) {
        throw ConfigError("temporal radius must be non-negative");
    }
    std::vector<ConvLayerSpec> layout;
    layout.reserve(geometry.depth);
    layout.push_back({geometry.input_channels(), geometry.width, false, true});
    for (int i = 1; i + 1 < geometry.depth; ++i) {
        layout.push_back({geometry.width, geometry.width, true, true});
    }
    layout.push_back({geometry.width, geometry.output_channels(), false, false});
    return layout;
}

template <typename T>
BasicDenoiserParams<T>::BasicDenoiserParams(BlockGeometry geometry, std::vector<ConvLayer<T>> layers,
                                            NormMode mode)
    : geometry_(geometry), layers_(std::move(layers)), mode_(mode)
{
    validate();
}

template <typename T>
void BasicDenoiserParams<T>::validate() const
{
    const auto layout = block_layout(geometry_);
    if (layers_.size() != layout.size()) {
        throw ConfigError("layer count " + std::to_string(layers_.size()) +
                          " does not match block depth " + std::to_string(geometry_.depth));
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& layer = layers_[i];
        const auto where = "layer " + std::to_string(i) + ": ";
        if (!(layer.spec == layout[i])) {
            throw ConfigError(where + "spec does not match the block layout");
        }
        if (layer.weight.size() != layer.spec.weight_count() ||
            layer.bias.size() != static_cast<std::size_t>(layer.spec.out_channels)) {
            throw ConfigError(where + "weight or bias size mismatch");
        }
        const auto n = static_cast<std::size_t>(layer.spec.out_channels);
        if (!layer.spec.has_norm) {
            if (layer.norm || layer.affine) {
                throw ConfigError(where + "normalization state on an unnormalized layer");
            }
            continue;
        }
        if (mode_ == NormMode::train) {
            if (layer.affine) {
                throw StateError(where + "train-mode layer carries folded affine");
            }
            if (!layer.norm || layer.norm->gamma.size() != n || layer.norm->beta.size() != n ||
                layer.norm->running_mean.size() != n || layer.norm->running_var.size() != n) {
                throw StateError(where + "missing batch normalization statistics");
            }
        } else {
            if (layer.norm) {
                throw StateError(where + "eval-mode layer still carries running statistics");
            }
            if (!layer.affine || layer.affine->scale.size() != n || layer.affine->shift.size() != n) {
                throw StateError(where + "missing folded affine coefficients");
            }
        }
    }
}

template <typename T>
std::size_t BasicDenoiserParams<T>::parameter_count() const
{
    std::size_t total = 0;
    for (const auto& layer : layers_) {
        total += layer.weight.size() + layer.bias.size();
        if (layer.norm) {
            total += layer.norm->gamma.size() + layer.norm->beta.size();
        }
        if (layer.affine) {
            total += layer.affine->scale.size() + layer.affine->shift.size();
        }
    }
    return total;
}

template <typename T>
BasicDenoiserParams<T> initialize_block(const BlockGeometry& geometry, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<ConvLayer<T>> layers;
    for (const auto& spec : block_layout(geometry)) {
        ConvLayer<T> layer;
        layer.spec = spec;
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(spec.fan_in())));
        layer.weight.resize(spec.weight_count());
        for (auto& w : layer.weight) {
            w = static_cast<T>(dist(rng));
        }
        layer.bias.assign(spec.out_channels, T(0));
        if (spec.has_norm) {
            const auto n = static_cast<std::size_t>(spec.out_channels);
            layer.norm = BatchNormState<T>{std::vector<T>(n, T(1)), std::vector<T>(n, T(0)),
                                           std::vector<T>(n, T(0)), std::vector<T>(n, T(1))};
        }
        layers.push_back(std::move(layer));
    }
    BasicDenoiserParams<T> params(geometry, std::move(layers), NormMode::train);
    orthogonalize_kernels_inplace(params, seed ^ 0x9e3779b97f4a7c15ULL);
    return params;
}

template <typename T>
BasicDenoiserParams<T> fold_batchnorm(const BasicDenoiserParams<T>& params)
{
    if (params.mode() == NormMode::eval) {
        throw StateError("parameters are already folded");
    }
    params.validate();
    auto layers = params.layers();
    for (auto& layer : layers) {
        if (!layer.spec.has_norm) {
            continue;
        }
        const auto& bn = *layer.norm;
        AffineState<T> affine;
        affine.scale.resize(bn.gamma.size());
        affine.shift.resize(bn.gamma.size());
        for (std::size_t c = 0; c < bn.gamma.size(); ++c) {
            if (!(bn.running_var[c] >= T(0))) {
                throw StateError("running variance must be non-negative");
            }
            const T inv_std = T(1) / std::sqrt(bn.running_var[c] + static_cast<T>(kBatchNormEpsilon));
            affine.scale[c] = bn.gamma[c] * inv_std;
            affine.shift[c] = bn.beta[c] - bn.running_mean[c] * affine.scale[c];
        }
        layer.norm.reset();
        layer.affine = std::move(affine);
    }
    return BasicDenoiserParams<T>(params.geometry(), std::move(layers), NormMode::eval);
}

namespace {

using MatrixXdR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

MatrixXdR random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    const Eigen::Index tall = std::max(rows, cols);
    const Eigen::Index thin = std::min(rows, cols);
    Eigen::MatrixXd g(tall, thin);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        g.data()[i] = dist(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall, thin);
    if (rows >= cols) {
        return q;
    }
    return q.transpose();
}

} // namespace

template <typename T>
void orthogonalize_kernels_inplace(BasicDenoiserParams<T>& params, std::uint64_t seed)
{
    if (params.mode() != NormMode::train) {
        throw StateError("kernel orthogonalization applies to train-mode parameters");
    }
    auto& layers = params.layers();
    for (std::size_t li = 0; li < layers.size(); ++li) {
        auto& layer = layers[li];
        const auto rows = static_cast<Eigen::Index>(layer.spec.out_channels);
        const auto cols = static_cast<Eigen::Index>(layer.spec.fan_in());
        MatrixXdR g(rows, cols);
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            g.data()[i] = static_cast<double>(layer.weight[static_cast<std::size_t>(i)]);
        }
        const bool wide = rows <= cols;
        const Eigen::MatrixXd gram = wide ? Eigen::MatrixXd(g * g.transpose())
                                          : Eigen::MatrixXd(g.transpose() * g);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        const auto& lambda = eig.eigenvalues();
        const double largest = lambda.maxCoeff();
        const double smallest = lambda.minCoeff();
        MatrixXdR projected;
        if (!(largest > 0.0) || smallest <= 1e-12 * largest) {
            projected = random_orthonormal(rows, cols, seed + 0x632be59bd9b4e019ULL * (li + 1));
        } else {
            const Eigen::MatrixXd& v = eig.eigenvectors();
            const Eigen::MatrixXd inv_sqrt =
                v * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
            projected = wide ? MatrixXdR(inv_sqrt * g) : MatrixXdR(g * inv_sqrt);
        }
        for (Eigen::Index i = 0; i < projected.size(); ++i) {
            layer.weight[static_cast<std::size_t>(i)] = static_cast<T>(projected.data()[i]);
        }
    }
}

template <typename T>
double kernel_orthogonality_error(const ConvLayer<T>& layer)
{
    const auto rows = static_cast<Eigen::Index>(layer.spec.out_channels);
    const auto cols = static_cast<Eigen::Index>(layer.spec.fan_in());
    MatrixXdR g(rows, cols);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        g.data()[i] = static_cast<double>(layer.weight[static_cast<std::size_t>(i)]);
    }
    const Eigen::MatrixXd gram = rows <= cols ? Eigen::MatrixXd(g * g.transpose())
                                              : Eigen::MatrixXd(g.transpose() * g);
    return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).norm();
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
using MatrixR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using StridedMap = Eigen::Map<MatrixR<T>, Eigen::Unaligned, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const MatrixR<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

constexpr std::size_t kColumnChunk = 8192;

struct ColumnIndex {
    std::vector<std::size_t> base;
    std::vector<int> y;
    std::vector<int> x;
};

template <typename T>
ColumnIndex index_columns(const Activations<T>& a, std::size_t begin, std::size_t count)
{
    ColumnIndex idx;
    idx.base.resize(count);
    idx.y.resize(count);
    idx.x.resize(count);
    const std::size_t plane = static_cast<std::size_t>(a.height) * a.width;
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t col = begin + j;
        const std::size_t n = col / plane;
        const std::size_t rem = col % plane;
        idx.base[j] = n * plane;
        idx.y[j] = static_cast<int>(rem / a.width);
        idx.x[j] = static_cast<int>(rem % a.width);
    }
    return idx;
}

// Rows are (channel, ky, kx) to match the weight layout; zero padding of 1.
template <typename T>
void im2col(const Activations<T>& in, const ColumnIndex& idx, std::size_t count, T* cols)
{
    const std::size_t total = in.columns();
    for (int c = 0; c < in.channels; ++c) {
        const T* src = in.data.data() + static_cast<std::size_t>(c) * total;
        for (int k = 0; k < kKernelTaps; ++k) {
            const int dy = k / 3 - 1;
            const int dx = k % 3 - 1;
            T* row = cols + (static_cast<std::size_t>(c) * kKernelTaps + k) * count;
            for (std::size_t j = 0; j < count; ++j) {
                const int yy = idx.y[j] + dy;
                const int xx = idx.x[j] + dx;
                row[j] = (yy >= 0 && yy < in.height && xx >= 0 && xx < in.width)
                             ? src[idx.base[j] + static_cast<std::size_t>(yy) * in.width + xx]
                             : T(0);
            }
        }
    }
}

template <typename T>
void col2im_add(const T* cols, const ColumnIndex& idx, std::size_t count, Activations<T>& grad)
{
    const std::size_t total = grad.columns();
    for (int c = 0; c < grad.channels; ++c) {
        T* dst = grad.data.data() + static_cast<std::size_t>(c) * total;
        for (int k = 0; k < kKernelTaps; ++k) {
            const int dy = k / 3 - 1;
            const int dx = k % 3 - 1;
            const T* row = cols + (static_cast<std::size_t>(c) * kKernelTaps + k) * count;
            for (std::size_t j = 0; j < count; ++j) {
                const int yy = idx.y[j] + dy;
                const int xx = idx.x[j] + dx;
                if (yy >= 0 && yy < grad.height && xx >= 0 && xx < grad.width) {
                    dst[idx.base[j] + static_cast<std::size_t>(yy) * grad.width + xx] += row[j];
                }
            }
        }
    }
}

template <typename T>
Activations<T> convolve(const ConvLayer<T>& layer, const Activations<T>& in)
{
    const auto& spec = layer.spec;
    Activations<T> out(spec.out_channels, in.batch, in.height, in.width);
    const std::size_t total = in.columns();
    const auto fan_in = static_cast<Eigen::Index>(spec.fan_in());
    Eigen::Map<const MatrixR<T>> weight(layer.weight.data(), spec.out_channels, fan_in);
    std::vector<T> cols;
    for (std::size_t begin = 0; begin < total; begin += kColumnChunk) {
        const std::size_t count = std::min(kColumnChunk, total - begin);
        cols.resize(static_cast<std::size_t>(fan_in) * count);
        const auto idx = index_columns(in, begin, count);
        im2col(in, idx, count, cols.data());
        Eigen::Map<const MatrixR<T>> col_mat(cols.data(), fan_in, static_cast<Eigen::Index>(count));
        StridedMap<T> dst(out.data.data() + begin, spec.out_channels, static_cast<Eigen::Index>(count),
                          Eigen::OuterStride<>(static_cast<Eigen::Index>(total)));
        dst.noalias() = weight * col_mat;
    }
    for (int o = 0; o < spec.out_channels; ++o) {
        T* row = out.data.data() + static_cast<std::size_t>(o) * total;
        const T b = layer.bias[o];
        for (std::size_t j = 0; j < total; ++j) {
            row[j] += b;
        }
    }
    return out;
}

} // namespace

template <typename T>
Activations<T> run_layers(const BasicDenoiserParams<T>& params, Activations<T> input, NormUsage usage,
                          ForwardTrace<T>* trace)
{
    const auto& layers = params.layers();
    if (layers.empty() || input.channels != layers.front().spec.in_channels) {
        throw DimensionError("input has " + std::to_string(input.channels) + " channels, block expects " +
                             (layers.empty() ? std::string("none")
                                             : std::to_string(layers.front().spec.in_channels)));
    }
    if (input.data.size() != static_cast<std::size_t>(input.channels) * input.columns()) {
        throw DimensionError("activation buffer size does not match its shape");
    }
    if (trace) {
        if (params.mode() != NormMode::train || usage != NormUsage::batch_statistics) {
            throw StateError("tracing requires train-mode parameters with batch statistics");
        }
        trace->layers.clear();
        trace->layers.reserve(layers.size());
    }
    const T eps = static_cast<T>(kBatchNormEpsilon);
    Activations<T> current = std::move(input);
    for (const auto& layer : layers) {
        Activations<T> z = convolve(layer, current);
        LayerTrace<T>* lt = nullptr;
        if (trace) {
            trace->layers.push_back({});
            lt = &trace->layers.back();
            lt->input = std::move(current);
        }
        const std::size_t total = z.columns();
        const int channels = layer.spec.out_channels;
        if (layer.spec.has_norm) {
            if (params.mode() == NormMode::eval) {
                const auto& aff = *layer.affine;
                for (int c = 0; c < channels; ++c) {
                    T* row = z.data.data() + static_cast<std::size_t>(c) * total;
                    for (std::size_t j = 0; j < total; ++j) {
                        row[j] = aff.scale[c] * row[j] + aff.shift[c];
                    }
                }
            } else if (usage == NormUsage::running_statistics) {
                const auto& bn = *layer.norm;
                for (int c = 0; c < channels; ++c) {
                    T* row = z.data.data() + static_cast<std::size_t>(c) * total;
                    const T inv_std = T(1) / std::sqrt(bn.running_var[c] + eps);
                    for (std::size_t j = 0; j < total; ++j) {
                        row[j] = bn.gamma[c] * ((row[j] - bn.running_mean[c]) * inv_std) + bn.beta[c];
                    }
                }
            } else {
                const auto& bn = *layer.norm;
                if (lt) {
                    lt->normalized.resize(z.data.size());
                    lt->inv_std.resize(channels);
                    lt->batch_mean.resize(channels);
                    lt->batch_var.resize(channels);
                }
                for (int c = 0; c < channels; ++c) {
                    T* row = z.data.data() + static_cast<std::size_t>(c) * total;
                    double sum = 0.0;
                    for (std::size_t j = 0; j < total; ++j) {
                        sum += static_cast<double>(row[j]);
                    }
                    const double mean = sum / static_cast<double>(total);
                    double sq = 0.0;
                    for (std::size_t j = 0; j < total; ++j) {
                        const double d = static_cast<double>(row[j]) - mean;
                        sq += d * d;
                    }
                    const double var = sq / static_cast<double>(total);
                    const T inv_std = static_cast<T>(1.0 / std::sqrt(var + kBatchNormEpsilon));
                    const T m = static_cast<T>(mean);
                    T* xhat = lt ? lt->normalized.data() + static_cast<std::size_t>(c) * total : nullptr;
                    for (std::size_t j = 0; j < total; ++j) {
                        const T nv = (row[j] - m) * inv_std;
                        if (xhat) {
                            xhat[j] = nv;
                        }
                        row[j] = bn.gamma[c] * nv + bn.beta[c];
                    }
                    if (lt) {
                        lt->inv_std[c] = inv_std;
                        lt->batch_mean[c] = m;
                        lt->batch_var[c] = static_cast<T>(var);
                    }
                }
            }
        }
        if (lt && layer.spec.has_activation) {
            lt->pre_activation = z.data;
        }
        if (layer.spec.has_activation) {
            for (auto& v : z.data) {
                v = std::max(v, T(0));
            }
        }
        current = std::move(z);
    }
    return current;
}

template <typename T>
Gradients<T> backprop_layers(const BasicDenoiserParams<T>& params, const ForwardTrace<T>& trace,
                             Activations<T> grad_output)
{
    const auto& layers = params.layers();
    if (trace.layers.size() != layers.size()) {
        throw StateError("forward trace does not belong to these parameters");
    }
    Gradients<T> grads;
    grads.layers.resize(layers.size());
    Activations<T> grad = std::move(grad_output);
    for (std::size_t li = layers.size(); li-- > 0;) {
        const auto& layer = layers[li];
        const auto& lt = trace.layers[li];
        auto& lg = grads.layers[li];
        const int channels = layer.spec.out_channels;
        const std::size_t total = grad.columns();
        if (grad.channels != channels || total != lt.input.columns()) {
            throw DimensionError("gradient shape does not match layer output");
        }
        if (layer.spec.has_activation) {
            for (std::size_t i = 0; i < grad.data.size(); ++i) {
                if (!(lt.pre_activation[i] > T(0))) {
                    grad.data[i] = T(0);
                }
            }
        }
        if (layer.spec.has_norm) {
            const auto& bn = *layer.norm;
            lg.gamma.assign(channels, T(0));
            lg.beta.assign(channels, T(0));
            const T inv_n = T(1) / static_cast<T>(total);
            for (int c = 0; c < channels; ++c) {
                T* g = grad.data.data() + static_cast<std::size_t>(c) * total;
                const T* xhat = lt.normalized.data() + static_cast<std::size_t>(c) * total;
                double sum_dy = 0.0;
                double sum_dy_xhat = 0.0;
                for (std::size_t j = 0; j < total; ++j) {
                    sum_dy += static_cast<double>(g[j]);
                    sum_dy_xhat += static_cast<double>(g[j]) * static_cast<double>(xhat[j]);
                }
                lg.gamma[c] = static_cast<T>(sum_dy_xhat);
                lg.beta[c] = static_cast<T>(sum_dy);
                // dxhat = gamma * dy, so its sums are gamma times those of dy.
                const T gamma = bn.gamma[c];
                const T mean_dxhat = gamma * static_cast<T>(sum_dy) * inv_n;
                const T mean_dxhat_xhat = gamma * static_cast<T>(sum_dy_xhat) * inv_n;
                const T scale = lt.inv_std[c];
                for (std::size_t j = 0; j < total; ++j) {
                    g[j] = scale * (gamma * g[j] - mean_dxhat - xhat[j] * mean_dxhat_xhat);
                }
            }
        }
        lg.bias.assign(channels, T(0));
        for (int c = 0; c < channels; ++c) {
            const T* g = grad.data.data() + static_cast<std::size_t>(c) * total;
            double sum = 0.0;
            for (std::size_t j = 0; j < total; ++j) {
                sum += static_cast<double>(g[j]);
            }
            lg.bias[c] = static_cast<T>(sum);
        }

        const auto fan_in = static_cast<Eigen::Index>(layer.spec.fan_in());
        Eigen::Map<const MatrixR<T>> weight(layer.weight.data(), channels, fan_in);
        lg.weight.assign(layer.weight.size(), T(0));
        Eigen::Map<MatrixR<T>> dweight(lg.weight.data(), channels, fan_in);
        const bool need_input_grad = li > 0;
        Activations<T> grad_in;
        if (need_input_grad) {
            grad_in = Activations<T>(lt.input.channels, lt.input.batch, lt.input.height, lt.input.width);
        }
        std::vector<T> cols;
        std::vector<T> dcols;
        for (std::size_t begin = 0; begin < total; begin += kColumnChunk) {
            const std::size_t count = std::min(kColumnChunk, total - begin);
            const auto idx = index_columns(lt.input, begin, count);
            cols.resize(static_cast<std::size_t>(fan_in) * count);
            im2col(lt.input, idx, count, cols.data());
            Eigen::Map<const MatrixR<T>> col_mat(cols.data(), fan_in, static_cast<Eigen::Index>(count));
            ConstStridedMap<T> g(grad.data.data() + begin, channels, static_cast<Eigen::Index>(count),
                                 Eigen::OuterStride<>(static_cast<Eigen::Index>(total)));
            dweight.noalias() += g * col_mat.transpose();
            if (need_input_grad) {
                dcols.resize(cols.size());
                Eigen::Map<MatrixR<T>> dcol_mat(dcols.data(), fan_in, static_cast<Eigen::Index>(count));
                dcol_mat.noalias() = weight.transpose() * g;
                col2im_add(dcols.data(), idx, count, grad_in);
            }
        }
        if (need_input_grad) {
            grad = std::move(grad_in);
        }
    }
    return grads;
}

#define DVDNET_INSTANTIATE(T)                                                                     \
    template class BasicDenoiserParams<T>;                                                        \
    template BasicDenoiserParams<T> initialize_block<T>(const BlockGeometry&, std::uint64_t);     \
    template BasicDenoiserParams<T> fold_batchnorm<T>(const BasicDenoiserParams<T>&);             \
    template void orthogonalize_kernels_inplace<T>(BasicDenoiserParams<T>&, std::uint64_t);       \
    template double kernel_orthogonality_error<T>(const ConvLayer<T>&);                           \
    template Activations<T> run_layers<T>(const BasicDenoiserParams<T>&, Activations<T>, NormUsage, \
                                          ForwardTrace<T>*);                                      \
    template Gradients<T> backprop_layers<T>(const BasicDenoiserParams<T>&, const ForwardTrace<T>&, \
                                             Activations<T>);

DVDNET_INSTANTIATE(float)
DVDNET_INSTANTIATE(double)

#undef DVDNET_INSTANTIATE

} // namespace dvdnet
