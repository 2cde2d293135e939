// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dvdnet {

enum class BlockKind { spatial, temporal };
enum class NormMode { train, eval };

std::string to_string(BlockKind kind);
std::string to_string(NormMode mode);
BlockKind parse_block_kind(const std::string& text);
NormMode parse_norm_mode(const std::string& text);

inline constexpr int kFeatureWidth = 96;
inline constexpr int kSpatialDepth = 12;
inline constexpr int kTemporalDepth = 6;
inline constexpr int kTemporalRadius = 2;
inline constexpr int kKernelTaps = 9;
/// Channels produced by space_to_depth on an RGB frame.
inline constexpr int kPackedFrameChannels = 12;
inline constexpr double kBatchNormEpsilon = 1e-5;

struct ConvLayerSpec {
    static constexpr int kernel = 3;
    static constexpr int stride = 1;

    int in_channels = 0;
    int out_channels = 0;
    bool has_norm = false;
    bool has_activation = false;

    std::size_t fan_in() const noexcept
    {
        return static_cast<std::size_t>(in_channels) * kKernelTaps;
    }
    std::size_t weight_count() const noexcept
    {
        return static_cast<std::size_t>(out_channels) * fan_in();
    }

    friend bool operator==(const ConvLayerSpec&, const ConvLayerSpec&) = default;
};

/// Shape of a denoising block. The published blocks are spatial (depth 12)
/// and temporal (depth 6, radius 2), both 96 features wide.
struct BlockGeometry {
    BlockKind kind = BlockKind::spatial;
    int depth = kSpatialDepth;
    int width = kFeatureWidth;
    int temporal_radius = 0;

    static BlockGeometry spatial(int width = kFeatureWidth, int depth = kSpatialDepth);
    static BlockGeometry temporal(int width = kFeatureWidth, int depth = kTemporalDepth,
                                  int radius = kTemporalRadius);

    /// Frames consumed per forward pass (1 for spatial, 2T+1 for temporal).
    int window_length() const noexcept
    {
        return kind == BlockKind::spatial ? 1 : 2 * temporal_radius + 1;
    }
    int input_channels() const noexcept { return window_length() * kPackedFrameChannels + 1; }
    int output_channels() const noexcept { return kPackedFrameChannels; }

    friend bool operator==(const BlockGeometry&, const BlockGeometry&) = default;
};

/// conv+ReLU, then (depth-2) x conv+BN+ReLU, then a bare conv.
std::vector<ConvLayerSpec> block_layout(const BlockGeometry& geometry);

template <typename T>
struct BatchNormState {
    std::vector<T> gamma;
    std::vector<T> beta;
    std::vector<T> running_mean;
    std::vector<T> running_var;
};

template <typename T>
struct AffineState {
    std::vector<T> scale;
    std::vector<T> shift;
};

template <typename T>
struct ConvLayer {
    ConvLayerSpec spec;
    /// out_channels x in_channels x 3 x 3, row-major.
    std::vector<T> weight;
    std::vector<T> bias;
    std::optional<BatchNormState<T>> norm;
    std::optional<AffineState<T>> affine;
};

template <typename T>
class BasicDenoiserParams {
public:
    BasicDenoiserParams() = default;
    BasicDenoiserParams(BlockGeometry geometry, std::vector<ConvLayer<T>> layers, NormMode mode);

    const BlockGeometry& geometry() const noexcept { return geometry_; }
    BlockKind kind() const noexcept { return geometry_.kind; }
    int depth() const noexcept { return geometry_.depth; }
    NormMode mode() const noexcept { return mode_; }

    const std::vector<ConvLayer<T>>& layers() const noexcept { return layers_; }
    std::vector<ConvLayer<T>>& layers() noexcept { return layers_; }

    /// Throws ConfigError/StateError when layers disagree with the geometry
    /// or with the normalization mode.
    void validate() const;

    std::size_t parameter_count() const;

    template <typename U>
    BasicDenoiserParams<U> cast() const
    {
        std::vector<ConvLayer<U>> out;
        out.reserve(layers_.size());
        auto conv = [](const std::vector<T>& v) { return std::vector<U>(v.begin(), v.end()); };
        for (const auto& layer : layers_) {
            ConvLayer<U> l;
            l.spec = layer.spec;
            l.weight = conv(layer.weight);
            l.bias = conv(layer.bias);
            if (layer.norm) {
                l.norm = BatchNormState<U>{conv(layer.norm->gamma), conv(layer.norm->beta),
                                           conv(layer.norm->running_mean),
                                           conv(layer.norm->running_var)};
            }
            if (layer.affine) {
                l.affine = AffineState<U>{conv(layer.affine->scale), conv(layer.affine->shift)};
            }
            out.push_back(std::move(l));
        }
        return BasicDenoiserParams<U>(geometry_, std::move(out), mode_);
    }

private:
    BlockGeometry geometry_;
    std::vector<ConvLayer<T>> layers_;
    NormMode mode_ = NormMode::train;
};

using DenoiserParams = BasicDenoiserParams<float>;

/// Fan-in scaled Gaussian weights followed by one orthogonalization pass.
/// Normalization starts at identity (gamma 1, beta 0, mean 0, var 1).
template <typename T>
BasicDenoiserParams<T> initialize_block(const BlockGeometry& geometry, std::uint64_t seed);

/// Replace train-time batch normalization by the equivalent per-channel
/// affine transform. Throws StateError on eval-mode input or missing stats.
template <typename T>
BasicDenoiserParams<T> fold_batchnorm(const BasicDenoiserParams<T>& params);

/// Project every reshaped kernel matrix (out x fan_in) onto the nearest
/// matrix with orthonormal rows (columns when fan_in < out). Rank-deficient
/// kernels are replaced with a random orthonormal matrix drawn from `seed`.
template <typename T>
void orthogonalize_kernels_inplace(BasicDenoiserParams<T>& params, std::uint64_t seed = 0);

template <typename T>
BasicDenoiserParams<T> orthogonalize_kernels(BasicDenoiserParams<T> params, std::uint64_t seed = 0)
{
    orthogonalize_kernels_inplace(params, seed);
    return params;
}

/// Frobenius distance between a layer's kernel Gram matrix and identity
/// (the Gram over the smaller of the two matrix dimensions).
template <typename T>
double kernel_orthogonality_error(const ConvLayer<T>& layer);

// ---------------------------------------------------------------------------
// Quarter-resolution convolution stack.

/// Batch of feature maps stored channel-major: (C, N, H, W). Each channel is
/// one contiguous row of N*H*W samples, which is the GEMM column layout.
template <typename T>
struct Activations {
    int channels = 0;
    int batch = 0;
    int height = 0;
    int width = 0;
    std::vector<T> data;

    Activations() = default;
    Activations(int c, int n, int h, int w, T fill = T(0))
        : channels(c), batch(n), height(h), width(w),
          data(static_cast<std::size_t>(c) * n * h * w, fill)
    {
    }

    std::size_t columns() const noexcept
    {
        return static_cast<std::size_t>(batch) * height * width;
    }
    T& at(int c, int n, int y, int x) noexcept
    {
        return data[static_cast<std::size_t>(c) * columns() +
                    (static_cast<std::size_t>(n) * height + y) * width + x];
    }
    T at(int c, int n, int y, int x) const noexcept
    {
        return data[static_cast<std::size_t>(c) * columns() +
                    (static_cast<std::size_t>(n) * height + y) * width + x];
    }
};

enum class NormUsage {
    /// Normalize with statistics of the current batch (training).
    batch_statistics,
    /// Normalize with running statistics (train-mode inference).
    running_statistics,
};

template <typename T>
struct LayerTrace {
    Activations<T> input;
    /// Post-norm, pre-activation values; used for the ReLU mask.
    std::vector<T> pre_activation;
    std::vector<T> normalized;
    std::vector<T> inv_std;
    std::vector<T> batch_mean;
    std::vector<T> batch_var;
};

template <typename T>
struct ForwardTrace {
    std::vector<LayerTrace<T>> layers;
};

template <typename T>
struct LayerGradients {
    std::vector<T> weight;
    std::vector<T> bias;
    std::vector<T> gamma;
    std::vector<T> beta;
};

template <typename T>
struct Gradients {
    std::vector<LayerGradients<T>> layers;
};

/// Runs the conv stack. Eval-mode params always use their folded affine;
/// train-mode params normalize according to `usage`. When `trace` is given
/// everything backprop needs is recorded (batch statistics only).
template <typename T>
Activations<T> run_layers(const BasicDenoiserParams<T>& params, Activations<T> input,
                          NormUsage usage, ForwardTrace<T>* trace = nullptr);

/// Gradients of a scalar loss with respect to every parameter, given the
/// loss gradient at the stack output.
template <typename T>
Gradients<T> backprop_layers(const BasicDenoiserParams<T>& params, const ForwardTrace<T>& trace,
                             Activations<T> grad_output);

} // namespace dvdnet
