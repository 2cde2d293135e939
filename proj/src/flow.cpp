// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/flow.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include <unistd.h>

#include "dvdnet/error.hpp"
#include "dvdnet/flo_io.hpp"
#include "dvdnet/image_io.hpp"

namespace dvdnet {

FlowField::FlowField(int height, int width, float u, float v) : height_(height), width_(width)
{
    if (height < 0 || width < 0) {
        throw DimensionError("negative flow field extent");
    }
    u_.assign(static_cast<std::size_t>(height) * width, u);
    v_.assign(static_cast<std::size_t>(height) * width, v);
}

FlowField IdentityFlowBackend::estimate(const Image& reference, const Image&) const
{
    return FlowField(reference.height(), reference.width());
}

namespace {

struct Gray {
    int height = 0;
    int width = 0;
    std::vector<float> px;

    float at(int y, int x) const noexcept
    {
        return px[static_cast<std::size_t>(y) * width + x];
    }
    float clamped(int y, int x) const noexcept
    {
        return at(std::clamp(y, 0, height - 1), std::clamp(x, 0, width - 1));
    }
};

Gray to_gray(const Image& frame)
{
    Gray g{frame.height(), frame.width(), std::vector<float>(frame.plane_size(), 0.0f)};
    const float scale = 1.0f / static_cast<float>(std::max(frame.channels(), 1));
    for (int c = 0; c < frame.channels(); ++c) {
        const auto plane = frame.plane(c);
        for (std::size_t i = 0; i < plane.size(); ++i) {
            g.px[i] += plane[i] * scale;
        }
    }
    return g;
}

Gray half(const Gray& in)
{
    Gray out{in.height / 2, in.width / 2, {}};
    out.px.resize(static_cast<std::size_t>(out.height) * out.width);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.px[static_cast<std::size_t>(y) * out.width + x] =
                0.25f * (in.at(2 * y, 2 * x) + in.at(2 * y, 2 * x + 1) + in.at(2 * y + 1, 2 * x) +
                         in.at(2 * y + 1, 2 * x + 1));
        }
    }
    return out;
}

float median9(std::array<float, 9> v)
{
    std::nth_element(v.begin(), v.begin() + 4, v.end());
    return v[4];
}

void median_filter(FlowField& flow)
{
    const FlowField src = flow;
    for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
            std::array<float, 9> us{};
            std::array<float, 9> vs{};
            int k = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int yy = std::clamp(y + dy, 0, flow.height() - 1);
                    const int xx = std::clamp(x + dx, 0, flow.width() - 1);
                    us[k] = src.u(yy, xx);
                    vs[k] = src.v(yy, xx);
                    ++k;
                }
            }
            flow.u(y, x) = median9(us);
            flow.v(y, x) = median9(vs);
        }
    }
}

double parabola_offset(double minus, double center, double plus)
{
    const double denom = minus - 2.0 * center + plus;
    if (!(denom > 0.0)) {
        return 0.0;
    }
    return std::clamp(0.5 * (minus - plus) / denom, -0.5, 0.5);
}

void refine_level(const Gray& ref, const Gray& mov, FlowField& flow,
                  const BlockMatchingFlowBackend::Options& opt)
{
    const int r = opt.search_radius;
    const int ext = r + 1;
    const int span = 2 * ext + 1;
    const int b = opt.patch_radius;
    std::vector<double> cost(static_cast<std::size_t>(span) * span);
    for (int y = 0; y < ref.height; ++y) {
        for (int x = 0; x < ref.width; ++x) {
            const int bu = static_cast<int>(std::lround(flow.u(y, x)));
            const int bv = static_cast<int>(std::lround(flow.v(y, x)));
            for (int oy = -ext; oy <= ext; ++oy) {
                for (int ox = -ext; ox <= ext; ++ox) {
                    double ssd = 0.0;
                    for (int py = -b; py <= b; ++py) {
                        for (int px = -b; px <= b; ++px) {
                            const float a = ref.clamped(y + py, x + px);
                            const float m = mov.clamped(y + py + bv + oy, x + px + bu + ox);
                            const double d = static_cast<double>(a) - static_cast<double>(m);
                            ssd += d * d;
                        }
                    }
                    cost[static_cast<std::size_t>(oy + ext) * span + (ox + ext)] = ssd;
                }
            }
            auto c = [&](int oy, int ox) {
                return cost[static_cast<std::size_t>(oy + ext) * span + (ox + ext)];
            };
            int best_y = 0;
            int best_x = 0;
            double best = c(0, 0);
            for (int oy = -r; oy <= r; ++oy) {
                for (int ox = -r; ox <= r; ++ox) {
                    if (c(oy, ox) < best) {
                        best = c(oy, ox);
                        best_y = oy;
                        best_x = ox;
                    }
                }
            }
            const double sub_x = parabola_offset(c(best_y, best_x - 1), best, c(best_y, best_x + 1));
            const double sub_y = parabola_offset(c(best_y - 1, best_x), best, c(best_y + 1, best_x));
            flow.u(y, x) = static_cast<float>(bu + best_x + sub_x);
            flow.v(y, x) = static_cast<float>(bv + best_y + sub_y);
        }
    }
}

FlowField upsample(const FlowField& coarse, int height, int width)
{
    FlowField fine(height, width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int cy = std::min(y / 2, coarse.height() - 1);
            const int cx = std::min(x / 2, coarse.width() - 1);
            fine.u(y, x) = 2.0f * coarse.u(cy, cx);
            fine.v(y, x) = 2.0f * coarse.v(cy, cx);
        }
    }
    return fine;
}

} // namespace

FlowField BlockMatchingFlowBackend::estimate(const Image& reference, const Image& moving) const
{
    if (!reference.same_shape(moving)) {
        throw DimensionError("flow estimation needs frames of identical shape");
    }
    std::vector<Gray> ref_pyr{to_gray(reference)};
    std::vector<Gray> mov_pyr{to_gray(moving)};
    while (static_cast<int>(ref_pyr.size()) < options_.levels &&
           ref_pyr.back().height / 2 >= options_.min_level_size &&
           ref_pyr.back().width / 2 >= options_.min_level_size) {
        ref_pyr.push_back(half(ref_pyr.back()));
        mov_pyr.push_back(half(mov_pyr.back()));
    }
    FlowField flow(ref_pyr.back().height, ref_pyr.back().width);
    for (std::size_t level = ref_pyr.size(); level-- > 0;) {
        const Gray& ref = ref_pyr[level];
        if (flow.height() != ref.height || flow.width() != ref.width) {
            flow = upsample(flow, ref.height, ref.width);
        }
        refine_level(ref, mov_pyr[level], flow, options_);
        median_filter(flow);
    }
    return flow;
}

ExternalFlowBackend::ExternalFlowBackend(std::string command_template)
    : command_template_(std::move(command_template))
{
    if (command_template_.empty()) {
        throw ConfigError("external flow backend needs a command");
    }
}

namespace {

void replace_all(std::string& text, const std::string& key, const std::string& value)
{
    for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
        text.replace(pos, key.size(), value);
    }
}

} // namespace

FlowField ExternalFlowBackend::estimate(const Image& reference, const Image& moving) const
{
    if (!reference.same_shape(moving)) {
        throw DimensionError("flow estimation needs frames of identical shape");
    }
    static std::atomic<unsigned long> counter{0};
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() /
                         ("dvdnet-flow-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir);
    const fs::path ref_path = dir / "reference.png";
    const fs::path mov_path = dir / "moving.png";
    const fs::path out_path = dir / "flow.flo";
    write_png(ref_path, reference);
    write_png(mov_path, moving);
    std::string cmd = command_template_;
    replace_all(cmd, "{reference}", ref_path.string());
    replace_all(cmd, "{moving}", mov_path.string());
    replace_all(cmd, "{output}", out_path.string());
    const int status = std::system(cmd.c_str());
    if (status != 0) {
        fs::remove_all(dir);
        throw DataError("external flow command failed (status " + std::to_string(status) + "): " + cmd);
    }
    FlowField flow = read_flo(out_path);
    fs::remove_all(dir);
    if (!flow.matches(reference)) {
        throw DimensionError("external flow tool returned a field of the wrong shape");
    }
    return flow;
}

std::shared_ptr<const FlowBackend> make_flow_backend(const std::string& id)
{
    if (id == "identity") {
        return std::make_shared<IdentityFlowBackend>();
    }
    if (id == "blockmatch") {
        return std::make_shared<BlockMatchingFlowBackend>();
    }
    const std::string prefix = "external:";
    if (id.rfind(prefix, 0) == 0) {
        return std::make_shared<ExternalFlowBackend>(id.substr(prefix.size()));
    }
    throw ConfigError("unknown flow backend '" + id + "'");
}

FlowField estimate_flow(const Image& reference, const Image& moving, const FlowBackend& backend)
{
    if (!reference.same_shape(moving)) {
        throw DimensionError("flow estimation needs frames of identical shape");
    }
    FlowField flow = backend.estimate(reference, moving);
    if (!flow.matches(reference)) {
        throw DimensionError("flow backend '" + backend.name() + "' returned a field of the wrong shape");
    }
    return flow;
}

Image warp(const Image& frame, const FlowField& flow)
{
    if (!flow.matches(frame)) {
        throw DimensionError("flow field shape does not match frame shape");
    }
    const int h = frame.height();
    const int w = frame.width();
    Image out(frame.channels(), h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float sx = std::clamp(static_cast<float>(x) + flow.u(y, x), 0.0f, static_cast<float>(w - 1));
            const float sy = std::clamp(static_cast<float>(y) + flow.v(y, x), 0.0f, static_cast<float>(h - 1));
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            const int x1 = std::min(x0 + 1, w - 1);
            const int y1 = std::min(y0 + 1, h - 1);
            const float fx = sx - static_cast<float>(x0);
            const float fy = sy - static_cast<float>(y0);
            for (int c = 0; c < frame.channels(); ++c) {
                const float top = (1.0f - fx) * frame(c, y0, x0) + fx * frame(c, y0, x1);
                const float bottom = (1.0f - fx) * frame(c, y1, x0) + fx * frame(c, y1, x1);
                out(c, y, x) = (1.0f - fy) * top + fy * bottom;
            }
        }
    }
    return out;
}

Image compensate(const Image& neighbor, const Image& reference, const FlowBackend& backend)
{
    return warp(neighbor, estimate_flow(reference, neighbor, backend));
}

} // namespace dvdnet
