// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <opencv2/imgcodecs.hpp>

#include "dvdnet/error.hpp"

namespace dvdnet {

Image read_png(const std::filesystem::path& path)
{
    cv::Mat mat = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (mat.empty()) {
        throw DataError("cannot read image " + path.string());
    }
    if (mat.depth() != CV_8U) {
        throw DataError("only 8-bit images are supported: " + path.string());
    }
    Image frame(3, mat.rows, mat.cols);
    for (int y = 0; y < mat.rows; ++y) {
        const auto* row = mat.ptr<cv::Vec3b>(y);
        for (int x = 0; x < mat.cols; ++x) {
            // OpenCV stores BGR.
            for (int c = 0; c < 3; ++c) {
                frame(c, y, x) = static_cast<float>(row[x][2 - c]) / 255.0f;
            }
        }
    }
    return frame;
}

namespace {

unsigned char to_byte(float v)
{
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

} // namespace

void write_png(const std::filesystem::path& path, const Image& frame)
{
    if (frame.channels() != 3) {
        throw DimensionError("write_png expects an RGB frame");
    }
    cv::Mat mat(frame.height(), frame.width(), CV_8UC3);
    for (int y = 0; y < frame.height(); ++y) {
        auto* row = mat.ptr<cv::Vec3b>(y);
        for (int x = 0; x < frame.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                row[x][2 - c] = to_byte(frame(c, y, x));
            }
        }
    }
    if (!cv::imwrite(path.string(), mat)) {
        throw DataError("cannot write image " + path.string());
    }
}

Image quantize_8bit(const Image& frame)
{
    Image out = frame;
    for (float& v : out.data()) {
        v = static_cast<float>(to_byte(v)) / 255.0f;
    }
    return out;
}

std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (ext == ".png") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

FrameSequence read_frame_directory(const std::filesystem::path& dir)
{
    FrameSequence seq;
    for (const auto& file : list_png_files(dir)) {
        seq.frames.push_back(read_png(file));
    }
    if (seq.frames.empty()) {
        throw DataError("no PNG frames in " + dir.string());
    }
    seq.validate();
    return seq;
}

void write_frame_directory(const std::filesystem::path& dir, const FrameSequence& sequence)
{
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < sequence.frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%05zu.png", i);
        write_png(dir / name, sequence.frames[i]);
    }
}

} // namespace dvdnet
