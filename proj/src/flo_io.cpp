// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/flo_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dvdnet/error.hpp"

namespace dvdnet {

static_assert(std::endian::native == std::endian::little, ".flo I/O assumes a little-endian host");

namespace {

template <typename V>
void put(std::string& out, V value)
{
    char buf[sizeof(V)];
    std::memcpy(buf, &value, sizeof(V));
    out.append(buf, sizeof(V));
}

template <typename V>
V get(const std::string& in, std::size_t offset)
{
    V value;
    std::memcpy(&value, in.data() + offset, sizeof(V));
    return value;
}

} // namespace

std::string encode_flo(const FlowField& flow)
{
    std::string out;
    out.reserve(12 + static_cast<std::size_t>(flow.height()) * flow.width() * 8);
    put<float>(out, kFloMagic);
    put<std::int32_t>(out, flow.width());
    put<std::int32_t>(out, flow.height());
    for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
            put<float>(out, flow.u(y, x));
            put<float>(out, flow.v(y, x));
        }
    }
    return out;
}

FlowField decode_flo(const std::string& bytes)
{
    if (bytes.size() < 12) {
        throw DataError(".flo data too short for header");
    }
    if (get<float>(bytes, 0) != kFloMagic) {
        throw DataError(".flo magic number mismatch");
    }
    const auto width = get<std::int32_t>(bytes, 4);
    const auto height = get<std::int32_t>(bytes, 8);
    if (width < 0 || height < 0 || width > (1 << 16) || height > (1 << 16)) {
        throw DataError(".flo header has implausible dimensions");
    }
    const std::size_t expected = 12 + static_cast<std::size_t>(width) * height * 8;
    if (bytes.size() != expected) {
        throw DataError(".flo payload size does not match its header");
    }
    FlowField flow(height, width);
    std::size_t off = 12;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            flow.u(y, x) = get<float>(bytes, off);
            flow.v(y, x) = get<float>(bytes, off + 4);
            off += 8;
        }
    }
    return flow;
}

void write_flo(const std::filesystem::path& path, const FlowField& flow)
{
    const std::string bytes = encode_flo(flow);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

FlowField read_flo(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_flo(bytes);
}

} // namespace dvdnet
