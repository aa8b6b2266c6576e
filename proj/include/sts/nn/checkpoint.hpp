#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sts/errors.hpp"
#include "sts/nn/tensor.hpp"

namespace sts::nn {

// Model checkpoint: versioned header, layer manifest (names, shapes) and
// little-endian float32 parameter blobs, in parameter order.
//
//   magic "STSCKPT1" | u32 version | u32 param_count
//   per param: u32 name_len | name | u32 ndims | u64 dims[] | f32 data[]

constexpr char kCheckpointMagic[8] = {'S', 'T', 'S', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {
template <typename V>
void write_pod(std::ofstream& out, V v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}
template <typename V>
V read_pod(std::ifstream& in, const std::string& path) {
    V v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(V));
    if (!in) throw FormatError(path + ": truncated checkpoint");
    return v;
}
}  // namespace detail

template <typename T>
void save_checkpoint(const std::string& path, const std::vector<Param<T>*>& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::write_pod(out, kCheckpointVersion);
    detail::write_pod(out, static_cast<std::uint32_t>(params.size()));
    for (const Param<T>* p : params) {
        detail::write_pod(out, static_cast<std::uint32_t>(p->name.size()));
        out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        detail::write_pod(out, static_cast<std::uint32_t>(p->shape.size()));
        for (std::size_t d : p->shape) detail::write_pod(out, static_cast<std::uint64_t>(d));
        for (T v : p->value) detail::write_pod(out, static_cast<float>(v));
    }
    if (!out) throw IoError("write failed for " + path);
}

template <typename T>
void load_checkpoint(const std::string& path, const std::vector<Param<T>*>& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw FormatError(path + ": not a checkpoint file");
    }
    const auto version = detail::read_pod<std::uint32_t>(in, path);
    if (version != kCheckpointVersion) {
        throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
    }
    const auto count = detail::read_pod<std::uint32_t>(in, path);
    if (count != params.size()) {
        throw ShapeError(path + ": checkpoint has " + std::to_string(count) + " parameters, model expects " +
                         std::to_string(params.size()));
    }
    for (Param<T>* p : params) {
        const auto name_len = detail::read_pod<std::uint32_t>(in, path);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) throw FormatError(path + ": truncated checkpoint");
        if (name != p->name) {
            throw ShapeError(path + ": parameter '" + name + "' does not match model parameter '" + p->name +
                             "'");
        }
        const auto ndims = detail::read_pod<std::uint32_t>(in, path);
        std::vector<std::size_t> shape(ndims);
        for (auto& d : shape) d = static_cast<std::size_t>(detail::read_pod<std::uint64_t>(in, path));
        if (shape != p->shape) {
            std::string want, got;
            for (auto d : p->shape) want += std::to_string(d) + "x";
            for (auto d : shape) got += std::to_string(d) + "x";
            throw ShapeError(path + ": shape mismatch for '" + p->name + "': model " + want + " file " + got);
        }
        for (std::size_t i = 0; i < p->numel(); ++i) {
            p->value[i] = static_cast<T>(detail::read_pod<float>(in, path));
        }
    }
}

}  // namespace sts::nn
