// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sltarch/sltree.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>

namespace sltarch {

// Streaming layout (little-endian):
//   file header     24 B   "SLT1", version, tau_s, subtree_count, node_count, root_sid
//   subtree table    8 B per subtree: size u16, parent_node u32, reserved u16
//   record blocks   tau_s x 40 B per subtree, unused slots zero-filled
//   gaussian array  56 B per node (14 x f32), indexed by nid
// Record block k therefore starts at records_offset + k * tau_s * 40.
namespace slt_format {
inline constexpr std::array<char, 4> kMagic{'S', 'L', 'T', '1'};
inline constexpr std::uint32_t kVersion        = 1;
inline constexpr std::size_t kHeaderBytes      = 24;
inline constexpr std::size_t kTableEntryBytes  = 8;
inline constexpr std::size_t kRecordBytes      = 40;
inline constexpr std::size_t kGaussianBytes    = 56;
inline constexpr std::uint32_t kNone           = 0xFFFFFFFFu;
inline constexpr std::uint16_t kFlagBoundary   = 1u << 0;
inline constexpr std::uint16_t kFlagLeaf       = 1u << 1;

inline constexpr std::size_t records_offset(std::size_t subtree_count) {
    return kHeaderBytes + subtree_count * kTableEntryBytes;
}
inline constexpr std::size_t subtree_offset(std::size_t subtree_count, std::size_t tau_s, std::size_t sid) {
    return records_offset(subtree_count) + sid * tau_s * kRecordBytes;
}
inline constexpr std::size_t gaussians_offset(std::size_t subtree_count, std::size_t tau_s) {
    return subtree_offset(subtree_count, tau_s, subtree_count);
}
inline constexpr std::size_t file_size(std::size_t subtree_count, std::size_t tau_s, std::size_t node_count) {
    return gaussians_offset(subtree_count, tau_s) + node_count * kGaussianBytes;
}
} // namespace slt_format

namespace detail {

class ByteWriter {
  public:
    explicit ByteWriter(std::vector<std::uint8_t> &out) : out_(out) {}

    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
    void zeros(std::size_t n) { out_.insert(out_.end(), n, 0); }
    void raw(std::span<const char> bytes) {
        for (char c : bytes) out_.push_back(static_cast<std::uint8_t>(c));
    }

  private:
    std::vector<std::uint8_t> &out_;
};

class ByteReader {
  public:
    ByteReader(std::span<const std::uint8_t> in, std::size_t at) : in_(in), at_(at) {}

    std::uint16_t u16() {
        need(2);
        const auto v = static_cast<std::uint16_t>(in_[at_] | (in_[at_ + 1] << 8));
        at_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[at_ + i]) << (8 * i);
        at_ += 4;
        return v;
    }
    double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
    bool all_zero(std::size_t n) {
        need(n);
        const bool zero = std::all_of(in_.begin() + at_, in_.begin() + at_ + n, [](std::uint8_t b) { return b == 0; });
        at_ += n;
        return zero;
    }

  private:
    void need(std::size_t n) const {
        if (at_ + n > in_.size()) throw FormatError("SLT1: truncated file");
    }

    std::span<const std::uint8_t> in_;
    std::size_t at_;
};

} // namespace detail

inline std::vector<std::uint8_t> serialize_sltree(const SLTree &sl) {
    using namespace slt_format;
    if (sl.tau_s < 1 || sl.tau_s > kMaxTau) throw FormatError("SLT1: tau_s outside [1, 65535]");
    if (sl.gaussians.size() != sl.node_count()) throw FormatError("SLT1: gaussian payload count differs from node count");
    std::vector<std::uint8_t> out;
    out.reserve(file_size(sl.subtrees.size(), sl.tau_s, sl.node_count()));
    detail::ByteWriter w(out);
    w.raw(kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(sl.tau_s));
    w.u32(static_cast<std::uint32_t>(sl.subtrees.size()));
    w.u32(static_cast<std::uint32_t>(sl.node_count()));
    w.u32(sl.root_sid);
    for (const auto &sub : sl.subtrees) {
        w.u16(static_cast<std::uint16_t>(sub.size()));
        w.u32(sub.parent_node ? *sub.parent_node : kNone);
        w.u16(0);
    }
    for (const auto &sub : sl.subtrees) {
        for (const auto &rec : sub.records) {
            if (rec.child_sid_count > 0xFFFFu) throw FormatError("SLT1: child SID count exceeds 16 bits");
            w.u32(rec.nid);
            for (Vec3 v : {rec.aabb.min, rec.aabb.max}) {
                w.f32(v.x);
                w.f32(v.y);
                w.f32(v.z);
            }
            w.u16(static_cast<std::uint16_t>(rec.remaining));
            w.u32(rec.child_sid_first ? *rec.child_sid_first : kNone);
            w.u16(static_cast<std::uint16_t>(rec.child_sid_count));
            w.u16(static_cast<std::uint16_t>((rec.is_boundary ? kFlagBoundary : 0) | (rec.is_leaf ? kFlagLeaf : 0)));
            w.u16(0);
        }
        w.zeros((sl.tau_s - sub.size()) * kRecordBytes);
    }
    for (const auto &g : sl.gaussians) {
        for (double v : {g.mean.x, g.mean.y, g.mean.z, g.scale.x, g.scale.y, g.scale.z, g.rotation.w, g.rotation.x,
                         g.rotation.y, g.rotation.z, g.opacity, g.color.x, g.color.y, g.color.z})
            w.f32(v);
    }
    return out;
}

/// Decodes an SLT1 image. Values come back at f32 precision, so
/// serialize(deserialize(bytes)) reproduces `bytes` exactly.
inline SLTree deserialize_sltree(std::span<const std::uint8_t> bytes) {
    using namespace slt_format;
    if (bytes.size() < kHeaderBytes) throw FormatError("SLT1: truncated file");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin(), [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; }))
        throw FormatError("SLT1: bad magic");
    detail::ByteReader r(bytes, 4);
    if (const auto version = r.u32(); version != kVersion) throw FormatError("SLT1: unsupported version " + std::to_string(version));
    SLTree sl;
    sl.tau_s                 = r.u32();
    const std::size_t count  = r.u32();
    const std::size_t nodes  = r.u32();
    sl.root_sid              = r.u32();
    if (sl.tau_s < 1 || sl.tau_s > kMaxTau) throw FormatError("SLT1: tau_s outside [1, 65535]");
    if (count < 1 || sl.root_sid >= count) throw FormatError("SLT1: bad subtree count or root sid");
    if (bytes.size() < file_size(count, sl.tau_s, nodes)) throw FormatError("SLT1: truncated file");
    if (bytes.size() > file_size(count, sl.tau_s, nodes)) throw FormatError("SLT1: trailing bytes after gaussian array");

    sl.subtrees.resize(count);
    std::vector<std::size_t> sizes(count);
    for (std::size_t sid = 0; sid < count; ++sid) {
        sizes[sid]          = r.u16();
        const auto parent   = r.u32();
        if (r.u16() != 0) throw FormatError("SLT1: reserved table field must be zero");
        if (sizes[sid] < 1 || sizes[sid] > sl.tau_s) throw FormatError("SLT1: subtree " + std::to_string(sid) + " size outside [1, tau_s]");
        sl.subtrees[sid].sid = static_cast<SubtreeId>(sid);
        if (parent != kNone) sl.subtrees[sid].parent_node = parent;
    }

    sl.node_index.assign(nodes, NodeSlot{});
    std::vector<bool> seen(nodes, false);
    for (std::size_t sid = 0; sid < count; ++sid) {
        auto &sub = sl.subtrees[sid];
        sub.records.resize(sizes[sid]);
        for (std::uint32_t slot = 0; slot < sizes[sid]; ++slot) {
            auto &rec = sub.records[slot];
            rec.nid   = r.u32();
            if (rec.nid >= nodes || seen[rec.nid]) throw FormatError("SLT1: bad or duplicate nid " + std::to_string(rec.nid));
            seen[rec.nid]  = true;
            rec.aabb.min   = {r.f32(), r.f32(), r.f32()};
            rec.aabb.max   = {r.f32(), r.f32(), r.f32()};
            rec.remaining  = r.u16();
            const auto first = r.u32();
            rec.child_sid_count = r.u16();
            const auto flags = r.u16();
            if (r.u16() != 0 || (flags & ~(kFlagBoundary | kFlagLeaf)) != 0) throw FormatError("SLT1: reserved record bits set");
            rec.is_boundary = (flags & kFlagBoundary) != 0;
            rec.is_leaf     = (flags & kFlagLeaf) != 0;
            if (first != kNone) rec.child_sid_first = first;
            if (slot + rec.remaining + 1 > sizes[sid]) throw FormatError("SLT1: remaining overruns subtree");
            if (rec.is_boundary != (rec.child_sid_count > 0) || rec.is_boundary != rec.child_sid_first.has_value())
                throw FormatError("SLT1: inconsistent boundary record for nid " + std::to_string(rec.nid));
            if (rec.is_boundary && *rec.child_sid_first + rec.child_sid_count > count)
                throw FormatError("SLT1: child SID range out of bounds");
            sl.node_index[rec.nid] = {static_cast<SubtreeId>(sid), slot};
        }
        if (!r.all_zero((sl.tau_s - sizes[sid]) * kRecordBytes)) throw FormatError("SLT1: padding records must be zero");
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw FormatError("SLT1: node missing from every subtree");

    sl.gaussians.resize(nodes);
    for (auto &g : sl.gaussians) {
        g.mean     = {r.f32(), r.f32(), r.f32()};
        g.scale    = {r.f32(), r.f32(), r.f32()};
        g.rotation = {r.f32(), r.f32(), r.f32(), r.f32()};
        g.opacity  = r.f32();
        g.color    = {r.f32(), r.f32(), r.f32()};
    }
    return sl;
}

inline void save_sltree(const SLTree &sl, const std::filesystem::path &path) {
    const auto bytes = serialize_sltree(sl);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

inline SLTree load_sltree(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize_sltree(bytes);
}

} // namespace sltarch
