// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

using namespace sltarch;
using namespace sltarch::testing;

namespace {

ProvisionalSubtree provisional(std::vector<NodeId> nodes, std::optional<NodeId> parent) {
    ProvisionalSubtree s;
    s.roots       = {nodes.front()};
    s.nodes       = std::move(nodes);
    s.parent_node = parent;
    return s;
}

// 0 -> 1, 2; 1 -> 3; 2 -> 4, 5; 3 -> 6 -> 7 -> 8.
LodTree small_siblings_tree() {
    return concentric_tree({std::nullopt, 0, 0, 1, 2, 2, 3, 6, 7});
}

} // namespace

TEST(InitialPartition, SingleNode) {
    const auto tree = chain_tree(1);
    for (std::size_t tau : {1u, 4u, 32u}) {
        const auto parts = initial_partition(tree, tau);
        ASSERT_EQ(parts.size(), 1u);
        EXPECT_EQ(parts[0].nodes, (std::vector<NodeId>{0}));
    }
}

TEST(InitialPartition, ChainOfTen) {
    const auto parts = initial_partition(chain_tree(10), 4);
    ASSERT_EQ(parts.size(), 3u);
    EXPECT_EQ(parts[0].size(), 4u);
    EXPECT_EQ(parts[1].size(), 4u);
    EXPECT_EQ(parts[2].size(), 2u);
    EXPECT_EQ(parts[1].parent_node, NodeId{3});
}

TEST(InitialPartition, SmallSiblingSubtrees) {
    const auto parts = initial_partition(small_siblings_tree(), 4);
    ASSERT_EQ(parts.size(), 4u);
    EXPECT_EQ(parts[0].nodes, (std::vector<NodeId>{0, 1, 2, 3}));
    EXPECT_EQ(parts[1].nodes, (std::vector<NodeId>{4}));
    EXPECT_EQ(parts[2].nodes, (std::vector<NodeId>{5}));
    EXPECT_EQ(parts[3].nodes, (std::vector<NodeId>{6, 7, 8}));
}

TEST(MergeSubtrees, SingleNodeSiblingsMerge) {
    const auto merged = merge_subtrees(initial_partition(small_siblings_tree(), 4), 4);
    ASSERT_EQ(merged.size(), 3u);
    EXPECT_EQ(merged[1].nodes, (std::vector<NodeId>{4, 5}));
    EXPECT_EQ(merged[1].roots, (std::vector<NodeId>{4, 5}));
    EXPECT_EQ(merged[1].parent_node, NodeId{2});
    EXPECT_EQ(merged[2].size(), 3u);
}

TEST(MergeSubtrees, TooLargeToMerge) {
    const auto merged = merge_subtrees({provisional({1, 2, 3}, 0), provisional({4, 5, 6}, 0)}, 4);
    EXPECT_EQ(subtree_sizes(merged), (std::vector<std::size_t>{3, 3}));
}

TEST(MergeSubtrees, GreedyPass) {
    const auto merged =
        merge_subtrees({provisional({1, 2}, 0), provisional({3, 4}, 0), provisional({5, 6}, 0)}, 4);
    EXPECT_EQ(subtree_sizes(merged), (std::vector<std::size_t>{4, 2}));
}

TEST(MergeSubtrees, DifferentParentsStaySeparate) {
    const auto merged = merge_subtrees({provisional({1}, 0), provisional({2}, 7)}, 4);
    EXPECT_EQ(merged.size(), 2u);
}

TEST(BuildSltree, SingleNode) {
    const auto sl = build_sltree(chain_tree(1), 8);
    ASSERT_EQ(sl.subtrees.size(), 1u);
    const auto &rec = sl.subtrees[0].records[0];
    EXPECT_EQ(rec.remaining, 0u);
    EXPECT_FALSE(rec.is_boundary);
    EXPECT_TRUE(rec.is_leaf);
}

TEST(BuildSltree, NearFarLayout) {
    const auto sl = build_sltree(near_far_tree(), 4);
    ASSERT_EQ(sl.subtrees.size(), 4u);
    std::vector<NodeId> root_nids;
    for (const auto &r : sl.subtrees[0].records) root_nids.push_back(r.nid);
    EXPECT_EQ(root_nids, (std::vector<NodeId>{0, 1, 2, 3}));
    EXPECT_EQ(sl.subtrees[0].records[0].remaining, 3u);
    // Nodes 1, 2 and 3 each own one child subtree, numbered in record order.
    EXPECT_EQ(sl.record(1).child_sid_first, SubtreeId{1});
    EXPECT_EQ(sl.record(2).child_sid_first, SubtreeId{2});
    EXPECT_EQ(sl.record(3).child_sid_first, SubtreeId{3});
    EXPECT_EQ(sl.subtrees[1].parent_node, NodeId{1});
    EXPECT_EQ(sl.subtrees[3].size(), 2u);
    EXPECT_EQ(sl.node_index[8], (NodeSlot{3, 1}));
}

TEST(BuildSltree, SkipSpansMatchDescendants) {
    const auto tree = random_tree(9, 3000);
    for (std::size_t tau : {4u, 8u, 32u}) {
        const auto sl = build_sltree(tree, tau);
        for (const auto &sub : sl.subtrees) {
            for (std::uint32_t slot = 0; slot < sub.size(); ++slot) {
                std::set<NodeId> span;
                for (std::uint32_t k = slot + 1; k <= slot + sub.records[slot].remaining; ++k) span.insert(sub.records[k].nid);
                std::set<NodeId> desc;
                std::vector<NodeId> stack{sub.records[slot].nid};
                while (!stack.empty()) {
                    const NodeId cur = stack.back();
                    stack.pop_back();
                    for (NodeId c : tree.node(cur).children)
                        if (sl.node_index[c].sid == sub.sid) {
                            desc.insert(c);
                            stack.push_back(c);
                        }
                }
                ASSERT_EQ(span, desc);
            }
        }
    }
}

TEST(BuildSltree, PartitionPropertiesOnRandomScenes) {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const auto tree = random_tree(seed, 500 + 300 * seed);
        for (std::size_t tau : {1u, 2u, 4u, 8u, 32u}) {
            const auto sl = build_sltree(tree, tau);
            std::vector<std::uint8_t> seen(tree.size(), 0);
            std::size_t total = 0;
            for (const auto &sub : sl.subtrees) {
                ASSERT_GE(sub.size(), 1u);
                ASSERT_LE(sub.size(), tau);
                total += sub.size();
                for (const auto &r : sub.records) seen[r.nid]++;
            }
            EXPECT_EQ(total, tree.size());
            EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](std::uint8_t v) { return v == 1; }));
            EXPECT_NO_THROW(validate_sltree(sl, tree));
        }
    }
}

TEST(BuildSltree, RejectsBadTau) {
    EXPECT_THROW(build_sltree(chain_tree(3), 0), ParameterError);
    EXPECT_THROW(build_sltree(chain_tree(3), kMaxTau + 1), ParameterError);
}

TEST(ValidateSltree, DetectsCorruption) {
    const auto tree = near_far_tree();
    auto sl         = build_sltree(tree, 4);
    sl.subtrees[0].records[0].remaining = 1;
    EXPECT_THROW(validate_sltree(sl, tree), InvariantError);
    sl = build_sltree(tree, 4);
    sl.subtrees[0].records[1].child_sid_first = 2;
    EXPECT_THROW(validate_sltree(sl, tree), InvariantError);
}

TEST(SizeMoments, PopulationStddev) {
    const auto [mean, sd] = size_moments({10, 30});
    EXPECT_DOUBLE_EQ(mean, 20.0);
    EXPECT_DOUBLE_EQ(sd, 10.0);
}

TEST(SltFormat, OffsetsFollowLayout) {
    using namespace slt_format;
    EXPECT_EQ(subtree_offset(10, 32, 5), 24u + 8u * 10u + 5u * 32u * 40u);
    EXPECT_EQ(file_size(1, 4, 3), 24u + 8u + 4u * 40u + 3u * 56u);
}

TEST(SltFormat, HeaderAndPadding) {
    const auto tree  = LodTree::build({iso({0, 0, 0}, 1), iso({0, 0, 0}, 0.5)}, {std::nullopt, 0});
    const auto sl    = build_sltree(tree, 32);
    const auto bytes = serialize_sltree(sl);
    ASSERT_EQ(bytes.size(), slt_format::file_size(1, 32, 2));
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SLT1");
    EXPECT_EQ(bytes[8], 32);  // tau_s
    EXPECT_EQ(bytes[12], 1);  // subtree count
    EXPECT_EQ(bytes[16], 2);  // node count
    const std::size_t pad_begin = slt_format::records_offset(1) + 2 * 40;
    const std::size_t pad_end   = slt_format::gaussians_offset(1, 32);
    EXPECT_EQ(pad_end - pad_begin, 30u * 40u);
    EXPECT_TRUE(std::all_of(bytes.begin() + pad_begin, bytes.begin() + pad_end, [](std::uint8_t b) { return b == 0; }));
}

TEST(SltFormat, ByteExactRoundTrip) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto sl    = build_sltree(random_tree(seed, 2000), 16);
        const auto bytes = serialize_sltree(sl);
        const auto back  = deserialize_sltree(bytes);
        EXPECT_EQ(serialize_sltree(back), bytes);
        EXPECT_EQ(back.subtrees.size(), sl.subtrees.size());
        EXPECT_EQ(back.node_index, sl.node_index);
    }
}

TEST(SltFormat, FileRoundTrip) {
    const auto sl   = build_sltree(random_tree(4, 300), 8);
    const auto path = std::filesystem::temp_directory_path() / "sltarch_tree.slt";
    save_sltree(sl, path);
    EXPECT_EQ(serialize_sltree(load_sltree(path)), serialize_sltree(sl));
    std::filesystem::remove(path);
}

TEST(SltFormat, RejectsDamage) {
    const auto bytes = serialize_sltree(build_sltree(random_tree(2, 100), 8));
    auto bad         = bytes;
    bad[0]           = 'X';
    EXPECT_THROW(deserialize_sltree(bad), FormatError);
    bad    = bytes;
    bad[4] = 2;
    EXPECT_THROW(deserialize_sltree(bad), FormatError);
    bad = bytes;
    bad.pop_back();
    EXPECT_THROW(deserialize_sltree(bad), FormatError);
    bad = bytes;
    bad.push_back(0);
    EXPECT_THROW(deserialize_sltree(bad), FormatError);
    EXPECT_THROW(deserialize_sltree(std::vector<std::uint8_t>(10, 0)), FormatError);
}
