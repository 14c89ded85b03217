#include <gtest/gtest.h>
#include <sbcpn/block.hpp>
#include "test_util.hpp"

using namespace sbcpn;

TEST(BlockIndexSet, RejectsEmptyUnsortedDuplicateOrOutOfRange)
{
    EXPECT_THROW(BlockIndexSet({}, 4), ContractViolation);
    EXPECT_THROW(BlockIndexSet({2, 1}, 4), ContractViolation);
    EXPECT_THROW(BlockIndexSet({1, 1}, 4), ContractViolation);
    EXPECT_THROW(BlockIndexSet({0, 4}, 4), ContractViolation);
    EXPECT_THROW(BlockIndexSet({-1}, 4), ContractViolation);
    EXPECT_NO_THROW(BlockIndexSet({0, 3}, 4));
}

TEST(BlockIndexSet, FullAndRange)
{
    const auto full = BlockIndexSet::full(4);
    EXPECT_TRUE(full.is_full());
    EXPECT_EQ(full.indices(), (std::vector<Index>{0, 1, 2, 3}));
    const auto r = BlockIndexSet::range(1, 3, 5);
    EXPECT_EQ(r.indices(), (std::vector<Index>{1, 2}));
    EXPECT_FALSE(r.is_full());
    EXPECT_THROW(BlockIndexSet::range(2, 2, 5), ContractViolation);
}

TEST(BlockIndexSet, GatherScatterEmbed)
{
    const BlockIndexSet s({0, 2}, 3);
    Vector x(3);
    x << 1, 2, 3;
    EXPECT_EQ(s.gather(x), Eigen::Vector2d(1, 3));
    Vector y(2);
    y << 7, 9;
    s.scatter(y, x);
    EXPECT_EQ(x, Eigen::Vector3d(7, 2, 9));
    EXPECT_EQ(s.embed(y), Eigen::Vector3d(7, 0, 9));
    EXPECT_THROW(s.gather(Vector::Zero(2)), ContractViolation);
}

TEST(BlockIndexSet, GatherOfEmbedIsIdentity)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = tk::uniform_index(rng, 1, 30);
        const BlockIndexSet s(tk::random_subset(rng, n), n);
        const Vector y = tk::random_vector(rng, s.size());
        EXPECT_EQ(s.gather(s.embed(y)), y);
        EXPECT_DOUBLE_EQ(s.embed(y).norm(), y.norm());
    }
}
