#include "pdeonet/nn/compose.hpp"
#include "pdeonet/nn/errors.hpp"
#include "pdeonet/nn/serialize.hpp"
#include "random_nets.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pdeonet;
using namespace pdeonet::nn;
using testing_util::random_net;
using testing_util::random_point;
using testing_util::random_widths;
using testing_util::rel_diff;

namespace {

Network scalar_affine(double a, double b)
{
    return affine_net(Eigen::MatrixXd::Constant(1, 1, a), Eigen::VectorXd::Constant(1, b));
}

} // namespace

TEST(Realize, SingleAffineLayer)
{
    const std::vector<double> x{1.0};
    EXPECT_EQ(scalar_affine(2, 3).realize(x), std::vector<double>{5.0});
}

TEST(Realize, ReluClampsHiddenLayer)
{
    std::vector<Layer> layers;
    layers.push_back({make_sparse(Eigen::MatrixXd::Constant(1, 1, 1.0)), {-1.0}});
    layers.push_back({make_sparse(Eigen::MatrixXd::Constant(1, 1, 1.0)), {0.0}});
    const Network net(1, std::move(layers));
    EXPECT_EQ(net.realize(std::vector<double>{0.5}), std::vector<double>{0.0});
}

TEST(Realize, IdentityNet)
{
    const std::vector<double> x{-1, 0, 2};
    EXPECT_EQ(identity_net(3, 2).realize(x), x);
    const std::vector<double> y{1, -1};
    EXPECT_EQ(identity_net(2, 5).realize(y), y);
    EXPECT_EQ(identity_net(2, 5).depth(), 5);
}

TEST(Realize, WrongInputLength)
{
    EXPECT_THROW(identity_net(3, 2).realize(std::vector<double>{1.0}), ShapeError);
}

TEST(Network, MismatchedLayersRejected)
{
    std::vector<Layer> layers;
    layers.push_back({make_sparse(Eigen::MatrixXd::Ones(2, 1)), {0, 0}});
    layers.push_back({make_sparse(Eigen::MatrixXd::Ones(1, 3)), {0}});
    EXPECT_THROW(Network(1, std::move(layers)), ShapeError);
}

TEST(Affine, SizeCountsNonzeros)
{
    Eigen::MatrixXd M(2, 3);
    M << 1, 0, 2, 0, 0, 3;
    Eigen::VectorXd b(2);
    b << 0, 4;
    EXPECT_EQ(affine_net(M, b).size(), 4u);
    const Network id = affine_net(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3));
    const std::vector<double> x{0.3, -2, 7};
    EXPECT_EQ(id.realize(x), x);
}

TEST(Concat, AffineComposition)
{
    Eigen::MatrixXd M1(2, 2), M2(2, 3);
    M1 << 1, 2, -1, 0.5;
    M2 << 0, 1, 3, 2, -1, 1;
    Eigen::VectorXd b1(2), b2(2);
    b1 << 0.25, -1;
    b2 << 1, 2;
    const Network c = concat(affine_net(M1, b1), affine_net(M2, b2));
    const Eigen::Vector3d x(0.5, -2, 1);
    const Eigen::VectorXd want = M1 * M2 * x + M1 * b2 + b1;
    const auto got = c.realize(std::span<const double>(x.data(), 3));
    for (int i = 0; i < 2; ++i)
        EXPECT_NEAR(got[i], want(i), 1e-14);
}

TEST(Concat, DepthIsAdditiveMinusOne)
{
    std::mt19937_64 rng(3);
    const Network outer = random_net(rng, {2, 4, 4, 1});
    const Network inner = random_net(rng, {3, 5, 2});
    EXPECT_EQ(concat(outer, inner).depth(), 4);
}

TEST(Concat, RandomNetsMatchSequential)
{
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        const int in = 1 + t % 4, mid = 1 + t % 3;
        const Network inner = random_net(rng, random_widths(rng, in, mid));
        const Network outer = random_net(rng, random_widths(rng, mid, 2));
        const Network c = concat(outer, inner);
        ASSERT_EQ(c.depth(), outer.depth() + inner.depth() - 1);
        const auto x = random_point(rng, in, 1e3);
        EXPECT_LE(rel_diff(c.realize(x), outer.realize(inner.realize(x))), 1e-12);
    }
}

TEST(SparseConcat, IdentityAndSizeBound)
{
    const Network id = identity_net(3, 2);
    const Network s = sparse_concat(id, id);
    const std::vector<double> x{-4, 0.5, 9};
    EXPECT_EQ(s.realize(x), x);
    EXPECT_LE(s.size(), 4 * id.size());
}

TEST(SparseConcat, NegativeValuesSurviveInterface)
{
    const Network s = sparse_concat(scalar_affine(1, 0), scalar_affine(1, -3));
    EXPECT_EQ(s.realize(std::vector<double>{0.0}), std::vector<double>{-3.0});
}

TEST(SparseConcat, RandomPairs)
{
    std::mt19937_64 rng(12);
    for (int t = 0; t < 100; ++t) {
        const int in = 1 + t % 3, mid = 1 + (t / 3) % 4;
        const Network inner = random_net(rng, random_widths(rng, in, mid));
        const Network outer = random_net(rng, random_widths(rng, mid, 3));
        const Network s = sparse_concat(outer, inner);
        EXPECT_LE(s.size(), 2 * outer.size() + 2 * inner.size());
        EXPECT_EQ(s.depth(), outer.depth() + inner.depth());
        for (int k = 0; k < 3; ++k) {
            const auto x = random_point(rng, in, 1e3);
            EXPECT_LE(rel_diff(s.realize(x), outer.realize(inner.realize(x))), 1e-12);
        }
    }
}

TEST(Parallelize, SharedInputTuple)
{
    const Network f = scalar_affine(2, 0);
    const Network g = concat(scalar_affine(1, 1), identity_net(1, 3));
    const std::vector<Network> nets{f, g};
    const Network p = parallelize(nets, InputSharing::shared);
    EXPECT_EQ(p.depth(), 3);
    EXPECT_EQ(p.realize(std::vector<double>{-1.5}), (std::vector<double>{-3.0, -0.5}));
}

TEST(Parallelize, RandomTriples)
{
    std::mt19937_64 rng(13);
    for (int t = 0; t < 50; ++t) {
        std::vector<Network> nets;
        for (int k = 0; k < 3; ++k)
            nets.push_back(random_net(rng, random_widths(rng, 2, 1 + k)));
        const Network shared = parallelize(nets, InputSharing::shared);
        const Network stacked = parallelize(nets, InputSharing::stacked);
        const auto x = random_point(rng, 2, 10);
        const auto xs = random_point(rng, 6, 10);
        std::vector<double> want, want_s;
        for (int k = 0; k < 3; ++k) {
            for (double v : nets[k].realize(x))
                want.push_back(v);
            for (double v : nets[k].realize(std::span<const double>(xs.data() + 2 * k, 2)))
                want_s.push_back(v);
        }
        EXPECT_LE(rel_diff(shared.realize(x), want), 1e-12);
        EXPECT_LE(rel_diff(stacked.realize(xs), want_s), 1e-12);
    }
}

TEST(Realize, PiecewiseLinearAlongLines)
{
    std::mt19937_64 rng(14);
    const Network net = random_net(rng, {3, 6, 6, 1});
    const auto x = random_point(rng, 3);
    const auto v = random_point(rng, 3);
    const double h = 1e-3;
    auto at = [&](double t) {
        std::vector<double> z(3);
        for (int i = 0; i < 3; ++i)
            z[i] = x[i] + t * v[i];
        return net.realize(z)[0];
    };
    // second differences vanish except near the (few) breakpoints
    int kinks = 0;
    for (int k = -1000; k < 1000; ++k) {
        const double t = k * h;
        if (std::abs(at(t + h) - 2 * at(t) + at(t - h)) > 1e-9)
            ++kinks;
    }
    EXPECT_LE(kinks, 100);
}

TEST(Serialize, BitExactRoundTrip)
{
    std::mt19937_64 rng(15);
    const Network net = random_net(rng, {4, 7, 3, 2});
    const auto j = to_json(net);
    ASSERT_TRUE(j.contains("input_dim"));
    ASSERT_TRUE(j.at("layers").at(0).contains("weights"));
    const Network back = network_from_json(nlohmann::json::parse(j.dump()));
    ASSERT_EQ(back.depth(), net.depth());
    for (int l = 0; l < net.depth(); ++l) {
        EXPECT_EQ(triplets_of(back.layer(l).weight).size(), triplets_of(net.layer(l).weight).size());
        EXPECT_EQ(back.layer(l).bias, net.layer(l).bias);
        const auto a = triplets_of(back.layer(l).weight), b = triplets_of(net.layer(l).weight);
        for (std::size_t k = 0; k < a.size(); ++k) {
            EXPECT_EQ(a[k].row, b[k].row);
            EXPECT_EQ(a[k].col, b[k].col);
            EXPECT_EQ(a[k].value, b[k].value);
        }
    }
}

TEST(Serialize, MalformedDocument)
{
    EXPECT_ANY_THROW(network_from_json(nlohmann::json::parse(R"({"input_dim": 2, "layers": []})")));
}
