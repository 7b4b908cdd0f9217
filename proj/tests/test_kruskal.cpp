#include "cpfit/kruskal.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cpfit;
using cpfit::testing::random_dense;
using cpfit::testing::random_kruskal;
using cpfit::testing::random_matrix;
using cpfit::testing::random_sparse;

namespace {

KruskalTensor ones_kruskal(const Shape& shape, index_t rank) {
    std::vector<Matrix> factors;
    for (int n = 0; n < shape.order(); ++n) factors.push_back(Matrix::Ones(shape.dim(n), rank));
    return KruskalTensor(std::move(factors));
}

KruskalTensor scalar_kruskal(double a, double b, double c) {
    return KruskalTensor({Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b),
                          Matrix::Constant(1, 1, c)});
}

DataTensor scalar_tensor(double x) { return DataTensor(DenseTensor(Shape({1, 1, 1}), {x})); }

} // namespace

TEST(Full, rank_one_examples) {
    const DenseTensor ones = full(ones_kruskal(Shape({2, 2, 2}), 1));
    for (index_t i = 0; i < 8; ++i) EXPECT_EQ(ones[i], 1.0);

    Matrix a(2, 1), b(2, 1);
    a << 1, 2;
    b << 3, 4;
    const DenseTensor outer = full(KruskalTensor({a, b}));
    // element (i, j) = a_i * b_j
    EXPECT_EQ(outer.at(std::vector<index_t>{0, 0}), 3.0);
    EXPECT_EQ(outer.at(std::vector<index_t>{0, 1}), 4.0);
    EXPECT_EQ(outer.at(std::vector<index_t>{1, 0}), 6.0);
    EXPECT_EQ(outer.at(std::vector<index_t>{1, 1}), 8.0);
}

TEST(Full, unfolding_identity) {
    Rng rng(9);
    const Shape shape({3, 4, 2});
    const KruskalTensor k = random_kruskal(shape, 3, rng);
    const DenseTensor t = full(k);
    for (int n = 0; n < 3; ++n) {
        std::vector<Matrix> others;
        for (int m = 0; m < 3; ++m)
            if (m != n) others.push_back(k.factor(m));
        const Matrix expect = k.factor(n) * khatri_rao(others).transpose();
        EXPECT_LE((matricize(t, n) - expect).norm(), 1e-12 * std::max(1.0, expect.norm()));
    }
}

TEST(Objective, examples) {
    Rng rng(13);
    const KruskalTensor k = random_kruskal(Shape({3, 3, 3}), 2, rng);
    const DataTensor exact(full(k));
    EXPECT_LE(std::abs(objective(exact, k)), 1e-10 * exact.norm_squared());

    const DataTensor zero(DenseTensor::zeros(Shape({2, 2, 2})));
    EXPECT_NEAR(objective(zero, ones_kruskal(Shape({2, 2, 2}), 1)), 4.0, 1e-12);

    EXPECT_NEAR(objective(scalar_tensor(2.0), scalar_kruskal(1, 1, 1)), 0.5, 1e-14);
}

TEST(Objective, efficient_form_matches_direct) {
    // Both evaluation routes (dense streaming residual, sparse three-term
    // MTTKRP form) against the brute-force definition.
    Rng rng(19);
    for (int trial = 0; trial < 5; ++trial) {
        const Shape shape({4, 3, 5});
        const KruskalTensor k = random_kruskal(shape, 3, rng);
        const DenseTensor t = random_dense(shape, rng);
        const Vector diff = Eigen::Map<const Vector>(t.values().data(), t.values().size()) -
                            Eigen::Map<const Vector>(full(k).values().data(), shape.num_elements());
        const double direct = 0.5 * diff.squaredNorm();
        EXPECT_NEAR(objective(DataTensor(t), k), direct, 1e-10 * std::max(1.0, direct));

        const SparseTensor sp = random_sparse(shape, rng, 0.35);
        const Vector sp_diff =
            Eigen::Map<const Vector>(sp.densify().values().data(), shape.num_elements()) -
            Eigen::Map<const Vector>(full(k).values().data(), shape.num_elements());
        const double sp_direct = 0.5 * sp_diff.squaredNorm();
        EXPECT_NEAR(objective(DataTensor(sp), k), sp_direct, 1e-10 * std::max(1.0, sp_direct));
    }
}

TEST(Gradient, zero_at_exact_fit) {
    Rng rng(29);
    const KruskalTensor k = random_kruskal(Shape({3, 4, 2}), 2, rng);
    const DataTensor t(full(k));
    const Vector g = gradient(t, k);
    EXPECT_LE(g.norm(), 1e-10 * (1.0 + pack(k).norm()));
}

TEST(Gradient, scalar_example) {
    const Vector g = gradient(scalar_tensor(2.0), scalar_kruskal(1, 1, 1));
    ASSERT_EQ(g.size(), 3);
    for (index_t i = 0; i < 3; ++i) EXPECT_NEAR(g[i], -1.0, 1e-14);
}

TEST(Gradient, finite_difference_dense_and_sparse) {
    Rng rng(37);
    for (int trial = 0; trial < 4; ++trial) {
        const int order = (trial % 2 == 0) ? 3 : 4;
        const Shape shape(std::vector<index_t>(static_cast<std::size_t>(order), 5));
        const KruskalTensor k = random_kruskal(shape, 3, rng);
        const DataTensor t = (trial < 2)
                                 ? DataTensor(random_dense(shape, rng))
                                 : DataTensor(random_sparse(shape, rng, 0.3));

        const Vector u = pack(k);
        Vector g;
        objective_and_gradient(t, k, g);
        Vector fd(u.size());
        for (index_t i = 0; i < u.size(); ++i) {
            const double step = 1e-6 * (1.0 + std::abs(u[i]));
            Vector up = u, dn = u;
            up[i] += step;
            dn[i] -= step;
            fd[i] = (objective(t, unpack(up, shape, 3)) - objective(t, unpack(dn, shape, 3))) /
                    (2.0 * step);
        }
        EXPECT_LE((fd - g).norm() / std::max(g.norm(), 1e-30), 1e-6);
    }
}

TEST(Gradient, packed_norm_matches_blocks) {
    Rng rng(43);
    const Shape shape({3, 2, 4});
    const KruskalTensor k = random_kruskal(shape, 2, rng);
    const DataTensor t(random_dense(shape, rng));
    const Vector g = gradient(t, k);
    double block_sq = 0.0;
    index_t at = 0;
    for (int n = 0; n < 3; ++n) {
        const Matrix block = -t.mttkrp(k.factors(), n) + k.factor(n) * gram_hadamard(k.factors(), n);
        block_sq += block.squaredNorm();
        EXPECT_LE((g.segment(at, block.size()) -
                   Eigen::Map<const Vector>(block.data(), block.size()))
                      .norm(),
                  1e-12 * std::max(1.0, block.norm()));
        at += block.size();
    }
    EXPECT_NEAR(g.squaredNorm(), block_sq, 1e-10 * std::max(1.0, block_sq));
}

TEST(FitH, examples) {
    Rng rng(47);
    const KruskalTensor k = random_kruskal(Shape({3, 3, 3}), 2, rng);
    const DataTensor t(full(k));
    EXPECT_LE(fit_h(t, k), 1e-8);

    KruskalTensor zeros({Matrix::Zero(3, 2), Matrix::Zero(3, 2), Matrix::Zero(3, 2)});
    EXPECT_NEAR(fit_h(t, zeros), 1.0, 1e-12);

    EXPECT_NEAR(fit_h(scalar_tensor(2.0), scalar_kruskal(1, 1, 1)), 0.5, 1e-14);

    const DataTensor zero_data(DenseTensor::zeros(Shape({3, 3, 3})));
    EXPECT_THROW(fit_h(zero_data, k), std::invalid_argument);
}

TEST(Normalize, rank_one_example) {
    Matrix a(2, 1), b(2, 1), c(2, 1);
    a << 3, 0;
    b << 0, 2;
    c << 1, 0;
    const KruskalTensor out = normalize_and_reorder(KruskalTensor({a, b, c}));
    const double expect = std::pow(6.0, 1.0 / 3.0);
    for (int n = 0; n < 3; ++n) EXPECT_NEAR(out.factor(n).col(0).norm(), expect, 1e-12);
    // directions preserved
    EXPECT_NEAR(out.factor(0)(0, 0), expect, 1e-12);
    EXPECT_NEAR(out.factor(0)(1, 0), 0.0, 1e-12);
}

TEST(Normalize, preserves_full_and_idempotent) {
    Rng rng(53);
    const KruskalTensor k = random_kruskal(Shape({3, 4, 2}), 3, rng);
    const KruskalTensor once = normalize_and_reorder(k);
    const Vector before = Eigen::Map<const Vector>(full(k).values().data(), 24);
    const Vector after = Eigen::Map<const Vector>(full(once).values().data(), 24);
    EXPECT_LE((before - after).norm(), 1e-12 * std::max(1.0, before.norm()));

    const KruskalTensor twice = normalize_and_reorder(once);
    EXPECT_LE((pack(twice) - pack(once)).norm(), 1e-13 * (1.0 + pack(once).norm()));
}

TEST(Normalize, sorts_by_decreasing_weight) {
    // lambda_1 = 1, lambda_2 = 5 -> terms swap
    Matrix a(2, 2), b(2, 2), c(2, 2);
    a << 1, 5, 0, 0;
    b << 1, 1, 0, 0;
    c << 1, 1, 0, 0;
    const KruskalTensor out = normalize_and_reorder(KruskalTensor({a, b, c}));
    const double l0 = out.factor(0).col(0).norm() * out.factor(1).col(0).norm() *
                      out.factor(2).col(0).norm();
    const double l1 = out.factor(0).col(1).norm() * out.factor(1).col(1).norm() *
                      out.factor(2).col(1).norm();
    EXPECT_NEAR(l0, 5.0, 1e-12);
    EXPECT_NEAR(l1, 1.0, 1e-12);
}

TEST(Normalize, zero_column_term_untouched_and_last) {
    Matrix a(2, 2), b(2, 2), c(2, 2);
    a << 0.5, 2, 0.25, 0; // second term fine; first term ok
    b << 0, 1, 0, 0;      // first term has a zero column -> lambda_1 = 0
    c << 1, 1, 1, 0;
    const KruskalTensor out = normalize_and_reorder(KruskalTensor({a, b, c}));
    // zero-lambda term sorted last with original columns
    EXPECT_EQ(out.factor(0)(0, 1), 0.5);
    EXPECT_EQ(out.factor(0)(1, 1), 0.25);
    EXPECT_EQ(out.factor(1)(0, 1), 0.0);
}

TEST(PackUnpack, round_trip_and_layout) {
    Rng rng(59);
    const Shape shape({3, 2, 4});
    const KruskalTensor k = random_kruskal(shape, 2, rng);
    const KruskalTensor back = unpack(pack(k), shape, 2);
    for (int n = 0; n < 3; ++n) EXPECT_EQ(k.factor(n), back.factor(n));

    Matrix a(2, 1), b(2, 1);
    a << 1, 2;
    b << 3, 4;
    const Vector v = pack(KruskalTensor({a, b}));
    Vector expect(4);
    expect << 1, 2, 3, 4;
    EXPECT_EQ(v, expect);

    EXPECT_THROW(unpack(Vector::Zero(5), shape, 2), std::invalid_argument);
}
