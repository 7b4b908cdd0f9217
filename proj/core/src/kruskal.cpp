#include "cpfit/kruskal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cpfit {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

} // namespace

KruskalTensor::KruskalTensor(std::vector<Matrix> factors) : factors_(std::move(factors)) {
    require(!factors_.empty(), "KruskalTensor: need at least one factor");
    const index_t r = factors_[0].cols();
    require(r >= 1, "KruskalTensor: rank must be >= 1");
    for (const Matrix& a : factors_) {
        require(a.cols() == r, "KruskalTensor: factors must share a column count");
        require(a.rows() >= 1, "KruskalTensor: factor must have rows");
        require(a.allFinite(), "KruskalTensor: entries must be finite");
    }
}

Shape KruskalTensor::shape() const {
    std::vector<index_t> dims(factors_.size());
    for (std::size_t n = 0; n < factors_.size(); ++n) dims[n] = factors_[n].rows();
    return Shape(dims);
}

DenseTensor full(const KruskalTensor& k) {
    const Shape shape = k.shape();
    // one GEMM against the trailing Khatri-Rao product; its rows follow the
    // tensor linearization with mode 1 fastest
    std::vector<double> flat(static_cast<std::size_t>(shape.num_elements()));
    Eigen::Map<Matrix> out(flat.data(), shape.dim(0), shape.co_size(0));
    if (k.order() == 1) {
        out = k.factor(0).rowwise().sum();
    } else {
        const Matrix trail = khatri_rao(std::span<const Matrix>(k.factors()).subspan(1));
        out.noalias() = k.factor(0) * trail.transpose();
    }
    return DenseTensor(shape, std::move(flat));
}

namespace {

// Gram matrices A^T A for all modes, then Hadamard products with one mode
// left out, computed once per evaluation.
struct GramSet {
    std::vector<Matrix> grams;

    explicit GramSet(const std::vector<Matrix>& factors) {
        grams.reserve(factors.size());
        for (const Matrix& a : factors) grams.push_back(a.transpose() * a);
    }

    Matrix hadamard_skipping(int skip) const {
        const index_t r = grams[0].rows();
        Matrix out = Matrix::Ones(r, r);
        for (int n = 0; n < static_cast<int>(grams.size()); ++n) {
            if (n == skip) continue;
            out.array() *= grams[static_cast<std::size_t>(n)].array();
        }
        out = ((out + out.transpose()) / 2.0).eval();
        return out;
    }
};

void check_shapes(const DataTensor& t, const KruskalTensor& k) {
    require(t.shape() == k.shape(), "tensor and Kruskal model shapes must match");
}

// 1/2 sum (T_i - full(K)_i)^2 for dense T, streamed in column blocks of the
// mode-1 unfolding. Every term is nonnegative, so f keeps full relative
// accuracy down to machine precision even at near-exact fits, which the
// h-based accuracy thresholds need; the cost is one GEMM pass, the same
// order as an MTTKRP.
double dense_residual_objective(const DenseTensor& t, const KruskalTensor& k) {
    const Shape& shape = t.shape();
    const index_t rows = shape.dim(0);
    const index_t cols = shape.co_size(0);
    Eigen::Map<const Matrix> data(t.values().data(), rows, cols);

    if (k.order() == 1) {
        return 0.5 * (data.col(0) - k.factor(0).rowwise().sum()).squaredNorm();
    }
    const Matrix trail = khatri_rao(std::span<const Matrix>(k.factors()).subspan(1));
    constexpr index_t kBlock = 256;
    Matrix buf(rows, std::min(cols, kBlock));
    double sum = 0.0;
    for (index_t at = 0; at < cols; at += kBlock) {
        const index_t width = std::min(kBlock, cols - at);
        buf.leftCols(width).noalias() = k.factor(0) * trail.middleRows(at, width).transpose();
        sum += (data.middleCols(at, width) - buf.leftCols(width)).squaredNorm();
    }
    return 0.5 * sum;
}

// MTTKRP-based three-term form; the only route that never touches the zero
// pattern of a sparse tensor.
double sparse_objective(const DataTensor& t, const KruskalTensor& k) {
    const Matrix m0 = t.mttkrp(k.factors(), 0);
    const double inner = (m0.array() * k.factor(0).array()).sum();
    const Matrix gamma = gram_hadamard(k.factors());
    return 0.5 * t.norm_squared() - inner + 0.5 * gamma.sum();
}

} // namespace

double objective(const DataTensor& t, const KruskalTensor& k) {
    check_shapes(t, k);
    if (!t.is_sparse()) return dense_residual_objective(t.dense(), k);
    return sparse_objective(t, k);
}

Vector gradient(const DataTensor& t, const KruskalTensor& k) {
    Vector g;
    objective_and_gradient(t, k, g);
    return g;
}

double objective_and_gradient(const DataTensor& t, const KruskalTensor& k, Vector& grad) {
    check_shapes(t, k);
    const int order = k.order();
    const GramSet grams(k.factors());

    index_t total = 0;
    for (int n = 0; n < order; ++n) total += k.factor(n).size();
    grad.resize(total);

    double inner = 0.0;
    index_t at = 0;
    for (int n = 0; n < order; ++n) {
        const Matrix m = t.mttkrp(k.factors(), n);
        if (n == 0) inner = (m.array() * k.factor(0).array()).sum();
        const Matrix block = -m + k.factor(n) * grams.hadamard_skipping(n);
        grad.segment(at, block.size()) = Eigen::Map<const Vector>(block.data(), block.size());
        at += block.size();
    }

    if (!t.is_sparse()) return dense_residual_objective(t.dense(), k);
    const Matrix gamma = grams.hadamard_skipping(-1);
    return 0.5 * t.norm_squared() - inner + 0.5 * gamma.sum();
}

double fit_h(const DataTensor& t, const KruskalTensor& k) {
    require(t.norm() > 0.0, "fit_h: data tensor must be nonzero");
    return std::sqrt(std::max(2.0 * objective(t, k), 0.0)) / t.norm();
}

KruskalTensor normalize_and_reorder(const KruskalTensor& k) {
    const int order = k.order();
    const index_t rank = k.rank();

    std::vector<double> lambda(static_cast<std::size_t>(rank), 1.0);
    Matrix norms(order, rank);
    for (int n = 0; n < order; ++n)
        for (index_t r = 0; r < rank; ++r) norms(n, r) = k.factor(n).col(r).norm();
    for (index_t r = 0; r < rank; ++r) {
        double l = 1.0;
        for (int n = 0; n < order; ++n) l *= norms(n, r);
        lambda[static_cast<std::size_t>(r)] = l;
    }

    std::vector<index_t> perm(static_cast<std::size_t>(rank));
    std::iota(perm.begin(), perm.end(), index_t{0});
    std::stable_sort(perm.begin(), perm.end(), [&](index_t a, index_t b) {
        return lambda[static_cast<std::size_t>(a)] > lambda[static_cast<std::size_t>(b)];
    });

    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(order));
    for (int n = 0; n < order; ++n) {
        Matrix a(k.factor(n).rows(), rank);
        for (index_t r = 0; r < rank; ++r) {
            const index_t src = perm[static_cast<std::size_t>(r)];
            const double l = lambda[static_cast<std::size_t>(src)];
            if (l == 0.0) {
                // term with a zero column: leave untouched, sorts last
                a.col(r) = k.factor(n).col(src);
            } else {
                a.col(r) = k.factor(n).col(src) * (std::pow(l, 1.0 / order) / norms(n, src));
            }
        }
        out.push_back(std::move(a));
    }
    return KruskalTensor(std::move(out));
}

Vector pack(const KruskalTensor& k) {
    index_t total = 0;
    for (int n = 0; n < k.order(); ++n) total += k.factor(n).size();
    Vector v(total);
    index_t at = 0;
    for (int n = 0; n < k.order(); ++n) {
        const Matrix& a = k.factor(n);
        v.segment(at, a.size()) = Eigen::Map<const Vector>(a.data(), a.size());
        at += a.size();
    }
    return v;
}

KruskalTensor unpack(const Vector& v, const Shape& shape, index_t rank) {
    index_t total = 0;
    for (int n = 0; n < shape.order(); ++n) total += shape.dim(n) * rank;
    require(v.size() == total, "unpack: vector length does not match shape and rank");
    std::vector<Matrix> factors;
    factors.reserve(static_cast<std::size_t>(shape.order()));
    index_t at = 0;
    for (int n = 0; n < shape.order(); ++n) {
        const index_t rows = shape.dim(n);
        factors.push_back(Eigen::Map<const Matrix>(v.data() + at, rows, rank));
        at += rows * rank;
    }
    return KruskalTensor(std::move(factors));
}

} // namespace cpfit
