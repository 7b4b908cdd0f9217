#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cpfit {

using Matrix = Eigen::MatrixXd; // column-major
using Vector = Eigen::VectorXd;
using index_t = Eigen::Index;

/// Mode sizes (I_1, ..., I_N) of an N-way tensor, N >= 1.
class Shape {
public:
    explicit Shape(std::vector<index_t> dims);

    int order() const { return static_cast<int>(dims_.size()); }
    index_t dim(int mode) const { return dims_[static_cast<std::size_t>(mode)]; }
    const std::vector<index_t>& dims() const { return dims_; }

    /// Total element count K = prod I_n.
    index_t num_elements() const { return num_elements_; }
    /// K / I_n, the column count of the mode-n unfolding.
    index_t co_size(int mode) const { return num_elements_ / dim(mode); }

    /// Flat offset of a 0-based multi-index, first mode fastest:
    /// offset = sum_n i_n * prod_{m<n} I_m.
    index_t offset(std::span<const index_t> coords) const;

    bool operator==(const Shape&) const = default;

private:
    std::vector<index_t> dims_;
    index_t num_elements_ = 0;
};

/// Full-storage N-way tensor. Values are linearized first mode fastest
/// (the multi-index (i_1,...,i_N) lives at offset sum i_n * prod_{m<n} I_m),
/// so a mode-1 unfolding is a plain column-major view of the buffer.
/// Immutable after construction; entries are validated finite.
class DenseTensor {
public:
    DenseTensor(Shape shape, std::vector<double> values);

    static DenseTensor zeros(Shape shape);

    const Shape& shape() const { return shape_; }
    std::span<const double> values() const { return values_; }
    double operator[](index_t flat) const { return values_[static_cast<std::size_t>(flat)]; }
    double at(std::span<const index_t> coords) const { return values_[static_cast<std::size_t>(shape_.offset(coords))]; }

private:
    Shape shape_;
    std::vector<double> values_;
};

/// Coordinate-list sparse tensor. Stored entries are 0-based, sorted
/// lexicographically by coordinate tuple, duplicate-free and nonzero;
/// the constructor canonicalizes permissively (sums duplicates, drops
/// zeros, sorts). The text format on disk is 1-based.
class SparseTensor {
public:
    /// coords is nnz*N flat, entry i occupying coords[i*N .. i*N+N).
    SparseTensor(Shape shape, std::vector<index_t> coords, std::vector<double> values);

    static SparseTensor from_dense(const DenseTensor& t);

    const Shape& shape() const { return shape_; }
    index_t nnz() const { return static_cast<index_t>(values_.size()); }
    std::span<const index_t> coords(index_t i) const {
        const auto n = static_cast<std::size_t>(shape_.order());
        return {coords_.data() + static_cast<std::size_t>(i) * n, n};
    }
    double value(index_t i) const { return values_[static_cast<std::size_t>(i)]; }
    std::span<const double> values() const { return values_; }

    DenseTensor densify() const;

private:
    Shape shape_;
    std::vector<index_t> coords_;
    std::vector<double> values_;
};

double frobenius_norm(const DenseTensor& t);
double frobenius_norm(const SparseTensor& t);

/// Mode-n unfolding T_(n), of size I_n x (K / I_n). The column holding the
/// multi-index (i_1,...,i_N) is sum_{k != n} i_k * prod_{m<k, m != n} I_m,
/// i.e. the remaining modes keep the first-fastest linearization.
Matrix matricize(const DenseTensor& t, int mode);

/// The same index map as a virtual view for sparse tensors: the (row, col)
/// position of a coordinate tuple in the mode-n unfolding. Sparse unfoldings
/// are never materialized; the sparse MTTKRP consumes this mapping
/// implicitly, entry by entry.
struct UnfoldingIndex {
    index_t row;
    index_t col;
};
UnfoldingIndex unfolding_index(const Shape& shape, std::span<const index_t> coords, int mode);

/// Column-wise Kronecker product of one or more matrices with equal column
/// counts. Row indexing follows the tensor linearization: the FIRST listed
/// matrix's row index runs fastest, so for a Kruskal tensor
/// matricize(full(K), n) == K.factor(n) * khatri_rao(other factors in
/// increasing mode order).transpose().
Matrix khatri_rao(std::span<const Matrix> mats);

/// Matricized tensor times Khatri-Rao product: matricize(t, mode) *
/// khatri_rao(factors except `mode`, increasing mode order). The dense path
/// never materializes the unfolding; the sparse path streams stored entries
/// in O(nnz * R * N).
Matrix mttkrp(const DenseTensor& t, std::span<const Matrix> factors, int mode);
Matrix mttkrp(const SparseTensor& t, std::span<const Matrix> factors, int mode);

/// Hadamard product of the factor Gram matrices A^T A over all modes
/// (skip < 0) or all modes except `skip`. Result is symmetrized.
Matrix gram_hadamard(std::span<const Matrix> factors, int skip = -1);

/// Read-only handle over dense or sparse storage with the squared Frobenius
/// norm cached; what the solvers consume. Cheap to copy by const reference,
/// safe to share across concurrent solves.
class DataTensor {
public:
    DataTensor(DenseTensor t);
    DataTensor(SparseTensor t);

    const Shape& shape() const;
    bool is_sparse() const { return std::holds_alternative<SparseTensor>(storage_); }
    const DenseTensor& dense() const { return std::get<DenseTensor>(storage_); }
    const SparseTensor& sparse() const { return std::get<SparseTensor>(storage_); }

    double norm() const { return norm_; }
    double norm_squared() const { return norm_squared_; }

    Matrix mttkrp(std::span<const Matrix> factors, int mode) const;

private:
    std::variant<DenseTensor, SparseTensor> storage_;
    double norm_squared_ = 0.0;
    double norm_ = 0.0;
};

} // namespace cpfit
