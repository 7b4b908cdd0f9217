#pragma once

#include "cpfit/tensor.hpp"

#include <vector>

namespace cpfit {

/// Rank-R canonical tensor held by its factor matrices: the r-th rank-one
/// term is the outer product of column r of every factor. Scale weights are
/// absorbed into the columns; there is no separate weight vector.
class KruskalTensor {
public:
    explicit KruskalTensor(std::vector<Matrix> factors);

    int order() const { return static_cast<int>(factors_.size()); }
    index_t rank() const { return factors_[0].cols(); }
    Shape shape() const;

    const Matrix& factor(int mode) const { return factors_[static_cast<std::size_t>(mode)]; }
    Matrix& factor(int mode) { return factors_[static_cast<std::size_t>(mode)]; }
    const std::vector<Matrix>& factors() const { return factors_; }

private:
    std::vector<Matrix> factors_;
};

/// Expand to full storage: element (i_1,...,i_N) = sum_r prod_n A^(n)(i_n, r).
DenseTensor full(const KruskalTensor& k);

/// f = 1/2 ||T - full(K)||_F^2. Sparse tensors use the MTTKRP-based form
/// 1/2 ||T||^2 - <T, full(K)> + 1/2 1^T Gamma 1, which never touches the
/// zero pattern; dense tensors stream the residual directly (same cost, and
/// free of the cancellation floor near exact fits).
double objective(const DataTensor& t, const KruskalTensor& k);

/// Packed gradient; block n is -mttkrp(T, factors, n) + A^(n) * GramHadamard
/// (skipping n), laid out like pack().
Vector gradient(const DataTensor& t, const KruskalTensor& k);

/// f and gradient in one pass, sharing the per-mode MTTKRPs between the two.
double objective_and_gradient(const DataTensor& t, const KruskalTensor& k, Vector& grad);

/// Normalized misfit h = ||T - full(K)||_F / ||T||_F, computed as
/// sqrt(max(2 f, 0)) / ||T||_F. Requires ||T||_F > 0.
double fit_h(const DataTensor& t, const KruskalTensor& k);

/// Rescale every rank-one term so all its columns share the norm
/// lambda_r^(1/N) (lambda_r = product of the column norms), then stably sort
/// terms by decreasing lambda_r. A term with any zero column gets lambda_r=0,
/// keeps its columns untouched and sorts last. Preserves full(K) and is
/// idempotent.
KruskalTensor normalize_and_reorder(const KruskalTensor& k);

/// Flatten the factors into one vector: factors in mode order, each
/// column-major. pack/unpack are exact inverses.
Vector pack(const KruskalTensor& k);
KruskalTensor unpack(const Vector& v, const Shape& shape, index_t rank);

} // namespace cpfit
