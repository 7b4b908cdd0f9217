#include "cpfit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cpfit {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

Shape::Shape(std::vector<index_t> dims) : dims_(std::move(dims)) {
    require(!dims_.empty(), "Shape: order must be >= 1");
    num_elements_ = 1;
    for (index_t d : dims_) {
        require(d >= 1, "Shape: every mode size must be >= 1");
        require(num_elements_ <= std::numeric_limits<index_t>::max() / d,
                "Shape: element count overflows the index range");
        num_elements_ *= d;
    }
}

index_t Shape::offset(std::span<const index_t> coords) const {
    index_t off = 0;
    index_t stride = 1;
    for (int n = 0; n < order(); ++n) {
        off += coords[static_cast<std::size_t>(n)] * stride;
        stride *= dim(n);
    }
    return off;
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    require(static_cast<index_t>(values_.size()) == shape_.num_elements(),
            "DenseTensor: value count does not match shape");
    require(all_finite(values_), "DenseTensor: entries must be finite");
}

DenseTensor DenseTensor::zeros(Shape shape) {
    auto k = static_cast<std::size_t>(shape.num_elements());
    return DenseTensor(std::move(shape), std::vector<double>(k, 0.0));
}

SparseTensor::SparseTensor(Shape shape, std::vector<index_t> coords, std::vector<double> values)
    : shape_(std::move(shape)) {
    const auto n = static_cast<std::size_t>(shape_.order());
    require(coords.size() == values.size() * n, "SparseTensor: coords/values size mismatch");
    require(all_finite(values), "SparseTensor: entries must be finite");
    const std::size_t nnz_in = values.size();
    for (std::size_t i = 0; i < nnz_in; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const index_t c = coords[i * n + k];
            require(c >= 0 && c < shape_.dim(static_cast<int>(k)),
                    "SparseTensor: coordinate out of bounds");
        }
    }

    // Canonicalize: sort lexicographically, sum duplicates, drop zeros.
    std::vector<std::size_t> order(nnz_in);
    std::iota(order.begin(), order.end(), 0);
    auto lex_less = [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(coords.begin() + static_cast<std::ptrdiff_t>(a * n),
                                            coords.begin() + static_cast<std::ptrdiff_t>((a + 1) * n),
                                            coords.begin() + static_cast<std::ptrdiff_t>(b * n),
                                            coords.begin() + static_cast<std::ptrdiff_t>((b + 1) * n));
    };
    auto lex_equal = [&](std::size_t a, std::size_t b) {
        return std::equal(coords.begin() + static_cast<std::ptrdiff_t>(a * n),
                          coords.begin() + static_cast<std::ptrdiff_t>((a + 1) * n),
                          coords.begin() + static_cast<std::ptrdiff_t>(b * n));
    };
    std::stable_sort(order.begin(), order.end(), lex_less);

    coords_.reserve(coords.size());
    values_.reserve(values.size());
    std::size_t i = 0;
    while (i < nnz_in) {
        double sum = values[order[i]];
        std::size_t j = i + 1;
        while (j < nnz_in && lex_equal(order[i], order[j])) {
            sum += values[order[j]];
            ++j;
        }
        if (sum != 0.0) {
            const auto* c = coords.data() + order[i] * n;
            coords_.insert(coords_.end(), c, c + n);
            values_.push_back(sum);
        }
        i = j;
    }
}

SparseTensor SparseTensor::from_dense(const DenseTensor& t) {
    const Shape& shape = t.shape();
    const int n = shape.order();
    std::vector<index_t> coords;
    std::vector<double> values;
    std::vector<index_t> idx(static_cast<std::size_t>(n), 0);
    for (index_t flat = 0; flat < shape.num_elements(); ++flat) {
        if (t[flat] != 0.0) {
            coords.insert(coords.end(), idx.begin(), idx.end());
            values.push_back(t[flat]);
        }
        for (int k = 0; k < n; ++k) { // advance multi-index, first mode fastest
            if (++idx[static_cast<std::size_t>(k)] < shape.dim(k)) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return SparseTensor(shape, std::move(coords), std::move(values));
}

DenseTensor SparseTensor::densify() const {
    std::vector<double> values(static_cast<std::size_t>(shape_.num_elements()), 0.0);
    for (index_t i = 0; i < nnz(); ++i)
        values[static_cast<std::size_t>(shape_.offset(coords(i)))] = value(i);
    return DenseTensor(shape_, std::move(values));
}

double frobenius_norm(const DenseTensor& t) {
    return Eigen::Map<const Vector>(t.values().data(), static_cast<index_t>(t.values().size())).norm();
}

double frobenius_norm(const SparseTensor& t) {
    return Eigen::Map<const Vector>(t.values().data(), t.nnz()).norm();
}

Matrix matricize(const DenseTensor& t, int mode) {
    const Shape& shape = t.shape();
    require(mode >= 0 && mode < shape.order(), "matricize: mode out of range");
    const index_t rows = shape.dim(mode);
    const index_t cols = shape.co_size(mode);

    index_t inner = 1; // prod of mode sizes before `mode`
    for (int m = 0; m < mode; ++m) inner *= shape.dim(m);
    const index_t outer = cols / inner;

    // Buffer viewed as inner x rows x outer; unfolding column = a + b*inner.
    Matrix out(rows, cols);
    const double* v = t.values().data();
    for (index_t b = 0; b < outer; ++b)
        for (index_t r = 0; r < rows; ++r)
            for (index_t a = 0; a < inner; ++a)
                out(r, a + b * inner) = v[a + r * inner + b * inner * rows];
    return out;
}

UnfoldingIndex unfolding_index(const Shape& shape, std::span<const index_t> coords, int mode) {
    require(mode >= 0 && mode < shape.order(), "unfolding_index: mode out of range");
    index_t col = 0;
    index_t stride = 1;
    for (int k = 0; k < shape.order(); ++k) {
        if (k == mode) continue;
        col += coords[static_cast<std::size_t>(k)] * stride;
        stride *= shape.dim(k);
    }
    return {coords[static_cast<std::size_t>(mode)], col};
}

Matrix khatri_rao(std::span<const Matrix> mats) {
    require(!mats.empty(), "khatri_rao: need at least one matrix");
    const index_t r = mats[0].cols();
    for (const Matrix& m : mats)
        require(m.cols() == r, "khatri_rao: column counts must match");

    Matrix out = mats[0];
    for (std::size_t k = 1; k < mats.size(); ++k) {
        const Matrix& next = mats[k];
        Matrix grown(out.rows() * next.rows(), r);
        for (index_t c = 0; c < r; ++c)
            for (index_t j = 0; j < next.rows(); ++j)
                grown.col(c).segment(j * out.rows(), out.rows()) = next(j, c) * out.col(c);
        out = std::move(grown);
    }
    return out;
}

namespace {

void check_factor_shapes(const Shape& shape, std::span<const Matrix> factors, int mode) {
    require(mode >= 0 && mode < shape.order(), "mttkrp: mode out of range");
    require(static_cast<int>(factors.size()) == shape.order(),
            "mttkrp: need one factor per mode");
    const index_t r = factors[0].cols();
    for (int n = 0; n < shape.order(); ++n) {
        require(factors[static_cast<std::size_t>(n)].rows() == shape.dim(n),
                "mttkrp: factor row count does not match tensor mode size");
        require(factors[static_cast<std::size_t>(n)].cols() == r,
                "mttkrp: factors must share a column count");
    }
}

} // namespace

Matrix mttkrp(const DenseTensor& t, std::span<const Matrix> factors, int mode) {
    const Shape& shape = t.shape();
    check_factor_shapes(shape, factors, mode);
    const int n = shape.order();
    const index_t rows = shape.dim(mode);
    const index_t r = factors[0].cols();
    const double* v = t.values().data();

    if (n == 1) { // single-mode tensor: unfolding is a column vector
        return Eigen::Map<const Vector>(v, rows) * Matrix::Ones(1, r);
    }
    if (mode == 0) {
        Eigen::Map<const Matrix> unf(v, rows, shape.co_size(0));
        return unf * khatri_rao(factors.subspan(1));
    }
    if (mode == n - 1) {
        Eigen::Map<const Matrix> unf(v, shape.co_size(mode), rows);
        return unf.transpose() * khatri_rao(factors.first(static_cast<std::size_t>(mode)));
    }

    // Middle mode: loop over trailing-slab GEMMs, scaling each by the
    // matching row of the trailing Khatri-Rao factor.
    index_t inner = 1;
    for (int m = 0; m < mode; ++m) inner *= shape.dim(m);
    const index_t outer = shape.co_size(mode) / inner;
    const Matrix lead = khatri_rao(factors.first(static_cast<std::size_t>(mode)));
    const Matrix trail = khatri_rao(factors.subspan(static_cast<std::size_t>(mode) + 1));
    Matrix out = Matrix::Zero(rows, r);
    for (index_t b = 0; b < outer; ++b) {
        Eigen::Map<const Matrix> slab(v + b * inner * rows, inner, rows);
        out.noalias() +=
            ((slab.transpose() * lead).array().rowwise() * trail.row(b).array()).matrix();
    }
    return out;
}

Matrix mttkrp(const SparseTensor& t, std::span<const Matrix> factors, int mode) {
    const Shape& shape = t.shape();
    check_factor_shapes(shape, factors, mode);
    const int n = shape.order();
    const index_t r = factors[0].cols();
    Matrix out = Matrix::Zero(shape.dim(mode), r);
    Eigen::RowVectorXd prod(r);
    for (index_t i = 0; i < t.nnz(); ++i) {
        const auto c = t.coords(i);
        prod.setConstant(t.value(i));
        for (int k = 0; k < n; ++k) {
            if (k == mode) continue;
            prod.array() *= factors[static_cast<std::size_t>(k)].row(c[static_cast<std::size_t>(k)]).array();
        }
        out.row(c[static_cast<std::size_t>(mode)]) += prod;
    }
    return out;
}

Matrix gram_hadamard(std::span<const Matrix> factors, int skip) {
    require(!factors.empty(), "gram_hadamard: need at least one factor");
    const index_t r = factors[0].cols();
    for (const Matrix& m : factors)
        require(m.cols() == r, "gram_hadamard: column counts must match");
    Matrix out = Matrix::Ones(r, r);
    for (int n = 0; n < static_cast<int>(factors.size()); ++n) {
        if (n == skip) continue;
        const Matrix& a = factors[static_cast<std::size_t>(n)];
        out.array() *= (a.transpose() * a).array();
    }
    out = ((out + out.transpose()) / 2.0).eval();
    return out;
}

DataTensor::DataTensor(DenseTensor t) : storage_(std::move(t)) {
    norm_ = frobenius_norm(dense());
    norm_squared_ = norm_ * norm_;
}

DataTensor::DataTensor(SparseTensor t) : storage_(std::move(t)) {
    norm_ = frobenius_norm(sparse());
    norm_squared_ = norm_ * norm_;
}

const Shape& DataTensor::shape() const {
    return is_sparse() ? sparse().shape() : dense().shape();
}

Matrix DataTensor::mttkrp(std::span<const Matrix> factors, int mode) const {
    return is_sparse() ? cpfit::mttkrp(sparse(), factors, mode)
                       : cpfit::mttkrp(dense(), factors, mode);
}

} // namespace cpfit
