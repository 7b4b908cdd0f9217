#include "cpfit/problems.hpp"

#include "cpfit/errors.hpp"
#include "cpfit/io.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cpfit {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

Matrix uniform_matrix(index_t rows, index_t cols, Rng& rng) {
    Matrix m(rows, cols);
    // column-major fill order, matching the storage layout
    for (index_t c = 0; c < cols; ++c)
        for (index_t r = 0; r < rows; ++r) m(r, c) = rng.uniform();
    return m;
}

std::vector<double> normal_values(index_t count, Rng& rng) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (auto& x : v) x = rng.normal();
    return v;
}

} // namespace

std::vector<Matrix> collinear_factors(index_t s, index_t rank, double c, Rng& rng) {
    require(rank >= 1 && s >= rank, "collinear_factors: need s >= rank >= 1");
    require(c >= 0.0 && c < 1.0, "collinear_factors: collinearity must be in [0, 1)");

    Matrix collin = Matrix::Constant(rank, rank, c);
    collin.diagonal().setOnes();
    // upper Cholesky factor: C^T C = K
    const Matrix chol = Eigen::LLT<Matrix>(collin).matrixU();

    std::vector<Matrix> factors;
    factors.reserve(3);
    for (int n = 0; n < 3; ++n) {
        const Matrix raw = uniform_matrix(s, rank, rng);
        Eigen::HouseholderQR<Matrix> qr(raw);
        Matrix q = qr.householderQ() * Matrix::Identity(s, rank);
        const Matrix r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
        for (index_t j = 0; j < rank; ++j)
            if (r(j, j) < 0.0) q.col(j) = -q.col(j);
        factors.push_back(q * chol);
    }
    return factors;
}

DenseProblem dense_test_problem(const DenseProblemSpec& spec) {
    require(spec.l1 >= 0.0 && spec.l1 < 100.0 && spec.l2 >= 0.0 && spec.l2 < 100.0,
            "dense_test_problem: noise levels must be in [0, 100)");
    Rng rng(spec.seed);

    KruskalTensor truth(collinear_factors(spec.s, spec.rank, spec.c, rng));
    DenseTensor noise_free = full(truth);
    const Shape shape = noise_free.shape();
    const index_t k = shape.num_elements();

    const std::vector<double> n1 = normal_values(k, rng);
    const std::vector<double> n2 = normal_values(k, rng);

    auto map = [](const std::vector<double>& v) {
        return Eigen::Map<const Vector>(v.data(), static_cast<index_t>(v.size()));
    };

    // T_hat = T_R + (100/l1 - 1)^(-1/2) ||T_R|| N1 / ||N1||
    Vector t_hat = Eigen::Map<const Vector>(noise_free.values().data(), k);
    if (spec.l1 > 0.0) {
        const double coef = std::pow(100.0 / spec.l1 - 1.0, -0.5);
        t_hat += coef * t_hat.norm() / map(n1).norm() * map(n1);
    }
    // T = T_hat + (100/l2 - 1)^(-1/2) ||T_hat|| (N2 .* T_hat) / ||N2 .* T_hat||
    if (spec.l2 > 0.0) {
        const double coef = std::pow(100.0 / spec.l2 - 1.0, -0.5);
        const Vector mixed = (map(n2).array() * t_hat.array()).matrix();
        t_hat += coef * t_hat.norm() / mixed.norm() * mixed;
    }

    DenseTensor data(shape, std::vector<double>(t_hat.data(), t_hat.data() + k));
    return {std::move(data), std::move(noise_free), std::move(truth)};
}

SparseTensor laplacian_tensor(const LaplacianSpec& spec) {
    require(spec.d >= 1, "laplacian_tensor: dimension must be >= 1");
    require(spec.s >= 2, "laplacian_tensor: grid size must be >= 2");
    const int d = spec.d;
    const index_t s = spec.s;

    const Shape shape(std::vector<index_t>(static_cast<std::size_t>(2 * d), s));
    std::vector<index_t> coords;
    std::vector<double> values;

    std::vector<index_t> grid(static_cast<std::size_t>(d), 0);
    auto emit = [&](std::span<const index_t> x, std::span<const index_t> y, double v) {
        coords.insert(coords.end(), x.begin(), x.end());
        coords.insert(coords.end(), y.begin(), y.end());
        values.push_back(v);
    };

    bool more = true;
    while (more) {
        emit(grid, grid, 2.0 * d);
        for (int k = 0; k < d; ++k) {
            if (grid[static_cast<std::size_t>(k)] + 1 < s) {
                std::vector<index_t> nbr = grid;
                ++nbr[static_cast<std::size_t>(k)];
                emit(grid, nbr, -1.0);
                emit(nbr, grid, -1.0);
            }
        }
        more = false;
        for (int k = 0; k < d; ++k) { // advance grid point, first coordinate fastest
            if (++grid[static_cast<std::size_t>(k)] < s) {
                more = true;
                break;
            }
            grid[static_cast<std::size_t>(k)] = 0;
        }
    }
    return SparseTensor(shape, std::move(coords), std::move(values));
}

KruskalTensor uniform_initial_guess(const Shape& shape, index_t rank, std::uint64_t seed) {
    require(rank >= 1, "uniform_initial_guess: rank must be >= 1");
    Rng rng(Rng::mix(seed));
    std::vector<Matrix> factors;
    factors.reserve(static_cast<std::size_t>(shape.order()));
    for (int n = 0; n < shape.order(); ++n)
        factors.push_back(uniform_matrix(shape.dim(n), rank, rng));
    return KruskalTensor(std::move(factors));
}

namespace {

std::map<std::string, std::string> read_kv(std::istream& is, const std::string& name) {
    std::map<std::string, std::string> kv;
    std::string line;
    long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw io_error(name + ":" + std::to_string(lineno) + ": expected key=value");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::string lookup(const std::map<std::string, std::string>& kv, const std::string& key,
                   const std::string& name) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw io_error(name + ": missing key '" + key + "'");
    return it->second;
}

} // namespace

void write_spec(const DenseProblemSpec& spec, std::ostream& os) {
    os << "kind=dense\n"
       << "s=" << spec.s << "\nc=" << format_double(spec.c) << "\nR=" << spec.rank
       << "\nl1=" << format_double(spec.l1) << "\nl2=" << format_double(spec.l2)
       << "\nseed=" << spec.seed << "\n";
}

void write_spec(const LaplacianSpec& spec, std::ostream& os) {
    os << "kind=laplacian\n"
       << "d=" << spec.d << "\ns=" << spec.s << "\n";
}

DenseProblemSpec read_dense_spec(std::istream& is, const std::string& name) {
    const auto kv = read_kv(is, name);
    if (lookup(kv, "kind", name) != "dense") throw io_error(name + ": expected kind=dense");
    DenseProblemSpec spec;
    spec.s = std::stoll(lookup(kv, "s", name));
    spec.c = std::stod(lookup(kv, "c", name));
    spec.rank = std::stoll(lookup(kv, "R", name));
    spec.l1 = std::stod(lookup(kv, "l1", name));
    spec.l2 = std::stod(lookup(kv, "l2", name));
    spec.seed = std::stoull(lookup(kv, "seed", name));
    return spec;
}

LaplacianSpec read_laplacian_spec(std::istream& is, const std::string& name) {
    const auto kv = read_kv(is, name);
    if (lookup(kv, "kind", name) != "laplacian")
        throw io_error(name + ": expected kind=laplacian");
    LaplacianSpec spec;
    spec.d = std::stoi(lookup(kv, "d", name));
    spec.s = std::stoll(lookup(kv, "s", name));
    return spec;
}

} // namespace cpfit
