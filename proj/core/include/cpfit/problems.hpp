#pragma once

#include "cpfit/kruskal.hpp"
#include "cpfit/rng.hpp"
#include "cpfit/tensor.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cpfit {

/// Dense 3-way test problem: rank-R tensor with factor-column collinearity c,
/// plus a homoskedastic and a heteroskedastic noise stage at levels l1, l2
/// (percent; 0 skips the stage).
struct DenseProblemSpec {
    index_t s = 20;      // mode size (s x s x s)
    double c = 0.5;      // collinearity in [0, 1)
    index_t rank = 3;    // noise-free rank
    double l1 = 0.0;     // first (additive) noise level in [0, 100)
    double l2 = 0.0;     // second (elementwise) noise level in [0, 100)
    std::uint64_t seed = 0;
};

/// Finite-difference Laplacian on a d-dimensional regular grid with s points
/// per dimension, flattened as a 2d-way operator tensor.
struct LaplacianSpec {
    int d = 3;
    index_t s = 4;
};

/// Three s x R factor matrices Q*C with Q the thin-QR orthonormalization of
/// uniform(0,1) draws (R-diagonal made nonnegative) and C the upper Cholesky
/// factor of the collinearity matrix K = (1-c) I + c 11^T; every Gram equals
/// K and all columns have unit norm. Draws consume the provided stream.
std::vector<Matrix> collinear_factors(index_t s, index_t rank, double c, Rng& rng);

struct DenseProblem {
    DenseTensor data;       // T
    DenseTensor noise_free; // T_R
    KruskalTensor truth;    // the generating factors
};

/// Build Test Problem I.  Draw order from the single seeded stream:
/// the three factor matrices (each column-major), then N1, then N2
/// (each in tensor linearization order).
DenseProblem dense_test_problem(const DenseProblemSpec& spec);

/// Build Test Problem II. Diagonal entries (x, x) = 2d for every grid point
/// x; for each grid edge (x, x+e_k) the entries (x, x+e_k) and (x+e_k, x)
/// are -1. nnz = s^d + 2 d s^(d-1) (s-1).
SparseTensor laplacian_tensor(const LaplacianSpec& spec);

/// Uniform(0,1) starting point for the solvers, drawn in pack() order from a
/// stream seeded with Rng::mix(seed) so problems and starts reproduce
/// independently.
KruskalTensor uniform_initial_guess(const Shape& shape, index_t rank, std::uint64_t seed);

/// Specs serialize as flat key=value text, one pair per line.
void write_spec(const DenseProblemSpec& spec, std::ostream& os);
void write_spec(const LaplacianSpec& spec, std::ostream& os);
DenseProblemSpec read_dense_spec(std::istream& is, const std::string& name = "<stream>");
LaplacianSpec read_laplacian_spec(std::istream& is, const std::string& name = "<stream>");

} // namespace cpfit
