#pragma once

// Exact sparse linear algebra over Q and Q[h]/h^{N+1}: solve with Fredholm
// certificates on failure, kernels, and two-term cohomology with explicit
// representatives and coboundary witnesses. No floating point anywhere.

#include <map>
#include <optional>
#include <vector>

#include "ainf/ring.hpp"

namespace ainf {

using Vec = std::vector<Scalar>;

Vec zero_vec(int n, Ring ring);
bool vec_is_zero(const Vec& v);

class SparseMatrix {
public:
    SparseMatrix() : rows_(0), cols_(0), ring_(Ring::q()) {}
    SparseMatrix(int rows, int cols, Ring ring) : rows_(rows), cols_(cols), ring_(ring) {}

    static SparseMatrix identity(int n, Ring ring);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const Ring& ring() const { return ring_; }

    void set(int r, int c, const Scalar& v);
    void add(int r, int c, const Scalar& v);
    /// nullptr when the slot is zero.
    const Scalar* get(int r, int c) const;
    const std::map<int, std::map<int, Scalar>>& row_data() const { return a_; }

    bool is_zero() const { return a_.empty(); }
    int nnz() const;

    Vec apply(const Vec& x) const;
    SparseMatrix times(const SparseMatrix& o) const;
    SparseMatrix plus(const SparseMatrix& o) const;
    SparseMatrix scaled(const Scalar& c) const;
    bool operator==(const SparseMatrix& o) const;

private:
    void check_index(int r, int c) const;

    int rows_, cols_;
    Ring ring_;
    std::map<int, std::map<int, Scalar>> a_; // row -> col -> nonzero entry
};

/// Witness of inconsistency: y with y^T M = 0 and y^T b != 0. For solves
/// over Q[h]/h^{N+1} the certificate refers to the internal h-layer system
/// at `layer` (re-derivable deterministically); over Q, layer is 0 and the
/// certificate checks directly against (M, b).
struct FredholmCertificate {
    std::vector<Rational> y;
    int layer = 0;
};

struct SolveOutcome {
    std::optional<Vec> solution;
    std::optional<FredholmCertificate> certificate;
    bool ok() const { return solution.has_value(); }
};

/// Exact solve of M x = b. Over Q: deterministic sparse elimination (pivot =
/// first nonzero in column order). Over Q[h]/h^{N+1}: h-degree induction,
/// carrying the full solution space of each layer so that the result agrees
/// with solving the expanded block-triangular system over Q.
SolveOutcome solve(const SparseMatrix& M, const Vec& b);

/// Deterministic kernel basis (one vector per free column, ascending).
std::vector<Vec> kernel(const SparseMatrix& M);

int rank_q(const SparseMatrix& M);

/// Check y^T M = 0 and y^T b != 0 over Q.
bool check_fredholm_q(const SparseMatrix& M, const Vec& b, const std::vector<Rational>& y);

/// Layer expansion of a Q[h]/h^{N+1} matrix: the Q coefficient matrix of h^k.
SparseMatrix h_layer(const SparseMatrix& M, int k);
/// Block lower-triangular expansion over Q (layer-major indexing:
/// expanded index = layer * n + original index).
SparseMatrix expand_h_matrix(const SparseMatrix& M);
Vec expand_h_vec(const Vec& v);
/// Fold a layer-major Q vector back into a Q[h]/h^{N+1} vector of length n.
Vec fold_h_vec(const Vec& expanded, int n, Ring ring);

/// Cohomology of V_in --d_in--> V --d_out--> V_out at the middle slot.
struct CohomologyResult {
    Ring ring;
    /// Over Q: {dim}. Over Q[h]/h^{N+1}: ranks[k] = dim_Q of the k-th graded
    /// piece of the h-filtration on cohomology (so H is a sum of modules
    /// Q[h]/h^{a_j} and ranks[k] counts those with a_j > k).
    std::vector<int> ranks;
    std::vector<Vec> representatives;

    int dim() const { return ranks.empty() ? 0 : ranks[0]; }

    /// Express a cocycle z as d_in * witness + representatives * coords.
    /// Returns (witness, coords); nullopt when z is not in the span (not a
    /// cocycle or not liftable).
    std::optional<std::pair<Vec, Vec>> lift(const Vec& z) const;

    SparseMatrix d_in; // kept for lift and re-verification
};

/// Requires d_out * d_in = 0 exactly; throws InternalError("not a complex")
/// otherwise (that error is load-bearing: it flags upstream sign bugs).
CohomologyResult cohomology(const SparseMatrix& d_in, const SparseMatrix& d_out);

} // namespace ainf
