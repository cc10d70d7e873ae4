#include "ainf/linalg.hpp"

#include <algorithm>

namespace ainf {

Vec zero_vec(int n, Ring ring) {
    return Vec(n, Scalar::zero(ring));
}

bool vec_is_zero(const Vec& v) {
    for (const auto& x : v)
        if (!x.is_zero()) return false;
    return true;
}

SparseMatrix SparseMatrix::identity(int n, Ring ring) {
    SparseMatrix m(n, n, ring);
    for (int i = 0; i < n; ++i) m.set(i, i, Scalar::one(ring));
    return m;
}

void SparseMatrix::check_index(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
        throw InputError("matrix index out of range");
}

void SparseMatrix::set(int r, int c, const Scalar& v) {
    check_index(r, c);
    if (v.ring() != ring_) throw InputError("ring mismatch in matrix entry");
    if (v.is_zero()) {
        auto it = a_.find(r);
        if (it != a_.end()) {
            it->second.erase(c);
            if (it->second.empty()) a_.erase(it);
        }
    } else {
        a_[r][c] = v;
    }
}

void SparseMatrix::add(int r, int c, const Scalar& v) {
    check_index(r, c);
    if (v.is_zero()) return;
    const Scalar* cur = get(r, c);
    set(r, c, cur ? *cur + v : v);
}

const Scalar* SparseMatrix::get(int r, int c) const {
    auto it = a_.find(r);
    if (it == a_.end()) return nullptr;
    auto jt = it->second.find(c);
    return jt == it->second.end() ? nullptr : &jt->second;
}

int SparseMatrix::nnz() const {
    int n = 0;
    for (const auto& [r, row] : a_) n += (int)row.size();
    return n;
}

Vec SparseMatrix::apply(const Vec& x) const {
    if ((int)x.size() != cols_) throw InputError("vector length does not match matrix");
    Vec y = zero_vec(rows_, ring_);
    for (const auto& [r, row] : a_)
        for (const auto& [c, v] : row)
            if (!x[c].is_zero()) y[r] += v * x[c];
    return y;
}

SparseMatrix SparseMatrix::times(const SparseMatrix& o) const {
    if (cols_ != o.rows_) throw InputError("matrix dimensions do not match");
    if (ring_ != o.ring_) throw InputError("ring mismatch in matrix product");
    SparseMatrix out(rows_, o.cols_, ring_);
    for (const auto& [r, row] : a_) {
        std::map<int, Scalar> acc;
        for (const auto& [k, v] : row) {
            auto it = o.a_.find(k);
            if (it == o.a_.end()) continue;
            for (const auto& [c, w] : it->second) {
                auto slot = acc.find(c);
                if (slot == acc.end())
                    acc.emplace(c, v * w);
                else
                    slot->second += v * w;
            }
        }
        for (auto& [c, v] : acc)
            if (!v.is_zero()) out.a_[r][c] = std::move(v);
    }
    return out;
}

SparseMatrix SparseMatrix::plus(const SparseMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_ || ring_ != o.ring_)
        throw InputError("matrix shapes do not match");
    SparseMatrix out = *this;
    for (const auto& [r, row] : o.a_)
        for (const auto& [c, v] : row) out.add(r, c, v);
    return out;
}

SparseMatrix SparseMatrix::scaled(const Scalar& c) const {
    SparseMatrix out(rows_, cols_, ring_);
    if (c.is_zero()) return out;
    for (const auto& [r, row] : a_)
        for (const auto& [cc, v] : row) out.set(r, cc, v * c);
    return out;
}

bool SparseMatrix::operator==(const SparseMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && ring_ == o.ring_ && a_ == o.a_;
}

namespace {

using QRow = std::map<int, Rational>;

void row_axpy(QRow& target, const Rational& factor, const QRow& src) {
    if (factor == 0) return;
    for (const auto& [c, v] : src) {
        auto it = target.find(c);
        if (it == target.end()) {
            target.emplace(c, factor * v);
        } else {
            it->second += factor * v;
            if (it->second == 0) target.erase(it);
        }
    }
}

void row_scale(QRow& row, const Rational& factor) {
    for (auto& [c, v] : row) v *= factor;
}

// Deterministic reduced elimination over Q. Pivot selection: columns in
// ascending order, first remaining row (in original order) with a nonzero
// entry. Pivots are normalized to 1 and eliminated from every other row.
struct QReduction {
    int rows = 0, cols = 0;
    std::vector<int> pivot_cols;              // elimination order
    std::vector<QRow> elim_rows, elim_trans;  // echelon rows + row transforms
    std::vector<QRow> null_trans;             // transforms of rows that reduced to zero
    std::vector<int> pivot_row_of_col;        // -1 when free

    explicit QReduction(const SparseMatrix& M) {
        if (!M.ring().is_q()) throw InputError("Q elimination needs a Q matrix");
        rows = M.rows();
        cols = M.cols();
        pivot_row_of_col.assign(cols, -1);
        std::vector<QRow> work(rows), trans(rows);
        for (const auto& [r, row] : M.row_data())
            for (const auto& [c, v] : row) work[r][c] = v.coeff(0);
        for (int r = 0; r < rows; ++r) trans[r][r] = 1;
        std::vector<bool> used(rows, false);

        for (int c = 0; c < cols; ++c) {
            int pr = -1;
            for (int r = 0; r < rows; ++r) {
                if (used[r]) continue;
                auto it = work[r].find(c);
                if (it != work[r].end()) { pr = r; break; }
            }
            if (pr < 0) continue;
            used[pr] = true;
            Rational inv = Rational(1) / work[pr].at(c);
            row_scale(work[pr], inv);
            row_scale(trans[pr], inv);
            for (int r = 0; r < rows; ++r) {
                if (r == pr) continue;
                auto it = work[r].find(c);
                if (it == work[r].end()) continue;
                Rational f = -it->second;
                row_axpy(work[r], f, work[pr]);
                row_axpy(trans[r], f, trans[pr]);
            }
            for (std::size_t i = 0; i < pivot_cols.size(); ++i) {
                QRow& er = elim_rows[i];
                auto it = er.find(c);
                if (it == er.end()) continue;
                Rational f = -it->second;
                row_axpy(er, f, work[pr]);
                row_axpy(elim_trans[i], f, trans[pr]);
            }
            pivot_row_of_col[c] = (int)pivot_cols.size();
            pivot_cols.push_back(c);
            elim_rows.push_back(std::move(work[pr]));
            elim_trans.push_back(std::move(trans[pr]));
        }
        for (int r = 0; r < rows; ++r) {
            if (used[r]) continue;
            if (!work[r].empty()) throw InternalError("elimination left a nonzero row");
            null_trans.push_back(std::move(trans[r]));
        }
    }

    int rank() const { return (int)pivot_cols.size(); }

    static Rational dot(const QRow& row, const std::vector<Rational>& v) {
        Rational acc(0);
        for (const auto& [c, x] : row) acc += x * v[c];
        return acc;
    }

    // Particular solution with free variables set to zero, or the index of a
    // null transform certifying inconsistency.
    std::optional<std::vector<Rational>> solve(const std::vector<Rational>& b,
                                               std::vector<Rational>* bad_y = nullptr) const {
        for (const auto& t : null_trans) {
            if (dot(t, b) != 0) {
                if (bad_y) {
                    bad_y->assign(rows, Rational(0));
                    for (const auto& [c, v] : t) (*bad_y)[c] = v;
                }
                return std::nullopt;
            }
        }
        std::vector<Rational> x(cols, Rational(0));
        for (std::size_t i = 0; i < pivot_cols.size(); ++i) {
            Rational rhs = dot(elim_trans[i], b);
            // elim row i reads x_{pivot} + sum over free columns; setting the
            // free columns to zero leaves x_{pivot} = transformed rhs.
            x[pivot_cols[i]] = rhs;
        }
        return x;
    }

    std::vector<std::vector<Rational>> kernel() const {
        std::vector<std::vector<Rational>> out;
        for (int c = 0; c < cols; ++c) {
            if (pivot_row_of_col[c] >= 0) continue;
            std::vector<Rational> v(cols, Rational(0));
            v[c] = 1;
            for (std::size_t i = 0; i < pivot_cols.size(); ++i) {
                auto it = elim_rows[i].find(c);
                if (it != elim_rows[i].end()) v[pivot_cols[i]] = -it->second;
            }
            out.push_back(std::move(v));
        }
        return out;
    }
};

std::vector<Rational> to_q_vec(const Vec& v) {
    std::vector<Rational> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].ring().is_q()) throw InputError("expected a Q vector");
        out[i] = v[i].coeff(0);
    }
    return out;
}

Vec from_q_vec(const std::vector<Rational>& v) {
    Vec out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(Scalar::constant(Ring::q(), x));
    return out;
}

SolveOutcome solve_q(const SparseMatrix& M, const Vec& b) {
    QReduction red(M);
    std::vector<Rational> y;
    auto x = red.solve(to_q_vec(b), &y);
    SolveOutcome out;
    if (x) {
        out.solution = from_q_vec(*x);
    } else {
        out.certificate = FredholmCertificate{std::move(y), 0};
    }
    return out;
}

// Kernel-carrying h-layer induction; agrees with solving the expanded
// block lower-triangular system over Q.
SolveOutcome solve_layered(const SparseMatrix& M, const Vec& b) {
    const int N = M.ring().trunc;
    const int n = M.cols();
    std::vector<SparseMatrix> layers;
    for (int k = 0; k <= N; ++k) layers.push_back(h_layer(M, k));

    using QVec = std::vector<Rational>;
    auto mat_apply = [](const SparseMatrix& A, const QVec& x) {
        QVec y(A.rows(), Rational(0));
        for (const auto& [r, row] : A.row_data())
            for (const auto& [c, v] : row) y[r] += v.coeff(0) * x[c];
        return y;
    };

    std::vector<QVec> particular;                  // particular solution, per layer
    std::vector<std::vector<QVec>> freedom;        // homogeneous solutions, layers 0..k-1

    for (int k = 0; k <= N; ++k) {
        QVec rhs(M.rows(), Rational(0));
        for (int r = 0; r < M.rows(); ++r) rhs[r] = b[r].coeff(k);
        for (int j = 1; j <= k; ++j) {
            QVec t = mat_apply(layers[j], particular[k - j]);
            for (int r = 0; r < M.rows(); ++r) rhs[r] -= t[r];
        }
        // Augmented system [M0 | C] (x_k, t) = rhs, where column i of C is
        // sum_j M_j * freedom_i[k-j].
        int nf = (int)freedom.size();
        SparseMatrix A(M.rows(), n + nf, Ring::q());
        for (const auto& [r, row] : layers[0].row_data())
            for (const auto& [c, v] : row) A.set(r, c, v);
        for (int i = 0; i < nf; ++i) {
            QVec col(M.rows(), Rational(0));
            for (int j = 1; j <= k; ++j) {
                if (k - j >= (int)freedom[i].size()) continue;
                QVec t = mat_apply(layers[j], freedom[i][k - j]);
                for (int r = 0; r < M.rows(); ++r) col[r] += t[r];
            }
            for (int r = 0; r < M.rows(); ++r)
                if (col[r] != 0) A.set(r, n + i, Scalar::constant(Ring::q(), col[r]));
        }
        QReduction red(A);
        std::vector<Rational> y;
        auto sol = red.solve(rhs, &y);
        if (!sol) {
            SolveOutcome out;
            out.certificate = FredholmCertificate{std::move(y), k};
            return out;
        }
        QVec xk(sol->begin(), sol->begin() + n);
        for (int i = 0; i < nf; ++i) {
            const Rational& ti = (*sol)[n + i];
            if (ti == 0) continue;
            for (int j = 0; j < (int)freedom[i].size(); ++j)
                for (int r = 0; r < n; ++r) particular[j][r] += ti * freedom[i][j][r];
        }
        particular.push_back(std::move(xk));

        std::vector<std::vector<QVec>> new_freedom;
        for (const auto& kv : red.kernel()) {
            std::vector<QVec> g(k + 1, QVec(n, Rational(0)));
            for (int r = 0; r < n; ++r) g[k][r] = kv[r];
            for (int i = 0; i < nf; ++i) {
                const Rational& si = kv[n + i];
                if (si == 0) continue;
                for (int j = 0; j < (int)freedom[i].size(); ++j)
                    for (int r = 0; r < n; ++r) g[j][r] += si * freedom[i][j][r];
            }
            new_freedom.push_back(std::move(g));
        }
        freedom = std::move(new_freedom);
    }

    Vec x;
    x.reserve(n);
    for (int c = 0; c < n; ++c) {
        std::vector<Rational> coeffs(N + 1);
        for (int k = 0; k <= N; ++k) coeffs[k] = particular[k][c];
        x.push_back(Scalar(M.ring(), std::move(coeffs)));
    }
    SolveOutcome out;
    out.solution = std::move(x);
    return out;
}

} // namespace

SolveOutcome solve(const SparseMatrix& M, const Vec& b) {
    if ((int)b.size() != M.rows()) throw InputError("rhs length does not match matrix");
    for (const auto& x : b)
        if (x.ring() != M.ring()) throw InputError("ring mismatch between matrix and rhs");
    SolveOutcome out = M.ring().is_q() ? solve_q(M, b) : solve_layered(M, b);
    if (out.solution) {
        Vec r = M.apply(*out.solution);
        for (int i = 0; i < M.rows(); ++i) r[i] -= b[i];
        if (!vec_is_zero(r)) throw InternalError("solve produced a nonzero residual");
    }
    return out;
}

std::vector<Vec> kernel(const SparseMatrix& M) {
    if (M.ring().is_q()) {
        QReduction red(M);
        std::vector<Vec> out;
        for (auto& v : red.kernel()) out.push_back(from_q_vec(v));
        return out;
    }
    // Kernel over Q[h]/h^{N+1} via the expanded Q system, folded back.
    SparseMatrix E = expand_h_matrix(M);
    QReduction red(E);
    std::vector<Vec> out;
    for (auto& v : red.kernel()) out.push_back(fold_h_vec(from_q_vec(v), M.cols(), M.ring()));
    return out;
}

int rank_q(const SparseMatrix& M) {
    QReduction red(M);
    return red.rank();
}

bool check_fredholm_q(const SparseMatrix& M, const Vec& b, const std::vector<Rational>& y) {
    if ((int)y.size() != M.rows()) return false;
    std::vector<Rational> yM(M.cols(), Rational(0));
    for (const auto& [r, row] : M.row_data())
        for (const auto& [c, v] : row) yM[c] += y[r] * v.coeff(0);
    for (const auto& v : yM)
        if (v != 0) return false;
    Rational yb(0);
    for (int r = 0; r < M.rows(); ++r) yb += y[r] * b[r].coeff(0);
    return yb != 0;
}

SparseMatrix h_layer(const SparseMatrix& M, int k) {
    SparseMatrix out(M.rows(), M.cols(), Ring::q());
    for (const auto& [r, row] : M.row_data())
        for (const auto& [c, v] : row)
            if (v.coeff(k) != 0) out.set(r, c, Scalar::constant(Ring::q(), v.coeff(k)));
    return out;
}

SparseMatrix expand_h_matrix(const SparseMatrix& M) {
    if (M.ring().is_q()) return M;
    const int N = M.ring().trunc;
    SparseMatrix out(M.rows() * (N + 1), M.cols() * (N + 1), Ring::q());
    for (const auto& [r, row] : M.row_data())
        for (const auto& [c, v] : row)
            for (int j = 0; j <= N; ++j) {
                if (v.coeff(j) == 0) continue;
                for (int k = 0; j + k <= N; ++k)
                    out.set((j + k) * M.rows() + r, k * M.cols() + c,
                            Scalar::constant(Ring::q(), v.coeff(j)));
            }
    return out;
}

Vec expand_h_vec(const Vec& v) {
    if (v.empty() || v[0].ring().is_q()) return v;
    const int N = v[0].ring().trunc;
    const int n = (int)v.size();
    Vec out = zero_vec(n * (N + 1), Ring::q());
    for (int i = 0; i < n; ++i)
        for (int k = 0; k <= N; ++k) out[k * n + i] = Scalar::constant(Ring::q(), v[i].coeff(k));
    return out;
}

Vec fold_h_vec(const Vec& expanded, int n, Ring ring) {
    const int N = ring.trunc;
    if ((int)expanded.size() != n * (N + 1)) throw InputError("expanded vector has wrong length");
    Vec out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::vector<Rational> coeffs(N + 1);
        for (int k = 0; k <= N; ++k) coeffs[k] = expanded[k * n + i].coeff(0);
        out.push_back(Scalar(ring, std::move(coeffs)));
    }
    return out;
}

std::optional<std::pair<Vec, Vec>> CohomologyResult::lift(const Vec& z) const {
    const int w = d_in.cols();
    const int r = (int)representatives.size();
    SparseMatrix A(d_in.rows(), w + r, ring);
    for (const auto& [row, cols] : d_in.row_data())
        for (const auto& [c, v] : cols) A.set(row, c, v);
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < d_in.rows(); ++i)
            if (!representatives[j][i].is_zero()) A.set(i, w + j, representatives[j][i]);
    auto out = solve(A, z);
    if (!out.solution) return std::nullopt;
    Vec witness(out.solution->begin(), out.solution->begin() + w);
    Vec coords(out.solution->begin() + w, out.solution->end());
    return std::make_pair(std::move(witness), std::move(coords));
}

namespace {

CohomologyResult cohomology_q(const SparseMatrix& d_in, const SparseMatrix& d_out) {
    CohomologyResult res;
    res.ring = Ring::q();
    res.d_in = d_in;

    QReduction ker_red(d_out);
    auto ker = ker_red.kernel();

    // Eliminate [im-basis | kernel-basis]; kernel columns that add a new
    // pivot become the representatives.
    int n = d_in.rows();
    SparseMatrix W(n, d_in.cols() + (int)ker.size(), Ring::q());
    for (const auto& [r, row] : d_in.row_data())
        for (const auto& [c, v] : row) W.set(r, c, v);
    for (int j = 0; j < (int)ker.size(); ++j)
        for (int i = 0; i < n; ++i)
            if (ker[j][i] != 0) W.set(i, d_in.cols() + j, Scalar::constant(Ring::q(), ker[j][i]));
    QReduction wred(W);
    for (int c : wred.pivot_cols) {
        if (c < d_in.cols()) continue;
        res.representatives.push_back(from_q_vec(ker[c - d_in.cols()]));
    }
    res.ranks = {(int)res.representatives.size()};
    return res;
}

CohomologyResult cohomology_h(const SparseMatrix& d_in, const SparseMatrix& d_out) {
    const Ring ring = d_in.ring();
    const int N = ring.trunc;
    const int n = d_in.rows(); // dimension of the middle module over the ring

    SparseMatrix ein = expand_h_matrix(d_in);
    SparseMatrix eout = expand_h_matrix(d_out);
    CohomologyResult qres = cohomology_q(ein, eout);

    CohomologyResult res;
    res.ring = ring;
    res.d_in = d_in;
    for (const auto& rep : qres.representatives)
        res.representatives.push_back(fold_h_vec(rep, n, ring));

    // dim_Q (h^k ker + im)/im for each k; the filtration ranks are the
    // successive differences.
    QReduction kred(eout);
    auto ker = kred.kernel();
    int rank_im = rank_q(ein);
    auto shift_layers = [&](const std::vector<Rational>& v, int k) {
        std::vector<Rational> out(v.size(), Rational(0));
        int layers = N + 1;
        for (int layer = 0; layer + k < layers; ++layer)
            for (int i = 0; i < n; ++i) out[(layer + k) * n + i] = v[layer * n + i];
        return out;
    };
    std::vector<int> delta(N + 2, 0);
    for (int k = 0; k <= N; ++k) {
        SparseMatrix W(ein.rows(), ein.cols() + (int)ker.size(), Ring::q());
        for (const auto& [r, row] : ein.row_data())
            for (const auto& [c, v] : row) W.set(r, c, v);
        for (int j = 0; j < (int)ker.size(); ++j) {
            auto shifted_vec = shift_layers(ker[j], k);
            for (int i = 0; i < (int)shifted_vec.size(); ++i)
                if (shifted_vec[i] != 0)
                    W.set(i, ein.cols() + j, Scalar::constant(Ring::q(), shifted_vec[i]));
        }
        delta[k] = rank_q(W) - rank_im;
    }
    for (int k = 0; k <= N; ++k) res.ranks.push_back(delta[k] - delta[k + 1]);
    return res;
}

} // namespace

CohomologyResult cohomology(const SparseMatrix& d_in, const SparseMatrix& d_out) {
    if (d_in.ring() != d_out.ring()) throw InputError("ring mismatch between differentials");
    if (d_out.cols() != d_in.rows()) throw InputError("differential shapes do not compose");
    if (!d_out.times(d_in).is_zero()) throw InternalError("not a complex");
    return d_in.ring().is_q() ? cohomology_q(d_in, d_out) : cohomology_h(d_in, d_out);
}

} // namespace ainf
