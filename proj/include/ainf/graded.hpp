#pragma once

// Finite free graded modules and homogeneous multilinear maps stored as
// sparse structure constants. Evaluation follows the Koszul convention
//   (f (x) g)(x (x) y) = (-1)^{deg g * deg x} f(x) (x) g(y),
// and the m_i <-> d_i dictionary between a module and its shift carries
// the sign (-1)^{i(i+1)/2 + (i-1)deg a_1 + ... + deg a_{i-1}}.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ainf/ring.hpp"

namespace ainf {

struct GradedModule {
    struct BasisElement {
        std::string name;
        int degree = 0;
    };

    std::vector<BasisElement> basis;

    GradedModule() = default;
    explicit GradedModule(std::vector<BasisElement> elems);

    int dim() const { return (int)basis.size(); }
    int degree(int i) const { return basis.at(i).degree; }
    const std::string& name(int i) const { return basis.at(i).name; }
    /// Index of a named basis element, or -1.
    int find(const std::string& name) const;

    bool operator==(const GradedModule& o) const;

private:
    std::map<std::string, int> index_;
};

using ModulePtr = std::shared_ptr<const GradedModule>;

ModulePtr make_module(std::vector<GradedModule::BasisElement> elems);

/// The shift M[1]: same basis names, each degree lowered by one
/// (M[1]^n = M^{n+1}).
ModulePtr shifted(const ModulePtr& m);

using Tuple = std::vector<int>;

int tuple_degree(const GradedModule& m, const Tuple& t);

/// Homogeneous multilinear map M^{(x)arity} -> N^{(x)coarity} of the given
/// internal degree, stored sparsely; absent entries are zero. Every stored
/// entry must satisfy sum(input degrees) + internal_degree = sum(output
/// degrees) exactly.
class MultiMap {
public:
    MultiMap(ModulePtr source, ModulePtr target, int arity, int internal_degree, Ring ring,
             int coarity = 1);

    const ModulePtr& source() const { return source_; }
    const ModulePtr& target() const { return target_; }
    int arity() const { return arity_; }
    int coarity() const { return coarity_; }
    int internal_degree() const { return degree_; }
    const Ring& ring() const { return ring_; }

    bool is_zero() const { return entries_.empty(); }
    int entry_count() const;

    /// Accumulate coeff onto (inputs -> outputs); checks index ranges and
    /// degree homogeneity, drops entries that cancel to zero.
    void add_entry(const Tuple& inputs, const Tuple& outputs, const Scalar& coeff);
    void add_entry(const Tuple& inputs, int output, const Scalar& coeff);

    const std::map<Tuple, std::map<Tuple, Scalar>>& entries() const { return entries_; }
    /// Value on a basis tuple (empty map when absent).
    const std::map<Tuple, Scalar>* evaluate(const Tuple& inputs) const;

    MultiMap operator-() const;
    MultiMap& operator+=(const MultiMap& o);
    friend MultiMap operator+(MultiMap a, const MultiMap& b) { return a += b; }
    friend MultiMap operator-(MultiMap a, const MultiMap& b) { return a += -b; }
    MultiMap scaled(const Scalar& c) const;
    bool operator==(const MultiMap& o) const;

    /// True when every entry coefficient has zero constant h-term (so the
    /// map carries a factor of h).
    bool divisible_by_h() const;
    /// Componentwise formal derivative of the coefficients.
    MultiMap d_dh_entries() const;
    /// Evaluate every coefficient at h = c, producing a map over Q.
    MultiMap specialized(const Rational& c) const;
    /// Multiply every coefficient by h^k.
    MultiMap shifted_h(int k) const;
    /// Re-ring the coefficients (constants may move between rings).
    MultiMap cast(Ring target) const;

private:
    ModulePtr source_, target_;
    int arity_, coarity_, degree_;
    Ring ring_;
    std::map<Tuple, std::map<Tuple, Scalar>> entries_;
};

/// Identity map of a module.
MultiMap identity_map(const ModulePtr& m, Ring ring);

/// m_i on A (internal degree 2-i) -> d_i on A[1] (internal degree 1), with
/// the sign quoted above. Involutive together with shift_from_bar.
MultiMap shift_to_bar(const MultiMap& m_i);

/// Inverse dictionary: d_i on A[1] -> m_i on A.
MultiMap shift_from_bar(const MultiMap& d_i, const ModulePtr& a);

/// A-infinity morphism components: f_i on A (internal degree 1-i) -> bar
/// component on A[1] (internal degree 0), pure-Koszul shift conventions
/// (the identity morphism maps to the identity).
MultiMap morphism_shift_to_bar(const MultiMap& f_i);
MultiMap morphism_shift_from_bar(const MultiMap& fbar_i, const ModulePtr& a,
                                 const ModulePtr& b);

/// The insertion 1^{(x)r} (x) f (x) 1^{(x)t} as a map into the matching
/// tensor power of f's target; passing f over the leading identity factors
/// costs (-1)^{deg f * (deg x_1 + ... + deg x_r)}.
MultiMap insert(const MultiMap& f, int r, int t);

/// outer o (inner_1 (x) ... (x) inner_k) with the Koszul passing signs;
/// the inners' coarities must add up to outer's arity.
MultiMap compose_multimaps(const MultiMap& outer, const std::vector<const MultiMap*>& inners);
MultiMap compose_multimaps(const MultiMap& outer, const std::vector<MultiMap>& inners);

} // namespace ainf
