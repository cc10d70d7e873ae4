#pragma once

// A-infinity structures and morphisms together with the bar-side
// coderivation calculus. Structures and morphisms live on A with the
// paper-facing signs; coderivations and coalgebra morphisms live on A[1],
// where composition needs only the Koszul passing rule. Component-level
// composition is exact; exponentials, inverses and conjugation run on the
// truncated bar space T^{<=K} and are exact below the arity bound K.

#include <map>
#include <optional>
#include <vector>

#include "ainf/graded.hpp"
#include "ainf/linalg.hpp"

namespace ainf {

/// Finite family of structure maps m_i : A^{(x)i} -> A of internal degree
/// 2-i. m_1 absent or zero means the structure is minimal.
struct AInftyStructure {
    ModulePtr module;
    Ring ring;
    std::map<int, MultiMap> components;

    AInftyStructure(ModulePtr module, Ring ring);

    void set_component(MultiMap m_i);
    const MultiMap* component(int i) const;
    int max_arity() const;
    bool is_minimal() const;
    /// m_i = 0 for i != 2.
    bool is_associative_only() const;

    /// The same module with only the m_2 component (the paper's A(2)).
    AInftyStructure associative_truncation() const;
};

struct AInftyMorphism {
    AInftyStructure source, target;
    std::map<int, MultiMap> components; // f_i of internal degree 1-i

    AInftyMorphism(AInftyStructure source, AInftyStructure target);

    void set_component(MultiMap f_i);
    const MultiMap* component(int i) const;
    int max_arity() const;

    static AInftyMorphism identity(const AInftyStructure& a);
};

/// A coderivation of T^bar(A[1]) of homogeneous degree, determined by its
/// corestriction components d_i : A[1]^{(x)i} -> A[1].
struct Coderivation {
    ModulePtr module; // the bar-side module A[1]
    Ring ring;
    int degree = 0;
    std::map<int, MultiMap> components;

    Coderivation(ModulePtr module, Ring ring, int degree);

    void set_component(MultiMap d_i);
    const MultiMap* component(int i) const;
    int max_arity() const;
    bool is_zero() const;

    Coderivation operator-() const;
    Coderivation& operator+=(const Coderivation& o);
    friend Coderivation operator+(Coderivation a, const Coderivation& b) { return a += b; }
    friend Coderivation operator-(Coderivation a, const Coderivation& b) { return a += -b; }
    Coderivation scaled(const Scalar& c) const;
    bool operator==(const Coderivation& o) const;

    /// Drop components of arity > bound.
    Coderivation truncated(int arity_bound) const;
    /// The coefficient of h^k of every entry, as a coderivation over Q.
    Coderivation h_coefficient(int k) const;
    Coderivation cast(Ring target) const;
    Coderivation shifted_h(int k) const;
};

/// A degree-zero coalgebra morphism T^bar(A[1]) -> T^bar(B[1]), determined
/// by components f_i : A[1]^{(x)i} -> B[1] of internal degree 0.
struct CoalgebraMorphism {
    ModulePtr source_module, target_module; // bar-side modules
    Ring ring;
    std::map<int, MultiMap> components;

    CoalgebraMorphism(ModulePtr source_module, ModulePtr target_module, Ring ring);

    static CoalgebraMorphism identity(const ModulePtr& bar_module, Ring ring);

    void set_component(MultiMap f_i);
    const MultiMap* component(int i) const;
    int max_arity() const;
    bool is_identity_mod_h() const;

    CoalgebraMorphism cast(Ring target) const;
    /// Entrywise evaluation at h = c (a morphism over Q).
    CoalgebraMorphism specialized(const Rational& c) const;
};

// ---------------------------------------------------------------------------
// Exact component-level composition.

/// Components of C o D (composition of coderivations as endomorphisms of the
/// bar coalgebra); exact, supported in arities <= maxC + maxD - 1.
Coderivation coder_compose(const Coderivation& C, const Coderivation& D);

/// Graded commutator [C, D] = C o D - (-1)^{deg C deg D} D o C.
Coderivation coder_bracket(const Coderivation& C, const Coderivation& D);

/// Components of F o C (morphism after coderivation) and C o F.
Coderivation morphism_after_coder(const CoalgebraMorphism& F, const Coderivation& C);
Coderivation coder_after_morphism(const Coderivation& C, const CoalgebraMorphism& F);

/// Components of F o G; exact and finite for finite component families.
CoalgebraMorphism compose_coalgebra(const CoalgebraMorphism& F, const CoalgebraMorphism& G);

// ---------------------------------------------------------------------------
// Truncated bar space and matrix calculus.

/// Word basis of T^{<=K} A[1]: all tuples of length 1..K, ordered by length
/// then lexicographically.
struct BarSpace {
    ModulePtr module;
    int max_arity = 0;
    std::vector<Tuple> words;
    std::map<Tuple, int> index;

    BarSpace(ModulePtr module, int max_arity);
    int dim() const { return (int)words.size(); }
    int word_index(const Tuple& w) const;
};

SparseMatrix coder_matrix(const Coderivation& C, const BarSpace& bar);
SparseMatrix morphism_matrix(const CoalgebraMorphism& F, const BarSpace& src,
                             const BarSpace& tgt);
Coderivation corestrict_coderivation(const SparseMatrix& M, const BarSpace& bar, int degree,
                                     Ring ring);
CoalgebraMorphism corestrict_morphism(const SparseMatrix& M, const BarSpace& src,
                                      const BarSpace& tgt, Ring ring);

/// True when M is the matrix of the coalgebra morphism with M's own
/// corestriction components (the on-demand morphism-property check).
bool is_morphism_matrix(const SparseMatrix& M, const BarSpace& src, const BarSpace& tgt,
                        Ring ring);

// ---------------------------------------------------------------------------
// Structure / morphism <-> bar dictionaries.

/// The coderivation of degree 1 with components shift_to_bar(m_i).
Coderivation bar_of_structure(const AInftyStructure& a);
AInftyStructure structure_from_bar(const Coderivation& d, const ModulePtr& module);
CoalgebraMorphism bar_of_morphism(const AInftyMorphism& f);
AInftyMorphism morphism_from_bar(const CoalgebraMorphism& F, const AInftyStructure& source,
                                 const AInftyStructure& target);

// ---------------------------------------------------------------------------
// Identity checks.

struct IdentityViolation {
    int n = 0;          // which defining identity
    Tuple inputs;       // basis tuple where it fails
    std::map<Tuple, Scalar> defect;
};

/// Direct evaluation of the Stasheff identities
///   sum (-1)^{r+st} m_u(1^r (x) m_s (x) 1^t) = 0 for n <= n_max,
/// with Koszul passing signs on the unshifted module.
std::vector<IdentityViolation> check_stasheff(const AInftyStructure& a, int n_max);

/// The same condition routed through the bar construction: the coderivation
/// m satisfies m o m = 0 in arities <= n_max.
std::vector<IdentityViolation> stasheff_via_bar(const AInftyStructure& a, int n_max);

/// The A-infinity morphism identity for n <= n_max (paper-side signs
/// (-1)^{r+st} and (-1)^{(r-1)(i_1-1)+(r-2)(i_2-1)+...}).
std::vector<IdentityViolation> check_morphism(const AInftyMorphism& f, int n_max);

// ---------------------------------------------------------------------------
// Operations.

/// Bar-side composition g o f; exact (finite components).
AInftyMorphism compose_morphisms(const AInftyMorphism& g, const AInftyMorphism& f);

/// exp(g) restricted to arities <= arity_bound. Requires degree 0 and
/// either g_1 = 0 or every component divisible by h; otherwise errors with
/// "exp does not truncate".
CoalgebraMorphism exp_coderivation(const Coderivation& g, int arity_bound);

/// Inverse of an isomorphism (f_1 invertible) up to the arity bound.
CoalgebraMorphism coalgebra_inverse(const CoalgebraMorphism& f, int arity_bound);

/// f o c o f^{-1} up to the arity bound.
Coderivation conjugate(const CoalgebraMorphism& f, const Coderivation& c, int arity_bound);

} // namespace ainf
