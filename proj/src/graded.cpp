#include "ainf/graded.hpp"

#include <algorithm>
#include <sstream>

namespace ainf {

GradedModule::GradedModule(std::vector<BasisElement> elems) : basis(std::move(elems)) {
    for (int i = 0; i < (int)basis.size(); ++i) {
        if (basis[i].name.empty()) throw InputError("basis element with empty name");
        if (!index_.emplace(basis[i].name, i).second)
            throw InputError("duplicate basis name: " + basis[i].name);
    }
}

int GradedModule::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

bool GradedModule::operator==(const GradedModule& o) const {
    if (basis.size() != o.basis.size()) return false;
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (basis[i].name != o.basis[i].name || basis[i].degree != o.basis[i].degree)
            return false;
    return true;
}

ModulePtr make_module(std::vector<GradedModule::BasisElement> elems) {
    return std::make_shared<GradedModule>(std::move(elems));
}

ModulePtr shifted(const ModulePtr& m) {
    std::vector<GradedModule::BasisElement> elems = m->basis;
    for (auto& e : elems) e.degree -= 1;
    return make_module(std::move(elems));
}

int tuple_degree(const GradedModule& m, const Tuple& t) {
    int d = 0;
    for (int i : t) d += m.degree(i);
    return d;
}

static bool same_module(const ModulePtr& a, const ModulePtr& b) {
    return a == b || *a == *b;
}

MultiMap::MultiMap(ModulePtr source, ModulePtr target, int arity, int internal_degree,
                   Ring ring, int coarity)
    : source_(std::move(source)), target_(std::move(target)), arity_(arity),
      coarity_(coarity), degree_(internal_degree), ring_(ring) {
    if (!source_ || !target_) throw InputError("multimap needs source and target modules");
    if (arity_ < 1) throw InputError("multimap arity must be >= 1");
    if (coarity_ < 1) throw InputError("multimap coarity must be >= 1");
}

int MultiMap::entry_count() const {
    int n = 0;
    for (const auto& [in, outs] : entries_) n += (int)outs.size();
    return n;
}

void MultiMap::add_entry(const Tuple& inputs, const Tuple& outputs, const Scalar& coeff) {
    if ((int)inputs.size() != arity_) throw InputError("entry input tuple has wrong length");
    if ((int)outputs.size() != coarity_) throw InputError("entry output tuple has wrong length");
    if (coeff.ring() != ring_) throw InputError("ring mismatch in multimap entry");
    for (int i : inputs)
        if (i < 0 || i >= source_->dim()) throw InputError("entry input index out of range");
    for (int o : outputs)
        if (o < 0 || o >= target_->dim()) throw InputError("entry output index out of range");
    int din = tuple_degree(*source_, inputs);
    int dout = tuple_degree(*target_, outputs);
    if (din + degree_ != dout) {
        std::ostringstream os;
        os << "entry violates degree homogeneity: " << din << " + (" << degree_
           << ") != " << dout;
        throw InputError(os.str());
    }
    if (coeff.is_zero()) return;
    auto& slot = entries_[inputs][outputs];
    if (slot.ring() != ring_) slot = Scalar::zero(ring_);
    slot += coeff;
    if (slot.is_zero()) {
        entries_[inputs].erase(outputs);
        if (entries_[inputs].empty()) entries_.erase(inputs);
    }
}

void MultiMap::add_entry(const Tuple& inputs, int output, const Scalar& coeff) {
    add_entry(inputs, Tuple{output}, coeff);
}

const std::map<Tuple, Scalar>* MultiMap::evaluate(const Tuple& inputs) const {
    auto it = entries_.find(inputs);
    return it == entries_.end() ? nullptr : &it->second;
}

MultiMap MultiMap::operator-() const {
    MultiMap r(source_, target_, arity_, degree_, ring_, coarity_);
    for (const auto& [in, outs] : entries_)
        for (const auto& [out, c] : outs) r.entries_[in][out] = -c;
    return r;
}

MultiMap& MultiMap::operator+=(const MultiMap& o) {
    if (!same_module(source_, o.source_) || !same_module(target_, o.target_) ||
        arity_ != o.arity_ || coarity_ != o.coarity_ || degree_ != o.degree_ ||
        ring_ != o.ring_)
        throw InputError("cannot add incompatible multimaps");
    for (const auto& [in, outs] : o.entries_)
        for (const auto& [out, c] : outs) add_entry(in, out, c);
    return *this;
}

MultiMap MultiMap::scaled(const Scalar& c) const {
    MultiMap r(source_, target_, arity_, degree_, ring_, coarity_);
    if (c.is_zero()) return r;
    for (const auto& [in, outs] : entries_)
        for (const auto& [out, e] : outs) r.add_entry(in, out, e * c);
    return r;
}

bool MultiMap::operator==(const MultiMap& o) const {
    return same_module(source_, o.source_) && same_module(target_, o.target_) &&
           arity_ == o.arity_ && coarity_ == o.coarity_ && degree_ == o.degree_ &&
           ring_ == o.ring_ && entries_ == o.entries_;
}

bool MultiMap::divisible_by_h() const {
    for (const auto& [in, outs] : entries_)
        for (const auto& [out, c] : outs)
            if (c.coeff(0) != 0) return false;
    return true;
}

MultiMap MultiMap::d_dh_entries() const {
    MultiMap r(source_, target_, arity_, degree_, ring_, coarity_);
    for (const auto& [in, outs] : entries_)
        for (const auto& [out, c] : outs) r.add_entry(in, out, d_dh(c));
    return r;
}

MultiMap MultiMap::specialized(const Rational& c) const {
    MultiMap r(source_, target_, arity_, degree_, Ring::q(), coarity_);
    for (const auto& [in, outs] : entries_)
        for (const auto& [out, e] : outs)
            r.add_entry(in, out, Scalar::constant(Ring::q(), specialize(e, c)));
    return r;
}

MultiMap MultiMap::shifted_h(int k) const {
    MultiMap r(source_, target_, arity_, degree_, ring_, coarity_);
    for (const auto& [in, outs] : entries_)
        for (const auto& [out, e] : outs) r.add_entry(in, out, e.shift_h(k));
    return r;
}

MultiMap MultiMap::cast(Ring target) const {
    MultiMap r(source_, target_, arity_, degree_, target, coarity_);
    for (const auto& [in, outs] : entries_)
        for (const auto& [out, e] : outs) r.add_entry(in, out, e.cast(target));
    return r;
}

MultiMap identity_map(const ModulePtr& m, Ring ring) {
    MultiMap id(m, m, 1, 0, ring);
    for (int i = 0; i < m->dim(); ++i) id.add_entry({i}, i, Scalar::one(ring));
    return id;
}

namespace {

int parity(long n) { return (int)(((n % 2) + 2) % 2); }

// Sign exponent of the m <-> d dictionary:
// i(i+1)/2 + (i-1)deg(a_1) + (i-2)deg(a_2) + ... + deg(a_{i-1}),
// degrees taken on the unshifted module.
int shift_sign_exponent(const GradedModule& a, const Tuple& inputs) {
    long i = (long)inputs.size();
    long n = i * (i + 1) / 2;
    for (long j = 0; j + 1 < i; ++j) n += (i - 1 - j) * a.degree(inputs[j]);
    return parity(n);
}

// Pure-Koszul shift exponent for morphism components:
// i(i-1)/2 + (i-1)deg(a_1) + ... + deg(a_{i-1}).
int morphism_shift_sign_exponent(const GradedModule& a, const Tuple& inputs) {
    long i = (long)inputs.size();
    long n = i * (i - 1) / 2;
    for (long j = 0; j + 1 < i; ++j) n += (i - 1 - j) * a.degree(inputs[j]);
    return parity(n);
}

Scalar signed_coeff(const Scalar& c, int exponent) {
    return exponent % 2 ? -c : c;
}

} // namespace

MultiMap shift_to_bar(const MultiMap& m_i) {
    if (m_i.coarity() != 1 || !(*m_i.source() == *m_i.target()))
        throw InputError("shift_to_bar expects an endomorphism-type map");
    int i = m_i.arity();
    if (m_i.internal_degree() != 2 - i) throw InputError("not an m-component");
    ModulePtr bar = shifted(m_i.source());
    MultiMap d(bar, bar, i, 1, m_i.ring());
    for (const auto& [in, outs] : m_i.entries()) {
        int e = shift_sign_exponent(*m_i.source(), in);
        for (const auto& [out, c] : outs) d.add_entry(in, out, signed_coeff(c, e));
    }
    return d;
}

MultiMap shift_from_bar(const MultiMap& d_i, const ModulePtr& a) {
    if (d_i.coarity() != 1 || !(*d_i.source() == *d_i.target()))
        throw InputError("shift_from_bar expects an endomorphism-type map");
    int i = d_i.arity();
    if (d_i.internal_degree() != 1) throw InputError("not a bar-side structure component");
    if (!(*shifted(a) == *d_i.source()))
        throw InputError("module does not match the bar-side map");
    MultiMap m(a, a, i, 2 - i, d_i.ring());
    for (const auto& [in, outs] : d_i.entries()) {
        int e = shift_sign_exponent(*a, in);
        for (const auto& [out, c] : outs) m.add_entry(in, out, signed_coeff(c, e));
    }
    return m;
}

MultiMap morphism_shift_to_bar(const MultiMap& f_i) {
    if (f_i.coarity() != 1) throw InputError("morphism components have coarity 1");
    int i = f_i.arity();
    if (f_i.internal_degree() != 1 - i) throw InputError("not an f-component");
    MultiMap b(shifted(f_i.source()), shifted(f_i.target()), i, 0, f_i.ring());
    for (const auto& [in, outs] : f_i.entries()) {
        int e = morphism_shift_sign_exponent(*f_i.source(), in);
        for (const auto& [out, c] : outs) b.add_entry(in, out, signed_coeff(c, e));
    }
    return b;
}

MultiMap morphism_shift_from_bar(const MultiMap& fbar_i, const ModulePtr& a,
                                 const ModulePtr& b) {
    if (fbar_i.coarity() != 1) throw InputError("morphism components have coarity 1");
    int i = fbar_i.arity();
    if (fbar_i.internal_degree() != 0) throw InputError("bar-side morphism components have degree 0");
    if (!(*shifted(a) == *fbar_i.source()) || !(*shifted(b) == *fbar_i.target()))
        throw InputError("modules do not match the bar-side morphism component");
    MultiMap f(a, b, i, 1 - i, fbar_i.ring());
    for (const auto& [in, outs] : fbar_i.entries()) {
        int e = morphism_shift_sign_exponent(*a, in);
        for (const auto& [out, c] : outs) f.add_entry(in, out, signed_coeff(c, e));
    }
    return f;
}

MultiMap insert(const MultiMap& f, int r, int t) {
    if (r < 0 || t < 0) throw InputError("insertion offsets must be >= 0");
    if (r == 0 && t == 0) return f;
    if (!(*f.source() == *f.target()))
        throw InputError("insertion with identity factors needs source == target");
    const ModulePtr& m = f.source();
    int dim = m->dim();
    MultiMap result(m, m, r + f.arity() + t, f.internal_degree(), f.ring(),
                    r + f.coarity() + t);
    // Enumerate all prefix/suffix fillings of the identity slots.
    std::vector<Tuple> fillings(1);
    for (int k = 0; k < r + t; ++k) {
        std::vector<Tuple> next;
        for (const auto& base : fillings)
            for (int i = 0; i < dim; ++i) {
                Tuple ext = base;
                ext.push_back(i);
                next.push_back(std::move(ext));
            }
        fillings = std::move(next);
    }
    for (const auto& fill : fillings) {
        Tuple prefix(fill.begin(), fill.begin() + r);
        Tuple suffix(fill.begin() + r, fill.end());
        int pass = parity((long)f.internal_degree() * tuple_degree(*m, prefix));
        for (const auto& [in, outs] : f.entries()) {
            Tuple inputs = prefix;
            inputs.insert(inputs.end(), in.begin(), in.end());
            inputs.insert(inputs.end(), suffix.begin(), suffix.end());
            for (const auto& [out, c] : outs) {
                Tuple outputs = prefix;
                outputs.insert(outputs.end(), out.begin(), out.end());
                outputs.insert(outputs.end(), suffix.begin(), suffix.end());
                result.add_entry(inputs, outputs, signed_coeff(c, pass));
            }
        }
    }
    return result;
}

MultiMap compose_multimaps(const MultiMap& outer, const std::vector<const MultiMap*>& inners) {
    if (inners.empty()) throw InputError("composition needs at least one inner map");
    int total_arity = 0, total_coarity = 0, inner_degree = 0;
    for (const MultiMap* f : inners) {
        if (!same_module(f->source(), inners[0]->source()))
            throw InputError("inner maps must share their source module");
        if (!same_module(f->target(), outer.source()))
            throw InputError("inner targets must match the outer source");
        if (f->ring() != outer.ring()) throw InputError("ring mismatch in composition");
        total_arity += f->arity();
        total_coarity += f->coarity();
        inner_degree += f->internal_degree();
    }
    if (total_coarity != outer.arity())
        throw InputError("inner coarities do not add up to the outer arity");

    const GradedModule& src = *inners[0]->source();
    MultiMap result(inners[0]->source(), outer.target(), total_arity,
                    outer.internal_degree() + inner_degree, outer.ring(), outer.coarity());

    // Walk the Cartesian product of the inners' entries; the sign for block j
    // is (-1)^{deg f_j * (degree of all inputs consumed by blocks < j)}.
    struct Frame {
        Tuple inputs, mids;
        Scalar coeff;
        int degree_before = 0;
    };
    std::vector<Frame> partial{{Tuple{}, Tuple{}, Scalar::one(outer.ring()), 0}};
    for (const MultiMap* f : inners) {
        std::vector<Frame> next;
        for (const auto& p : partial) {
            int pass = parity((long)f->internal_degree() * p.degree_before);
            for (const auto& [in, outs] : f->entries()) {
                int din = tuple_degree(src, in);
                for (const auto& [out, c] : outs) {
                    Frame nf;
                    nf.inputs = p.inputs;
                    nf.inputs.insert(nf.inputs.end(), in.begin(), in.end());
                    nf.mids = p.mids;
                    nf.mids.insert(nf.mids.end(), out.begin(), out.end());
                    nf.coeff = p.coeff * signed_coeff(c, pass);
                    nf.degree_before = p.degree_before + din;
                    next.push_back(std::move(nf));
                }
            }
        }
        partial = std::move(next);
    }
    for (const auto& p : partial) {
        const auto* vals = outer.evaluate(p.mids);
        if (!vals) continue;
        for (const auto& [out, c] : *vals) result.add_entry(p.inputs, out, p.coeff * c);
    }
    return result;
}

MultiMap compose_multimaps(const MultiMap& outer, const std::vector<MultiMap>& inners) {
    std::vector<const MultiMap*> ptrs;
    ptrs.reserve(inners.size());
    for (const auto& f : inners) ptrs.push_back(&f);
    return compose_multimaps(outer, ptrs);
}

} // namespace ainf
