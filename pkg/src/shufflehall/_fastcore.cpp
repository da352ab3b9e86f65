// Packed-exponent sparse Laurent polynomial kernels.
//
// Exponent vectors (s, q2, z1..zk) are packed into an unsigned 128-bit key,
// 12 bits per slot, at most 10 slots.  Stored fields are kept non-negative
// by tracking a per-slot origin (the Laurent offset), so key addition is
// plain integer addition and never carries between fields as long as the
// per-slot width guard holds.  Terms live in an open-addressing hash table
// (linear probing, power-of-two capacity); cancelled entries keep their key
// with a zero value and are dropped at the next rebuild.
//
// Two coefficient types are exposed: Poly uses GMP rationals and IPoly uses
// overflow-checked 64-bit integers.  An IPoly operation that would overflow
// raises OverflowError, signalling the caller to redo the call with Poly.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace py = pybind11;

using u128 = unsigned __int128;

static constexpr int FIELD_BITS = 12;
static constexpr long FIELD_RAW = (1L << FIELD_BITS) - 1;
static constexpr long FIELD_MAX = FIELD_RAW - 1;  // the all-ones key stays free
static constexpr int MAX_SLOTS = 10;

// Safety valve for desk-scale use: any operation whose live term count would
// pass the ceiling aborts cleanly (mapped to MemoryError) instead of letting
// the process be OOM-killed mid-computation.  0 disables the guard.
static size_t g_term_ceiling = 50000000;

struct term_ceiling_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

static inline int shift_of(int nslots, int slot) {
    return FIELD_BITS * (nslots - 1 - slot);
}

static inline long field_of(u128 key, int nslots, int slot) {
    return (long)((key >> shift_of(nslots, slot)) & (u128)FIELD_RAW);
}

static inline size_t key_hash(u128 x) {
    uint64_t h = (uint64_t)x ^ ((uint64_t)(x >> 64) * 0x9e3779b97f4a7c15ULL);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return (size_t)h;
}

struct RatOps {
    using value = mpq_class;
    static bool is_zero(const value& v) { return v == 0; }
    static void add_into(value& a, const value& b) { a += b; }
    static void sub_into(value& a, const value& b) { a -= b; }
    static value mul(const value& a, const value& b) { return a * b; }
    static void mul_into(value& a, const value& b) { a *= b; }
    static value from_long(long v) { return value(v); }
    static value from_py(py::handle h) {
        value c(py::cast<std::string>(h), 10);
        c.canonicalize();
        return c;
    }
    static py::object to_py(const value& v) { return py::str(v.get_str()); }
};

struct IntOps {
    using value = int64_t;
    static bool is_zero(value v) { return v == 0; }
    static void add_into(value& a, value b) {
        if (__builtin_add_overflow(a, b, &a))
            throw std::overflow_error("int64 coefficient overflow");
    }
    static void sub_into(value& a, value b) {
        if (__builtin_sub_overflow(a, b, &a))
            throw std::overflow_error("int64 coefficient overflow");
    }
    static value mul(value a, value b) {
        value r;
        if (__builtin_mul_overflow(a, b, &r))
            throw std::overflow_error("int64 coefficient overflow");
        return r;
    }
    static void mul_into(value& a, value b) { a = mul(a, b); }
    static value from_long(long v) { return (value)v; }
    static value from_py(py::handle h) {
        int overflow = 0;
        long long v = PyLong_AsLongLongAndOverflow(h.ptr(), &overflow);
        if (overflow != 0 || (v == -1 && PyErr_Occurred())) {
            PyErr_Clear();
            throw std::overflow_error("int64 coefficient overflow");
        }
        return (value)v;
    }
    static py::object to_py(value v) { return py::int_(v); }
};

template <class Ops>
class FPoly {
  public:
    using C = typename Ops::value;
    static constexpr u128 EMPTY = ~(u128)0;

    int nslots;
    std::vector<long> origin;
    std::vector<long> maxf;
    std::vector<u128> keys;
    std::vector<C> vals;
    size_t filled = 0;  // occupied slots, including cancelled ones

    explicit FPoly(int ns) : nslots(ns), origin(ns, 0), maxf(ns, 0) {
        if (ns < 2 || ns > MAX_SLOTS)
            throw std::invalid_argument("slot count out of range");
    }

    size_t capacity() const { return keys.size(); }

    size_t live() const {
        size_t n = 0;
        for (size_t i = 0; i < keys.size(); i++)
            if (keys[i] != EMPTY && !Ops::is_zero(vals[i])) n++;
        return n;
    }

    bool is_zero() const {
        for (size_t i = 0; i < keys.size(); i++)
            if (keys[i] != EMPTY && !Ops::is_zero(vals[i])) return false;
        return true;
    }

    void clear() {
        std::vector<u128>().swap(keys);
        std::vector<C>().swap(vals);
        filled = 0;
        std::fill(maxf.begin(), maxf.end(), 0);
    }

    void reset() {  // keep capacity, forget content
        std::fill(keys.begin(), keys.end(), EMPTY);
        filled = 0;
    }

    void check_width(const std::vector<long>& add) const {
        for (int s = 0; s < nslots; s++)
            if (maxf[s] + add[s] > FIELD_MAX)
                throw std::runtime_error("packed exponent field overflow");
    }

    static void check_ceiling(size_t need) {
        if (g_term_ceiling && need > g_term_ceiling)
            throw term_ceiling_error(
                "term count " + std::to_string(need) +
                " exceeds resource ceiling " + std::to_string(g_term_ceiling));
    }

    void rebuild(size_t cap, u128 delta) {
        std::vector<u128> nkeys(cap, EMPTY);
        std::vector<C> nvals(cap);
        size_t mask = cap - 1;
        size_t n = 0;
        for (size_t i = 0; i < keys.size(); i++) {
            if (keys[i] == EMPTY || Ops::is_zero(vals[i])) continue;
            u128 key = keys[i] + delta;
            size_t j = key_hash(key) & mask;
            while (nkeys[j] != EMPTY) j = (j + 1) & mask;
            nkeys[j] = key;
            nvals[j] = std::move(vals[i]);
            n++;
        }
        keys.swap(nkeys);
        vals.swap(nvals);
        filled = n;
    }

    void reserve_for(size_t extra) {
        size_t need = filled + extra;
        check_ceiling(need);
        if (need * 8 <= capacity() * 5) return;
        size_t cap = 16;
        while (cap * 5 < need * 8) cap <<= 1;
        rebuild(cap, 0);
    }

    void insert_add(u128 key, C val) {
        if (Ops::is_zero(val)) return;
        if ((filled + 1) * 8 > capacity() * 5) {
            check_ceiling(filled + 1);
            rebuild(std::max<size_t>(16, capacity() * 2), 0);
        }
        size_t mask = capacity() - 1;
        size_t i = key_hash(key) & mask;
        while (keys[i] != EMPTY && keys[i] != key) i = (i + 1) & mask;
        if (keys[i] == EMPTY) {
            keys[i] = key;
            vals[i] = std::move(val);
            filled++;
        } else {
            Ops::add_into(vals[i], val);
        }
    }

    void insert_sub(u128 key, const C& val) {
        if (Ops::is_zero(val)) return;
        if ((filled + 1) * 8 > capacity() * 5) {
            check_ceiling(filled + 1);
            rebuild(std::max<size_t>(16, capacity() * 2), 0);
        }
        size_t mask = capacity() - 1;
        size_t i = key_hash(key) & mask;
        while (keys[i] != EMPTY && keys[i] != key) i = (i + 1) & mask;
        if (keys[i] == EMPTY) {
            keys[i] = key;
            vals[i] = Ops::mul(val, Ops::from_long(-1));
            filled++;
        } else {
            Ops::sub_into(vals[i], val);
        }
    }

    // Re-express with a lower per-slot origin.
    void lower_origin(const std::vector<long>& norg) {
        bool same = true;
        for (int s = 0; s < nslots; s++) {
            if (norg[s] > origin[s]) throw std::logic_error("origin can only be lowered");
            if (norg[s] != origin[s]) same = false;
        }
        if (same) return;
        if (is_zero()) {
            origin = norg;
            return;
        }
        std::vector<long> add(nslots);
        u128 delta = 0;
        for (int s = 0; s < nslots; s++) {
            add[s] = origin[s] - norg[s];
            delta = (delta << FIELD_BITS) | (u128)add[s];
        }
        check_width(add);
        rebuild(capacity(), delta);
        for (int s = 0; s < nslots; s++) {
            maxf[s] += add[s];
            origin[s] = norg[s];
        }
    }
};

template <class Ops>
static FPoly<Ops> fp_from_terms(int nslots, py::sequence data) {
    FPoly<Ops> p(nslots);
    size_t n = py::len(data);
    if (n == 0) return p;
    std::vector<std::vector<long>> exps;
    std::vector<typename Ops::value> cs;
    exps.reserve(n);
    cs.reserve(n);
    for (auto item : data) {
        py::sequence pair = py::cast<py::sequence>(item);
        py::sequence et = py::cast<py::sequence>(pair[0]);
        if ((int)py::len(et) != nslots)
            throw std::invalid_argument("exponent tuple length mismatch");
        std::vector<long> e(nslots);
        for (int s = 0; s < nslots; s++) e[s] = py::cast<long>(et[s]);
        exps.push_back(std::move(e));
        cs.push_back(Ops::from_py(pair[1]));
    }
    for (int s = 0; s < nslots; s++) {
        long lo = exps[0][s];
        for (auto& e : exps) lo = std::min(lo, e[s]);
        p.origin[s] = lo;
    }
    p.reserve_for(exps.size());
    for (size_t i = 0; i < exps.size(); i++) {
        u128 key = 0;
        for (int s = 0; s < nslots; s++) {
            long f = exps[i][s] - p.origin[s];
            if (f > FIELD_MAX) throw std::runtime_error("exponent spread too wide");
            p.maxf[s] = std::max(p.maxf[s], f);
            key = (key << FIELD_BITS) | (u128)f;
        }
        p.insert_add(key, std::move(cs[i]));
    }
    return p;
}

template <class Ops>
static py::list fp_to_terms(const FPoly<Ops>& p) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < p.keys.size(); i++)
        if (p.keys[i] != FPoly<Ops>::EMPTY && !Ops::is_zero(p.vals[i])) idx.push_back(i);
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return p.keys[a] > p.keys[b]; });
    py::list out;
    for (size_t i : idx) {
        py::tuple exps(p.nslots);
        for (int s = 0; s < p.nslots; s++)
            exps[s] = field_of(p.keys[i], p.nslots, s) + p.origin[s];
        out.append(py::make_tuple(exps, Ops::to_py(p.vals[i])));
    }
    return out;
}

template <class Ops>
static void fp_align(FPoly<Ops>& a, FPoly<Ops>& b) {
    std::vector<long> common(a.nslots);
    for (int s = 0; s < a.nslots; s++) common[s] = std::min(a.origin[s], b.origin[s]);
    a.lower_origin(common);
    b.lower_origin(common);
}

template <class Ops>
static void fp_iadd(FPoly<Ops>& a, FPoly<Ops>& b) {
    if (a.nslots != b.nslots) throw std::invalid_argument("slot count mismatch");
    fp_align(a, b);
    for (int s = 0; s < a.nslots; s++) a.maxf[s] = std::max(a.maxf[s], b.maxf[s]);
    a.reserve_for(b.filled);
    for (size_t i = 0; i < b.keys.size(); i++)
        if (b.keys[i] != FPoly<Ops>::EMPTY && !Ops::is_zero(b.vals[i]))
            a.insert_add(b.keys[i], b.vals[i]);
}

template <class Ops>
static void fp_isub(FPoly<Ops>& a, FPoly<Ops>& b) {
    if (a.nslots != b.nslots) throw std::invalid_argument("slot count mismatch");
    fp_align(a, b);
    for (int s = 0; s < a.nslots; s++) a.maxf[s] = std::max(a.maxf[s], b.maxf[s]);
    a.reserve_for(b.filled);
    for (size_t i = 0; i < b.keys.size(); i++)
        if (b.keys[i] != FPoly<Ops>::EMPTY && !Ops::is_zero(b.vals[i]))
            a.insert_sub(b.keys[i], b.vals[i]);
}

// Fresh a - b with the output table sized once; neither input is mutated.
template <class Ops>
static FPoly<Ops> fp_sub(const FPoly<Ops>& a, const FPoly<Ops>& b) {
    if (a.nslots != b.nslots) throw std::invalid_argument("slot count mismatch");
    FPoly<Ops> out(a.nslots);
    u128 da = 0, db = 0;
    for (int s = 0; s < a.nslots; s++) {
        long common = std::min(a.origin[s], b.origin[s]);
        long la = a.origin[s] - common, lb = b.origin[s] - common;
        out.origin[s] = common;
        out.maxf[s] = std::max(a.maxf[s] + la, b.maxf[s] + lb);
        if (out.maxf[s] > FIELD_MAX)
            throw std::runtime_error("packed exponent field overflow");
        da = (da << FIELD_BITS) | (u128)la;
        db = (db << FIELD_BITS) | (u128)lb;
    }
    out.reserve_for(a.filled + b.filled);
    for (size_t i = 0; i < a.keys.size(); i++)
        if (a.keys[i] != FPoly<Ops>::EMPTY && !Ops::is_zero(a.vals[i]))
            out.insert_add(a.keys[i] + da, a.vals[i]);
    for (size_t i = 0; i < b.keys.size(); i++)
        if (b.keys[i] != FPoly<Ops>::EMPTY && !Ops::is_zero(b.vals[i]))
            out.insert_sub(b.keys[i] + db, b.vals[i]);
    return out;
}

// s_zi(a) - a in one fresh table, where s_zi swaps z_zi and z_{zi+1}.
template <class Ops>
static FPoly<Ops> fp_swap_sub(const FPoly<Ops>& a, int zi) {
    int si = zi + 2, sj = zi + 3;
    if (zi < 0 || sj >= a.nslots) throw std::invalid_argument("swap slot out of range");
    std::vector<long> sorg(a.origin), smax(a.maxf);
    std::swap(sorg[si], sorg[sj]);
    std::swap(smax[si], smax[sj]);
    FPoly<Ops> out(a.nslots);
    u128 ds = 0, da = 0;
    for (int s = 0; s < a.nslots; s++) {
        long common = std::min(a.origin[s], sorg[s]);
        long ls = sorg[s] - common, la = a.origin[s] - common;
        out.origin[s] = common;
        out.maxf[s] = std::max(smax[s] + ls, a.maxf[s] + la);
        if (out.maxf[s] > FIELD_MAX)
            throw std::runtime_error("packed exponent field overflow");
        ds = (ds << FIELD_BITS) | (u128)ls;
        da = (da << FIELD_BITS) | (u128)la;
    }
    int shi = shift_of(a.nslots, si), shj = shift_of(a.nslots, sj);
    out.reserve_for(a.filled * 2);
    for (size_t i = 0; i < a.keys.size(); i++) {
        if (a.keys[i] == FPoly<Ops>::EMPTY || Ops::is_zero(a.vals[i])) continue;
        u128 key = a.keys[i];
        u128 fi = (key >> shi) & (u128)FIELD_RAW;
        u128 fj = (key >> shj) & (u128)FIELD_RAW;
        u128 swapped = key - (fi << shi) - (fj << shj) + (fj << shi) + (fi << shj);
        out.insert_add(swapped + ds, a.vals[i]);
        out.insert_sub(key + da, a.vals[i]);
    }
    return out;
}

template <class Ops>
static FPoly<Ops> fp_mul(const FPoly<Ops>& a, const FPoly<Ops>& b) {
    if (a.nslots != b.nslots) throw std::invalid_argument("slot count mismatch");
    FPoly<Ops> out(a.nslots);
    std::vector<long> add(a.nslots);
    for (int s = 0; s < a.nslots; s++) {
        out.origin[s] = a.origin[s] + b.origin[s];
        out.maxf[s] = a.maxf[s] + b.maxf[s];
        add[s] = b.maxf[s];
    }
    a.check_width(add);
    out.reserve_for(std::max(a.filled, b.filled) * 2);
    for (size_t i = 0; i < a.keys.size(); i++) {
        if (a.keys[i] == FPoly<Ops>::EMPTY || Ops::is_zero(a.vals[i])) continue;
        for (size_t j = 0; j < b.keys.size(); j++) {
            if (b.keys[j] == FPoly<Ops>::EMPTY || Ops::is_zero(b.vals[j])) continue;
            out.insert_add(a.keys[i] + b.keys[j], Ops::mul(a.vals[i], b.vals[j]));
        }
    }
    return out;
}

// acc += a * b without materializing the product separately.
template <class Ops>
static void fp_mul_add_into(FPoly<Ops>& acc, FPoly<Ops>& a, FPoly<Ops>& b) {
    if (a.nslots != b.nslots || acc.nslots != a.nslots)
        throw std::invalid_argument("slot count mismatch");
    std::vector<long> common(acc.nslots);
    for (int s = 0; s < acc.nslots; s++)
        common[s] = std::min(acc.origin[s], a.origin[s] + b.origin[s]);
    acc.lower_origin(common);
    u128 delta = 0;
    for (int s = 0; s < acc.nslots; s++) {
        long d = a.origin[s] + b.origin[s] - common[s];
        delta = (delta << FIELD_BITS) | (u128)d;
        acc.maxf[s] = std::max(acc.maxf[s], a.maxf[s] + b.maxf[s] + d);
        if (acc.maxf[s] > FIELD_MAX)
            throw std::runtime_error("packed exponent field overflow");
    }
    acc.reserve_for(std::max(a.filled, b.filled) * 2);
    for (size_t i = 0; i < a.keys.size(); i++) {
        if (a.keys[i] == FPoly<Ops>::EMPTY || Ops::is_zero(a.vals[i])) continue;
        for (size_t j = 0; j < b.keys.size(); j++) {
            if (b.keys[j] == FPoly<Ops>::EMPTY || Ops::is_zero(b.vals[j])) continue;
            acc.insert_add(a.keys[i] + b.keys[j] + delta, Ops::mul(a.vals[i], b.vals[j]));
        }
    }
}

// Multiply by the binomial z_i - s^se q2^qe z_j (0-based z slots).
template <class Ops>
static FPoly<Ops> fp_mul_binomial(const FPoly<Ops>& a, int zi, int zj, long se, long qe) {
    int si = zi + 2, sj = zj + 2;
    if (si >= a.nslots || sj >= a.nslots || zi < 0 || zj < 0)
        throw std::invalid_argument("binomial slot out of range");
    FPoly<Ops> out(a.nslots);
    std::vector<long> add(a.nslots, 0);
    add[si] = 1;
    add[0] = std::max(add[0], se);
    add[1] = std::max(add[1], qe);
    add[sj] = std::max(add[sj], 1L);
    a.check_width(add);
    out.origin = a.origin;
    for (int s = 0; s < a.nslots; s++) out.maxf[s] = a.maxf[s] + add[s];
    u128 ki = (u128)1 << shift_of(a.nslots, si);
    u128 kj = ((u128)1 << shift_of(a.nslots, sj)) +
              ((u128)se << shift_of(a.nslots, 0)) +
              ((u128)qe << shift_of(a.nslots, 1));
    out.reserve_for(a.filled * 2);
    for (size_t i = 0; i < a.keys.size(); i++) {
        if (a.keys[i] == FPoly<Ops>::EMPTY || Ops::is_zero(a.vals[i])) continue;
        out.insert_add(a.keys[i] + ki, a.vals[i]);
        out.insert_sub(a.keys[i] + kj, a.vals[i]);
    }
    return out;
}

// Exact division by z_i - s^se q2^qe z_j; throws if a remainder survives.
// With consume=true the input table is released as soon as its terms have
// been bucketed, halving the peak footprint of a divide-after-subtract.
template <class Ops>
static FPoly<Ops> fp_divexact_binomial(FPoly<Ops>& a, int zi, int zj, long se, long qe,
                                       bool consume) {
    int si = zi + 2, sj = zj + 2;
    if (si >= a.nslots || sj >= a.nslots || zi < 0 || zj < 0)
        throw std::invalid_argument("binomial slot out of range");
    FPoly<Ops> out(a.nslots);
    out.origin = a.origin;
    if (a.is_zero()) return out;
    long tmax = 0;
    for (size_t i = 0; i < a.keys.size(); i++)
        if (a.keys[i] != FPoly<Ops>::EMPTY && !Ops::is_zero(a.vals[i]))
            tmax = std::max(tmax, field_of(a.keys[i], a.nslots, si));
    size_t afilled = a.filled;
    std::vector<long> add(a.nslots, 0);
    add[0] = se * tmax;
    add[1] = qe * tmax;
    add[sj] = tmax;
    a.check_width(add);
    for (int s = 0; s < a.nslots; s++) out.maxf[s] = a.maxf[s] + add[s];
    std::vector<std::vector<std::pair<u128, typename Ops::value>>> buckets((size_t)tmax + 1);
    u128 mask_i = (u128)FIELD_RAW << shift_of(a.nslots, si);
    for (size_t i = 0; i < a.keys.size(); i++) {
        if (a.keys[i] == FPoly<Ops>::EMPTY || Ops::is_zero(a.vals[i])) continue;
        long t = field_of(a.keys[i], a.nslots, si);
        if (consume)
            buckets[(size_t)t].emplace_back(a.keys[i] & ~mask_i, std::move(a.vals[i]));
        else
            buckets[(size_t)t].emplace_back(a.keys[i] & ~mask_i, a.vals[i]);
    }
    if (consume) a.clear();
    u128 km = ((u128)1 << shift_of(a.nslots, sj)) +
              ((u128)se << shift_of(a.nslots, 0)) +
              ((u128)qe << shift_of(a.nslots, 1));
    out.reserve_for(afilled);
    // Horner from the top: Q_{t-1} = B_t + M * Q_t, remainder B_0 + M * Q_0.
    FPoly<Ops> scratch(a.nslots);
    std::vector<std::pair<u128, typename Ops::value>> carry;
    for (long t = tmax; t >= 1; t--) {
        scratch.reset();
        scratch.reserve_for(buckets[(size_t)t].size() + carry.size());
        for (auto& kv : buckets[(size_t)t]) scratch.insert_add(kv.first, std::move(kv.second));
        for (auto& kv : carry) scratch.insert_add(kv.first + km, std::move(kv.second));
        carry.clear();
        u128 zi_part = (u128)(t - 1) << shift_of(a.nslots, si);
        for (size_t i = 0; i < scratch.keys.size(); i++) {
            if (scratch.keys[i] == FPoly<Ops>::EMPTY || Ops::is_zero(scratch.vals[i]))
                continue;
            out.insert_add(scratch.keys[i] + zi_part, scratch.vals[i]);
            carry.emplace_back(scratch.keys[i], std::move(scratch.vals[i]));
        }
    }
    scratch.reset();
    scratch.reserve_for(buckets[0].size() + carry.size());
    for (auto& kv : buckets[0]) scratch.insert_add(kv.first, std::move(kv.second));
    for (auto& kv : carry) scratch.insert_add(kv.first + km, std::move(kv.second));
    if (!scratch.is_zero()) throw std::domain_error("binomial division is not exact");
    return out;
}

// Insert a fresh z slot at 0-based z index j (exponent zero everywhere).
template <class Ops>
static FPoly<Ops> fp_relabel_insert(const FPoly<Ops>& a, int j) {
    if (a.nslots + 1 > MAX_SLOTS) throw std::runtime_error("too many slots");
    int pos = j + 2;
    if (pos < 2 || pos > a.nslots) throw std::invalid_argument("bad insert position");
    FPoly<Ops> out(a.nslots + 1);
    for (int s = 0; s < pos; s++) {
        out.origin[s] = a.origin[s];
        out.maxf[s] = a.maxf[s];
    }
    out.origin[pos] = 0;
    out.maxf[pos] = 0;
    for (int s = pos; s < a.nslots; s++) {
        out.origin[s + 1] = a.origin[s];
        out.maxf[s + 1] = a.maxf[s];
    }
    int low_bits = FIELD_BITS * (a.nslots - pos);
    u128 low_mask = ((u128)1 << low_bits) - 1;
    out.reserve_for(a.filled);
    for (size_t i = 0; i < a.keys.size(); i++) {
        if (a.keys[i] == FPoly<Ops>::EMPTY || Ops::is_zero(a.vals[i])) continue;
        u128 high = a.keys[i] >> low_bits;
        u128 low = a.keys[i] & low_mask;
        out.insert_add((high << (low_bits + FIELD_BITS)) | low, a.vals[i]);
    }
    return out;
}

// Move z variables onto new slots: mapping[t] is the new 0-based z index of
// old z_t; the result has new_zvars z slots, untouched slots get exponent 0.
template <class Ops>
static FPoly<Ops> fp_relabel_map(const FPoly<Ops>& a, int new_zvars,
                                 const std::vector<int>& mapping) {
    int old_z = a.nslots - 2;
    if ((int)mapping.size() != old_z) throw std::invalid_argument("mapping length mismatch");
    if (new_zvars + 2 > MAX_SLOTS) throw std::runtime_error("too many slots");
    FPoly<Ops> out(new_zvars + 2);
    out.origin[0] = a.origin[0];
    out.origin[1] = a.origin[1];
    out.maxf[0] = a.maxf[0];
    out.maxf[1] = a.maxf[1];
    for (int t = 0; t < old_z; t++) {
        int nt = mapping[t];
        if (nt < 0 || nt >= new_zvars) throw std::invalid_argument("bad mapping target");
        out.origin[nt + 2] = a.origin[t + 2];
        out.maxf[nt + 2] = a.maxf[t + 2];
    }
    out.reserve_for(a.filled);
    for (size_t i = 0; i < a.keys.size(); i++) {
        if (a.keys[i] == FPoly<Ops>::EMPTY || Ops::is_zero(a.vals[i])) continue;
        u128 key = 0;
        key |= (u128)field_of(a.keys[i], a.nslots, 0) << shift_of(out.nslots, 0);
        key |= (u128)field_of(a.keys[i], a.nslots, 1) << shift_of(out.nslots, 1);
        for (int t = 0; t < old_z; t++)
            key |= (u128)field_of(a.keys[i], a.nslots, t + 2)
                   << shift_of(out.nslots, mapping[t] + 2);
        out.insert_add(key, a.vals[i]);
    }
    return out;
}

// acc += sign * relabeled(a); fused to avoid materializing the image.
template <class Ops>
static void fp_add_relabeled(FPoly<Ops>& acc, const FPoly<Ops>& a, int new_zvars,
                             const std::vector<int>& mapping, long sign) {
    if (acc.nslots != new_zvars + 2) throw std::invalid_argument("slot count mismatch");
    int old_z = a.nslots - 2;
    if ((int)mapping.size() != old_z) throw std::invalid_argument("mapping length mismatch");
    std::vector<long> aorg(acc.nslots, 0);
    std::vector<long> amax(acc.nslots, 0);
    aorg[0] = a.origin[0];
    aorg[1] = a.origin[1];
    amax[0] = a.maxf[0];
    amax[1] = a.maxf[1];
    for (int t = 0; t < old_z; t++) {
        int nt = mapping[t];
        if (nt < 0 || nt >= new_zvars) throw std::invalid_argument("bad mapping target");
        aorg[nt + 2] = a.origin[t + 2];
        amax[nt + 2] = a.maxf[t + 2];
    }
    std::vector<long> norg(acc.nslots);
    for (int s = 0; s < acc.nslots; s++) norg[s] = std::min(acc.origin[s], aorg[s]);
    acc.lower_origin(norg);
    u128 delta = 0;
    for (int s = 0; s < acc.nslots; s++) {
        long d = aorg[s] - norg[s];
        delta = (delta << FIELD_BITS) | (u128)d;
        acc.maxf[s] = std::max(acc.maxf[s], amax[s] + d);
        if (acc.maxf[s] > FIELD_MAX)
            throw std::runtime_error("packed exponent field overflow");
    }
    typename Ops::value sgn = Ops::from_long(sign);
    acc.reserve_for(a.filled);
    for (size_t i = 0; i < a.keys.size(); i++) {
        if (a.keys[i] == FPoly<Ops>::EMPTY || Ops::is_zero(a.vals[i])) continue;
        u128 key = 0;
        key |= (u128)field_of(a.keys[i], a.nslots, 0) << shift_of(acc.nslots, 0);
        key |= (u128)field_of(a.keys[i], a.nslots, 1) << shift_of(acc.nslots, 1);
        for (int t = 0; t < old_z; t++)
            key |= (u128)field_of(a.keys[i], a.nslots, t + 2)
                   << shift_of(acc.nslots, mapping[t] + 2);
        acc.insert_add(key + delta, Ops::mul(a.vals[i], sgn));
    }
}

template <class Ops>
static void fp_shift_ip(FPoly<Ops>& a, const std::vector<long>& delta) {
    if ((int)delta.size() != a.nslots) throw std::invalid_argument("delta length mismatch");
    for (int s = 0; s < a.nslots; s++) a.origin[s] += delta[s];
}

// Substitute z_t = s^smult[t] * q2^qmult[t] for every z slot, collapsing the
// result onto the two parameter slots.
template <class Ops>
static FPoly<Ops> fp_eval_powers(const FPoly<Ops>& a, const std::vector<long>& smult,
                                 const std::vector<long>& qmult) {
    int zk = a.nslots - 2;
    if ((int)smult.size() != zk || (int)qmult.size() != zk)
        throw std::invalid_argument("multiplier length mismatch");
    FPoly<Ops> out(2);
    long smin = 0, smax = 0, qmin = 0, qmax = 0;
    bool seen = false;
    for (size_t i = 0; i < a.keys.size(); i++) {
        if (a.keys[i] == FPoly<Ops>::EMPTY || Ops::is_zero(a.vals[i])) continue;
        long se = a.origin[0] + field_of(a.keys[i], a.nslots, 0);
        long qe = a.origin[1] + field_of(a.keys[i], a.nslots, 1);
        for (int t = 0; t < zk; t++) {
            long e = a.origin[t + 2] + field_of(a.keys[i], a.nslots, t + 2);
            se += smult[t] * e;
            qe += qmult[t] * e;
        }
        if (!seen || se < smin) smin = se;
        if (!seen || se > smax) smax = se;
        if (!seen || qe < qmin) qmin = qe;
        if (!seen || qe > qmax) qmax = qe;
        seen = true;
    }
    if (!seen) return out;
    if (smax - smin > FIELD_MAX || qmax - qmin > FIELD_MAX)
        throw std::runtime_error("packed exponent field overflow");
    out.origin[0] = smin;
    out.origin[1] = qmin;
    out.maxf[0] = smax - smin;
    out.maxf[1] = qmax - qmin;
    out.reserve_for(a.filled);
    for (size_t i = 0; i < a.keys.size(); i++) {
        if (a.keys[i] == FPoly<Ops>::EMPTY || Ops::is_zero(a.vals[i])) continue;
        long se = a.origin[0] + field_of(a.keys[i], a.nslots, 0);
        long qe = a.origin[1] + field_of(a.keys[i], a.nslots, 1);
        for (int t = 0; t < zk; t++) {
            long e = a.origin[t + 2] + field_of(a.keys[i], a.nslots, t + 2);
            se += smult[t] * e;
            qe += qmult[t] * e;
        }
        u128 key = ((u128)(se - smin) << FIELD_BITS) | (u128)(qe - qmin);
        out.insert_add(key, a.vals[i]);
    }
    return out;
}

template <class Ops>
static void fp_scale_ip(FPoly<Ops>& a, py::handle coeff) {
    typename Ops::value c = Ops::from_py(coeff);
    if (Ops::is_zero(c)) {
        a.clear();
        return;
    }
    for (size_t i = 0; i < a.keys.size(); i++)
        if (a.keys[i] != FPoly<Ops>::EMPTY && !Ops::is_zero(a.vals[i]))
            Ops::mul_into(a.vals[i], c);
}

template <class Ops>
static void bind_poly(py::module_& m, const char* name) {
    using P = FPoly<Ops>;
    py::class_<P>(m, name)
        .def(py::init<int>(), py::arg("nslots"))
        .def_static("from_terms", &fp_from_terms<Ops>, py::arg("nslots"), py::arg("terms"))
        .def("to_terms", &fp_to_terms<Ops>)
        .def("nterms", &P::live)
        .def("is_zero", &P::is_zero)
        .def("clear", &P::clear)
        .def_readonly("nslots", &P::nslots)
        .def("iadd", &fp_iadd<Ops>)
        .def("isub", &fp_isub<Ops>)
        .def("sub", &fp_sub<Ops>)
        .def("swap_sub", &fp_swap_sub<Ops>, py::arg("zi"))
        .def("copy", [](const P& a) { return a; })
        .def("capacity", &P::capacity)
        .def("eval_powers", &fp_eval_powers<Ops>, py::arg("s_mults"), py::arg("q2_mults"))
        .def("mul", &fp_mul<Ops>)
        .def("mul_add_into", &fp_mul_add_into<Ops>)
        .def("mul_binomial", &fp_mul_binomial<Ops>, py::arg("zi"), py::arg("zj"),
             py::arg("s_exp") = 0, py::arg("q2_exp") = 0)
        .def("divexact_binomial", &fp_divexact_binomial<Ops>, py::arg("zi"), py::arg("zj"),
             py::arg("s_exp") = 0, py::arg("q2_exp") = 0, py::arg("consume") = false)
        .def("relabel_insert", &fp_relabel_insert<Ops>, py::arg("j"))
        .def("relabel_map", &fp_relabel_map<Ops>, py::arg("new_zvars"), py::arg("mapping"))
        .def("add_relabeled", &fp_add_relabeled<Ops>, py::arg("other"), py::arg("new_zvars"),
             py::arg("mapping"), py::arg("sign"))
        .def("shift_ip", &fp_shift_ip<Ops>, py::arg("delta"))
        .def("scale_ip", &fp_scale_ip<Ops>, py::arg("coeff"));
}

PYBIND11_MODULE(_fastcore, m) {
    m.doc() = "packed-exponent sparse polynomial kernels";
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const term_ceiling_error& e) {
            PyErr_SetString(PyExc_MemoryError, e.what());
        }
    });
    m.def("set_term_ceiling", [](size_t n) { g_term_ceiling = n; },
          "Cap the live term count of any one table; 0 disables the guard.");
    m.def("get_term_ceiling", []() { return g_term_ceiling; });
    bind_poly<RatOps>(m, "Poly");
    bind_poly<IntOps>(m, "IPoly");
}
