#pragma once
// Shared primitives: error types, a self-contained deterministic RNG with
// named substreams, and small numeric helpers used across the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mentis {

// ---------------------------------------------------------------------------
// Errors

struct IllegalAction : std::runtime_error {
    explicit IllegalAction(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownLocation : std::runtime_error {
    explicit UnknownLocation(const std::string& what) : std::runtime_error(what) {}
};

struct UnreachableGoal : std::runtime_error {
    explicit UnreachableGoal(const std::string& what) : std::runtime_error(what) {}
};

struct InconsistentTrace : std::runtime_error {
    explicit InconsistentTrace(const std::string& what) : std::runtime_error(what) {}
};

struct UnresolvableCondition : std::runtime_error {
    explicit UnresolvableCondition(const std::string& what) : std::runtime_error(what) {}
};

struct ConstraintUnsatisfiable : std::runtime_error {
    explicit ConstraintUnsatisfiable(const std::string& what) : std::runtime_error(what) {}
};

struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownQuestionId : std::runtime_error {
    explicit UnknownQuestionId(const std::string& what) : std::runtime_error(what) {}
};

struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Deterministic RNG.
//
// splitmix64 core. Implemented here (rather than <random>) because sampling
// must be bit-identical across standard library implementations: emitted
// datasets and committed golden traces are compared byte-for-byte.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n). n must be > 0.
    std::size_t uniform(std::size_t n) {
        // Rejection sampling to avoid modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

    // Uniform double in [0, 1).
    double uniform_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform_real() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[uniform(items.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[uniform(i)]);
        }
    }

    // Index sampled from unnormalized non-negative weights.
    std::size_t weighted(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double r = uniform_real() * total;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0.0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

private:
    std::uint64_t state_;
};

// FNV-1a, used for substream derivation and content digests.
inline std::uint64_t fnv1a(const std::string& text, std::uint64_t h = 0xCBF29CE484222325ULL) {
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// All randomness flows from one root seed through named substreams, so each
// component can be regenerated independently of the others.
inline Rng substream(std::uint64_t root, const std::string& name, std::uint64_t index = 0) {
    std::uint64_t h = fnv1a(name, root ^ 0x9E3779B97F4A7C15ULL);
    h ^= index * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL;
    return Rng(h);
}

// ---------------------------------------------------------------------------
// Numerics

// Shannon entropy in nats; 0 * ln 0 taken as 0.
inline double entropy_nats(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p) {
        if (x > 0.0) h -= x * std::log(x);
    }
    return h;
}

// Boltzmann distribution over scores: p_i proportional to exp(beta * q_i).
// Max-subtraction keeps the result invariant under a shared shift of q.
inline std::vector<double> softmax(const std::vector<double>& q, double beta) {
    std::vector<double> p(q.size(), 0.0);
    if (q.empty()) return p;
    double m = q[0];
    for (double x : q) m = std::max(m, x);
    double z = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        p[i] = std::exp(beta * (q[i] - m));
        z += p[i];
    }
    for (double& x : p) x /= z;
    return p;
}

inline double log_sum_exp(const std::vector<double>& logs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : logs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : logs) s += std::exp(x - m);
    return m + std::log(s);
}

inline void normalize(std::vector<double>& p) {
    double z = 0.0;
    for (double x : p) z += x;
    if (z > 0.0) {
        for (double& x : p) x /= z;
    }
}

inline std::size_t argmax_index(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

inline std::size_t argmin_index(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] < v[best]) best = i;
    }
    return best;
}

}  // namespace mentis
