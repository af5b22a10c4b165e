#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace awblstm {

/// Deterministic PRNG with named sub-streams.
///
/// All randomness in the project flows from a single master seed. A consumer
/// asks for a sub-stream by name ("init.word", "shuffle", "synth", ...), so
/// adding a new consumer never perturbs the draws seen by existing ones.
/// The generator is splitmix64-based and produces identical sequences on
/// every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derive an independent stream for `name` from `master_seed`.
    static Rng substream(std::uint64_t master_seed, const std::string& name);

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 bits of randomness.
    double uniform();

    /// Uniform in [lo, hi].
    double uniform(double lo, double hi);

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Standard normal via Box-Muller.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace awblstm
