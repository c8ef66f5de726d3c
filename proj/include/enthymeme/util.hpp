#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace enthymeme {

// splitmix64 finalizer. Used as the one hash/RNG primitive of the project so
// that every seeded computation is reproducible across platforms; the standard
// distributions are implementation-defined and are not used anywhere.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_bytes(std::string_view s, std::uint64_t seed = 0) {
    // FNV-1a folded through splitmix64.
    std::uint64_t h = 1469598103934665603ULL ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return splitmix64(h);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Deterministic RNG over a splitmix64 counter stream. All sampling in the
// project goes through this type.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in {0, ..., n-1}; n > 0.
    std::size_t next_index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = next_index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
};

inline Rng derive_rng(std::uint64_t seed, std::string_view key) {
    return Rng(hash_combine(seed, hash_bytes(key)));
}

std::string lowercase(std::string_view s);
bool is_word_char(char c);

// Lowercased alphanumeric word tokens; punctuation dropped. The shared
// tokenization for lexical features, ROUGE, and the task-model doubles.
std::vector<std::string> word_tokens(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Runs fn(i) for i in [0, n) on up to `jobs` threads; results land in index
// order so parallel runs produce identical output to sequential ones.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace enthymeme
