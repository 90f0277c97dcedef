#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace pic {

using json = nlohmann::json;

// ---------- strings ----------

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);
std::vector<std::string> split_lines(std::string_view s);
std::vector<std::string> split_ws_tokens(std::string_view s);
size_t count_words(std::string_view s);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

// ---------- hashing / rng ----------

uint64_t fnv1a64(std::string_view s);
uint64_t splitmix64(uint64_t x);

// Stable per-sample stream: mixes a global seed with a sample identifier.
uint64_t derive_seed(uint64_t seed, std::string_view sample_id);

// Deterministic xorshift-based generator used wherever reproducibility is
// contractual. std::mt19937_64 distributions vary across standard libraries;
// this one does not.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x9e3779b97f4a7c15ull)) {}
    uint64_t next();
    // Uniform over [0, n). n must be > 0.
    size_t index(size_t n);
    // Uniform over [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi);
    double real01();

private:
    uint64_t state_;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);

// ---------- files ----------

std::string read_file(const std::filesystem::path& path);
// Writes via temp file + rename so readers never observe partial content.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

// One json value per non-empty line; malformed lines raise InputError with
// the 1-based line number.
std::vector<json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);

// ---------- parallelism ----------

// Runs fn(i) for i in [0, n) on up to max_threads workers. Results are the
// caller's business (write into a pre-sized vector by index). The first
// exception, by lowest index, is rethrown after all workers drain.
void parallel_for_indexed(size_t n, size_t max_threads, const std::function<void(size_t)>& fn);

// ---------- numerics ----------

// Numerically stable logistic; sigmoid(0) == 0.5 exactly.
double sigmoid(double x);

double mean_of(const std::vector<double>& v);

} // namespace pic
