#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace pic {

// One per CLI run: enough to reproduce the run and to check that a rerun
// reproduced it (content digests of every input and output file).
struct RunManifest {
    std::string command;            // argv, joined
    nlohmann::json config_snapshot; // secrets redacted
    uint64_t seed = 0;
    std::map<std::string, std::string> input_digests;  // path -> sha256
    std::map<std::string, std::string> output_digests; // path -> sha256
    double wall_clock_ms = 0.0;
    nlohmann::json telemetry; // gateway usage/cost snapshot

    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

// Atomic write of manifest.json; the manifest file itself is not listed in
// output_digests (it cannot contain its own hash).
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

} // namespace pic
