#include "pic/manifest.hpp"

#include "pic/util.hpp"

namespace pic {

void RunManifest::add_input(const std::filesystem::path& path) {
    input_digests[path.string()] = sha256_file_hex(path);
}

void RunManifest::add_output(const std::filesystem::path& path) {
    output_digests[path.string()] = sha256_file_hex(path);
}

nlohmann::json RunManifest::to_json() const {
    return nlohmann::json{{"command", command},
                          {"config", config_snapshot},
                          {"seed", seed},
                          {"inputs", input_digests},
                          {"outputs", output_digests},
                          {"wall_clock_ms", wall_clock_ms},
                          {"telemetry", telemetry}};
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    atomic_write_file(path, manifest.to_json().dump(2) + "\n");
}

} // namespace pic
