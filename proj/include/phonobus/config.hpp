#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phonobus/coupling.hpp"
#include "phonobus/params.hpp"

namespace phonobus {

// Validated parameter bundle. Defaults reproduce the strong-coupling
// parameter set: one qubit at f_0 with g_0 = 113 MHz, Γ_sk = 0.4 MHz,
// placed at δ = λ_0/8, no modulation.
struct Config {
    DeviceParams device;
    std::vector<QubitSpec> qubits;
    DriveSpec drive;
    std::optional<SkyrmionMicroParams> skyrmion;

    static Config defaults();
    bool operator==(const Config&) const = default;
};

// Keys are the field names of DeviceParams at the top level, plus
// "qubits" (array of QubitSpec objects), "drive" ({A_z, f_d, n_max}) and
// "skyrmion" (SkyrmionMicroParams). Unknown keys are rejected. Throws
// ValidationError with the offending key path.
Config parse_config(const nlohmann::json& j);
Config load_config(const std::filesystem::path& path);

nlohmann::json to_json(const Config& config);
void save_config(const Config& config, const std::filesystem::path& path);

// Stable 64-bit FNV-1a hash of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const Config& config);
std::string fnv1a_hex(const std::string& bytes);

}  // namespace phonobus
