#include "phonobus/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>

#include "phonobus/error.hpp"

namespace phonobus {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& prefix) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError(prefix + it.key(), "unknown key");
}

double number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ValidationError(key, "must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(key, "must be finite");
    return v;
}

int integer(const json& j, const std::string& key) {
    if (!j.is_number_integer()) throw ValidationError(key, "must be an integer");
    return j.get<int>();
}

template <typename T>
void read(const json& obj, const char* name, T& out, const std::string& prefix = "") {
    auto it = obj.find(name);
    if (it == obj.end()) return;
    out = number(*it, prefix + name);
}

void read_opt(const json& obj, const char* name, std::optional<double>& out) {
    auto it = obj.find(name);
    if (it == obj.end()) return;
    out = number(*it, name);
}

const std::set<std::string> kDeviceKeys = {
    "v_s", "f_0", "L_c_in_wavelengths", "N_modes", "gamma_t", "gamma_d_coeff",
    "gamma_i_peak", "gamma_i_width_factor", "T_bath", "f_q_defaults", "position_phase",
    "N_g", "r_g", "W", "Lambda_g", "Lambda_i", "N_i"};
const std::set<std::string> kNestedKeys = {"qubits", "drive", "skyrmion"};
const std::set<std::string> kQubitKeys = {"label", "f_q", "delta", "g_0", "Gamma_sk", "d_gap"};
const std::set<std::string> kDriveKeys = {"A_z", "f_d", "n_max"};
const std::set<std::string> kSkyrmionKeys = {"S_bar", "a", "K_z", "H_z", "H_perp_x",
                                             "P_E", "J_1", "E_zp"};

QubitSpec default_qubit(const DeviceParams& d, const std::string& label, double f_q) {
    QubitSpec q;
    q.label = label;
    q.f_q = f_q;
    q.delta = d.lambda_0() / 8.0;
    return q;
}

}  // namespace

Config Config::defaults() {
    Config c;
    c.qubits.push_back(default_qubit(c.device, "q0", c.device.f_0));
    return c;
}

Config parse_config(const json& j) {
    if (!j.is_object()) throw ValidationError("<root>", "config must be a JSON object");
    std::set<std::string> allowed = kDeviceKeys;
    allowed.insert(kNestedKeys.begin(), kNestedKeys.end());
    reject_unknown(j, allowed, "");

    Config c;
    DeviceParams& d = c.device;
    read(j, "v_s", d.v_s);
    read(j, "f_0", d.f_0);
    read(j, "L_c_in_wavelengths", d.L_c_in_wavelengths);
    if (auto it = j.find("N_modes"); it != j.end()) d.N_modes = integer(*it, "N_modes");
    read(j, "gamma_t", d.gamma_t);
    read(j, "gamma_d_coeff", d.gamma_d_coeff);
    read(j, "gamma_i_peak", d.gamma_i_peak);
    read(j, "gamma_i_width_factor", d.gamma_i_width_factor);
    read(j, "T_bath", d.T_bath);
    if (auto it = j.find("f_q_defaults"); it != j.end()) {
        if (!it->is_array()) throw ValidationError("f_q_defaults", "must be an array");
        for (std::size_t i = 0; i < it->size(); ++i)
            d.f_q_defaults.push_back(number((*it)[i], "f_q_defaults[" + std::to_string(i) + "]"));
    }
    if (auto it = j.find("position_phase"); it != j.end()) {
        const std::string v = it->is_string() ? it->get<std::string>() : "";
        if (v == "center")
            d.position_phase = PositionPhase::Center;
        else if (v == "mode")
            d.position_phase = PositionPhase::Mode;
        else
            throw ValidationError("position_phase", "must be \"center\" or \"mode\"");
    }
    auto& g = d.geometry;
    read_opt(j, "N_g", g.N_g);
    read_opt(j, "r_g", g.r_g);
    read_opt(j, "W", g.W);
    read_opt(j, "Lambda_g", g.Lambda_g);
    read_opt(j, "Lambda_i", g.Lambda_i);
    read_opt(j, "N_i", g.N_i);
    validate(d);

    if (auto it = j.find("qubits"); it != j.end()) {
        if (!it->is_array() || it->empty())
            throw ValidationError("qubits", "must be a non-empty array");
        std::set<std::string> labels;
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& qj = (*it)[i];
            const std::string prefix = "qubits[" + std::to_string(i) + "]";
            if (!qj.is_object()) throw ValidationError(prefix, "must be an object");
            reject_unknown(qj, kQubitKeys, prefix + ".");
            QubitSpec q = default_qubit(d, "q" + std::to_string(i), d.f_0);
            if (auto l = qj.find("label"); l != qj.end()) {
                if (!l->is_string()) throw ValidationError(prefix + ".label", "must be a string");
                q.label = l->get<std::string>();
            }
            read(qj, "f_q", q.f_q, prefix + ".");
            read(qj, "delta", q.delta, prefix + ".");
            read(qj, "g_0", q.g_0, prefix + ".");
            read(qj, "Gamma_sk", q.Gamma_sk, prefix + ".");
            read(qj, "d_gap", q.d_gap, prefix + ".");
            validate(q, prefix);
            if (!labels.insert(q.label).second)
                throw ValidationError(prefix + ".label", "duplicate qubit label");
            c.qubits.push_back(q);
        }
    } else if (!d.f_q_defaults.empty()) {
        for (std::size_t i = 0; i < d.f_q_defaults.size(); ++i)
            c.qubits.push_back(default_qubit(d, "q" + std::to_string(i), d.f_q_defaults[i]));
    } else {
        c.qubits.push_back(default_qubit(d, "q0", d.f_0));
    }

    if (auto it = j.find("drive"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("drive", "must be an object");
        reject_unknown(*it, kDriveKeys, "drive.");
        double A_z = 0.0, f_d = 80.0e6;
        int n_max = -1;
        read(*it, "A_z", A_z, "drive.");
        read(*it, "f_d", f_d, "drive.");
        if (auto n = it->find("n_max"); n != it->end()) {
            n_max = integer(*n, "drive.n_max");
            if (n_max < 0) throw ValidationError("drive.n_max", "must be >= 0");
        }
        if (A_z < 0) throw ValidationError("drive.A_z", "must be >= 0");
        c.drive = DriveSpec(A_z, f_d, n_max);
    }

    if (auto it = j.find("skyrmion"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("skyrmion", "must be an object");
        reject_unknown(*it, kSkyrmionKeys, "skyrmion.");
        SkyrmionMicroParams s;
        read(*it, "S_bar", s.S_bar, "skyrmion.");
        read(*it, "a", s.a, "skyrmion.");
        read(*it, "K_z", s.K_z, "skyrmion.");
        read(*it, "H_z", s.H_z, "skyrmion.");
        read(*it, "H_perp_x", s.H_perp_x, "skyrmion.");
        read(*it, "P_E", s.P_E, "skyrmion.");
        read(*it, "J_1", s.J_1, "skyrmion.");
        read(*it, "E_zp", s.E_zp, "skyrmion.");
        c.skyrmion = s;
    }
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string(), "cannot open config file");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string(), std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const Config& c) {
    const DeviceParams& d = c.device;
    json j = {
        {"v_s", d.v_s},
        {"f_0", d.f_0},
        {"L_c_in_wavelengths", d.L_c_in_wavelengths},
        {"N_modes", d.N_modes},
        {"gamma_t", d.gamma_t},
        {"gamma_d_coeff", d.gamma_d_coeff},
        {"gamma_i_peak", d.gamma_i_peak},
        {"gamma_i_width_factor", d.gamma_i_width_factor},
        {"T_bath", d.T_bath},
        {"f_q_defaults", d.f_q_defaults},
        {"position_phase", d.position_phase == PositionPhase::Center ? "center" : "mode"},
    };
    const auto& g = d.geometry;
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) j[k] = *v;
    };
    put("N_g", g.N_g);
    put("r_g", g.r_g);
    put("W", g.W);
    put("Lambda_g", g.Lambda_g);
    put("Lambda_i", g.Lambda_i);
    put("N_i", g.N_i);
    json qs = json::array();
    for (const auto& q : c.qubits)
        qs.push_back({{"label", q.label}, {"f_q", q.f_q}, {"delta", q.delta}, {"g_0", q.g_0},
                      {"Gamma_sk", q.Gamma_sk}, {"d_gap", q.d_gap}});
    j["qubits"] = qs;
    j["drive"] = {{"A_z", c.drive.A_z()}, {"f_d", c.drive.f_d()}, {"n_max", c.drive.n_max()}};
    if (c.skyrmion) {
        const auto& s = *c.skyrmion;
        j["skyrmion"] = {{"S_bar", s.S_bar}, {"a", s.a}, {"K_z", s.K_z}, {"H_z", s.H_z},
                         {"H_perp_x", s.H_perp_x}, {"P_E", s.P_E}, {"J_1", s.J_1},
                         {"E_zp", s.E_zp}};
    }
    return j;
}

void save_config(const Config& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json(config).dump(2) << '\n';
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xf];
    return out;
}

std::string config_hash(const Config& config) { return fnv1a_hex(to_json(config).dump()); }

}  // namespace phonobus
