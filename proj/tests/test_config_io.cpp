#include <clocale>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <locale>
#include <sstream>

#include <gtest/gtest.h>

#include "phonobus/config.hpp"
#include "phonobus/error.hpp"
#include "phonobus/io.hpp"

using namespace phonobus;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string error_key(const json& j) {
    try {
        parse_config(j);
    } catch (const ValidationError& e) {
        return e.key();
    }
    return {};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "phonobus_tests" / name;
    fs::create_directories(p.parent_path());
    return p;
}

}  // namespace

TEST(Config, Defaults) {
    const Config c = Config::defaults();
    ASSERT_EQ(c.qubits.size(), 1u);
    EXPECT_EQ(c.qubits[0].label, "q0");
    EXPECT_EQ(c.qubits[0].f_q, 4.0e9);
    EXPECT_EQ(c.qubits[0].g_0, 113.0e6);
    EXPECT_EQ(c.qubits[0].Gamma_sk, 0.4e6);
    EXPECT_NEAR(c.qubits[0].delta, c.device.lambda_0() / 8.0, 1e-20);
    EXPECT_EQ(c.device.N_modes, 11);
    EXPECT_EQ(c.device.T_bath, 0.01);
    EXPECT_EQ(c.drive.A_z(), 0.0);
    EXPECT_EQ(parse_config(json::object()), c);
}

TEST(Config, RoundTripThroughFile) {
    Config c = Config::defaults();
    c.device.T_bath = 0.1;
    c.device.position_phase = PositionPhase::Mode;
    c.device.geometry.N_g = 400;
    QubitSpec b = c.qubits[0];
    b.label = "qB";
    b.f_q = 3.1e9;
    b.d_gap = 1.1e-7;
    c.qubits.push_back(b);
    c.drive = DriveSpec(0.1 / 3.0 * 1e9, 8e7);
    c.skyrmion = SkyrmionMicroParams{};
    const fs::path path = scratch("roundtrip.json");
    save_config(c, path);
    const Config back = load_config(path);
    EXPECT_EQ(back, c);
    EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, FqDefaultsCreateQubits) {
    const Config c = parse_config(json{{"f_q_defaults", {3.9e9, 4.1e9}}});
    ASSERT_EQ(c.qubits.size(), 2u);
    EXPECT_EQ(c.qubits[1].label, "q1");
    EXPECT_EQ(c.qubits[1].f_q, 4.1e9);
}

TEST(Config, RejectsBadInputWithKeyPath) {
    EXPECT_EQ(error_key(json{{"bogus", 1}}), "bogus");
    EXPECT_EQ(error_key(json{{"N_modes", 10}}), "N_modes");
    EXPECT_EQ(error_key(json{{"N_modes", 10.5}}), "N_modes");
    EXPECT_EQ(error_key(json{{"v_s", "fast"}}), "v_s");
    EXPECT_EQ(error_key(json{{"position_phase", "edge"}}), "position_phase");
    EXPECT_EQ(error_key(json{{"qubits", json::array()}}), "qubits");
    EXPECT_EQ(error_key(json{{"qubits", {{{"g_0", -1.0}}}}}), "qubits[0].g_0");
    EXPECT_EQ(error_key(json{{"qubits", {{{"label", "a"}}, {{"colour", 1}}}}}), "qubits[1].colour");
    EXPECT_EQ(error_key(json{{"qubits", {{{"label", "a"}}, {{"label", "a"}}}}}), "qubits[1].label");
    EXPECT_EQ(error_key(json{{"drive", {{"A_z", -1.0}}}}), "drive.A_z");
    EXPECT_EQ(error_key(json{{"drive", {{"A_z", 5e8}, {"f_d", 1e8}, {"n_max", 3}}}}), "drive.n_max");
    EXPECT_EQ(error_key(json{{"skyrmion", {{"spin", 1}}}}), "skyrmion.spin");
    EXPECT_EQ(error_key(json::array()), "<root>");

    const fs::path bad = scratch("bad.json");
    std::ofstream(bad) << "{ \"v_s\": ";
    EXPECT_THROW(load_config(bad), ValidationError);
    EXPECT_THROW(load_config(scratch("missing.json")), ValidationError);
}

TEST(Config, HashIsStableAndSensitive) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
    const Config c = Config::defaults();
    const std::string h = config_hash(c);
    EXPECT_EQ(h.size(), 16u);
    EXPECT_EQ(h, config_hash(Config::defaults()));
    Config d = c;
    d.qubits[0].g_0 *= 1.0 + 1e-15;
    EXPECT_NE(config_hash(d), h);
}

TEST(Io, FormatDouble) {
    EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(io::format_double(1.0), "1");
    EXPECT_EQ(io::format_double(-2.5e-20), "-2.4999999999999999e-20");
    EXPECT_EQ(io::format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(io::format_double(-std::numeric_limits<double>::infinity()), "-inf");
    for (double x : {1.0 / 3.0, 79.81676e6, 2.2250738585072014e-308, 1e300, -0.0})
        EXPECT_EQ(std::strtod(io::format_double(x).c_str(), nullptr), x);
}

TEST(Io, FormatDoubleIgnoresLocale) {
    const char* names[] = {"de_DE.UTF-8", "de_DE.utf8", "fr_FR.UTF-8", "C.UTF-8"};
    const std::string before = std::setlocale(LC_ALL, nullptr);
    for (const char* n : names) {
        if (std::setlocale(LC_ALL, n)) break;
    }
    EXPECT_EQ(io::format_double(1234.5), "1234.5");
    std::setlocale(LC_ALL, before.c_str());
}

TEST(Io, CsvWriter) {
    std::ostringstream os;
    io::CsvWriter w(os);
    w.header({"a", "b"});
    w.row({0.5, 1e-3});
    w.row({std::nan(""), 2.0});
    EXPECT_EQ(os.str(), "a,b\n0.5,0.001\nnan,2\n");
}

TEST(Io, Svg) {
    const std::string line = io::svg_line_plot("t", "x", "y", {{"s", {0, 1, 2}, {1, 0, 1}}});
    EXPECT_EQ(line.rfind("<svg", 0), 0u);
    EXPECT_NE(line.find("</svg>"), std::string::npos);
    EXPECT_NE(line.find("<polyline"), std::string::npos);
    const std::string heat = io::svg_heatmap("h", "x", "y", {0, 1}, {0, 1}, {{0, 1}, {2, 3}}, {{0.5, 0.5}});
    EXPECT_NE(heat.find("<rect"), std::string::npos);
    EXPECT_NE(heat.find("<circle"), std::string::npos);
}
