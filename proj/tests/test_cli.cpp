#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "phonobus_cli_tests";

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliRun cli(const std::string& args) {
    fs::create_directories(kRoot);
    const fs::path out = kRoot / "stdout.txt", err = kRoot / "stderr.txt";
    const std::string cmd = std::string("\"") + PHONOBUS_CLI_PATH + "\" " + args + " >\"" +
                            out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_file(const std::string& name, const std::string& text) {
    fs::create_directories(kRoot);
    const fs::path p = kRoot / name;
    std::ofstream(p) << text;
    return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST(Cli, ParamsReportsModeComb) {
    const CliRun r = cli("params");
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["N_modes"], 11);
    EXPECT_NEAR(j["f_fsr_Hz"].get<double>(), 20e6, 1e-6);
    EXPECT_NEAR(j["lambda_0_m"].get<double>(), 994.75e-9, 1e-15);
    EXPECT_EQ(j["modes"].size(), 11u);

    const CliRun cold = cli("params --temperature 0.02");
    ASSERT_EQ(cold.code, 0) << cold.err;
    EXPECT_NEAR(json::parse(cold.out)["n_th_f0"].get<double>(), 6.8e-5, 0.1e-5);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("frobnicate").code, 2);
    EXPECT_EQ(cli("figure 9").code, 2);
    EXPECT_EQ(cli("--config /nonexistent/cfg.json params").code, 2);
    const fs::path bad = write_file("bad_modes.json", R"({"N_modes": 10})");
    const CliRun r = cli("--config \"" + bad.string() + "\" params");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("N_modes"), std::string::npos);
    const fs::path junk = write_file("junk.json", "{ not json");
    EXPECT_EQ(cli("--config \"" + junk.string() + "\" params").code, 2);
    // Qubit on resonance with mode 0 and no modulation: the dispersive guard trips.
    EXPECT_EQ(cli("effective --kind phonon_phonon --m 0 --m2 2").code, 3);
    EXPECT_EQ(cli("params --help").code, 0);
}

TEST(Cli, CouplingsAndMatching) {
    const CliRun c = cli("couplings");
    ASSERT_EQ(c.code, 0);
    EXPECT_EQ(c.out.substr(0, c.out.find('\n')), "qubit,m,n,G_Hz");

    const fs::path cfg = write_file("below.json", R"({"qubits": [{"f_q": 3.92e9}]})");
    const CliRun m = cli("--config \"" + cfg.string() + "\" matching --kind qubit_mode_1 --targets 0 --sideband 1");
    ASSERT_EQ(m.code, 0) << m.err;
    EXPECT_NEAR(json::parse(m.out)["f_d_Hz"].get<double>(), 80e6, 1e-3);
}

TEST(Cli, FigureTwoWritesThreePanels) {
    const fs::path out = kRoot / "fig2";
    fs::remove_all(out);
    const CliRun r = cli("--out \"" + out.string() + "\" --svg figure 2");
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* id : {"fig2a", "fig2b", "fig2c"}) {
        EXPECT_TRUE(fs::exists(out / id / "data.csv")) << id;
        EXPECT_TRUE(fs::exists(out / id / "meta.json")) << id;
        EXPECT_TRUE(fs::exists(out / id / "plot.svg")) << id;
    }
    const std::string first = slurp(out / "fig2c" / "data.csv");
    ASSERT_EQ(cli("--out \"" + out.string() + "\" figure 2").code, 0);
    EXPECT_EQ(slurp(out / "fig2c" / "data.csv"), first);
}

TEST(Cli, SimulateJaynesCummingsProtocol) {
    const fs::path cfg = write_file("jc.json", R"({"qubits": [{"f_q": 4.0e9, "delta": 0.0, "g_0": 1.0e6}]})");
    const fs::path proto = write_file("jc_protocol.json", R"({
        "hamiltonian": "full", "modes": [0], "fock_cutoff": 2,
        "initial": {"qubits": ["q0"]}, "t_span": [0.0, 2.0e-6], "samples": 101,
        "dissipation": false})");
    const fs::path out = kRoot / "jc_out";
    fs::remove_all(out);
    const CliRun r = cli("--config \"" + cfg.string() + "\" --out \"" + out.string() +
                      "\" simulate --protocol \"" + proto.string() + "\"");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(out / "full.csv");
    ASSERT_EQ(rows.size(), 102u);
    ASSERT_EQ(rows[0][0], "t_s");
    std::size_t pe = 0;
    for (std::size_t i = 0; i < rows[0].size(); ++i)
        if (rows[0][i] == "P_e:q0") pe = i;
    ASSERT_GT(pe, 0u);
    double worst = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double t = std::stod(rows[i][0]);
        const double c = std::cos(2.0 * std::acos(-1.0) * 1e6 * t);
        worst = std::max(worst, std::abs(std::stod(rows[i][pe]) - c * c));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(Cli, MalformedProtocolNamesTheKey) {
    const fs::path p1 = write_file("no_span.json", R"({"hamiltonian": "full"})");
    CliRun r = cli("simulate --protocol \"" + p1.string() + "\"");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("t_span"), std::string::npos);
    const fs::path p2 = write_file("bad_mode.json", R"({"t_span": [0, 1e-6], "initial": {"modes": {"x": 1}}})");
    r = cli("simulate --protocol \"" + p2.string() + "\"");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("initial.modes.x"), std::string::npos);
    const fs::path p3 = write_file("extra.json", R"({"t_span": [0, 1e-6], "speed": 3})");
    r = cli("simulate --protocol \"" + p3.string() + "\"");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("speed"), std::string::npos);
}
