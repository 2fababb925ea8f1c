#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phonobus/config.hpp"
#include "phonobus/effective.hpp"
#include "phonobus/error.hpp"
#include "phonobus/experiments.hpp"
#include "phonobus/io.hpp"
#include "phonobus/protocol.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace phonobus;

namespace {

struct Options {
    std::string config_path;
    std::string out_dir = "results";
    bool svg = false;
    unsigned seed = 20240611;
};

Config load(const Options& o) {
    return o.config_path.empty() ? Config::defaults() : load_config(o.config_path);
}

void emit(const json& j, const Options& o, const std::string& name, bool out_given) {
    std::cout << j.dump(2) << '\n';
    if (out_given) {
        fs::create_directories(o.out_dir);
        std::ofstream(fs::path(o.out_dir) / name) << j.dump(2) << '\n';
    }
}

int cmd_params(const Options& o, std::optional<double> T, bool out_given) {
    const Config c = load(o);
    const double temp = T.value_or(c.device.T_bath);
    if (!(temp >= 0)) throw ValidationError("temperature", "must be >= 0");
    const ModeSet modes = derive_modes(c.device);
    json list = json::array();
    for (const auto& m : modes)
        list.push_back({{"m", m.index}, {"f_Hz", m.f}, {"k_per_m", m.k}, {"gamma_Hz", m.gamma},
                        {"n_th", thermal_occupation(m.f, temp)}});
    json j = {{"lambda_0_m", c.device.lambda_0()},
              {"cavity_length_m", c.device.cavity_length()},
              {"f_fsr_Hz", c.device.f_fsr()},
              {"temperature_K", temp},
              {"n_th_f0", thermal_occupation(c.device.f_0, temp)},
              {"N_modes", modes.size()},
              {"modes", list}};
    emit(j, o, "params.json", out_given);
    return 0;
}

int cmd_couplings(const Options& o, bool sideband, bool out_given) {
    const Config c = load(o);
    const ModeSet modes = derive_modes(c.device);
    const CouplingTable table = sideband ? sideband_table(c.qubits.at(0), modes, c.drive, c.device.position_phase)
                                         : static_couplings(c.qubits, modes, c.device.position_phase);
    table.write_csv(std::cout);
    if (out_given) {
        fs::create_directories(o.out_dir);
        std::ofstream os(fs::path(o.out_dir) / "couplings.csv", std::ios::binary);
        table.write_csv(os);
    }
    return 0;
}

int cmd_effective(const Options& o, const std::string& kind, int m, int m2, int n, bool out_given) {
    const Config c = load(o);
    const ModeSet modes = derive_modes(c.device);
    EffectiveOptions opt;
    opt.phase = c.device.position_phase;
    const QubitSpec& q = c.qubits.at(0);
    json j;
    if (kind == "qubit_mode") {
        const auto model = qubit_mode_effective(q, modes, c.drive, {{m, n}}, false, 0.0, opt.phase);
        const auto& r = model.resonances.at(0);
        j = {{"kind", kind}, {"qubit", model.qubit}, {"m", r.m}, {"n", r.n}, {"G_Hz", r.G},
             {"detuning_Hz", r.detuning}};
    } else if (kind == "phonon_phonon") {
        const auto model = phonon_phonon_effective(q, modes, c.drive, m, m2, opt);
        json chi = json::object();
        for (const auto& [mm, x] : model.chi) chi[std::to_string(mm)] = x;
        j = {{"kind", kind}, {"m", model.m}, {"m2", model.m2},
             {"order_difference", model.order_difference}, {"G_Hz", model.G},
             {"chi_Hz", chi}, {"residual_Hz", model.residual}, {"f_d_Hz", model.f_d}};
    } else if (kind == "qubit_qubit") {
        if (c.qubits.size() < 2) throw ValidationError("qubits", "qubit_qubit needs two qubits");
        const auto model = qubit_qubit_coupling(c.qubits[0], c.qubits[1], modes, opt);
        json parts = json::array();
        for (const auto& p : model.contributions)
            parts.push_back({{"m", p.m}, {"g_A_Hz", p.g_A}, {"g_B_Hz", p.g_B},
                             {"Delta_Hz", p.Delta}, {"G_Hz", p.G}});
        j = {{"kind", kind}, {"delta_A_Hz", model.delta_A}, {"delta_B_Hz", model.delta_B},
             {"G_AB_Hz", model.G_AB}, {"f_mean_Hz", model.f_mean}, {"contributions", parts}};
    } else {
        throw ValidationError("kind", "must be qubit_mode, phonon_phonon or qubit_qubit");
    }
    emit(j, o, "effective.json", out_given);
    return 0;
}

int cmd_matching(const Options& o, const std::string& kind, const std::vector<int>& targets,
                 int sideband, bool out_given) {
    const Config c = load(o);
    const ModeSet modes = derive_modes(c.device);
    MatchingKind k;
    if (kind == "qubit_mode_1") k = MatchingKind::QubitMode1;
    else if (kind == "qubit_mode_2") k = MatchingKind::QubitMode2;
    else if (kind == "phonon_phonon") k = MatchingKind::PhononPhonon;
    else throw ValidationError("kind", "must be qubit_mode_1, qubit_mode_2 or phonon_phonon");
    MatchingOptions opt;
    opt.sideband = sideband;
    opt.effective.phase = c.device.position_phase;
    const auto r = solve_matching(k, c.qubits.at(0), modes, targets, c.drive, opt);
    json j = {{"kind", kind}, {"targets", targets}, {"A_z_Hz", r.drive.A_z()},
              {"f_d_Hz", r.drive.f_d()}, {"ratio", r.drive.ratio()}, {"n_max", r.drive.n_max()},
              {"residual_Hz", r.residual}, {"iterations", r.iterations},
              {"order_difference", r.order_difference}};
    emit(j, o, "matching.json", out_given);
    return 0;
}

int cmd_simulate(const Options& o, const std::string& protocol_path) {
    const Config c = load(o);
    const Protocol p = load_protocol(protocol_path);
    const auto outcome = run_protocol(c, p);
    const auto files = write_protocol_outputs(outcome, o.out_dir);
    for (const auto& f : files) std::cout << (fs::path(o.out_dir) / f).string() << '\n';
    if (outcome.comparison)
        std::cout << "max deviation effective vs full: "
                  << io::format_double(outcome.comparison->max_deviation) << '\n';
    return 0;
}

int cmd_figure(const Options& o, int id) {
    const Config c = load(o);
    for (const auto& name : write_figure(id, c, o.out_dir, o.svg))
        std::cout << (fs::path(o.out_dir) / name).string() << '\n';
    return 0;
}

int cmd_accept(const Options& o, double scale, const std::vector<int>& only, const std::string& self) {
    const Config c = load(o);
    AcceptanceOptions opt;
    opt.tolerance_scale = scale;
    opt.seed = o.seed;
    opt.only = only;
    opt.cli_path = self;
    const auto report = run_acceptance(c, opt);
    for (const auto& cr : report.criteria)
        std::cout << (cr.pass ? "PASS" : "FAIL") << "  " << cr.id << "  " << cr.name << "  "
                  << cr.detail << '\n';
    std::cout << (report.overall_pass() ? "OVERALL PASS" : "OVERALL FAIL") << '\n';
    fs::create_directories(o.out_dir);
    std::ofstream(fs::path(o.out_dir) / "acceptance.json") << report.to_json().dump(2) << '\n';
    return report.overall_pass() ? 0 : 1;
}

std::string self_path(const char* argv0) {
    std::error_code ec;
    const auto p = fs::canonical("/proc/self/exe", ec);
    return ec ? std::string(argv0) : p.string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Skyrmion-qubit / SAW phonon bus simulator"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config_path, "JSON parameter file")->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out", o.out_dir, "output directory");
    app.add_flag("--svg", o.svg, "also write plot.svg");
    app.add_option("--seed", o.seed, "seed for randomized checks");

    std::optional<double> temperature;
    auto* params = app.add_subcommand("params", "derived modes, decay rates and thermal occupations");
    params->add_option("--temperature", temperature, "bath temperature in K");

    bool sideband = false;
    auto* couplings = app.add_subcommand("couplings", "static or sideband coupling table");
    couplings->add_flag("--sideband", sideband, "tabulate G_{m,n} for the first qubit and drive");

    std::string eff_kind = "qubit_mode";
    int eff_m = 0, eff_m2 = 2, eff_n = -1;
    auto* effective = app.add_subcommand("effective", "effective-model coefficients");
    effective->add_option("--kind", eff_kind, "qubit_mode | phonon_phonon | qubit_qubit");
    effective->add_option("--m", eff_m, "mode index");
    effective->add_option("--m2", eff_m2, "second mode index (phonon_phonon)");
    effective->add_option("--n", eff_n, "sideband order (qubit_mode)");

    std::string match_kind = "qubit_mode_1";
    std::vector<int> match_targets{0};
    int match_sideband = -1;
    auto* matching = app.add_subcommand("matching", "solve a frequency-matching condition");
    matching->add_option("--kind", match_kind, "qubit_mode_1 | qubit_mode_2 | phonon_phonon");
    matching->add_option("--targets", match_targets, "target mode indices")->delimiter(',');
    matching->add_option("--sideband", match_sideband, "sideband order n (qubit_mode_1)");

    std::string protocol_path;
    auto* simulate = app.add_subcommand("simulate", "run a master-equation protocol file");
    simulate->add_option("--protocol", protocol_path, "protocol JSON")->required()->check(CLI::ExistingFile);

    int figure_id = 0;
    auto* figure = app.add_subcommand("figure", "write the datasets of one figure");
    figure->add_option("id", figure_id, "figure number (2-5)")->required()->check(CLI::Range(2, 5));

    double scale = 1.0;
    std::vector<int> only;
    auto* accept = app.add_subcommand("accept", "run the acceptance criteria");
    accept->add_option("--tolerance-scale", scale, "multiply every tolerance band");
    accept->add_option("--only", only, "criterion ids")->delimiter(',');

    for (auto* sub : {params, couplings, effective, matching, simulate, figure, accept}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const bool out_given = out_opt->count() > 0;
    try {
        if (*params) return cmd_params(o, temperature, out_given);
        if (*couplings) return cmd_couplings(o, sideband, out_given);
        if (*effective) return cmd_effective(o, eff_kind, eff_m, eff_m2, eff_n, out_given);
        if (*matching) return cmd_matching(o, match_kind, match_targets, match_sideband, out_given);
        if (*simulate) return cmd_simulate(o, protocol_path);
        if (*figure) return cmd_figure(o, figure_id);
        if (*accept) return cmd_accept(o, scale, only, self_path(argv[0]));
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const json::exception& e) {
        std::cerr << "json error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
