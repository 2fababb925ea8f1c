#include "phonobus/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "phonobus/bessel.hpp"
#include "phonobus/error.hpp"
#include "phonobus/io.hpp"

#ifndef PHONOBUS_VERSION
#define PHONOBUS_VERSION "0.0.0"
#endif

namespace phonobus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string mode_column(const char* prefix, int m) {
    return std::string(prefix) + "_m" + std::to_string(m);
}

}  // namespace

void SweepSpec::validate() const {
    for (const auto& axis : axes) {
        const std::string key = "axes." + axis.name;
        if (axis.values.empty()) throw ValidationError(key, "grid must not be empty");
        if (axis.values.size() < 2) continue;
        const bool up = axis.values[1] > axis.values[0];
        for (std::size_t i = 1; i < axis.values.size(); ++i) {
            const double d = axis.values[i] - axis.values[i - 1];
            if (!(up ? d > 0 : d < 0)) throw ValidationError(key, "grid must be strictly monotone");
        }
    }
}

void Dataset::write_csv(std::ostream& os) const {
    io::CsvWriter csv(os);
    csv.header(spec.columns);
    for (const auto& r : rows) csv.row(r);
}

json Dataset::meta() const {
    json grids = json::object();
    for (const auto& a : spec.axes) grids[a.name] = a.values;
    return {{"figure_id", spec.figure_id},
            {"config_hash", config_hash(spec.fixed)},
            {"config", to_json(spec.fixed)},
            {"grids", grids},
            {"columns", spec.columns},
            {"rows", rows.size()},
            {"version", PHONOBUS_VERSION},
            {"notes", notes}};
}

unsigned sweep_threads() {
    if (const char* env = std::getenv("PHONOBUS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job) {
    const std::size_t workers = std::min<std::size_t>(sweep_threads(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i)
        v[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
    if (!(a > 0 && b > 0)) throw DomainError("logspace endpoints must be positive");
    auto e = linspace(std::log(a), std::log(b), n);
    for (std::size_t i = 0; i < n; ++i) e[i] = i == 0 ? a : (i + 1 == n ? b : std::exp(e[i]));
    return e;
}

// ---------------------------------------------------------------------------

Fig2Data fig2_sweep(const Config& config, std::size_t points) {
    const DeviceParams& dev = config.device;
    const ModeSet modes = derive_modes(dev);
    const double lambda0 = dev.lambda_0();
    const PositionPhase phase = dev.position_phase;
    QubitSpec q = config.qubits.at(0);

    Fig2Data out;
    {
        Dataset& d = out.couplings_vs_position;
        d.spec.figure_id = "fig2a";
        d.spec.fixed = config;
        d.spec.axes = {{"delta_m", linspace(-lambda0, lambda0, points)}};
        d.spec.columns = {"delta_m", "delta_over_lambda0"};
        std::vector<int> shown;
        for (int m = -2; m <= 2; ++m)
            if (modes.contains(m)) {
                shown.push_back(m);
                d.spec.columns.push_back(mode_column("g_Hz", m));
            }
        for (double delta : d.spec.axes[0].values) {
            QubitSpec qq = q;
            qq.delta = delta;
            std::vector<double> row{delta, delta / lambda0};
            for (int m : shown)
                row.push_back(qubit_mode_coupling(qq, modes.by_index(m), modes.k_0(), phase));
            d.rows.push_back(std::move(row));
        }
    }
    {
        Dataset& d = out.ratios;
        d.spec.figure_id = "fig2b";
        q.delta = lambda0 / 8.0;
        Config fixed = config;
        fixed.qubits.at(0) = q;
        d.spec.fixed = fixed;
        std::vector<double> ms;
        for (const auto& mode : modes)
            if (std::abs(mode.index) <= 5) ms.push_back(mode.index);
        d.spec.axes = {{"m", ms}};
        d.spec.columns = {"m", "f_Hz", "g_Hz", "Gamma_sk_Hz", "gamma_Hz",
                          "g_over_Gamma_sk", "g_over_gamma", "cooperativity"};
        for (double mv : ms) {
            const Mode& mode = modes.by_index(static_cast<int>(mv));
            const double g = qubit_mode_coupling(q, mode, modes.k_0(), phase);
            d.rows.push_back({mv, mode.f, g, q.Gamma_sk, mode.gamma, std::abs(g) / q.Gamma_sk,
                              std::abs(g) / mode.gamma, g * g / (q.Gamma_sk * mode.gamma)});
        }
    }
    {
        Dataset& d = out.thermal;
        d.spec.figure_id = "fig2c";
        d.spec.fixed = config;
        d.spec.axes = {{"T_K", logspace(0.01, 1.0, points)}};
        d.spec.columns = {"T_K"};
        for (const auto& mode : modes) d.spec.columns.push_back(mode_column("n_th", mode.index));
        for (double T : d.spec.axes[0].values) {
            std::vector<double> row{T};
            for (const auto& mode : modes) row.push_back(thermal_occupation(mode.f, T));
            d.rows.push_back(std::move(row));
        }
    }
    out.couplings_vs_position.spec.validate();
    out.ratios.spec.validate();
    out.thermal.spec.validate();
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Simulation {
    HilbertSpace space;
    HamiltonianSpec full;
    std::vector<Dissipator> dissipators;
};

Simulation build_simulation(const std::vector<QubitSpec>& qubits, const ModeSet& modes,
                            const DeviceParams& dev, const std::optional<DriveSpec>& drive,
                            int fock_cutoff, std::optional<int> cap) {
    HilbertSpace space(make_layout(qubits, modes), fock_cutoff, cap);
    auto full = assemble_full_hamiltonian(qubits, modes, static_couplings(qubits, modes, dev.position_phase),
                                          drive, Frame::RotatingAtF0);
    auto diss = thermal_dissipators(space, qubits, modes, dev.T_bath);
    return {std::move(space), std::move(full), std::move(diss)};
}

std::vector<int> initial_occupation(const HilbertSpace& space, int qubit_site, int mode_site) {
    std::vector<int> occ(space.layout().size(), 0);
    if (qubit_site >= 0) occ[qubit_site] = 1;
    if (mode_site >= 0) occ[mode_site] = 1;
    return occ;
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

AccessResult fig3_protocol(const Config& config, AccessMode mode, const AccessBundle& bundle) {
    const auto start = Clock::now();
    AccessResult res;
    res.mode = mode;
    const DeviceParams& dev = config.device;
    const ModeSet all = derive_modes(dev);
    res.modes = all.select(bundle.modes);
    const ModeSet& modes = res.modes;
    const double f0 = dev.f_0;

    QubitSpec q = config.qubits.at(0);
    q.delta = bundle.delta;
    q.d_gap = (mode == AccessMode::TwoMode ? bundle.pair_gap_k0d : bundle.gap_k0d) / modes.k_0();
    q.f_q = f0 + bundle.qubit_offset;
    if (mode == AccessMode::TwoMode)
        q.f_q = 0.5 * (modes.by_index(bundle.pair.first).f + modes.by_index(bundle.pair.second).f);

    std::vector<int> targets;
    std::vector<std::pair<int, int>> resonances;
    MatchingOptions mopt;
    mopt.effective.phase = dev.position_phase;
    if (mode == AccessMode::TwoMode) {
        const int a = std::min(bundle.pair.first, bundle.pair.second);
        const int b = std::max(bundle.pair.first, bundle.pair.second);
        targets = {a, b};
        resonances = {{a, -1}, {b, +1}};
        res.matching = solve_matching(MatchingKind::QubitMode2, q, modes, targets,
                                      DriveSpec(bundle.drive_ratio * 80e6, 80e6), mopt);
    } else {
        targets = {bundle.target};
        resonances = {{bundle.target, -1}};
        const double guess = std::abs(q.f_q - modes.by_index(bundle.target).f);
        res.matching = solve_matching(MatchingKind::QubitMode1, q, modes, targets,
                                      DriveSpec(bundle.drive_ratio * guess, guess), mopt);
    }
    const double g = qubit_mode_coupling(q, modes.by_index(targets[0]), modes.k_0(), dev.position_phase);
    res.G_expected = std::abs(g * bessel_j(1, bundle.drive_ratio));
    if (!(res.G_expected > 0)) throw DomainError("target mode is decoupled at this position");

    DriveSpec drive = res.matching.drive;
    if (mode == AccessMode::Detuned)
        drive = DriveSpec(drive.A_z(), drive.f_d() + bundle.detune_factor * res.G_expected);

    res.bundle = config;
    res.bundle.qubits = {q};
    res.bundle.drive = drive;

    Simulation sim = build_simulation({q}, modes, dev, drive, bundle.fock_cutoff, bundle.max_excitations);
    const HilbertSpace& space = sim.space;
    const auto rho0 = DensityState::pure(space.basis_vector(initial_occupation(space, 0, -1)));

    // Population oscillation frequency: 2|G| for one mode, 2√2|G| for the
    // bright superposition of two.
    const double collective = mode == AccessMode::TwoMode ? std::sqrt(2.0) : 1.0;
    const double f_pop = 2.0 * collective * res.G_expected;
    const double t_end = bundle.periods / f_pop;
    EvolveOptions eopt;
    eopt.samples = bundle.samples;

    if (mode == AccessMode::Detuned) {
        LindbladGenerator gen(space, sim.full, sim.dissipators);
        res.sim = evolve(gen, rho0, 0.0, t_end, default_observables(space), eopt);
    } else {
        auto eff_model = qubit_mode_effective(q, modes, drive, resonances, false, 0.0, dev.position_phase);
        auto eff = build_effective_hamiltonian(eff_model, space.layout());
        auto report = compare_effective_vs_full(space, eff, sim.full, sim.dissipators, rho0, t_end,
                                                "n:" + std::to_string(targets[0]), 4.0 * f_pop, eopt);
        res.sim = report.full;
        res.comparison = std::move(report);
    }

    const auto& t = res.sim.times;
    const auto& pe = res.sim.at("P_e:" + q.label);
    res.rabi_fit = frequency_from_fit(t, pe, 0.25 * f_pop, 4.0 * f_pop);
    res.rabi_crossings = frequency_from_crossings(t, pe);

    std::vector<double> target_sum(t.size(), 0.0), leak(t.size(), 0.0);
    for (const auto& m : modes) {
        const auto& n = res.sim.at("n:" + std::to_string(m.index));
        const bool is_target = std::find(targets.begin(), targets.end(), m.index) != targets.end();
        auto& acc = is_target ? target_sum : leak;
        for (std::size_t i = 0; i < t.size(); ++i) acc[i] += n[i];
    }
    // Averaging over one drive period removes the fast off-resonant micromotion.
    const double dt = t.size() > 1 ? t[1] - t[0] : 0.0;
    const std::size_t window =
        dt > 0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(1.0 / (drive.f_d() * dt)))) : 1;
    double envelope = 0.0;
    for (std::size_t i = 0; i + window <= target_sum.size(); ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < window; ++k) acc += target_sum[i + k];
        envelope = std::max(envelope, acc / static_cast<double>(window));
    }
    res.peak_target = envelope;
    res.leakage = max_of(leak);
    if (mode == AccessMode::TwoMode) {
        // Sample nearest to the first full transfer into the bright mode.
        const double tq = 1.0 / (4.0 * collective * res.G_expected);
        const auto it = std::lower_bound(t.begin(), t.end(), tq);
        const std::size_t i = std::min<std::size_t>(it - t.begin(), t.size() - 1);
        res.quarter_period_a = res.sim.at("n:" + std::to_string(targets[0]))[i];
        res.quarter_period_b = res.sim.at("n:" + std::to_string(targets[1]))[i];
    }
    res.runtime_s = seconds_since(start);
    return res;
}

// ---------------------------------------------------------------------------

PhononResult fig4_sweep(const Config& config, const PhononBundle& bundle, bool run_swap) {
    const auto start = Clock::now();
    PhononResult res;
    const DeviceParams& dev = config.device;
    const ModeSet modes = derive_modes(dev);
    QubitSpec q = config.qubits.at(0);
    q.f_q = dev.f_0 + bundle.qubit_offset;
    EffectiveOptions eopt;
    eopt.phase = dev.position_phase;

    res.bundle = config;
    res.bundle.qubits = {q};

    // fig4a map over (A_z/f_d, f_d).
    Dataset& map = res.map;
    map.spec.figure_id = "fig4a";
    map.spec.axes = {{"ratio", bundle.ratio_grid}, {"f_d_Hz", bundle.f_d_grid}};
    map.spec.columns = {"ratio", "f_d_Hz", "G_Hz", "chi_diff_Hz", "residual_Hz"};
    map.spec.validate();
    const std::size_t nr = bundle.ratio_grid.size(), nf = bundle.f_d_grid.size();
    map.rows.assign(nr * nf, {});
    const Mode& a = modes.by_index(bundle.m);
    const Mode& b = modes.by_index(bundle.m2);
    parallel_for(nr * nf, [&](std::size_t k) {
        const double ratio = bundle.ratio_grid[k / nf];
        const double f_d = bundle.f_d_grid[k % nf];
        const DriveSpec drive(ratio * f_d, f_d);
        const int order = static_cast<int>(std::lround((b.f - a.f) / f_d));
        double G = NAN, chi_diff = NAN, residual = NAN;
        try {
            const double ca = chi_shift(q, modes, drive, bundle.m, eopt);
            const double cb = chi_shift(q, modes, drive, bundle.m2, eopt);
            G = phonon_phonon_coupling(q, modes, drive, bundle.m, bundle.m2, order, eopt);
            chi_diff = ca - cb;
            residual = order * f_d + (a.f + ca) - (b.f + cb);
        } catch (const NearResonanceError&) {
        }
        map.rows[k] = {ratio, f_d, G, chi_diff, residual};
    });
    // Matching locus: per ratio, the sign change of the residual along f_d.
    json locus = json::array();
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = 0; j + 1 < nf; ++j) {
            const double r0 = map.rows[i * nf + j][4], r1 = map.rows[i * nf + j + 1][4];
            if (!std::isfinite(r0) || !std::isfinite(r1) || (r0 > 0) == (r1 > 0)) continue;
            // Reject sign flips across a pole of χ.
            if (std::abs(r0 - r1) > 0.5 * modes.f_fsr()) continue;
            const double f0_ = bundle.f_d_grid[j], f1_ = bundle.f_d_grid[j + 1];
            locus.push_back({bundle.ratio_grid[i], f0_ + (f1_ - f0_) * r0 / (r0 - r1)});
        }
    }
    map.notes["locus"] = locus;

    MatchingOptions mopt;
    mopt.effective = eopt;
    res.matching = solve_matching(MatchingKind::PhononPhonon, q, modes, {bundle.m, bundle.m2},
                                  DriveSpec(bundle.drive_ratio * bundle.f_d_guess, bundle.f_d_guess), mopt);
    // χ is reported for the two modes being swapped.
    res.model = phonon_phonon_effective(q, modes.select({bundle.m, bundle.m2}), res.matching.drive,
                                        bundle.m, bundle.m2, eopt);
    res.bundle.drive = res.matching.drive;
    map.spec.fixed = res.bundle;
    map.notes["solved"] = {{"ratio", res.matching.drive.ratio()},
                           {"f_d_Hz", res.matching.drive.f_d()},
                           {"G_Hz", res.model.G},
                           {"residual_Hz", res.matching.residual}};
    res.predicted_swap_time = 1.0 / (4.0 * std::abs(res.model.G));
    res.sweep_runtime_s = seconds_since(start);

    if (run_swap) {
        const ModeSet swap_modes = modes.select(bundle.swap_modes);
        Simulation sim = build_simulation({q}, swap_modes, dev, res.matching.drive,
                                          bundle.fock_cutoff, bundle.max_excitations);
        const int src = sim.full.mode_site(bundle.m);
        const auto rho0 = DensityState::pure(sim.space.basis_vector(initial_occupation(sim.space, -1, src)));
        EvolveOptions e;
        e.samples = bundle.samples;
        LindbladGenerator gen(sim.space, sim.full, sim.dissipators);
        const double t_end = bundle.swap_periods / (2.0 * std::abs(res.model.G));
        res.sim = evolve(gen, rho0, 0.0, t_end, default_observables(sim.space), e);
        const auto& n2 = res.sim.at("n:" + std::to_string(bundle.m2));
        const auto it = std::max_element(n2.begin(), n2.end());
        res.peak_transfer = *it;
        res.peak_time = res.sim.times[it - n2.begin()];
    }
    res.runtime_s = seconds_since(start);
    return res;
}

// ---------------------------------------------------------------------------

QubitPairResult fig5_sweep(const Config& config, const QubitPairBundle& bundle) {
    QubitPairResult res;
    const DeviceParams& dev = config.device;
    const ModeSet all = derive_modes(dev);
    const double lambda0 = dev.lambda_0();
    EffectiveOptions eopt;
    eopt.phase = dev.position_phase;

    QubitSpec qA = config.qubits.at(0);
    qA.label = "A";
    qA.delta = bundle.delta_A_wavelengths * lambda0;
    qA.f_q = bundle.mean_frequency;
    QubitSpec qB = qA;
    qB.label = "B";
    qB.delta = bundle.delta_B_wavelengths * lambda0;
    res.bundle = config;
    res.bundle.qubits = {qA, qB};

    std::vector<double> counts;
    for (int n : bundle.mode_counts) {
        if (n < 1 || static_cast<std::size_t>(n) > all.size())
            throw ValidationError("mode_counts", "N_p must lie in [1, N_modes]");
        counts.push_back(n);
    }
    Dataset& a = res.vs_mode_count;
    a.spec.figure_id = "fig5a";
    a.spec.fixed = res.bundle;
    a.spec.axes = {{"N_p", counts}};
    a.spec.columns = {"N_p", "G_AB_Hz", "abs_G_AB_Hz", "abs_G_AB_over_Gamma_sk", "delta_A_Hz", "delta_B_Hz"};
    a.spec.validate();
    for (int n : bundle.mode_counts) {
        const auto qq = qubit_qubit_coupling(qA, qB, all.nearest(bundle.mean_frequency, n), eopt);
        res.G_AB.push_back(qq.G_AB);
        a.rows.push_back({static_cast<double>(n), qq.G_AB, std::abs(qq.G_AB),
                          std::abs(qq.G_AB) / qA.Gamma_sk, qq.delta_A, qq.delta_B});
    }

    Dataset& b = res.vs_detuning;
    b.spec.figure_id = "fig5b";
    b.spec.fixed = res.bundle;
    b.spec.axes = {{"delta_omega_Hz", bundle.detunings}, {"N_p", counts}};
    b.spec.columns = {"delta_omega_Hz"};
    for (int n : bundle.mode_counts) b.spec.columns.push_back("ratio_Np" + std::to_string(n));
    b.spec.validate();
    b.notes["ratio_cap"] = bundle.ratio_cap;
    b.rows.assign(bundle.detunings.size(), {});
    parallel_for(bundle.detunings.size(), [&](std::size_t i) {
        const double dw = bundle.detunings[i];
        QubitSpec A = qA, B = qB;
        A.f_q = bundle.mean_frequency + 0.5 * dw;
        B.f_q = bundle.mean_frequency - 0.5 * dw;
        std::vector<double> row{dw};
        for (int n : bundle.mode_counts) {
            const auto qq = qubit_qubit_coupling(A, B, all.nearest(bundle.mean_frequency, n), eopt);
            const double denom = std::abs(qq.delta_A - qq.delta_B);
            const double ratio = std::abs(qq.G_AB) / denom;
            row.push_back(denom == 0.0 || !(ratio < bundle.ratio_cap) ? bundle.ratio_cap : ratio);
        }
        b.rows[i] = std::move(row);
    });
    return res;
}

// ---------------------------------------------------------------------------

bool AcceptanceReport::overall_pass() const {
    return !criteria.empty() &&
           std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

const Criterion* AcceptanceReport::find(int id) const {
    for (const auto& c : criteria)
        if (c.id == id) return &c;
    return nullptr;
}

json AcceptanceReport::to_json() const {
    json list = json::array();
    for (const auto& c : criteria)
        list.push_back({{"id", c.id}, {"name", c.name}, {"measured", c.measured},
                        {"target", c.target}, {"tolerance", c.tolerance}, {"pass", c.pass},
                        {"detail", c.detail}});
    return {{"criteria", list}, {"overall_pass", overall_pass()}};
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

long double series_oracle(int n, long double x) {
    // Ascending series in extended precision.
    long double term = 1.0L;
    for (int k = 1; k <= n; ++k) term *= x / (2.0L * k);
    long double sum = term;
    const long double q = -x * x / 4.0L;
    for (int k = 1; k < 400; ++k) {
        term *= q / (static_cast<long double>(k) * (k + n));
        sum += term;
        if (std::abs(term) < 1e-30L * std::abs(sum) && k > x) break;
    }
    return sum;
}

std::vector<std::uint8_t> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why, std::size_t& files) {
    files = 0;
    std::vector<fs::path> rel;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file() && e.path().extension() == ".csv") rel.push_back(fs::relative(e.path(), a));
    std::sort(rel.begin(), rel.end());
    if (rel.empty()) {
        why = "no CSV files written";
        return false;
    }
    for (const auto& r : rel) {
        if (!fs::exists(b / r)) {
            why = r.string() + " missing in second run";
            return false;
        }
        if (slurp(a / r) != slurp(b / r)) {
            why = r.string() + " differs";
            return false;
        }
        ++files;
    }
    return true;
}

double jc_oracle_deviation(double& trace_drift) {
    // Resonant qubit and one mode, lossless: P_e = cos²(2π g t).
    const double g = 1.0e6;
    QubitSpec q;
    q.label = "q";
    Subsystem qs{SubsystemKind::Qubit, "q", 0};
    Subsystem ms{SubsystemKind::Mode, "m0", 0};
    HamiltonianSpec spec;
    spec.layout = {qs, ms};
    spec.terms.push_back({TermKind::Exchange, 0, 1, g, 0.0, 0.0, "coupling"});
    HilbertSpace space(spec.layout, 3);
    LindbladGenerator gen(space, spec);
    const auto rho0 = DensityState::pure(space.basis_vector({1, 0}));
    const auto sim = evolve(gen, rho0, 0.0, 2.0 / g, default_observables(space), {});
    double worst = 0.0;
    const auto& pe = sim.at("P_e:q");
    for (std::size_t i = 0; i < sim.times.size(); ++i) {
        const double c = std::cos(kTwoPi * g * sim.times[i]);
        worst = std::max(worst, std::abs(pe[i] - c * c));
    }
    trace_drift = sim.diagnostics.max_trace_error;
    return worst;
}

double detailed_balance_error(const DeviceParams& dev, double T, double& n_th) {
    const ModeSet modes = derive_modes(dev).select({0});
    const Mode& m = modes.by_index(0);
    HamiltonianSpec spec;
    spec.layout = make_layout({}, modes);
    HilbertSpace space(spec.layout, 14);
    LindbladGenerator gen(space, spec, thermal_dissipators(space, {}, modes, T));
    const auto rho0 = DensityState::pure(space.basis_vector({0}));
    EvolveOptions opt;
    opt.samples = 41;
    const double t_end = 16.0 / (kTwoPi * m.gamma);
    const auto sim = evolve(gen, rho0, 0.0, t_end, default_observables(space), opt);
    n_th = thermal_occupation(m.f, T);
    return std::abs(sim.at("n:0").back() - n_th);
}

}  // namespace

AcceptanceReport run_acceptance(const Config& config, const AcceptanceOptions& options) {
    AcceptanceReport report;
    const double s = options.tolerance_scale;
    auto wanted = [&](int id) {
        return options.only.empty() ||
               std::find(options.only.begin(), options.only.end(), id) != options.only.end();
    };
    auto run = [&](int id, const std::string& name, const std::function<void(Criterion&)>& body) {
        if (!wanted(id)) return;
        Criterion c;
        c.id = id;
        c.name = name;
        try {
            body(c);
        } catch (const std::exception& e) {
            c.pass = false;
            c.detail = std::string("error: ") + e.what();
        }
        report.criteria.push_back(std::move(c));
    };
    const DeviceParams& dev = config.device;

    run(1, "mode comb", [&](Criterion& c) {
        const auto t0 = Clock::now();
        const ModeSet modes = derive_modes(dev);
        const double lambda0 = dev.lambda_0();
        const double fsr = modes.f_fsr();
        const double dt = seconds_since(t0);
        const double e1 = std::abs(lambda0 / 994.75e-9 - 1.0);
        const double e2 = std::abs(fsr / 20.0e6 - 1.0);
        c.measured = std::max(e1, e2);
        c.target = 0.0;
        c.tolerance = 1e-12 * s;
        c.pass = c.measured <= c.tolerance && dt < 1e-3;
        c.detail = "lambda_0 = " + fmt(lambda0) + " m, f_fsr = " + fmt(fsr) + " Hz, runtime " +
                   fmt(dt) + " s";
    });

    run(2, "coupling parity", [&](Criterion& c) {
        const ModeSet modes = derive_modes(dev);
        QubitSpec q = config.qubits.at(0);
        double odd = 0.0, even = 0.0, eighth = 0.0;
        q.delta = 0.0;
        for (const auto& m : modes) {
            const double g = std::abs(qubit_mode_coupling(q, m, modes.k_0(), dev.position_phase));
            const double g_ref = q.g_0 * flip_chip_factor(q, m);
            if (m.index % 2 != 0)
                odd = std::max(odd, g / q.g_0);
            else if (std::abs(m.index) <= 4)
                even = std::max(even, std::abs(g / g_ref - 1.0));
        }
        q.delta = dev.lambda_0() / 8.0;
        for (const auto& m : modes) {
            const double g = std::abs(qubit_mode_coupling(q, m, modes.k_0(), dev.position_phase));
            const double g_ref = q.g_0 * flip_chip_factor(q, m) / std::sqrt(2.0);
            eighth = std::max(eighth, std::abs(g / g_ref - 1.0));
        }
        c.measured = eighth;
        c.target = 0.0;
        c.tolerance = 0.01 * s;
        c.pass = odd < 1e-6 * s && even <= 1e-12 * s && eighth <= c.tolerance;
        c.detail = "max |g_odd|/g_0 at delta=0: " + fmt(odd) + "; max even deviation: " + fmt(even) +
                   "; max deviation from g_0/sqrt2 at lambda_0/8: " + fmt(eighth);
    });

    run(3, "strong coupling", [&](Criterion& c) {
        const auto t0 = Clock::now();
        const auto fig = fig2_sweep(config, 101);
        double min_gG = INFINITY, min_gg = INFINITY, lo = INFINITY, hi = -INFINITY;
        for (const auto& r : fig.ratios.rows) {
            min_gG = std::min(min_gG, r[5]);
            min_gg = std::min(min_gg, r[6]);
            lo = std::min(lo, r[7]);
            hi = std::max(hi, r[7]);
        }
        const double dt = seconds_since(t0);
        const double centre = 3.5e4, half = 0.5e4 * s;
        c.measured = lo;
        c.target = centre;
        c.tolerance = half;
        c.pass = min_gG > 150 && min_gg > 150 && lo >= centre - half && hi <= centre + half && dt < 1.0;
        c.detail = "min g/Gamma_sk " + fmt(min_gG) + ", min g/gamma " + fmt(min_gg) +
                   ", cooperativity in [" + fmt(lo) + ", " + fmt(hi) + "], runtime " + fmt(dt) + " s";
    });

    run(4, "thermal population", [&](Criterion& c) {
        const double n100 = thermal_occupation(4.0e9, 0.1);
        const double n20 = thermal_occupation(4.0e9, 0.02);
        c.measured = n100;
        c.target = 0.172;
        c.tolerance = 0.001 * s;
        c.pass = std::abs(n100 - c.target) <= c.tolerance && n20 < 1e-4;
        c.detail = "n_th(4 GHz, 100 mK) = " + fmt(n100) + ", n_th(4 GHz, 20 mK) = " + fmt(n20);
    });

    run(5, "sideband access", [&](Criterion& c) {
        const auto r = fig3_protocol(config, AccessMode::OneMode);
        const double expected = 2.0 * r.G_expected;
        c.measured = r.rabi_fit;
        c.target = expected;
        c.tolerance = 0.05 * s * expected;
        c.pass = std::abs(r.rabi_fit - expected) <= c.tolerance && r.leakage < 0.05 * s &&
                 r.runtime_s < 30.0;
        c.detail = "fitted " + fmt(r.rabi_fit) + " Hz vs 2|G| = " + fmt(expected) + " Hz, leakage " +
                   fmt(r.leakage) + ", peak target " + fmt(r.peak_target) + ", runtime " +
                   fmt(r.runtime_s) + " s";
    });

    run(6, "phonon-phonon coupling", [&](Criterion& c) {
        const auto r = fig4_sweep(config, {}, true);
        const double ratio = r.matching.drive.ratio();
        const double f_d = r.matching.drive.f_d();
        const double G = std::abs(r.model.G);
        const bool point = std::abs(ratio - 5.0) <= 0.5 * s && std::abs(f_d - 80e6) <= 2e6 * s;
        const bool resid = std::abs(r.matching.residual) < 1e3 * s;
        const bool coupling = std::abs(G - 10e6) <= 5e6 * s;
        const bool fidelity = r.peak_transfer >= 0.9;
        c.measured = r.peak_transfer;
        c.target = 0.9;
        c.tolerance = 0.0;
        c.pass = point && resid && coupling && fidelity && r.runtime_s < 60.0;
        c.detail = "ratio " + fmt(ratio) + ", f_d " + fmt(f_d) + " Hz, residual " +
                   fmt(r.matching.residual) + " Hz, |G| " + fmt(G) + " Hz" +
                   (coupling ? "" : " (outside 10 MHz +-50%)") + ", swap peak " +
                   fmt(r.peak_transfer) + (fidelity ? "" : " (< 0.9)") + ", runtime " +
                   fmt(r.runtime_s) + " s";
    });

    run(7, "qubit-qubit coupling", [&](Criterion& c) {
        const auto r = fig5_sweep(config);
        bool increasing = true;
        double min_ratio = INFINITY;
        for (std::size_t i = 0; i < r.G_AB.size(); ++i) {
            if (i > 0 && !(std::abs(r.G_AB[i]) > std::abs(r.G_AB[i - 1]))) increasing = false;
            min_ratio = std::min(min_ratio, std::abs(r.G_AB[i]) / config.qubits.at(0).Gamma_sk);
        }
        // Dispersive oracle: exact 3x3 against the effective 2x2.
        std::mt19937 rng(options.seed);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        const ModeSet base = derive_modes(dev);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const double Delta = (U(rng) < 0.5 ? -1.0 : 1.0) * (200e6 + 1800e6 * U(rng));
            const double gA = std::abs(Delta) * (0.01 + 0.09 * U(rng));
            const double gB = std::abs(Delta) * (0.01 + 0.09 * U(rng)) * (U(rng) < 0.5 ? -1.0 : 1.0);
            const double gmax = std::max(std::abs(gA), std::abs(gB));
            const double split = (2.0 * U(rng) - 1.0) * gmax * gmax / std::abs(Delta);
            const double f_bar = 3.0e9;
            const double fA = f_bar + 0.5 * split, fB = f_bar - 0.5 * split, fm = f_bar + Delta;
            Mode mode;
            mode.index = 0;
            mode.f = fm;
            mode.k = base.k_0();
            const ModeSet one({mode}, base.f_fsr(), base.k_0());
            QubitSpec A, B;
            A.label = "A";
            A.f_q = fA;
            A.g_0 = gA;
            A.Gamma_sk = 0.0;
            B.label = "B";
            B.f_q = fB;
            B.g_0 = std::abs(gB);
            B.delta = gB < 0 ? 0.5 * dev.lambda_0() : 0.0;
            B.Gamma_sk = 0.0;
            const auto eff = qubit_qubit_coupling(A, B, one);
            Eigen::Matrix3d H;
            H << fA, 0, gA, 0, fB, gB, gA, gB, fm;
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ex(H, Eigen::EigenvaluesOnly);
            std::vector<double> ev(ex.eigenvalues().data(), ex.eigenvalues().data() + 3);
            // Drop the mode-like eigenvalue (farthest from the qubits).
            std::sort(ev.begin(), ev.end(), [&](double x, double y) {
                return std::abs(x - f_bar) < std::abs(y - f_bar);
            });
            ev.resize(2);
            std::sort(ev.begin(), ev.end());
            Eigen::Matrix2d He;
            He << eff.f_mean + eff.delta_A, eff.G_AB, eff.G_AB, eff.f_mean + eff.delta_B;
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(He, Eigen::EigenvaluesOnly);
            const double tol = 5.0 * std::pow(gmax / std::abs(Delta), 3) * std::abs(Delta);
            for (int k = 0; k < 2; ++k)
                worst = std::max(worst, std::abs(ev[k] - es.eigenvalues()(k)) / tol);
        }
        c.measured = worst;
        c.target = 0.0;
        c.tolerance = s;
        c.pass = increasing && min_ratio > 10.0 && worst <= s;
        c.detail = std::string("|G_AB| ") + (increasing ? "strictly increasing" : "NOT increasing") +
                   " in N_p, min |G_AB|/Gamma_sk " + fmt(min_ratio) +
                   ", worst oracle error / bound " + fmt(worst);
    });

    run(8, "integrator correctness", [&](Criterion& c) {
        double drift = 0.0, n_th = 0.0;
        const double jc = jc_oracle_deviation(drift);
        const double db = detailed_balance_error(dev, 0.1, n_th);
        c.measured = jc;
        c.target = 0.0;
        c.tolerance = 1e-6 * s;
        c.pass = jc <= c.tolerance && drift < 1e-7 * s && db <= 1e-6 * s;
        c.detail = "JC max |P_e - cos^2| " + fmt(jc) + ", trace drift " + fmt(drift) +
                   ", detailed balance |n - n_th| " + fmt(db) + " (n_th " + fmt(n_th) + ")";
    });

    run(9, "bessel layer", [&](Criterion& c) {
        double worst = 0.0;
        for (double x : {0.1, 0.5, 1.0, 2.5, 5.0, 7.5, 10.0})
            for (int n = 0; n <= 14; ++n) {
                const long double ref = series_oracle(n, x);
                worst = std::max(worst, static_cast<double>(std::abs((bessel_j(n, x) - ref) / ref)));
            }
        double sum_err = 0.0;
        for (double x : linspace(0.0, 10.0, 101)) {
            const int N = bessel_cutoff(x) + 5;
            const auto J = bessel_j_table(N, x);
            double sum = J[N] * J[N];
            for (int n = 1; n <= N; ++n) sum += 2.0 * J[N + n] * J[N + n];
            sum_err = std::max(sum_err, std::abs(sum - 1.0));
        }
        c.measured = worst;
        c.target = 0.0;
        c.tolerance = 1e-10 * s;
        c.pass = worst <= c.tolerance && sum_err <= 1e-8 * s;
        c.detail = "max relative error " + fmt(worst) + ", max sum-rule error " + fmt(sum_err);
    });

    run(10, "determinism", [&](Criterion& c) {
        const fs::path root = options.scratch_dir;
        fs::remove_all(root);
        fs::create_directories(root);
        const fs::path r1 = root / "run1", r2 = root / "run2";
        if (!options.cli_path.empty()) {
            const fs::path cfg = root / "config.json";
            save_config(config, cfg);
            for (const auto& out : {r1, r2}) {
                const std::string cmd = "\"" + options.cli_path + "\" figure 2 --config \"" +
                                        cfg.string() + "\" --out \"" + out.string() + "\" > /dev/null";
                if (std::system(cmd.c_str()) != 0) throw Error("CLI run failed: " + cmd);
            }
        } else {
            write_figure(2, config, r1, false);
            write_figure(2, config, r2, false);
        }
        std::string why;
        std::size_t files = 0;
        c.pass = same_tree(r1, r2, why, files);
        c.measured = static_cast<double>(files);
        c.target = 3;
        c.tolerance = 0;
        c.detail = c.pass ? std::to_string(files) + " CSV files byte-identical" : why;
        fs::remove_all(root);
    });
    return report;
}

// ---------------------------------------------------------------------------

void write_dataset(const Dataset& dataset, const fs::path& root, bool svg,
                   const std::string& svg_content) {
    const fs::path dir = root / dataset.spec.figure_id;
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "data.csv", std::ios::binary);
        dataset.write_csv(out);
        if (!out) throw Error("cannot write " + (dir / "data.csv").string());
    }
    {
        std::ofstream out(dir / "meta.json", std::ios::binary);
        out << dataset.meta().dump(2) << '\n';
    }
    if (svg && !svg_content.empty()) {
        std::ofstream out(dir / "plot.svg", std::ios::binary);
        out << svg_content;
    }
}

namespace {

Dataset series_dataset(const std::string& id, const Config& fixed, const SimResult& sim) {
    Dataset d;
    d.spec.figure_id = id;
    d.spec.fixed = fixed;
    d.spec.axes = {{"t_s", sim.times}};
    d.spec.columns = {"t_s"};
    for (const auto& s : sim.series) d.spec.columns.push_back(s.name);
    for (std::size_t i = 0; i < sim.times.size(); ++i) {
        std::vector<double> row{sim.times[i]};
        for (const auto& s : sim.series) row.push_back(s.values[i]);
        d.rows.push_back(std::move(row));
    }
    d.notes["max_trace_error"] = sim.diagnostics.max_trace_error;
    d.notes["max_hermiticity_error"] = sim.diagnostics.max_hermiticity_error;
    return d;
}

std::string column_plot(const Dataset& d, const std::string& title, const std::string& y_label,
                        std::size_t x_col, std::size_t first, double x_scale = 1.0) {
    std::vector<io::SvgSeries> series;
    for (std::size_t k = first; k < d.spec.columns.size(); ++k) {
        io::SvgSeries s;
        s.label = d.spec.columns[k];
        for (const auto& r : d.rows) {
            s.x.push_back(r[x_col] * x_scale);
            s.y.push_back(r[k]);
        }
        series.push_back(std::move(s));
    }
    return io::svg_line_plot(title, d.spec.columns[x_col], y_label, series);
}

json access_notes(const AccessResult& r) {
    json j = {{"f_d_Hz", r.matching.drive.f_d()},
              {"A_z_Hz", r.matching.drive.A_z()},
              {"matching_residual_Hz", r.matching.residual},
              {"G_expected_Hz", r.G_expected},
              {"rabi_fit_Hz", r.rabi_fit},
              {"rabi_crossings_Hz", r.rabi_crossings},
              {"leakage", r.leakage},
              {"peak_target", r.peak_target}};
    if (r.mode == AccessMode::TwoMode) {
        j["quarter_period_a"] = r.quarter_period_a;
        j["quarter_period_b"] = r.quarter_period_b;
    }
    if (r.comparison) j["max_deviation_effective_vs_full"] = r.comparison->max_deviation;
    return j;
}

}  // namespace

std::vector<std::string> write_figure(int id, const Config& config, const fs::path& root, bool svg) {
    std::vector<std::string> written;
    auto emit = [&](const Dataset& d, const std::string& plot) {
        write_dataset(d, root, svg, svg ? plot : std::string());
        written.push_back(d.spec.figure_id);
    };
    switch (id) {
        case 2: {
            const auto f = fig2_sweep(config);
            emit(f.couplings_vs_position,
                 svg ? column_plot(f.couplings_vs_position, "g_m vs position", "g (Hz)", 1, 2) : "");
            emit(f.ratios, svg ? column_plot(f.ratios, "coupling ratios", "ratio", 0, 5) : "");
            emit(f.thermal, svg ? column_plot(f.thermal, "thermal occupation", "n_th", 0, 1) : "");
            break;
        }
        case 3: {
            const auto one = fig3_protocol(config, AccessMode::OneMode);
            auto a = series_dataset("fig3a", one.bundle, one.sim);
            a.notes["access"] = access_notes(one);
            emit(a, svg ? column_plot(a, "one-mode access", "population", 0, 1, 1e9) : "");
            const auto two = fig3_protocol(config, AccessMode::TwoMode);
            auto b = series_dataset("fig3b", two.bundle, two.sim);
            b.notes["access"] = access_notes(two);
            emit(b, svg ? column_plot(b, "two-mode access", "population", 0, 1, 1e9) : "");
            break;
        }
        case 4: {
            const auto r = fig4_sweep(config, {}, true);
            std::string plot;
            if (svg) {
                const auto& rg = r.map.spec.axes[0].values;
                const auto& fg = r.map.spec.axes[1].values;
                std::vector<std::vector<double>> z(rg.size(), std::vector<double>(fg.size()));
                for (std::size_t i = 0; i < rg.size(); ++i)
                    for (std::size_t j = 0; j < fg.size(); ++j)
                        z[i][j] = std::abs(r.map.rows[i * fg.size() + j][2]);
                std::vector<std::pair<double, double>> markers;
                for (const auto& p : r.map.notes["locus"]) markers.emplace_back(p[1].get<double>(), p[0].get<double>());
                plot = io::svg_heatmap("|G| over (f_d, A_z/f_d) with matching locus", "f_d (Hz)",
                                       "A_z/f_d", fg, rg, z, markers);
            }
            emit(r.map, plot);
            auto b = series_dataset("fig4b", r.bundle, r.sim);
            b.notes["peak_transfer"] = r.peak_transfer;
            b.notes["peak_time_s"] = r.peak_time;
            b.notes["predicted_swap_time_s"] = r.predicted_swap_time;
            b.notes["G_Hz"] = r.model.G;
            emit(b, svg ? column_plot(b, "phonon-phonon swap", "population", 0, 1, 1e9) : "");
            break;
        }
        case 5: {
            const auto r = fig5_sweep(config);
            emit(r.vs_mode_count, svg ? column_plot(r.vs_mode_count, "|G_AB| vs N_p", "Hz", 0, 2) : "");
            emit(r.vs_detuning, svg ? column_plot(r.vs_detuning, "|G_AB/(dA-dB)|", "ratio", 0, 1) : "");
            break;
        }
        default:
            throw DomainError("figure id must be 2, 3, 4 or 5");
    }
    return written;
}

}  // namespace phonobus
