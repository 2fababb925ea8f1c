#include "phonobus/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "phonobus/coupling.hpp"
#include "phonobus/io.hpp"

namespace phonobus {

std::vector<Observable> default_observables(const HilbertSpace& space) {
    std::vector<Observable> obs;
    const auto& layout = space.layout();
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto& s = layout[i];
        const std::string name = s.kind == SubsystemKind::Qubit
                                     ? "P_e:" + s.label
                                     : "n:" + std::to_string(s.mode_index);
        obs.push_back({name, space.number(static_cast<int>(i))});
    }
    return obs;
}

const std::vector<double>& SimResult::at(const std::string& name) const {
    for (const auto& s : series)
        if (s.name == name) return s.values;
    throw std::out_of_range("no observable named " + name);
}

void SimResult::write_csv(std::ostream& os) const {
    std::vector<std::string> header{"t_s"};
    for (const auto& s : series) header.push_back(s.name);
    io::CsvWriter csv(os);
    csv.header(header);
    std::vector<double> row(series.size() + 1);
    for (std::size_t i = 0; i < times.size(); ++i) {
        row[0] = times[i];
        for (std::size_t k = 0; k < series.size(); ++k) row[k + 1] = series[k].values[i];
        csv.row(row);
    }
}

SimResult evolve(const LindbladGenerator& generator, const DensityState& rho0, double t_start,
                 double t_end, const std::vector<Observable>& observables,
                 const EvolveOptions& options) {
    if (static_cast<std::size_t>(rho0.rho.rows()) != generator.dimension() ||
        rho0.rho.rows() != rho0.rho.cols())
        throw IntegratorError("initial state dimension does not match the generator");
    if (!(t_end > t_start)) throw DomainError("t_end must exceed t_start");
    if (options.samples < 2) throw DomainError("at least two samples are required");
    const bool check_pos = options.check_positivity.value_or(generator.dimension() <= 128);

    SimResult result;
    result.series.reserve(observables.size());
    for (const auto& o : observables) result.series.push_back({o.name, {}});
    result.diagnostics.positivity_checked = check_pos;

    DormandPrince54<Eigen::MatrixXcd> stepper(options.control);
    auto rhs = [&](double t, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dy) {
        generator.rhs(t, y, dy);
    };
    DensityState state = rho0;
    state.t = t_start;
    double t = t_start;
    const std::size_t N = options.samples;
    for (std::size_t k = 0; k < N; ++k) {
        // Output points are hit exactly, never interpolated.
        const double target = k + 1 == N ? t_end
                                         : t_start + (t_end - t_start) * static_cast<double>(k) /
                                                         static_cast<double>(N - 1);
        stepper.integrate(rhs, t, state.rho, target);
        state.t = t;
        const double tr = state.trace_error();
        const double he = state.hermiticity_error();
        auto& d = result.diagnostics;
        d.max_trace_error = std::max(d.max_trace_error, tr);
        d.max_hermiticity_error = std::max(d.max_hermiticity_error, he);
        if (!(tr <= options.trace_tolerance)) {
            std::ostringstream os;
            os << "trace drifted by " << tr << " at t = " << t;
            throw TraceDrift(os.str());
        }
        if (!(he <= options.hermiticity_tolerance)) {
            std::ostringstream os;
            os << "density matrix lost hermiticity (" << he << ") at t = " << t;
            throw IntegratorError(os.str());
        }
        if (check_pos) {
            const double ev = state.min_eigenvalue();
            d.min_eigenvalue = std::min(d.min_eigenvalue, ev);
            if (ev < -options.positivity_tolerance) {
                std::ostringstream os;
                os << "density matrix eigenvalue " << ev << " at t = " << t;
                throw IntegratorError(os.str());
            }
        }
        result.times.push_back(t);
        for (std::size_t i = 0; i < observables.size(); ++i)
            result.series[i].values.push_back(state.expectation(observables[i].op));
    }
    result.final_state = state;
    result.steps = stepper.stats();
    return result;
}

double frequency_from_crossings(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 3) return 0.0;
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    const double band = 0.1 * (*hi - *lo);
    if (!(band > 0)) return 0.0;
    std::vector<double> ups;
    bool armed = false;  // set once the signal has been clearly below the mean
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < mean - band) armed = true;
        if (armed && i > 0 && y[i] > mean + band) {
            // Locate the mean crossing just before this sample.
            std::size_t j = i;
            while (j > 0 && y[j - 1] >= mean) --j;
            double tc = t[j];
            if (j > 0) {
                const double f = (mean - y[j - 1]) / (y[j] - y[j - 1]);
                tc = t[j - 1] + f * (t[j] - t[j - 1]);
            }
            ups.push_back(tc);
            armed = false;
        }
    }
    if (ups.size() < 2) return 0.0;
    return static_cast<double>(ups.size() - 1) / (ups.back() - ups.front());
}

namespace {

// Residual sum of squares of the best y ≈ c0 + e(t) (a + b cos 2πft + c sin 2πft)
// given the envelope samples e and the trig samples.
double damped_residual(const std::vector<double>& y, const std::vector<double>& e,
                       const std::vector<double>& c, const std::vector<double>& s) {
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    Eigen::Vector4d r = Eigen::Vector4d::Zero();
    double yy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const Eigen::Vector4d v(1.0, e[i], e[i] * c[i], e[i] * s[i]);
        A.selfadjointView<Eigen::Lower>().rankUpdate(v);
        r += y[i] * v;
        yy += y[i] * y[i];
    }
    A = A.selfadjointView<Eigen::Lower>();
    // At κ = 0 the first two basis functions coincide; the min-norm solve
    // handles the rank deficiency.
    const Eigen::Vector4d x = A.completeOrthogonalDecomposition().solve(r);
    return yy - r.dot(x);
}

struct DampedFit {
    const std::vector<double>& t;
    const std::vector<double>& y;
    mutable std::vector<double> e, c, s;

    void envelope(double kappa) const {
        e.resize(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) e[i] = std::exp(-kappa * t[i]);
    }
    void trig(double f) const {
        c.resize(t.size());
        s.resize(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            c[i] = std::cos(kTwoPi * f * t[i]);
            s[i] = std::sin(kTwoPi * f * t[i]);
        }
    }
    double operator()(double f, double kappa) const {
        envelope(kappa);
        trig(f);
        return damped_residual(y, e, c, s);
    }
};

template <typename F>
double golden_min(F&& f, double a, double b, int iterations) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < iterations; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double frequency_from_fit(const std::vector<double>& t, const std::vector<double>& y,
                          double f_lo, double f_hi) {
    if (t.size() != y.size() || t.size() < 5 || !(f_hi > f_lo) || !(f_lo > 0)) return 0.0;
    // Shift time so the basis stays well conditioned.
    std::vector<double> ts(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) ts[i] = t[i] - t.front();
    const double span = ts.back();
    const DampedFit fit{ts, y, {}, {}, {}};
    const double kappa_grid[] = {0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0};
    constexpr int kKappa = 9;
    std::vector<std::vector<double>> envelopes(kKappa);
    for (int j = 0; j < kKappa; ++j) {
        fit.envelope(kappa_grid[j] / span);
        envelopes[j] = fit.e;
    }
    constexpr int kGrid = 200;
    const double step = (f_hi - f_lo) / kGrid;
    double best_res = INFINITY;
    int best_i = 0, best_j = 0;
    for (int i = 0; i <= kGrid; ++i) {
        fit.trig(f_lo + i * step);
        for (int j = 0; j < kKappa; ++j) {
            const double r = damped_residual(y, envelopes[j], fit.c, fit.s);
            if (r < best_res) {
                best_res = r;
                best_i = i;
                best_j = j;
            }
        }
    }
    double best_f = f_lo + best_i * step;
    double best_k = kappa_grid[best_j] / span;
    const double k_lo = best_j > 0 ? kappa_grid[best_j - 1] / span : 0.0;
    const double k_hi = (best_j < kKappa - 1 ? kappa_grid[best_j + 1] : 16.0) / span;
    // Alternate one-dimensional refinements.
    for (int round = 0; round < 3; ++round) {
        best_f = golden_min([&](double f) { return fit(f, best_k); },
                            std::max(f_lo, best_f - step), std::min(f_hi, best_f + step), 40);
        best_k = golden_min([&](double k) { return fit(best_f, k); }, k_lo, k_hi, 30);
    }
    return best_f;
}

ComparisonReport compare_effective_vs_full(const HilbertSpace& space,
                                           const HamiltonianSpec& effective,
                                           const HamiltonianSpec& full,
                                           const std::vector<Dissipator>& dissipators,
                                           const DensityState& rho0, double t_end,
                                           const std::string& target, double f_max,
                                           const EvolveOptions& options) {
    const auto obs = default_observables(space);
    ComparisonReport report;
    report.target = target;
    {
        LindbladGenerator gen(space, full, dissipators);
        report.full = evolve(gen, rho0, rho0.t, t_end, obs, options);
    }
    {
        LindbladGenerator gen(space, effective, dissipators);
        report.effective = evolve(gen, rho0, rho0.t, t_end, obs, options);
    }
    const auto& t = report.full.times;
    const double f_lo = 0.25 / (t.back() - t.front());
    for (std::size_t k = 0; k < obs.size(); ++k) {
        const auto& a = report.full.series[k].values;
        const auto& b = report.effective.series[k].values;
        SeriesComparison c;
        c.name = obs[k].name;
        for (std::size_t i = 0; i < a.size(); ++i)
            c.max_deviation = std::max(c.max_deviation, std::abs(a[i] - b[i]));
        c.frequency_crossings_full = frequency_from_crossings(t, a);
        c.frequency_crossings_effective = frequency_from_crossings(t, b);
        if (f_max > f_lo) {
            c.frequency_fit_full = frequency_from_fit(t, a, f_lo, f_max);
            c.frequency_fit_effective = frequency_from_fit(t, b, f_lo, f_max);
        }
        report.max_deviation = std::max(report.max_deviation, c.max_deviation);
        report.series.push_back(c);
    }
    const auto& eff = report.effective.at(target);
    const auto& ful = report.full.at(target);
    // First local maximum reaching at least half of the global maximum.
    const double peak = *std::max_element(eff.begin(), eff.end());
    std::size_t idx = std::max_element(eff.begin(), eff.end()) - eff.begin();
    for (std::size_t i = 1; i + 1 < eff.size(); ++i) {
        if (eff[i] >= 0.5 * peak && eff[i] >= eff[i - 1] && eff[i] > eff[i + 1]) {
            idx = i;
            break;
        }
    }
    report.swap_time = t[idx] - t.front();
    report.fidelity_effective = eff[idx];
    report.fidelity_full = ful[idx];
    return report;
}

Eigen::VectorXcd linearized_spectrum(const QubitSpec& qubit, const ModeSet& modes, double k_0,
                                     double T, PositionPhase phase) {
    const auto n = static_cast<Eigen::Index>(modes.size()) + 1;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    const cplx I(0.0, 1.0);
    M(0, 0) = qubit.f_q - 0.5 * I * qubit.Gamma_sk * (thermal_occupation(qubit.f_q, T) + 1.0);
    for (Eigen::Index j = 1; j < n; ++j) {
        const Mode& m = modes[static_cast<std::size_t>(j - 1)];
        M(j, j) = m.f - 0.5 * I * m.gamma * (thermal_occupation(m.f, T) + 1.0);
        const double g = qubit_mode_coupling(qubit, m, k_0, phase);
        M(0, j) = g;
        M(j, 0) = g;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(M, false);
    Eigen::VectorXcd ev = solver.eigenvalues();
    std::vector<cplx> v(ev.data(), ev.data() + ev.size());
    std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    for (Eigen::Index i = 0; i < n; ++i) ev(i) = v[static_cast<std::size_t>(i)];
    return ev;
}

}  // namespace phonobus
