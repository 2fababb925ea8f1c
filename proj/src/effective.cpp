#include "phonobus/effective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phonobus/bessel.hpp"
#include "phonobus/error.hpp"

namespace phonobus {

namespace {

// Terms whose coupling is this small relative to g_m are below the sideband
// truncation and are not guarded.
constexpr double kNegligible = 1e-6;

void guard_term(const DispersiveGuard& guard, double denominator, double coupling,
                double linewidth, const char* what, int m, int n) {
    const double limit = std::max(guard.coupling_factor * std::abs(coupling),
                                  guard.linewidth_factor * linewidth);
    if (!(std::abs(denominator) > limit)) {
        std::ostringstream os;
        os << what << ": mode " << m << " sideband " << n << " detuned by " << denominator
           << " Hz, below the dispersive limit " << limit << " Hz";
        throw NearResonanceError(os.str());
    }
}

double mode_coupling(const QubitSpec& q, const ModeSet& modes, const Mode& mode,
                     PositionPhase phase) {
    return qubit_mode_coupling(q, mode, modes.k_0(), phase);
}

}  // namespace

double chi_shift(const QubitSpec& q, const ModeSet& modes, const DriveSpec& drive, int m,
                 const EffectiveOptions& options) {
    const Mode& mode = modes.by_index(m);
    const double g = mode_coupling(q, modes, mode, options.phase);
    if (g == 0.0) return 0.0;
    const int N = drive.n_max();
    const auto J = bessel_j_table(N, drive.ratio());
    const double linewidth = std::max(q.Gamma_sk, mode.gamma);
    double chi = 0.0;
    for (int n = -N; n <= N; ++n) {
        const double Jn = J[n + N];
        const double denom = mode.f - q.f_q - n * drive.f_d();
        if (std::abs(Jn) < kNegligible) {
            if (denom != 0.0) chi += g * g * Jn * Jn / denom;
            continue;
        }
        guard_term(options.guard, denom, g * Jn, linewidth, "chi_shift", m, n);
        chi += g * g * Jn * Jn / denom;
    }
    return chi;
}

double phonon_phonon_coupling(const QubitSpec& q, const ModeSet& modes, const DriveSpec& drive,
                              int m, int m2, int order_difference,
                              const EffectiveOptions& options) {
    if (m == m2) throw DomainError("phonon_phonon_coupling: modes must differ");
    const Mode& a = modes.by_index(m);
    const Mode& b = modes.by_index(m2);
    const double ga = mode_coupling(q, modes, a, options.phase);
    const double gb = mode_coupling(q, modes, b, options.phase);
    if (ga == 0.0 || gb == 0.0) return 0.0;
    const int N = drive.n_max();
    const int top = N + std::abs(order_difference);
    const auto J = bessel_j_table(top, drive.ratio());
    auto bessel = [&](int n) { return std::abs(n) > top ? 0.0 : J[n + top]; };
    const double lw_a = std::max(q.Gamma_sk, a.gamma);
    const double lw_b = std::max(q.Gamma_sk, b.gamma);
    double G = 0.0;
    for (int n = -N; n <= N; ++n) {
        const int n2 = n + order_difference;
        const double Jn = bessel(n);
        const double Jn2 = bessel(n2);
        if (Jn == 0.0 || Jn2 == 0.0) continue;
        const double da = a.f - q.f_q - n * drive.f_d();
        const double db = b.f - q.f_q - n2 * drive.f_d();
        if (std::abs(Jn) >= kNegligible) guard_term(options.guard, da, ga * Jn, lw_a, "phonon_phonon", m, n);
        if (std::abs(Jn2) >= kNegligible) guard_term(options.guard, db, gb * Jn2, lw_b, "phonon_phonon", m2, n2);
        const double num = ga * gb * Jn * Jn2;
        G += num / (2.0 * da) + num / (2.0 * db);
    }
    return G;
}

QubitModeEffective qubit_mode_effective(const QubitSpec& q, const ModeSet& modes,
                                        const DriveSpec& drive,
                                        const std::vector<std::pair<int, int>>& targets,
                                        bool include_off_resonant, double min_coupling,
                                        PositionPhase phase) {
    QubitModeEffective model;
    model.qubit = q.label;
    const int N = drive.n_max();
    const auto J = bessel_j_table(N, drive.ratio());
    auto make = [&](const Mode& mode, int n) {
        SidebandResonance r;
        r.m = mode.index;
        r.n = n;
        r.G = mode_coupling(q, modes, mode, phase) * J[n + N];
        r.detuning = q.f_q - mode.f + n * drive.f_d();
        return r;
    };
    for (const auto& [m, n] : targets) {
        if (std::abs(n) > N) throw DomainError("target sideband exceeds n_max");
        model.resonances.push_back(make(modes.by_index(m), n));
    }
    if (include_off_resonant) {
        for (const auto& mode : modes) {
            for (int n = -N; n <= N; ++n) {
                const bool is_target = std::any_of(targets.begin(), targets.end(), [&](auto t) {
                    return t.first == mode.index && t.second == n;
                });
                if (is_target) continue;
                auto r = make(mode, n);
                if (r.G != 0.0 && std::abs(r.G) >= min_coupling) model.off_resonant.push_back(r);
            }
        }
    }
    return model;
}

double PhononPhononEffective::chi_of(int mode) const {
    for (const auto& [m_, c] : chi)
        if (m_ == mode) return c;
    throw std::out_of_range("no chi for mode " + std::to_string(mode));
}

PhononPhononEffective phonon_phonon_effective(const QubitSpec& q, const ModeSet& modes,
                                              const DriveSpec& drive, int m, int m2,
                                              const EffectiveOptions& options) {
    PhononPhononEffective model;
    model.m = m;
    model.m2 = m2;
    const Mode& a = modes.by_index(m);
    const Mode& b = modes.by_index(m2);
    model.order_difference = static_cast<int>(std::lround((b.f - a.f) / drive.f_d()));
    model.f_d = drive.f_d();
    for (const auto& mode : modes)
        model.chi.emplace_back(mode.index, chi_shift(q, modes, drive, mode.index, options));
    model.G = phonon_phonon_coupling(q, modes, drive, m, m2, model.order_difference, options);
    model.residual = model.order_difference * drive.f_d() + (a.f + model.chi_of(m)) -
                     (b.f + model.chi_of(m2));
    return model;
}

QubitQubitEffective qubit_qubit_coupling(const QubitSpec& qA, const QubitSpec& qB,
                                         const ModeSet& modes, const EffectiveOptions& options) {
    QubitQubitEffective model;
    model.qubit_A = qA.label;
    model.qubit_B = qB.label;
    model.f_mean = 0.5 * (qA.f_q + qB.f_q);
    double shift_A = 0.0;
    double shift_B = 0.0;
    double G = 0.0;
    for (const auto& mode : modes) {
        ModeContribution c;
        c.m = mode.index;
        c.g_A = mode_coupling(qA, modes, mode, options.phase);
        c.g_B = mode_coupling(qB, modes, mode, options.phase);
        c.Delta = mode.f - model.f_mean;
        if (c.g_A != 0.0 || c.g_B != 0.0) {
            const double lw = std::max({qA.Gamma_sk, qB.Gamma_sk, mode.gamma});
            guard_term(options.guard, c.Delta, std::max(std::abs(c.g_A), std::abs(c.g_B)), lw,
                       "qubit_qubit", mode.index, 0);
            c.G = -c.g_A * c.g_B / c.Delta;
            shift_A += c.g_A * c.g_A / c.Delta;
            shift_B += c.g_B * c.g_B / c.Delta;
            G += c.G;
        }
        model.contributions.push_back(c);
    }
    model.delta_A = 0.5 * (qA.f_q - qB.f_q) - shift_A;
    model.delta_B = 0.5 * (qB.f_q - qA.f_q) - shift_B;
    model.G_AB = G;
    return model;
}

namespace {

struct PhononResidual {
    const QubitSpec& q;
    const ModeSet& modes;
    const DriveSpec& initial;
    int m;
    int m2;
    int order;
    const EffectiveOptions& options;

    double operator()(double f_d) const {
        const DriveSpec drive = initial.with_frequency(f_d);
        const Mode& a = modes.by_index(m);
        const Mode& b = modes.by_index(m2);
        return order * f_d + (a.f + chi_shift(q, modes, drive, m, options)) -
               (b.f + chi_shift(q, modes, drive, m2, options));
    }
};

// Brent's method on a sign-changing bracket; stops once |f| <= ftol.
double brent(const PhononResidual& f, double a, double b, double fa, double fb, double ftol,
             int max_iter, int& iterations) {
    double c = a, fc = fa, d = b - a, e = d;
    for (iterations = 0; iterations < max_iter; ++iterations) {
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        if (std::abs(fb) <= ftol) return b;
        const double tol1 = 2.0 * 1e-15 * std::abs(b) + 0.5;  // 0.5 Hz resolution floor
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, qq, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                qq = 1.0 - s;
            } else {
                qq = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                qq = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) qq = -qq;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * qq - std::abs(tol1 * qq), std::abs(e * qq))) {
                e = d;
                d = p / qq;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
    }
    return b;
}

}  // namespace

MatchingResult solve_matching(MatchingKind kind, const QubitSpec& q, const ModeSet& modes,
                              const std::vector<int>& targets, const DriveSpec& initial,
                              const MatchingOptions& options) {
    MatchingResult result;
    const double ratio = initial.ratio();
    switch (kind) {
        case MatchingKind::QubitMode1: {
            if (targets.size() != 1) throw DomainError("qubit_mode_1 needs one target mode");
            const int n = options.sideband;
            if (n == 0) throw DomainError("qubit_mode_1 needs a nonzero sideband order");
            const Mode& mode = modes.by_index(targets[0]);
            const double f_d = (mode.f - q.f_q) / n;
            if (!(f_d > 0))
                throw NoConvergenceError("no positive drive frequency puts sideband " +
                                         std::to_string(n) + " on mode " +
                                         std::to_string(mode.index));
            result.drive = DriveSpec(ratio * f_d, f_d);
            result.order_difference = n;
            break;
        }
        case MatchingKind::QubitMode2: {
            if (targets.size() != 2) throw DomainError("qubit_mode_2 needs two target modes");
            const Mode& a = modes.by_index(std::min(targets[0], targets[1]));
            const Mode& b = modes.by_index(std::max(targets[0], targets[1]));
            const double f_d = 0.5 * (b.f - a.f);
            if (!(f_d > 0)) throw NoConvergenceError("qubit_mode_2 needs two distinct modes");
            result.drive = DriveSpec(ratio * f_d, f_d);
            result.order_difference = 2;
            break;
        }
        case MatchingKind::PhononPhonon: {
            if (targets.size() != 2) throw DomainError("phonon_phonon needs two target modes");
            const Mode& a = modes.by_index(targets[0]);
            const Mode& b = modes.by_index(targets[1]);
            const int order = static_cast<int>(std::lround((b.f - a.f) / initial.f_d()));
            if (order == 0) throw NoConvergenceError("drive frequency too high for the mode pair");
            const PhononResidual f{q, modes, initial, targets[0], targets[1], order, options.effective};
            const double f0 = initial.f_d();
            const double r0 = f(f0);
            const double window = 0.5 * modes.f_fsr();
            if (!(std::abs(r0) < window))
                throw NoConvergenceError("initial residual outside the matching basin");
            result.order_difference = order;
            if (std::abs(r0) <= options.tolerance) {
                result.drive = initial;
                break;
            }
            // Walk outward on both sides until adjacent valid points straddle a root.
            bool found = false;
            const int steps = static_cast<int>(std::ceil(window / options.scan_step));
            for (int side : {+1, -1}) {
                if (found) break;
                double xa = f0, fa = r0;
                bool valid_a = true;
                for (int k = 1; k <= steps && !found; ++k) {
                    const double xb = f0 + side * k * options.scan_step;
                    if (!(xb > 0)) break;
                    double fb = 0.0;
                    try {
                        fb = f(xb);
                    } catch (const NearResonanceError&) {
                        valid_a = false;
                        continue;
                    }
                    if (valid_a && (fa > 0) != (fb > 0)) {
                        int iters = 0;
                        const double lo = std::min(xa, xb), hi = std::max(xa, xb);
                        const double flo = xa < xb ? fa : fb, fhi = xa < xb ? fb : fa;
                        double root = 0.0;
                        try {
                            root = brent(f, lo, hi, flo, fhi, options.tolerance,
                                         options.max_iterations, iters);
                        } catch (const NearResonanceError&) {
                            root = std::numeric_limits<double>::quiet_NaN();
                        }
                        result.iterations += iters;
                        if (std::isfinite(root) && std::abs(f(root)) <= options.tolerance) {
                            result.drive = initial.with_frequency(root);
                            found = true;
                        }
                    }
                    xa = xb;
                    fa = fb;
                    valid_a = true;
                }
            }
            if (!found) throw NoConvergenceError("phonon_phonon matching did not converge");
            break;
        }
    }
    result.residual = matching_residual(kind, q, modes, targets, result.drive, options);
    if (!(std::abs(result.residual) <= options.tolerance))
        throw NoConvergenceError("matching residual " + std::to_string(result.residual) +
                                 " Hz above tolerance");
    return result;
}

double matching_residual(MatchingKind kind, const QubitSpec& q, const ModeSet& modes,
                         const std::vector<int>& targets, const DriveSpec& drive,
                         const MatchingOptions& options) {
    switch (kind) {
        case MatchingKind::QubitMode1: {
            const Mode& mode = modes.by_index(targets.at(0));
            return q.f_q - mode.f + options.sideband * drive.f_d();
        }
        case MatchingKind::QubitMode2: {
            const Mode& a = modes.by_index(std::min(targets.at(0), targets.at(1)));
            const Mode& b = modes.by_index(std::max(targets.at(0), targets.at(1)));
            const double r1 = q.f_q - a.f - drive.f_d();
            const double r2 = q.f_q - b.f + drive.f_d();
            return std::abs(r1) > std::abs(r2) ? r1 : r2;
        }
        case MatchingKind::PhononPhonon: {
            const Mode& a = modes.by_index(targets.at(0));
            const Mode& b = modes.by_index(targets.at(1));
            const int order = static_cast<int>(std::lround((b.f - a.f) / drive.f_d()));
            return order * drive.f_d() +
                   (a.f + chi_shift(q, modes, drive, a.index, options.effective)) -
                   (b.f + chi_shift(q, modes, drive, b.index, options.effective));
        }
    }
    return 0.0;
}

namespace {

HamiltonianSpec empty_spec(std::vector<Subsystem> layout) {
    HamiltonianSpec spec;
    spec.layout = std::move(layout);
    return spec;
}

}  // namespace

HamiltonianSpec build_effective_hamiltonian(const QubitModeEffective& model,
                                            std::vector<Subsystem> layout) {
    auto spec = empty_spec(std::move(layout));
    const int q = spec.qubit_site(model.qubit);
    for (const auto& r : model.resonances)
        spec.terms.push_back({TermKind::Exchange, q, spec.mode_site(r.m), r.G, r.detuning, 0.0,
                              "resonant n=" + std::to_string(r.n)});
    for (const auto& r : model.off_resonant)
        spec.terms.push_back({TermKind::Exchange, q, spec.mode_site(r.m), r.G, r.detuning, 0.0,
                              "off-resonant n=" + std::to_string(r.n)});
    spec.validate();
    return spec;
}

HamiltonianSpec build_effective_hamiltonian(const PhononPhononEffective& model,
                                            std::vector<Subsystem> layout) {
    auto spec = empty_spec(std::move(layout));
    for (const auto& [m, chi] : model.chi) {
        int site = -1;
        try {
            site = spec.mode_site(m);
        } catch (const std::out_of_range&) {
            continue;  // mode not part of this layout
        }
        spec.terms.push_back({TermKind::Number, site, -1, chi, 0.0, 0.0, "chi"});
    }
    // Interaction picture: the exchange phase is the bare mismatch
    // (n'-n) f_d + f_m - f_m'; the χ terms supply the dispersive part.
    const double bare = model.residual - model.chi_of(model.m) + model.chi_of(model.m2);
    spec.terms.push_back({TermKind::Exchange, spec.mode_site(model.m), spec.mode_site(model.m2),
                          model.G, bare, 0.0, "beam splitter"});
    spec.validate();
    return spec;
}

HamiltonianSpec build_effective_hamiltonian(const QubitQubitEffective& model,
                                            std::vector<Subsystem> layout) {
    auto spec = empty_spec(std::move(layout));
    const int a = spec.qubit_site(model.qubit_A);
    const int b = spec.qubit_site(model.qubit_B);
    spec.terms.push_back({TermKind::Number, a, -1, model.delta_A, 0.0, 0.0, "delta_A"});
    spec.terms.push_back({TermKind::Number, b, -1, model.delta_B, 0.0, 0.0, "delta_B"});
    spec.terms.push_back({TermKind::Exchange, a, b, model.G_AB, 0.0, 0.0, "exchange"});
    spec.validate();
    return spec;
}

}  // namespace phonobus
