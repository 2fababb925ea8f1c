#include "phonobus/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "phonobus/constants.hpp"
#include "phonobus/error.hpp"

namespace phonobus {

namespace {

void require(bool ok, const char* key, const std::string& message) {
    if (!ok) throw ValidationError(key, message);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void validate(const DeviceParams& p) {
    require(std::isfinite(p.v_s) && p.v_s > 0, "v_s", "must be positive");
    require(std::isfinite(p.f_0) && p.f_0 > 0, "f_0", "must be positive");
    require(std::isfinite(p.L_c_in_wavelengths) && p.L_c_in_wavelengths >= 1.0,
            "L_c_in_wavelengths", "must be >= 1");
    require(p.N_modes >= 1, "N_modes", "must be >= 1");
    require(p.N_modes % 2 == 1, "N_modes", "N_modes must be odd");
    require(finite_nonneg(p.gamma_t), "gamma_t", "must be finite and >= 0");
    require(finite_nonneg(p.gamma_d_coeff), "gamma_d_coeff", "must be finite and >= 0");
    require(finite_nonneg(p.gamma_i_peak), "gamma_i_peak", "must be finite and >= 0");
    require(finite_nonneg(p.gamma_i_width_factor), "gamma_i_width_factor",
            "must be finite and >= 0");
    require(finite_nonneg(p.T_bath), "T_bath", "must be finite and >= 0");
    for (double f : p.f_q_defaults) require(std::isfinite(f) && f > 0, "f_q_defaults", "must be positive");
    const double half_span = p.f_fsr() * (p.N_modes - 1) / 2.0;
    require(p.f_fsr() < p.f_0, "L_c_in_wavelengths", "free spectral range must be below f_0");
    require(half_span < p.f_0, "N_modes", "mode comb reaches a non-positive frequency");
}

double Mode::wavelength() const { return kTwoPi / k; }

ModeSet::ModeSet(std::vector<Mode> modes, double f_fsr, double k_0)
    : modes_(std::move(modes)), f_fsr_(f_fsr), k_0_(k_0) {
    std::sort(modes_.begin(), modes_.end(),
              [](const Mode& a, const Mode& b) { return a.index < b.index; });
}

const Mode& ModeSet::by_index(int m) const {
    for (const auto& mode : modes_)
        if (mode.index == m) return mode;
    throw std::out_of_range("mode " + std::to_string(m) + " not in mode set");
}

bool ModeSet::contains(int m) const {
    return std::any_of(modes_.begin(), modes_.end(), [m](const Mode& x) { return x.index == m; });
}

ModeSet ModeSet::select(const std::vector<int>& indices) const {
    std::vector<Mode> out;
    for (int m : indices) out.push_back(by_index(m));
    return ModeSet(std::move(out), f_fsr_, k_0_);
}

ModeSet ModeSet::nearest(double f, std::size_t count) const {
    std::vector<Mode> sorted = modes_;
    std::stable_sort(sorted.begin(), sorted.end(), [f](const Mode& a, const Mode& b) {
        return std::abs(a.f - f) < std::abs(b.f - f);
    });
    sorted.resize(std::min(count, sorted.size()));
    return ModeSet(std::move(sorted), f_fsr_, k_0_);
}

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

double phonon_decay_rate(const DeviceParams& p, double f) {
    if (!(f > 0)) throw DomainError("phonon_decay_rate: frequency must be positive");
    const double diffraction = p.gamma_d_coeff * p.gamma_d_coeff / f;
    const double s = sinc(p.gamma_i_width_factor * (f - p.f_0) / p.f_0);
    return p.gamma_t + diffraction + p.gamma_i_peak * s * s;
}

double thermal_occupation(double f, double T) {
    if (!(f > 0)) throw DomainError("thermal_occupation: frequency must be positive");
    if (T < 0) throw DomainError("thermal_occupation: temperature must be >= 0");
    if (T == 0.0) return 0.0;
    const double x = kPlanck * f / (kBoltzmann * T);
    return 1.0 / std::expm1(x);
}

ModeSet derive_modes(const DeviceParams& p) {
    validate(p);
    const double fsr = p.f_fsr();
    const int half = (p.N_modes - 1) / 2;
    std::vector<Mode> modes;
    modes.reserve(p.N_modes);
    for (int m = -half; m <= half; ++m) {
        Mode mode;
        mode.index = m;
        mode.f = p.f_0 + m * fsr;
        mode.k = kTwoPi * mode.f / p.v_s;
        mode.gamma = phonon_decay_rate(p, mode.f);
        mode.n_th = thermal_occupation(mode.f, p.T_bath);
        modes.push_back(mode);
    }
    return ModeSet(std::move(modes), fsr, kTwoPi * p.f_0 / p.v_s);
}

}  // namespace phonobus
