#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace phonobus {

// How the position offset enters the standing-wave phase of mode m.
//  Center: cos(k_0 δ + mπ/2)  -- all modes share the centre wavenumber.
//  Mode:   cos(k_m δ + mπ/2)  -- each mode uses its own wavenumber.
enum class PositionPhase { Center, Mode };

// Grating / transducer geometry. Accepted and echoed for provenance only;
// none of these enter the decay model.
struct GratingGeometry {
    std::optional<double> N_g;
    std::optional<double> r_g;
    std::optional<double> W;         // m
    std::optional<double> Lambda_g;  // m
    std::optional<double> Lambda_i;  // m
    std::optional<double> N_i;

    bool operator==(const GratingGeometry&) const = default;
};

// SAW cavity and bath. All frequencies and rates are ordinary frequencies (Hz).
struct DeviceParams {
    double v_s = 3979.0;                 // m/s, 128° Y-Z LiNbO3 Rayleigh wave
    double f_0 = 4.0e9;                  // Hz
    double L_c_in_wavelengths = 100.0;
    int N_modes = 11;
    double gamma_t = 6.2e3;              // Hz, grating transmission
    double gamma_d_coeff = 1.42e6;       // Hz, gamma_d(f) = c_d^2 / f
    double gamma_i_peak = 0.5e6;         // Hz, IDT coupling peak
    double gamma_i_width_factor = 31.415926535897932;  // 10π
    double T_bath = 0.01;                // K
    std::vector<double> f_q_defaults;    // Hz
    PositionPhase position_phase = PositionPhase::Center;
    GratingGeometry geometry;

    double lambda_0() const { return v_s / f_0; }
    double cavity_length() const { return L_c_in_wavelengths * lambda_0(); }
    double f_fsr() const { return v_s / (2.0 * cavity_length()); }

    bool operator==(const DeviceParams&) const = default;
};

// Throws ValidationError naming the first violated key.
void validate(const DeviceParams& params);

struct Mode {
    int index = 0;         // m
    double f = 0.0;        // Hz
    double k = 0.0;        // rad/m
    double gamma = 0.0;    // Hz
    double n_th = 0.0;

    double wavelength() const;
};

// Modes ordered by ascending index m, uniform spacing f_fsr.
class ModeSet {
public:
    ModeSet() = default;
    ModeSet(std::vector<Mode> modes, double f_fsr, double k_0);

    const std::vector<Mode>& modes() const { return modes_; }
    std::size_t size() const { return modes_.size(); }
    bool empty() const { return modes_.empty(); }
    const Mode& operator[](std::size_t i) const { return modes_[i]; }
    auto begin() const { return modes_.begin(); }
    auto end() const { return modes_.end(); }

    // Throws std::out_of_range if m is not in the set.
    const Mode& by_index(int m) const;
    bool contains(int m) const;

    double f_fsr() const { return f_fsr_; }
    double k_0() const { return k_0_; }

    // Subset keeping only the listed mode indices (in ascending m order).
    ModeSet select(const std::vector<int>& indices) const;
    // The `count` modes whose frequency is closest to `f`, ties broken
    // towards lower m. Returned in ascending m order.
    ModeSet nearest(double f, std::size_t count) const;

private:
    std::vector<Mode> modes_;
    double f_fsr_ = 0.0;
    double k_0_ = 0.0;
};

ModeSet derive_modes(const DeviceParams& params);

// gamma_t + c_d^2/f + gamma_i_peak * sinc^2(width * (f - f_0) / f_0)
double phonon_decay_rate(const DeviceParams& params, double f);

// Bose-Einstein occupation; exactly 0 at T = 0.
double thermal_occupation(double f, double T);

// sin(x)/x with sinc(0) = 1.
double sinc(double x);

// Microscopic skyrmion parameters. Carried for provenance; never enters any
// computation (g_0 is a direct input of QubitSpec).
struct SkyrmionMicroParams {
    double S_bar = 10.0;
    double a = 0.5e-9;       // m
    double K_z = 0.3e-3;     // eV
    double H_z = 0.1;        // T
    double H_perp_x = 0.0;   // T/m
    double P_E = 0.2;        // C/m
    double J_1 = 3.0e-3;     // eV
    double E_zp = 0.0;       // V/m, unknown

    bool operator==(const SkyrmionMicroParams&) const = default;
};

}  // namespace phonobus
