#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "phonobus/error.hpp"

namespace phonobus {

struct StepControl {
    double rtol = 1e-8;
    double atol = 1e-10;
    double initial_step = 0.0;  // 0: automatic
    double min_step = 0.0;      // 0: 1e-14 * |t_end - t_start| floor
    double max_step = 0.0;      // 0: unlimited
    std::size_t max_steps = 50'000'000;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_calls = 0;
};

// Dormand-Prince 5(4) with FSAL stage reuse and a PI step-size controller.
// `State` is any dense Eigen type; the right-hand side is called as
// rhs(t, y, dydt).
template <typename State>
class DormandPrince54 {
public:
    explicit DormandPrince54(StepControl control = {}) : control_(control) {}

    const StepStats& stats() const { return stats_; }
    // Forget the cached derivative (call after modifying the state externally).
    void reset() { have_k1_ = false; }
    double last_step() const { return h_; }

    // Advances y from t to t_end exactly (the last step is clipped).
    template <typename Rhs>
    void integrate(Rhs&& rhs, double& t, State& y, double t_end) {
        if (t_end == t) return;
        const double span = t_end - t;
        const double dir = span > 0 ? 1.0 : -1.0;
        const double h_min = control_.min_step > 0 ? control_.min_step
                                                   : 1e-14 * std::max(std::abs(span), std::abs(t));
        if (!have_k1_ || k1_t_ != t) {
            k1_.resizeLike(y);
            rhs(t, y, k1_);
            ++stats_.rhs_calls;
            have_k1_ = true;
            k1_t_ = t;
        }
        if (h_ <= 0) h_ = control_.initial_step > 0 ? control_.initial_step : initial_step(rhs, t, y, span);

        while (dir * (t_end - t) > 0) {
            double h = std::min(h_, std::abs(t_end - t));
            if (control_.max_step > 0) h = std::min(h, control_.max_step);
            const bool last = h >= std::abs(t_end - t);
            if (h < h_min && !last) {
                throw StepSizeUnderflow("step size underflow at t = " + std::to_string(t));
            }
            if (stats_.accepted + stats_.rejected >= control_.max_steps) {
                throw StepSizeUnderflow("step budget exhausted at t = " + std::to_string(t));
            }
            const double hs = dir * h;
            const double err = attempt(rhs, t, y, hs);
            if (err <= 1.0) {
                ++stats_.accepted;
                t = last ? t_end : t + hs;
                y.swap(y_new_);
                k1_.swap(k7_);
                k1_t_ = t;
                const double fac = err == 0.0 ? kMaxGrow
                                              : std::clamp(kSafety * std::pow(err, -kAlpha) *
                                                               std::pow(err_prev_, kBeta),
                                                           kMinShrink, kMaxGrow);
                err_prev_ = std::max(err, 1e-4);
                // Keep the natural step when clipped by an output boundary.
                if (!last || fac < 1.0) h_ = h * fac;
            } else {
                ++stats_.rejected;
                h_ = h * std::max(kMinShrink, kSafety * std::pow(err, -0.2));
            }
        }
    }

private:
    static constexpr double kSafety = 0.9;
    static constexpr double kMinShrink = 0.2;
    static constexpr double kMaxGrow = 5.0;
    static constexpr double kAlpha = 0.7 / 5.0;
    static constexpr double kBeta = 0.4 / 5.0;

    double error_norm(const State& y0, const State& y1, const State& e) const {
        const auto scale = (control_.atol +
                            control_.rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array());
        const double n = (e.cwiseAbs().array() / scale).square().mean();
        return std::sqrt(n);
    }

    template <typename Rhs>
    double initial_step(Rhs& rhs, double t, const State& y, double span) {
        // Hairer, Norsett & Wanner, algorithm II.4 "starting step size".
        const auto sc = (control_.atol + control_.rtol * y.cwiseAbs().array()).eval();
        const double d0 = std::sqrt((y.cwiseAbs().array() / sc).square().mean());
        const double d1 = std::sqrt((k1_.cwiseAbs().array() / sc).square().mean());
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * std::abs(span) : 0.01 * d0 / d1;
        h0 = std::min(h0, std::abs(span));
        State y1 = y + (span > 0 ? h0 : -h0) * k1_;
        State f1;
        f1.resizeLike(y);
        rhs(t + (span > 0 ? h0 : -h0), y1, f1);
        ++stats_.rhs_calls;
        const double d2 = std::sqrt(((f1 - k1_).cwiseAbs().array() / sc).square().mean()) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6 * std::abs(span), h0 * 1e-3)
                                      : std::pow(0.01 / dm, 0.2);
        return std::min({100.0 * h0, h1, std::abs(span)});
    }

    template <typename Rhs>
    double attempt(Rhs& rhs, double t, const State& y, double h) {
        // Dormand & Prince (1980) coefficients.
        constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                         a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                         a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                         b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                         e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        tmp_ = y + h * a21 * k1_;
        rhs(t + c2 * h, tmp_, k2_);
        tmp_ = y + h * (a31 * k1_ + a32 * k2_);
        rhs(t + c3 * h, tmp_, k3_);
        tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        rhs(t + c4 * h, tmp_, k4_);
        tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        rhs(t + c5 * h, tmp_, k5_);
        tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        rhs(t + h, tmp_, k6_);
        y_new_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        rhs(t + h, y_new_, k7_);
        stats_.rhs_calls += 6;
        err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        return error_norm(y, y_new_, err_);
    }

    StepControl control_;
    StepStats stats_;
    double h_ = 0.0;
    double err_prev_ = 1e-4;
    bool have_k1_ = false;
    double k1_t_ = 0.0;
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_, err_;
};

}  // namespace phonobus
