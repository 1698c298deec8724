#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "versekit/agent.hpp"
#include "versekit/errors.hpp"

namespace versekit {

// Time-indexed state envelope [lower(t), upper(t)].
struct EnvelopeTrace {
    std::vector<double> times;
    std::vector<std::vector<double>> lower;
    std::vector<std::vector<double>> upper;
};

// Reachability for white-box uncertain dynamics xdot = f(x, w), w in
// [w_lo, w_hi], via a user-supplied decomposition function d(x, xhat, w,
// what). Integrates the 2n-dimensional embedding
//   [xl_dot; xu_dot] = [d(xl, wl, xu, wu); d(xu, wu, xl, wl)]
// from <xl = x_lo, xu = x_hi>; the true reachable set at time T is contained
// in [xl(T), xu(T)].
inline EnvelopeTrace decomposition_post(const DecompositionFn& d,
                                        const std::vector<double>& x_lo,
                                        const std::vector<double>& x_hi,
                                        const std::vector<double>& w_lo,
                                        const std::vector<double>& w_hi, double duration,
                                        double dt) {
    if (!d) throw Error(ErrorCode::Engine, "decomposition function is empty");
    if (x_lo.size() != x_hi.size()) {
        throw Error(ErrorCode::Engine, "decomposition: state bound dimensions differ");
    }
    if (!(duration > 0.0) || !(dt > 0.0) || dt > duration) {
        throw Error(ErrorCode::Engine, "decomposition requires 0 < dt <= duration");
    }
    const std::size_t n = x_lo.size();
    const int steps = static_cast<int>(std::llround(duration / dt));
    std::vector<double> lo = x_lo;
    std::vector<double> hi = x_hi;

    EnvelopeTrace env;
    env.times.reserve(static_cast<std::size_t>(steps) + 1);
    env.lower.reserve(static_cast<std::size_t>(steps) + 1);
    env.upper.reserve(static_cast<std::size_t>(steps) + 1);
    env.times.push_back(0.0);
    env.lower.push_back(lo);
    env.upper.push_back(hi);

    const auto deriv = [&](const std::vector<double>& l, const std::vector<double>& h,
                           std::vector<double>& dl, std::vector<double>& dh) {
        dl = d(l, w_lo, h, w_hi);
        dh = d(h, w_hi, l, w_lo);
        if (dl.size() != n || dh.size() != n) {
            throw Error(ErrorCode::Engine, "decomposition function returned wrong dimension");
        }
    };

    std::vector<double> k1l(n), k1h(n), k2l(n), k2h(n), k3l(n), k3h(n), k4l(n), k4h(n);
    std::vector<double> tl(n), th(n);
    for (int s = 0; s < steps; ++s) {
        deriv(lo, hi, k1l, k1h);
        for (std::size_t i = 0; i < n; ++i) {
            tl[i] = lo[i] + 0.5 * dt * k1l[i];
            th[i] = hi[i] + 0.5 * dt * k1h[i];
        }
        deriv(tl, th, k2l, k2h);
        for (std::size_t i = 0; i < n; ++i) {
            tl[i] = lo[i] + 0.5 * dt * k2l[i];
            th[i] = hi[i] + 0.5 * dt * k2h[i];
        }
        deriv(tl, th, k3l, k3h);
        for (std::size_t i = 0; i < n; ++i) {
            tl[i] = lo[i] + dt * k3l[i];
            th[i] = hi[i] + dt * k3h[i];
        }
        deriv(tl, th, k4l, k4h);
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] += dt / 6.0 * (k1l[i] + 2 * k2l[i] + 2 * k3l[i] + k4l[i]);
            hi[i] += dt / 6.0 * (k1h[i] + 2 * k2h[i] + 2 * k3h[i] + k4h[i]);
            if (!std::isfinite(lo[i]) || !std::isfinite(hi[i])) {
                throw Error(ErrorCode::Engine,
                            "non-finite envelope at step " + std::to_string(s + 1));
            }
        }
        env.times.push_back((s + 1) * dt);
        env.lower.push_back(lo);
        env.upper.push_back(hi);
    }
    return env;
}

}  // namespace versekit
