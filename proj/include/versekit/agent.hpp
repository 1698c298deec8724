#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "versekit/errors.hpp"
#include "versekit/map.hpp"

namespace versekit {

struct AgentParams {
    std::map<std::string, double> values;

    double get(const std::string& key, double fallback) const {
        const auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
};

// Uniformly sampled trajectory of one agent's continuous state. Times start
// at 0 and advance by dt up to the requested duration.
struct Trace {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;

    const std::vector<double>& last() const { return states.back(); }
};

struct FlowRequest {
    std::vector<double> x0;
    std::string tactical;
    std::string track;
    const MapDef* map = nullptr;
    double duration = 0.0;
    double dt = 0.05;
    AgentParams params;
};

using FlowFn = std::function<Trace(const FlowRequest&)>;

// Decomposition function d(x, xhat, w, what) for mixed-monotone reachability
// of uncertain white-box dynamics.
using DecompositionFn = std::function<std::vector<double>(
    const std::vector<double>&, const std::vector<double>&, const std::vector<double>&,
    const std::vector<double>&)>;

// A registered agent type: the state schema and a black-box flow simulator.
// Any simulator satisfying the Trace contract can be plugged in.
struct AgentType {
    std::string name;
    std::vector<std::string> fields;
    int workspace_dims = 2;  // leading fields that live in the map workspace
    FlowFn flow;
    DecompositionFn decomposition;  // optional; enables the mixed-monotone engine
};

namespace flow_detail {

inline double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a < -M_PI) a += 2.0 * M_PI;
    return a;
}

template <typename Deriv>
Trace integrate_rk4(const FlowRequest& req, Deriv deriv) {
    if (!(req.duration > 0.0) || !(req.dt > 0.0) || req.dt > req.duration) {
        throw Error(ErrorCode::Flow, "flow requires 0 < dt <= duration");
    }
    const int steps = static_cast<int>(std::llround(req.duration / req.dt));
    if (std::abs(steps * req.dt - req.duration) > 1e-9) {
        throw Error(ErrorCode::Flow, "flow duration must be an integer multiple of dt");
    }
    Trace trace;
    trace.dt = req.dt;
    trace.times.reserve(static_cast<std::size_t>(steps) + 1);
    trace.states.reserve(static_cast<std::size_t>(steps) + 1);
    std::vector<double> x = req.x0;
    trace.times.push_back(0.0);
    trace.states.push_back(x);
    const std::size_t n = x.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (int s = 0; s < steps; ++s) {
        const double t = s * req.dt;
        const double h = req.dt;
        deriv(t, x, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        deriv(t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        deriv(t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
        deriv(t + h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!std::isfinite(x[i])) {
                throw Error(ErrorCode::Flow, "non-finite state at integration step " +
                                                 std::to_string(s + 1));
            }
        }
        trace.times.push_back((s + 1) * req.dt);
        trace.states.push_back(x);
    }
    return trace;
}

// 4-d kinematic bicycle with Stanley steering toward the active track.
//   xdot = v cos(theta), ydot = v sin(theta),
//   thetadot = v/L tan(delta), vdot = k_v (v_cmd - v),
//   delta = psi_e + atan(k_s * e_ct / (v + eps_v)) clamped to +/- delta_max.
// e_ct is positive when the track lies left of the vehicle.
inline Trace car_flow(const FlowRequest& req) {
    if (req.x0.size() != 4) throw Error(ErrorCode::Flow, "car state must be 4-dimensional");
    const double wheelbase = req.params.get("wheelbase", 1.75);
    const double k_steer = req.params.get("k_steer", 0.45);
    const double delta_max = req.params.get("delta_max", 30.0 * M_PI / 180.0);
    const double k_v = req.params.get("k_v", 1.0);
    const double eps_v = req.params.get("eps_v", 0.1);
    const double v_cmd = req.params.get("speed", req.x0[3]);

    const Track track = req.map->track_for(Vec3{req.x0[0], req.x0[1], 0.0}, req.track);
    double hint = 0.0;
    auto deriv = [&, track](double, const std::vector<double>& x, std::vector<double>& out) {
        const Track::Frame f = track.frame_at(Vec3{x[0], x[1], 0.0}, hint);
        hint = f.arc;
        const double psi_track = std::atan2(f.tangent.y, f.tangent.x);
        const double psi_e = wrap_angle(psi_track - x[2]);
        const double e_ct = -f.lateral;
        double delta = psi_e + std::atan(k_steer * e_ct / (std::abs(x[3]) + eps_v));
        delta = std::clamp(delta, -delta_max, delta_max);
        out[0] = x[3] * std::cos(x[2]);
        out[1] = x[3] * std::sin(x[2]);
        out[2] = x[3] / wheelbase * std::tan(delta);
        out[3] = k_v * (v_cmd - x[3]);
    };
    return integrate_rk4(req, deriv);
}

// 6-d double integrator tracking a point moving along the active track at
// constant speed: a = k_p (target - p) + k_d (v_ref - v), ||a|| <= a_max.
inline Trace drone_flow(const FlowRequest& req) {
    if (req.x0.size() != 6) throw Error(ErrorCode::Flow, "drone state must be 6-dimensional");
    const double k_p = req.params.get("k_p", 2.0);
    const double k_d = req.params.get("k_d", 3.0);
    const double a_max = req.params.get("a_max", 10.0);
    const double speed = req.params.get("speed", 1.0);

    const Track track = req.map->track_for(Vec3{req.x0[0], req.x0[1], req.x0[2]}, req.track);
    auto deriv = [&, track](double t, const std::vector<double>& x, std::vector<double>& out) {
        const double along = speed * t;
        const Vec3 target = track.point_at(along);
        const Vec3 v_ref = track.tangent_at(along) * speed;
        double ax = k_p * (target.x - x[0]) + k_d * (v_ref.x - x[3]);
        double ay = k_p * (target.y - x[1]) + k_d * (v_ref.y - x[4]);
        double az = k_p * (target.z - x[2]) + k_d * (v_ref.z - x[5]);
        const double norm = std::sqrt(ax * ax + ay * ay + az * az);
        if (norm > a_max) {
            const double s = a_max / norm;
            ax *= s;
            ay *= s;
            az *= s;
        }
        out[0] = x[3];
        out[1] = x[4];
        out[2] = x[5];
        out[3] = ax;
        out[4] = ay;
        out[5] = az;
    };
    return integrate_rk4(req, deriv);
}

// 1-d two-mode system: xdot = +1 in mode Inc, -1 in mode Dec.
inline Trace line1d_flow(const FlowRequest& req) {
    if (req.x0.size() != 1) throw Error(ErrorCode::Flow, "line1d state must be 1-dimensional");
    const double rate = req.params.get("rate", 1.0);
    const double sign = req.tactical == "Dec" ? -1.0 : 1.0;
    auto deriv = [&](double, const std::vector<double>&, std::vector<double>& out) {
        out[0] = sign * rate;
    };
    return integrate_rk4(req, deriv);
}

// 2-d uncertain benchmark system (nominal w = 0 flow):
//   x1dot = x1 (1.1 + w1 - x1 - 0.1 x2)
//   x2dot = x2 (4 + w2 - 3 x1 - x2)
inline Trace coupled2d_flow(const FlowRequest& req) {
    if (req.x0.size() != 2) {
        throw Error(ErrorCode::Flow, "coupled2d state must be 2-dimensional");
    }
    auto deriv = [](double, const std::vector<double>& x, std::vector<double>& out) {
        out[0] = x[0] * (1.1 - x[0] - 0.1 * x[1]);
        out[1] = x[1] * (4.0 - 3.0 * x[0] - x[1]);
    };
    return integrate_rk4(req, deriv);
}

inline std::vector<double> coupled2d_decomposition(const std::vector<double>& x,
                                                   const std::vector<double>& xhat,
                                                   const std::vector<double>& w,
                                                   const std::vector<double>&) {
    return {x[0] * (1.1 + w[0] - x[0] - 0.1 * xhat[1]),
            x[1] * (4.0 + w[1] - 3.0 * xhat[0] - x[1])};
}

}  // namespace flow_detail

class AgentTypeRegistry {
  public:
    static AgentTypeRegistry& instance() {
        static AgentTypeRegistry reg;
        return reg;
    }

    void register_type(AgentType type) { types_[type.name] = std::move(type); }

    const AgentType& get(const std::string& name) const {
        const auto it = types_.find(name);
        if (it == types_.end()) {
            throw Error(ErrorCode::Config, "unknown agent type '" + name + "'");
        }
        return it->second;
    }

    bool has(const std::string& name) const { return types_.count(name) > 0; }

  private:
    AgentTypeRegistry() {
        register_type(AgentType{"car",
                                {"x", "y", "theta", "v"},
                                2,
                                flow_detail::car_flow,
                                nullptr});
        register_type(AgentType{"drone",
                                {"px", "py", "pz", "vx", "vy", "vz"},
                                3,
                                flow_detail::drone_flow,
                                nullptr});
        register_type(AgentType{"line1d", {"x"}, 1, flow_detail::line1d_flow, nullptr});
        register_type(AgentType{"coupled2d",
                                {"x1", "x2"},
                                2,
                                flow_detail::coupled2d_flow,
                                flow_detail::coupled2d_decomposition});
    }

    std::map<std::string, AgentType> types_;
};

// Deterministic black-box flow: fixed-step RK4 of the agent's closed-loop
// dynamics along track_for(x0, mode.track).
inline Trace flow(const AgentType& type, const FlowRequest& req) { return type.flow(req); }

}  // namespace versekit
