#pragma once

#include <string>
#include <vector>

#include "versekit/errors.hpp"
#include "versekit/geometry.hpp"

namespace versekit {

// Sensor function S: what each agent observes about the others. The
// transparent sensor is the identity. The noisy sensor adds bounded position
// noise, which enters only guard evaluation, as a bloat of the other agents'
// observed position sets; point observations (simulation) are exact.
struct SensorDef {
    enum class Kind { Transparent, Noisy };

    Kind kind = Kind::Transparent;
    std::vector<double> position_noise;  // per workspace dimension, meters

    static SensorDef transparent() { return SensorDef{}; }

    static SensorDef noisy(std::vector<double> noise) {
        for (const double n : noise) {
            if (n < 0.0) throw Error(ErrorCode::Config, "sensor noise bounds must be >= 0");
        }
        SensorDef s;
        s.kind = Kind::Noisy;
        s.position_noise = std::move(noise);
        return s;
    }

    bool is_transparent() const {
        if (kind == Kind::Transparent) return true;
        for (const double n : position_noise) {
            if (n > 0.0) return false;
        }
        return true;
    }

    // Point observation: identity for both sensor kinds.
    std::vector<std::vector<double>> observe(std::size_t /*self*/,
                                             const std::vector<std::vector<double>>& states) const {
        return states;
    }

    // Set observation for guard checking: the ego set is exact; every other
    // agent's position dimensions are bloated by the noise bounds.
    std::vector<HyperRect> observe_sets(std::size_t self,
                                        const std::vector<HyperRect>& rects) const {
        if (is_transparent()) return rects;
        std::vector<HyperRect> out;
        out.reserve(rects.size());
        for (std::size_t i = 0; i < rects.size(); ++i) {
            if (i == self) {
                out.push_back(rects[i]);
                continue;
            }
            std::vector<double> eps(rects[i].size(), 0.0);
            for (std::size_t d = 0; d < position_noise.size() && d < eps.size(); ++d) {
                eps[d] = position_noise[d];
            }
            out.push_back(bloat(rects[i], eps));
        }
        return out;
    }
};

}  // namespace versekit
